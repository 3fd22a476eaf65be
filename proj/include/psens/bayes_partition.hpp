#ifndef PSENS_BAYES_PARTITION_HPP
#define PSENS_BAYES_PARTITION_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <string_view>
#include <optional>
#include <variant>

#include "psens/measures.hpp"
#include "psens/numerics.hpp"
#include "psens/partition.hpp"
#include "psens/rng.hpp"
#include "psens/sample.hpp"

namespace psens {

// Bb draws synthetic outputs i.i.d. from the DP posterior mean; Pu draws them
// jointly from the posterior through the Polya urn.
enum class Scheme { Bb, Pu };

std::string_view to_string(Scheme s);

struct BetaBase {
  double a = 1.0;
  double b = 1.0;
};

struct NormalBase {
  double mean = 0.0;
  double sd = 1.0;
};

// Base measure G of the within-bin Dirichlet process.
class BaseMeasure {
 public:
  using Law = std::variant<BetaBase, NormalBase>;

  BaseMeasure(BetaBase b) : BaseMeasure(Law(b)) {}     // NOLINT(google-explicit-constructor)
  BaseMeasure(NormalBase n) : BaseMeasure(Law(n)) {}   // NOLINT(google-explicit-constructor)
  explicit BaseMeasure(Law law);

  // Inverse-cdf draw.
  double draw(Rng& rng) const;
  // Exact quantile.
  double quantile(double p) const;
  const Law& law() const { return law_; }

 private:
  struct QuantileTable;

  Law law_;
  // Beta quantiles are costly; the body of the inverse cdf is served by cubic
  // Hermite interpolation between exact knots (error far below 1e-9).
  std::shared_ptr<const QuantileTable> table_;
};

struct DpSpec {
  double alpha = 1.0;
  BaseMeasure base = NormalBase{};
};

// alpha = 0.1 n / M; G = method-of-moments Beta when every output lies in
// (0, 1) and the moments admit one, otherwise Normal(ybar, s_y^2).
DpSpec default_dp_spec(const Sample& sample, Eigen::Index bins);

struct Augmentation {
  Eigen::VectorXd values;       // target_size - n_m synthetic outputs
  Eigen::Index base_draws = 0;  // how many came from G
};

// Each synthetic value comes from G with probability alpha / (alpha + n_m),
// otherwise it is a uniform pick among the bin's own outputs.
Augmentation bb_augment_traced(const Eigen::Ref<const Eigen::VectorXd>& bin_values,
                               Eigen::Index target_size, const DpSpec& spec, Rng& rng);
Eigen::VectorXd bb_augment(const Eigen::Ref<const Eigen::VectorXd>& bin_values,
                           Eigen::Index target_size, const DpSpec& spec, std::uint64_t seed);

// Polya urn: after j values (originals plus synthetic so far) the next one
// comes from G with probability alpha / (alpha + j), otherwise it repeats a
// uniformly chosen earlier value.
Augmentation pu_augment_traced(const Eigen::Ref<const Eigen::VectorXd>& bin_values,
                               Eigen::Index target_size, const DpSpec& spec, Rng& rng);
Eigen::VectorXd pu_augment(const Eigen::Ref<const Eigen::VectorXd>& bin_values,
                           Eigen::Index target_size, const DpSpec& spec, std::uint64_t seed);

struct PosteriorDraws {
  Eigen::Index input_index = 0;
  MeasureKind measure = MeasureKind::Eta;
  Scheme scheme = Scheme::Bb;
  Route route = Route::PdfBased;
  Eigen::Index bins = 0;
  Eigen::VectorXd draws;

  Eigen::Index replicates() const { return draws.size(); }
  DrawSummary summary() const { return summarize_draws(draws); }
};

inline constexpr int kDefaultPartitionReplicates = 100;

// Every replicate augments each bin to n outputs, then evaluates the
// given-data formula with marginal quantities from the original outputs and
// conditional quantities from the extended bins. Eta uses bin means, Beta the
// Kolmogorov-Smirnov distance, Delta the halved KDE L1 distance (PdfBased) or
// the Scheffe mass difference (CdfBased, the default).
PosteriorDraws estimate_bayes_partition(const Sample& sample, const Partition& partition,
                                        const DpSpec& spec, MeasureKind measure, Scheme scheme,
                                        int replicates, std::uint64_t seed,
                                        Route delta_route = Route::CdfBased);

}  // namespace psens

#endif  // PSENS_BAYES_PARTITION_HPP
