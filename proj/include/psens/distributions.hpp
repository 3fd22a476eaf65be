#ifndef PSENS_DISTRIBUTIONS_HPP
#define PSENS_DISTRIBUTIONS_HPP

#include <string>
#include <type_traits>
#include <utility>
#include <variant>

#include "psens/kde.hpp"

namespace psens {

struct NormalMarginal {
  double mean = 0.0;
  double sd = 1.0;
};

// Shape/rate parameterization, mean = shape / rate.
struct GammaMarginal {
  double shape = 1.0;
  double rate = 1.0;
};

struct UniformMarginal {
  double lo = 0.0;
  double hi = 1.0;
};

// log10(X) uniform on [log10(lo), log10(hi)].
struct LogUniformMarginal {
  double lo = 1.0;
  double hi = 10.0;
};

// Stand-in for an unknown input law (ingested data): a Gaussian KDE of the column.
struct EmpiricalMarginal {
  KernelDensity density;
};

// Known marginal law of one input, used for inverse-cdf sampling and as the
// f_X weight in the partition-free estimators.
class Marginal {
 public:
  using Law = std::variant<NormalMarginal, GammaMarginal, UniformMarginal,
                           LogUniformMarginal, EmpiricalMarginal>;

  Marginal(Law law);  // NOLINT(google-explicit-constructor)
  template <typename T>
    requires std::is_constructible_v<Law, T>
  Marginal(T law) : Marginal(Law(std::move(law))) {}  // NOLINT(google-explicit-constructor)

  double pdf(double x) const;
  double cdf(double x) const;
  double quantile(double p) const;
  double mean() const;
  double variance() const;
  std::string describe() const;

  const Law& law() const { return law_; }

 private:
  Law law_;
};

}  // namespace psens

#endif  // PSENS_DISTRIBUTIONS_HPP
