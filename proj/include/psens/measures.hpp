#ifndef PSENS_MEASURES_HPP
#define PSENS_MEASURES_HPP

#include <Eigen/Dense>

#include <string>
#include <string_view>

namespace psens {

// eta: variance-based, delta: L1 density distance, beta: Kolmogorov-Smirnov.
enum class MeasureKind { Eta, Delta, Beta };

enum class Route { PdfBased, CdfBased };

std::string_view to_string(MeasureKind m);
MeasureKind parse_measure(std::string_view text);

struct PointEstimate {
  Eigen::Index input_index = 0;
  MeasureKind measure = MeasureKind::Eta;
  Route route = Route::PdfBased;
  double value = 0.0;
  Eigen::Index bins = 0;
  // eta above 1 is reported unclamped and flagged.
  bool exceeds_one = false;
};

}  // namespace psens

#endif  // PSENS_MEASURES_HPP
