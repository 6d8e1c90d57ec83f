#include "mlmimo/classic.hpp"

#include <algorithm>
#include <cmath>

namespace mlmimo {

int slice_scalar(double v, const Constellation& c) {
  const double lo = c.min_level();
  const double hi = c.max_level();
  if (v <= lo) return c.min_level();
  if (v >= hi) return c.max_level();
  // ceil(v - 1/2) rounds to nearest with exact midpoints going down.
  return static_cast<int>(std::ceil(v - 0.5));
}

IntRowVector slice(const RowVector& v, const Constellation& c) {
  IntRowVector out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) out(i) = slice_scalar(v(i), c);
  return out;
}

RowVector clamp_to_hull(const RowVector& v, const Constellation& c) {
  RowVector out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i)
    out(i) = std::clamp(v(i), static_cast<double>(c.min_level()), static_cast<double>(c.max_level()));
  return out;
}

DetectionResult zf_detect(const RowVector& y, const ChannelModel& model, const Constellation& c) {
  if (y.size() != model.n()) throw DimensionMismatch("zf_detect: received vector length mismatch");
  DetectionResult r;
  r.z_soft = y * model.g_inv();
  r.z_hat = slice(r.z_soft, c);
  return r;
}

DetectionResult mmse_detect(const RowVector& y, const ChannelModel& model, const Constellation& c, double sigma) {
  if (y.size() != model.n()) throw DimensionMismatch("mmse_detect: received vector length mismatch");
  if (!(sigma >= 0.0)) throw InvalidConfig("mmse_detect: sigma must be non-negative");
  const int n = model.n();
  DetectionResult r;
  if (sigma == 0.0) {
    r.z_soft = y * model.g_inv();
  } else {
    const double reg = sigma * sigma / c.mean_energy();
    const Matrix gram = model.gt() * model.g() + reg * Matrix::Identity(n, n);
    r.z_soft = solve(gram, y) * model.gt();
  }
  r.z_hat = slice(r.z_soft, c);
  return r;
}

double squared_distance(const RowVector& y, const IntRowVector& z, const ChannelModel& model) {
  return (y - z.cast<double>() * model.g()).squaredNorm();
}

}  // namespace mlmimo
