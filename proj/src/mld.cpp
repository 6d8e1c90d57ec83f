#include "mlmimo/mld.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace mlmimo {

namespace {

constexpr long long kUnbounded = std::numeric_limits<int>::max() / 2;

// Depth-first Schnorr–Euchner enumeration of ‖ỹ − R·zᵀ‖² ≤ radius, where
// Gᵀ = QR and ỹ = Qᵀyᵀ. Leaves are re-scored with the direct metric
// ‖y − z·G‖² so the decision does not depend on rounding in the QR path; the
// pruning radius carries a small relative slack so near-ties are all visited.
class Enumerator {
 public:
  Enumerator(const RowVector& y, const ChannelModel& model, long long lo, long long hi, bool exclude_zero)
      : y_(y),
        g_(model.g()),
        r_(model.qr_of_gt().r),
        yt_(model.qr_of_gt().q.transpose() * y.transpose()),
        n_(model.n()),
        lo_(lo),
        hi_(hi),
        exclude_zero_(exclude_zero),
        z_(static_cast<std::size_t>(n_), 0),
        residual_(n_) {
    abs_slack_ = 1e-12 * (g_.squaredNorm() / n_ + y.squaredNorm() / n_);
  }

  void seed(const std::vector<long long>& candidate) {
    best_ = candidate;
    best_dist_ = direct_distance(candidate);
    update_radius();
  }

  void run() { search(n_ - 1, 0.0); }

  const std::vector<long long>& best() const { return best_; }
  double best_distance() const { return best_dist_; }

 private:
  double direct_distance(const std::vector<long long>& z) {
    residual_ = y_;
    for (int i = 0; i < n_; ++i)
      if (z[static_cast<std::size_t>(i)] != 0) residual_ -= static_cast<double>(z[static_cast<std::size_t>(i)]) * g_.row(i);
    return residual_.squaredNorm();
  }

  void update_radius() { radius_ = best_dist_ * (1.0 + 1e-9) + abs_slack_; }

  void leaf() {
    if (exclude_zero_) {
      bool all_zero = true;
      for (long long v : z_) all_zero = all_zero && v == 0;
      if (all_zero) return;
    }
    const double d = direct_distance(z_);
    if (best_.empty() || d < best_dist_ || (d == best_dist_ && z_ < best_)) {
      best_ = z_;
      best_dist_ = d;
      update_radius();
    }
  }

  void search(int k, double partial) {
    if (k < 0) {
      leaf();
      return;
    }
    double s = yt_(k);
    for (int j = k + 1; j < n_; ++j) s -= r_(k, j) * static_cast<double>(z_[static_cast<std::size_t>(j)]);
    const double rkk = r_(k, k);
    const double center = s / rkk;
    const double w = rkk * rkk;

    long long down = static_cast<long long>(std::floor(center));
    long long up = down + 1;
    bool down_ok = down >= lo_;
    bool up_ok = up <= hi_;
    if (down > hi_) {
      down = hi_;
      down_ok = true;
    }
    if (up < lo_) {
      up = lo_;
      up_ok = true;
    }
    while (down_ok || up_ok) {
      const bool take_up = !down_ok || (up_ok && (static_cast<double>(up) - center) < (center - static_cast<double>(down)));
      const long long v = take_up ? up : down;
      const double dv = static_cast<double>(v) - center;
      const double d = partial + w * dv * dv;
      if (d > radius_) {
        (take_up ? up_ok : down_ok) = false;
        continue;
      }
      z_[static_cast<std::size_t>(k)] = v;
      search(k - 1, d);
      if (take_up) {
        up_ok = ++up <= hi_;
      } else {
        down_ok = --down >= lo_;
      }
    }
  }

  const RowVector& y_;
  const Matrix& g_;
  const Matrix& r_;
  Eigen::VectorXd yt_;
  int n_;
  long long lo_;
  long long hi_;
  bool exclude_zero_;
  std::vector<long long> z_;
  std::vector<long long> best_;
  double best_dist_ = std::numeric_limits<double>::infinity();
  double radius_ = std::numeric_limits<double>::infinity();
  double abs_slack_ = 0.0;
  RowVector residual_;
};

IntRowVector to_int_row(const std::vector<long long>& v) {
  IntRowVector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = static_cast<int>(v[i]);
  return out;
}

std::vector<long long> to_vector(const IntRowVector& v) {
  std::vector<long long> out(static_cast<std::size_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) out[static_cast<std::size_t>(i)] = v(i);
  return out;
}

void require_dimension(const RowVector& y, const ChannelModel& model, const char* what) {
  if (y.size() != model.n()) throw DimensionMismatch(std::string(what) + ": received vector length mismatch");
}

}  // namespace

DetectionResult exhaustive_search(const RowVector& y, const ChannelModel& model, const Constellation& c) {
  require_dimension(y, model, "exhaustive_search");
  const int n = model.n();
  if (std::pow(static_cast<double>(c.size()), n) > kMaxExhaustiveCandidates)
    throw SearchSpaceTooLarge("exhaustive_search: M^n exceeds 1e7 candidates");
  IntRowVector z = IntRowVector::Constant(n, c.min_level());
  IntRowVector best = z;
  double best_dist = std::numeric_limits<double>::infinity();
  // Lexicographic order with the first component most significant; strict
  // improvement keeps the smallest z among exact ties.
  while (true) {
    const double d = squared_distance(y, z, model);
    if (d < best_dist) {
      best_dist = d;
      best = z;
    }
    int i = n - 1;
    while (i >= 0 && z(i) == c.max_level()) z(i--) = c.min_level();
    if (i < 0) break;
    ++z(i);
  }
  return {best, best.cast<double>()};
}

DetectionResult sphere_decode(const RowVector& y, const ChannelModel& model, const Constellation& c) {
  require_dimension(y, model, "sphere_decode");
  Enumerator e(y, model, c.min_level(), c.max_level(), false);
  e.seed(to_vector(zf_detect(y, model, c).z_hat));
  e.run();
  IntRowVector z = to_int_row(e.best());
  return {z, z.cast<double>()};
}

ShortestVector shortest_vector(const ChannelModel& model) {
  const int n = model.n();
  const RowVector origin = RowVector::Zero(n);
  Enumerator e(origin, model, -kUnbounded, kUnbounded, true);
  int shortest_row = 0;
  for (int i = 1; i < n; ++i)
    if (model.g().row(i).squaredNorm() < model.g().row(shortest_row).squaredNorm()) shortest_row = i;
  std::vector<long long> start(static_cast<std::size_t>(n), 0);
  start[static_cast<std::size_t>(shortest_row)] = 1;
  e.seed(start);
  e.run();
  return {to_int_row(e.best()), std::sqrt(e.best_distance())};
}

IntRowVector closest_vector(const RowVector& y, const ChannelModel& model) {
  require_dimension(y, model, "closest_vector");
  const RowVector coords = y * model.g_inv();
  std::vector<long long> babai(static_cast<std::size_t>(model.n()));
  for (int i = 0; i < model.n(); ++i) babai[static_cast<std::size_t>(i)] = std::llround(coords(i));
  Enumerator e(y, model, -kUnbounded, kUnbounded, false);
  e.seed(babai);
  e.run();
  return to_int_row(e.best());
}

}  // namespace mlmimo
