#include "mlmimo/channel.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>

#include "mlmimo/mld.hpp"

namespace mlmimo {

Constellation::Constellation(int level_count) : Constellation(-(level_count / 2), level_count) {}

Constellation::Constellation(int lowest_level, int level_count) : lowest_(lowest_level), count_(level_count) {
  if (level_count < 1) throw InvalidConfig("constellation needs at least one level");
}

std::vector<int> Constellation::levels() const {
  std::vector<int> out(static_cast<std::size_t>(count_));
  for (int i = 0; i < count_; ++i) out[static_cast<std::size_t>(i)] = lowest_ + i;
  return out;
}

double Constellation::mean_energy() const {
  double s = 0.0;
  for (int i = 0; i < count_; ++i) s += static_cast<double>(level(i)) * level(i);
  return s / count_;
}

ChannelModel::ChannelModel(Matrix g) : g_(std::move(g)) {
  require_square_finite(g_, "ChannelModel");
  gt_ = g_.transpose();
  ggt_ = g_ * gt_;
  g_inv_ = inverse(g_);
  qr_gt_ = qr_decompose(gt_);
}

IntRowVector sample_message(RngStream& rng, const Constellation& c, int n) {
  if (n < 1) throw DimensionMismatch("sample_message: n must be positive");
  IntRowVector z(n);
  for (int i = 0; i < n; ++i) z(i) = rng.uniform_int(c.min_level(), c.max_level());
  return z;
}

RowVector transmit(const IntRowVector& z, const ChannelModel& model, NoiseSpec noise, RngStream& rng) {
  if (z.size() != model.n()) throw DimensionMismatch("transmit: message length differs from channel dimension");
  RowVector y = z.cast<double>() * model.g();
  if (noise.sigma > 0.0)
    for (Eigen::Index i = 0; i < y.size(); ++i) y(i) += noise.sigma * rng.gaussian();
  return y;
}

NoiseSpec snr_to_sigma(double snr_db, const Constellation& c, const ChannelModel& model) {
  const double snr = std::pow(10.0, snr_db / 10.0);
  const double signal = c.mean_energy() * model.g().squaredNorm();
  return {std::sqrt(signal / (model.n() * snr))};
}

double sigma_to_snr(double sigma, const Constellation& c, const ChannelModel& model) {
  const double signal = c.mean_energy() * model.g().squaredNorm();
  return 10.0 * std::log10(signal / (model.n() * sigma * sigma));
}

ChannelModel generate_channel(RngStream& rng, int n, std::optional<ConditionRange> cond_range) {
  if (n < 2) throw DimensionMismatch("generate_channel: n must be at least 2");
  for (int attempt = 0; attempt <= kRejectionBudget; ++attempt) {
    Matrix g(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) g(i, j) = rng.gaussian();
    if (!cond_range) return ChannelModel(std::move(g));
    double cond = 0.0;
    try {
      cond = condition_number(g);
    } catch (const SingularMatrix&) {
      continue;
    }
    if (cond >= cond_range->min && cond <= cond_range->max) return ChannelModel(std::move(g));
  }
  throw RejectionBudgetExceeded("generate_channel: no matrix with condition number in range after " +
                                std::to_string(kRejectionBudget) + " rejections");
}

ChannelDiagnostics diagnostics(const ChannelModel& model) {
  const int n = model.n();
  if (n > kMaxEnumerationDimension)
    throw DimensionTooLarge("diagnostics: shortest-vector search limited to n <= 16");
  const ShortestVector sv = shortest_vector(model);
  const double det = abs_determinant(model.g());
  ChannelDiagnostics d;
  d.condition = condition_number(model.g());
  d.hermite_db = 10.0 * std::log10(sv.norm * sv.norm / std::pow(det, 2.0 / n));
  return d;
}

std::string format_diagnostics(const ChannelDiagnostics& d) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "condition=%.6g hermite_db=%.6g", d.condition, d.hermite_db);
  return buf;
}

std::string channel_id(const ChannelModel& model) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
      h ^= (v >> (8 * b)) & 0xffU;
      h *= 0x100000001b3ULL;
    }
  };
  feed(static_cast<std::uint64_t>(model.n()));
  for (Eigen::Index i = 0; i < model.g().size(); ++i) {
    std::uint64_t bits = 0;
    const double v = model.g().data()[i];
    std::memcpy(&bits, &v, sizeof bits);
    feed(bits);
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace mlmimo
