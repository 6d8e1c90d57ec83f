#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mlmimo/numerics.hpp"

namespace mlmimo {

// M consecutive integer levels. Odd M is centered on zero; even M uses
// {-M/2, ..., M/2 - 1}.
class Constellation {
 public:
  explicit Constellation(int level_count);
  Constellation(int lowest_level, int level_count);

  int size() const noexcept { return count_; }
  int min_level() const noexcept { return lowest_; }
  int max_level() const noexcept { return lowest_ + count_ - 1; }
  int level(int index) const noexcept { return lowest_ + index; }
  std::vector<int> levels() const;
  bool contains(int v) const noexcept { return v >= min_level() && v <= max_level(); }
  // Mean squared level E_s under equiprobable symbols.
  double mean_energy() const;

  friend bool operator==(const Constellation&, const Constellation&) = default;

 private:
  int lowest_;
  int count_;
};

// Quasi-static channel y = z·G + η with derived products cached at construction.
class ChannelModel {
 public:
  explicit ChannelModel(Matrix g);

  int n() const noexcept { return static_cast<int>(g_.rows()); }
  const Matrix& g() const noexcept { return g_; }
  const Matrix& gt() const noexcept { return gt_; }
  const Matrix& ggt() const noexcept { return ggt_; }
  const Matrix& g_inv() const noexcept { return g_inv_; }
  // QR of Gᵀ, so that ‖y − z·G‖ = ‖Qᵀyᵀ − R·zᵀ‖ with R upper triangular.
  const QrFactors& qr_of_gt() const noexcept { return qr_gt_; }

 private:
  Matrix g_;
  Matrix gt_;
  Matrix ggt_;
  Matrix g_inv_;
  QrFactors qr_gt_;
};

// Per-component noise standard deviation; variance N0/2 = sigma².
struct NoiseSpec {
  double sigma = 0.0;
};

IntRowVector sample_message(RngStream& rng, const Constellation& c, int n);

// y = z·G + η, η ~ N(0, sigma²·I).
RowVector transmit(const IntRowVector& z, const ChannelModel& model, NoiseSpec noise, RngStream& rng);

// SNR = E_s·‖G‖_F² / (n·sigma²), in dB.
NoiseSpec snr_to_sigma(double snr_db, const Constellation& c, const ChannelModel& model);
double sigma_to_snr(double sigma, const Constellation& c, const ChannelModel& model);

struct ConditionRange {
  double min = 0.0;
  double max = 0.0;
};

inline constexpr int kRejectionBudget = 100000;

// I.i.d. N(0,1) entries, rejection-sampled on the condition number when a range is given.
ChannelModel generate_channel(RngStream& rng, int n, std::optional<ConditionRange> cond_range = std::nullopt);

struct ChannelDiagnostics {
  double condition = 0.0;
  double hermite_db = 0.0;
};

// Condition number and 10·log10(λ1² / |det G|^(2/n)); n ≤ 16.
ChannelDiagnostics diagnostics(const ChannelModel& model);
std::string format_diagnostics(const ChannelDiagnostics& d);

// Stable identifier of the channel matrix (FNV-1a over the entries' bit patterns).
std::string channel_id(const ChannelModel& model);

}  // namespace mlmimo
