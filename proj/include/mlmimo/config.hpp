#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mlmimo/training.hpp"

namespace mlmimo {

// Flat "key = value" text; '#' starts a comment, blank lines are ignored.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(const std::string& text, const std::string& source = "<config>");
  static KeyValueConfig load(const std::filesystem::path& path);

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  bool has(const std::string& key) const { return values_.count(key) != 0; }
  const std::map<std::string, std::string>& entries() const noexcept { return values_; }

  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  std::vector<double> get_double_list(const std::string& key, const std::vector<double>& fallback) const;

 private:
  std::map<std::string, std::string> values_;
  std::string source_;
};

std::vector<double> parse_double_list(const std::string& text);

// Keys: label_policy, noise_policy, train_snr_db (number or "auto"), target_ser,
// batch_size, total_steps, learning_rate, seed, init, checkpoint_path,
// log_every, validate_every, validation_samples.
TrainingConfig training_config_from(const KeyValueConfig& cfg, const std::filesystem::path& base_dir = {});

// Keys: n (taken from the channel when absent), K, xi_size, head, hidden.
NetworkShape network_shape_from(const KeyValueConfig& cfg, int n);

}  // namespace mlmimo
