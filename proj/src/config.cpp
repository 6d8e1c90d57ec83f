#include "mlmimo/config.hpp"

#include <fstream>
#include <sstream>

namespace mlmimo {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(const std::string& text, const std::string& source) {
  KeyValueConfig cfg;
  cfg.source_ = source;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw InvalidConfig(source + ":" + std::to_string(line_no) + ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw InvalidConfig(source + ":" + std::to_string(line_no) + ": empty key");
    cfg.values_[key] = trim(line.substr(eq + 1));
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidConfig("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

std::string KeyValueConfig::get_string(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw InvalidConfig(source_ + ": missing required key '" + key + "'");
  return it->second;
}

std::string KeyValueConfig::get_string(const std::string& key, const std::string& fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    std::size_t used = 0;
    const double v = std::stod(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument(it->second);
    return v;
  } catch (const std::exception&) {
    throw InvalidConfig(source_ + ": key '" + key + "' is not a number: '" + it->second + "'");
  }
}

std::int64_t KeyValueConfig::get_int(const std::string& key, std::int64_t fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const double v = get_double(key, 0.0);
  if (v != static_cast<double>(static_cast<std::int64_t>(v)))
    throw InvalidConfig(source_ + ": key '" + key + "' must be an integer");
  return static_cast<std::int64_t>(v);
}

std::uint64_t KeyValueConfig::get_u64(const std::string& key, std::uint64_t fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    std::size_t used = 0;
    const auto v = std::stoull(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument(it->second);
    return v;
  } catch (const std::exception&) {
    throw InvalidConfig(source_ + ": key '" + key + "' is not an unsigned integer");
  }
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw InvalidConfig("bad number '" + item + "' in list");
    }
  }
  return out;
}

std::vector<double> KeyValueConfig::get_double_list(const std::string& key, const std::vector<double>& fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : parse_double_list(it->second);
}

TrainingConfig training_config_from(const KeyValueConfig& cfg, const std::filesystem::path& base_dir) {
  TrainingConfig t;
  t.label_policy = parse_label_policy(cfg.get_string("label_policy", "transmitted"));
  t.noise_policy = parse_noise_policy(cfg.get_string("noise_policy", "gaussian_at_snr"));
  const std::string snr = cfg.get_string("train_snr_db", "auto");
  if (snr != "auto") t.train_snr_db = cfg.get_double("train_snr_db", 0.0);
  t.target_ser = cfg.get_double("target_ser", t.target_ser);
  t.batch_size = static_cast<int>(cfg.get_int("batch_size", t.batch_size));
  t.total_steps = cfg.get_int("total_steps", t.total_steps);
  t.learning_rate = cfg.get_double("learning_rate", t.learning_rate);
  t.seed = cfg.get_u64("seed", t.seed);
  t.init_policy = parse_init_policy(cfg.get_string("init", "zf"));
  if (cfg.has("checkpoint_path")) {
    std::filesystem::path p = cfg.get_string("checkpoint_path");
    t.checkpoint_path = p.is_absolute() ? p : base_dir / p;
  }
  t.log_every = static_cast<int>(cfg.get_int("log_every", t.log_every));
  t.validate_every = static_cast<int>(cfg.get_int("validate_every", t.validate_every));
  t.validation_samples = static_cast<int>(cfg.get_int("validation_samples", t.validation_samples));
  t.validate();
  return t;
}

NetworkShape network_shape_from(const KeyValueConfig& cfg, int n) {
  NetworkShape s;
  s.n = static_cast<int>(cfg.get_int("n", n));
  if (s.n != n) throw DimensionMismatch("config n does not match the channel dimension");
  s.iterations = static_cast<int>(cfg.get_int("K", 3));
  s.xi_size = static_cast<int>(cfg.get_int("xi_size", 4 * n));
  s.head = parse_output_head(cfg.get_string("head", "multilevel"));
  s.hidden = parse_hidden_activation(cfg.get_string("hidden", "multilevel"));
  if (s.iterations < 1 || s.xi_size < 1) throw InvalidConfig("K and xi_size must be positive");
  return s;
}

}  // namespace mlmimo
