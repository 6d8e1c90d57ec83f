#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mlmimo/config.hpp"
#include "mlmimo/neuralnet.hpp"

namespace mlmimo {

inline constexpr const char* kSnrDefinition = "SNR_dB=10*log10(Es*||G||_F^2/(n*sigma^2))";

// Decides a batch of received rows. Implementations must be safe to call
// concurrently; any randomness comes from `rng`.
class Detector {
 public:
  virtual ~Detector() = default;
  virtual std::string name() const = 0;
  virtual IntMatrix detect(const Matrix& y, double sigma, RngStream& rng) const = 0;
};

// Names: zf, mmse, mld, parallelotope, dnn:<checkpoint>, twin:<manifest>.
// Relative paths resolve against base_dir.
std::unique_ptr<Detector> make_detector(const std::string& spec, const ChannelModel& model, const Constellation& c,
                                        const std::filesystem::path& base_dir = {});
std::unique_ptr<Detector> make_network_detector(std::string name, DetectorNetwork net, const ChannelModel& model,
                                                const Constellation& c);
std::unique_ptr<Detector> make_twin_detector(std::string name, DetectorNetwork net_a, DetectorNetwork net_b,
                                             const ChannelModel& model, const Constellation& c);

struct WilsonInterval {
  double low = 0.0;
  double high = 1.0;
};

WilsonInterval wilson_interval(std::int64_t successes, std::int64_t trials, double z = 1.959963984540054);

struct EvalRow {
  std::string detector;
  double snr_db = 0.0;
  std::int64_t trials = 0;
  std::int64_t symbol_errors = 0;
  std::int64_t vector_errors = 0;
  double ser = 0.0;
  double vler = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::int64_t bayes_symbol_errors = 0;  // disagreements with the sphere decoder
  double bayes_ser = 0.0;
  std::uint64_t seed = 0;
  std::string channel_id;
};

struct EvalReport {
  std::vector<std::pair<std::string, std::string>> metadata;  // written as "# key=value"
  std::vector<EvalRow> rows;

  void append(const EvalReport& other);
  std::string to_csv() const;
  void write_csv(const std::filesystem::path& path) const;
};

struct EvalOptions {
  std::vector<double> snr_db;
  std::int64_t min_errors = 100;       // vector errors
  std::int64_t max_trials = 10000000;
  std::uint64_t seed = 1;
  int chunk_trials = 1000;
  int workers = 0;                     // 0: hardware concurrency
  bool bayes_column = true;
};

// Monte Carlo error rates. Trials are drawn in chunks whose streams depend
// only on (seed, SNR index, chunk index), so any two detectors evaluated with
// the same options see identical (z, η) and the result does not depend on
// the worker count.
EvalReport evaluate(const Detector& detector, const ChannelModel& model, const Constellation& c,
                    const EvalOptions& options);

struct PairedComparison {
  double snr_db = 0.0;
  std::int64_t symbols = 0;
  std::int64_t errors_a = 0;
  std::int64_t errors_b = 0;
  std::int64_t only_a_wrong = 0;
  std::int64_t only_b_wrong = 0;
  // One-sided exact sign-test p-values on the discordant symbols.
  double p_a_worse = 1.0;
  double p_b_worse = 1.0;
};

// One-sided P(X ≥ k) for X ~ Binomial(n, 1/2).
double sign_test_upper_tail(std::int64_t k, std::int64_t n);

// Both detectors on the same fixed number of trials (no early stop).
std::vector<PairedComparison> compare_paired(const Detector& a, const Detector& b, const ChannelModel& model,
                                             const Constellation& c, const std::vector<double>& snr_db,
                                             std::int64_t trials, std::uint64_t seed);

struct ExperimentPreset {
  std::string name;
  int iterations = 0;  // 0: ceil(1.25·n)
  int xi_per_n = 4;
  int batch_size = 200;
  OutputHead head = OutputHead::multilevel;
  bool twin = false;
  bool needs_channel_file = false;
};

const std::vector<ExperimentPreset>& experiment_presets();
const ExperimentPreset& find_preset(const std::string& name);
NetworkShape preset_shape(const ExperimentPreset& preset, int n);

struct ExperimentResult {
  std::filesystem::path channel;
  std::filesystem::path report;
  std::filesystem::path params;
  std::filesystem::path plot;
  std::vector<std::filesystem::path> checkpoints;
  std::vector<std::filesystem::path> training_logs;
  double calibrated_snr_db = 0.0;
  ParameterCount parameters;  // summed over all trained networks
  EvalReport evaluation;
};

// Keys: preset (required), channel, n, M, seed, cond_min, cond_max,
// target_ser, total_steps, batch_size, learning_rate, validate_every,
// validation_samples, snr_offsets, min_errors, max_trials, record_timing,
// plus K / xi_size / head overrides. Paths are relative to workdir.
ExperimentResult run_experiment(const KeyValueConfig& cfg, const std::filesystem::path& workdir);
ExperimentResult run_experiment(const std::filesystem::path& config_file);

}  // namespace mlmimo
