#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mlmimo/neuralnet.hpp"

namespace mlmimo {

enum class LabelPolicy { transmitted, mld };
enum class NoisePolicy { gaussian_at_snr, uniform_in_parallelotope };

std::string to_string(LabelPolicy p);
std::string to_string(NoisePolicy p);
LabelPolicy parse_label_policy(const std::string& s);
NoisePolicy parse_noise_policy(const std::string& s);

struct TrainingConfig {
  LabelPolicy label_policy = LabelPolicy::transmitted;
  NoisePolicy noise_policy = NoisePolicy::gaussian_at_snr;
  std::optional<double> train_snr_db;  // empty means "auto": calibrate to target_ser
  double target_ser = 1e-2;
  int batch_size = 200;
  std::int64_t total_steps = 1000;
  double learning_rate = 1e-3;
  std::uint64_t seed = 1;
  InitPolicy init_policy = InitPolicy::zf;
  std::filesystem::path checkpoint_path;  // empty: no checkpoint written
  int log_every = 100;
  int validate_every = 1000;
  int validation_samples = 10000;

  // Throws InvalidConfig on inconsistent settings.
  void validate() const;
};

struct LabeledSample {
  RowVector y;
  IntRowVector label;
  IntRowVector z_transmitted;
};

// Bisection on the SNR until the sphere-decoder SER over ≥ min_symbols
// symbols lies within [0.8, 1.25]·target. The same messages and unit noise
// are reused at every probe. Throws CalibrationDiverged when no bracket
// exists inside [−20, 60] dB.
double calibrate_training_snr(const ChannelModel& model, const Constellation& c, double target_ser = 1e-2,
                              std::uint64_t seed = 0, std::int64_t min_symbols = 100000);

// Symbol error rate of the sphere decoder at snr_db (against transmitted z).
double mld_symbol_error_rate(const ChannelModel& model, const Constellation& c, double snr_db, std::int64_t vectors,
                             std::uint64_t seed);

// Requires cfg.train_snr_db to be set (resolve "auto" first).
std::vector<LabeledSample> generate_batch(const TrainingConfig& cfg, const ChannelModel& model, const Constellation& c,
                                          RngStream& rng, int count);

// Same data as generate_batch, packed for the network (ẑ0 from cfg.init_policy).
Batch generate_training_batch(const TrainingConfig& cfg, const ChannelModel& model, const Constellation& c,
                              RngStream& rng, int count);

struct MislabelStats {
  std::int64_t samples = 0;
  std::int64_t symbols = 0;
  std::int64_t symbol_mismatches = 0;
  std::int64_t vector_mismatches = 0;
  double symbol_rate() const { return static_cast<double>(symbol_mismatches) / static_cast<double>(symbols); }
  double vector_rate() const { return static_cast<double>(vector_mismatches) / static_cast<double>(samples); }
};

// How often the transmitted label differs from the sphere-decoder label.
MislabelStats measure_mislabels(const ChannelModel& model, const Constellation& c, double snr_db,
                                std::int64_t samples, std::uint64_t seed);

struct TrainingLogRow {
  std::int64_t step = 0;
  double loss = 0.0;
  std::optional<double> val_ser;
  double elapsed_s = 0.0;
};

struct TrainingLog {
  std::vector<TrainingLogRow> rows;
  double train_snr_db = 0.0;
  double best_val_ser = 1.0;
  std::int64_t best_step = 0;

  // CSV "step,loss,val_ser,elapsed_s"; val_ser is blank on rows without
  // validation, elapsed_s is blank when timing is left out (reproducible output).
  std::string to_csv(bool include_timing = true) const;
  void write_csv(const std::filesystem::path& path, bool include_timing = true) const;
};

struct TrainingResult {
  DetectorNetwork net;  // best-validation parameters
  TrainingLog log;
};

// Online training: every step draws a fresh batch, then forward, loss,
// backward and an Adam update. Validation SER is measured against the sphere
// decoder on a fixed held-out set.
TrainingResult train(const TrainingConfig& cfg, const ChannelModel& model, const Constellation& c,
                     DetectorNetwork net);

// Symbol error rate of `net` against sphere-decoder labels on a fresh set.
double validation_ser(const DetectorNetwork& net, const ChannelModel& model, const Constellation& c, double snr_db,
                      int samples, std::uint64_t seed);

}  // namespace mlmimo
