#include "mlmimo/training.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "mlmimo/checkpoint.hpp"
#include "mlmimo/mld.hpp"
#include "mlmimo/twin.hpp"

namespace mlmimo {

std::string to_string(LabelPolicy p) { return p == LabelPolicy::mld ? "mld" : "transmitted"; }
std::string to_string(NoisePolicy p) {
  return p == NoisePolicy::uniform_in_parallelotope ? "uniform_in_parallelotope" : "gaussian_at_snr";
}

LabelPolicy parse_label_policy(const std::string& s) {
  if (s == "transmitted") return LabelPolicy::transmitted;
  if (s == "mld") return LabelPolicy::mld;
  throw InvalidConfig("unknown label policy '" + s + "'");
}

NoisePolicy parse_noise_policy(const std::string& s) {
  if (s == "gaussian_at_snr") return NoisePolicy::gaussian_at_snr;
  if (s == "uniform_in_parallelotope") return NoisePolicy::uniform_in_parallelotope;
  throw InvalidConfig("unknown noise policy '" + s + "'");
}

void TrainingConfig::validate() const {
  if (batch_size < 1) throw InvalidConfig("batch_size must be at least 1");
  if (total_steps < 1) throw InvalidConfig("total_steps must be at least 1");
  if (!(learning_rate > 0.0)) throw InvalidConfig("learning_rate must be positive");
  if (noise_policy == NoisePolicy::uniform_in_parallelotope && label_policy != LabelPolicy::mld)
    throw InvalidConfig("uniform_in_parallelotope noise requires mld labels");
  if (train_snr_db && !std::isfinite(*train_snr_db)) throw InvalidConfig("train_snr_db must be finite");
  if (!(target_ser > 0.0 && target_ser < 1.0)) throw InvalidConfig("target_ser must lie in (0, 1)");
  if (log_every < 1) throw InvalidConfig("log_every must be at least 1");
  if (validate_every < 0 || validation_samples < 0) throw InvalidConfig("validation settings must be non-negative");
}

namespace {

std::int64_t count_symbol_errors(const IntRowVector& a, const IntRowVector& b) {
  return (a.array() != b.array()).count();
}

struct RawBatch {
  IntMatrix z;
  Matrix y;
  IntMatrix labels;
};

RawBatch draw(const TrainingConfig& cfg, const ChannelModel& model, const Constellation& c, RngStream& rng,
              int count) {
  if (!cfg.train_snr_db) throw InvalidConfig("training SNR must be resolved before generating data");
  const int n = model.n();
  const double sigma = snr_to_sigma(*cfg.train_snr_db, c, model).sigma;
  RawBatch b{IntMatrix(count, n), Matrix(count, n), IntMatrix(count, n)};
  Matrix perturb(count, n);
  for (int r = 0; r < count; ++r) {
    for (int i = 0; i < n; ++i) b.z(r, i) = rng.uniform_int(c.min_level(), c.max_level());
    if (cfg.noise_policy == NoisePolicy::gaussian_at_snr) {
      for (int i = 0; i < n; ++i) perturb(r, i) = sigma * rng.gaussian();
    } else {
      for (int i = 0; i < n; ++i) perturb(r, i) = rng.uniform() - 0.5;
    }
  }
  if (cfg.noise_policy == NoisePolicy::uniform_in_parallelotope) perturb = perturb * model.g();
  b.y = b.z.cast<double>() * model.g() + perturb;
  if (cfg.label_policy == LabelPolicy::mld) {
    for (int r = 0; r < count; ++r) b.labels.row(r) = sphere_decode(b.y.row(r), model, c).z_hat;
  } else {
    b.labels = b.z;
  }
  return b;
}

struct ValidationSet {
  Matrix y;
  Matrix z0;
  IntMatrix labels;
};

ValidationSet make_validation_set(const ChannelModel& model, const Constellation& c, double snr_db, int samples,
                                  InitPolicy init, std::uint64_t seed) {
  TrainingConfig vcfg;
  vcfg.train_snr_db = snr_db;
  vcfg.label_policy = LabelPolicy::mld;
  RngStream rng(seed, 0x76616c6964ULL);
  RawBatch raw = draw(vcfg, model, c, rng, samples);
  RngStream init_rng = rng.derive(1);
  ValidationSet v{std::move(raw.y), Matrix(), std::move(raw.labels)};
  v.z0 = initial_points(init, v.y, model, c, init_rng);
  return v;
}

double score(const DetectorNetwork& net, const ChannelModel& model, const ValidationSet& v) {
  const IntMatrix d = decide(net, v.y, model, v.z0);
  return static_cast<double>((d.array() != v.labels.array()).count()) / static_cast<double>(v.labels.size());
}

}  // namespace

double mld_symbol_error_rate(const ChannelModel& model, const Constellation& c, double snr_db, std::int64_t vectors,
                             std::uint64_t seed) {
  RngStream rng(seed, 0x736572ULL);
  const NoiseSpec noise = snr_to_sigma(snr_db, c, model);
  std::int64_t errors = 0;
  for (std::int64_t t = 0; t < vectors; ++t) {
    const IntRowVector z = sample_message(rng, c, model.n());
    const RowVector y = transmit(z, model, noise, rng);
    errors += count_symbol_errors(sphere_decode(y, model, c).z_hat, z);
  }
  return static_cast<double>(errors) / static_cast<double>(vectors * model.n());
}

double calibrate_training_snr(const ChannelModel& model, const Constellation& c, double target_ser,
                              std::uint64_t seed, std::int64_t min_symbols) {
  if (!(target_ser > 0.0 && target_ser < 1.0)) throw InvalidConfig("target_ser must lie in (0, 1)");
  const int n = model.n();
  const std::int64_t vectors = (min_symbols + n - 1) / n;
  RngStream rng(seed, 0xca11b8a7eULL);
  IntMatrix z(vectors, n);
  Matrix unit_noise(vectors, n);
  for (std::int64_t r = 0; r < vectors; ++r) {
    for (int i = 0; i < n; ++i) z(r, i) = rng.uniform_int(c.min_level(), c.max_level());
    for (int i = 0; i < n; ++i) unit_noise(r, i) = rng.gaussian();
  }
  const Matrix clean = z.cast<double>() * model.g();

  auto ser_at = [&](double snr_db) {
    const double sigma = snr_to_sigma(snr_db, c, model).sigma;
    std::int64_t errors = 0;
    for (std::int64_t r = 0; r < vectors; ++r) {
      const RowVector y = clean.row(r) + sigma * unit_noise.row(r);
      errors += count_symbol_errors(sphere_decode(y, model, c).z_hat, z.row(r));
    }
    return static_cast<double>(errors) / static_cast<double>(vectors * n);
  };
  auto inside = [&](double ser) { return ser >= 0.8 * target_ser && ser <= 1.25 * target_ser; };

  constexpr double kLow = -20.0;
  constexpr double kHigh = 60.0;
  constexpr double kStep = 8.0;
  double probe = 20.0;
  double ser = ser_at(probe);
  if (inside(ser)) return probe;
  double lo = probe;  // SER above target
  double hi = probe;  // SER below target
  if (ser > target_ser) {
    while (true) {
      lo = hi;
      hi = std::min(hi + kStep, kHigh);
      ser = ser_at(hi);
      if (inside(ser)) return hi;
      if (ser < target_ser) break;
      if (hi >= kHigh) throw CalibrationDiverged("SER stays above target up to 60 dB");
    }
  } else {
    while (true) {
      hi = lo;
      lo = std::max(lo - kStep, kLow);
      ser = ser_at(lo);
      if (inside(ser)) return lo;
      if (ser > target_ser) break;
      if (lo <= kLow) throw CalibrationDiverged("SER stays below target down to -20 dB");
    }
  }
  for (int iter = 0; iter < 200 && hi - lo > 1e-6; ++iter) {
    const double mid = 0.5 * (lo + hi);
    ser = ser_at(mid);
    if (inside(ser)) return mid;
    (ser > target_ser ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

std::vector<LabeledSample> generate_batch(const TrainingConfig& cfg, const ChannelModel& model, const Constellation& c,
                                          RngStream& rng, int count) {
  const RawBatch raw = draw(cfg, model, c, rng, count);
  std::vector<LabeledSample> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int r = 0; r < count; ++r) out.push_back({raw.y.row(r), raw.labels.row(r), raw.z.row(r)});
  return out;
}

Batch generate_training_batch(const TrainingConfig& cfg, const ChannelModel& model, const Constellation& c,
                              RngStream& rng, int count) {
  RawBatch raw = draw(cfg, model, c, rng, count);
  Batch b;
  b.z0 = initial_points(cfg.init_policy, raw.y, model, c, rng);
  b.y = std::move(raw.y);
  b.labels = std::move(raw.labels);
  return b;
}

MislabelStats measure_mislabels(const ChannelModel& model, const Constellation& c, double snr_db,
                                std::int64_t samples, std::uint64_t seed) {
  TrainingConfig cfg;
  cfg.train_snr_db = snr_db;
  RngStream rng(seed, 0x6d69736cULL);
  MislabelStats s;
  constexpr std::int64_t kChunk = 4096;
  for (std::int64_t done = 0; done < samples; done += kChunk) {
    const int count = static_cast<int>(std::min(kChunk, samples - done));
    const RawBatch raw = draw(cfg, model, c, rng, count);
    for (int r = 0; r < count; ++r) {
      const std::int64_t e = count_symbol_errors(sphere_decode(raw.y.row(r), model, c).z_hat, raw.z.row(r));
      s.symbol_mismatches += e;
      s.vector_mismatches += e > 0 ? 1 : 0;
    }
  }
  s.samples = samples;
  s.symbols = samples * model.n();
  return s;
}

std::string TrainingLog::to_csv(bool include_timing) const {
  std::ostringstream out;
  out << "step,loss,val_ser,elapsed_s\n";
  char buf[128];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%lld,%.17g,", static_cast<long long>(r.step), r.loss);
    out << buf;
    if (r.val_ser) {
      std::snprintf(buf, sizeof(buf), "%.17g", *r.val_ser);
      out << buf;
    }
    if (include_timing) {
      std::snprintf(buf, sizeof(buf), ",%.3f\n", r.elapsed_s);
      out << buf;
    } else {
      out << ",\n";
    }
  }
  return out.str();
}

void TrainingLog::write_csv(const std::filesystem::path& path, bool include_timing) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << to_csv(include_timing);
}

double validation_ser(const DetectorNetwork& net, const ChannelModel& model, const Constellation& c, double snr_db,
                      int samples, std::uint64_t seed) {
  require_compatible(net, model, c);
  return score(net, model, make_validation_set(model, c, snr_db, samples, net.init, seed));
}

TrainingResult train(const TrainingConfig& cfg, const ChannelModel& model, const Constellation& c,
                     DetectorNetwork net) {
  cfg.validate();
  net.validate();
  require_compatible(net, model, c);
  TrainingConfig resolved = cfg;
  if (!resolved.train_snr_db) resolved.train_snr_db = calibrate_training_snr(model, c, cfg.target_ser, cfg.seed);
  net.init = cfg.init_policy;

  TrainingResult result{net, {}};
  result.log.train_snr_db = *resolved.train_snr_db;
  const bool validating = cfg.validate_every > 0 && cfg.validation_samples > 0;
  ValidationSet val;
  if (validating)
    val = make_validation_set(model, c, *resolved.train_snr_db, cfg.validation_samples, cfg.init_policy,
                              mix64(cfg.seed) ^ 0x5a5aULL);

  Eigen::VectorXd params = pack_parameters(net.blocks);
  AdamState adam = make_adam_state(params.size(), cfg.learning_rate);
  RngStream data_rng(cfg.seed, 0x747261696eULL);
  double best = std::numeric_limits<double>::infinity();
  const auto start = std::chrono::steady_clock::now();

  for (std::int64_t step = 1; step <= cfg.total_steps; ++step) {
    const Batch batch = generate_training_batch(resolved, model, c, data_rng, cfg.batch_size);
    const Gradient g = backward(net, batch, model);
    if (!std::isfinite(g.loss)) throw NonFiniteLoss(step);
    adam_step(params, pack_parameters(g.blocks), adam);
    unpack_parameters(net.blocks, params);

    const bool last = step == cfg.total_steps;
    const bool log_now = step % cfg.log_every == 0 || last;
    const bool val_now = validating && (step % cfg.validate_every == 0 || last);
    if (!log_now && !val_now) continue;
    TrainingLogRow row;
    row.step = step;
    row.loss = g.loss;
    if (val_now) {
      const double ser = score(net, model, val);
      row.val_ser = ser;
      if (ser < best) {
        best = ser;
        result.net = net;
        result.log.best_step = step;
      }
    }
    row.elapsed_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.log.rows.push_back(row);
  }
  if (!validating) {
    result.net = net;
    result.log.best_step = cfg.total_steps;
  }
  result.log.best_val_ser = validating ? best : std::numeric_limits<double>::quiet_NaN();
  if (!cfg.checkpoint_path.empty()) save_checkpoint(result.net, cfg.checkpoint_path);
  return result;
}

}  // namespace mlmimo
