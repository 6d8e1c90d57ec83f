#include "mlmimo/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

#include "mlmimo/checkpoint.hpp"
#include "mlmimo/classic.hpp"
#include "mlmimo/mld.hpp"
#include "mlmimo/parallelotope.hpp"
#include "mlmimo/training.hpp"
#include "mlmimo/twin.hpp"

namespace mlmimo {

namespace fs = std::filesystem;

namespace {

class RowwiseDetector : public Detector {
 public:
  RowwiseDetector(std::string name, const ChannelModel& model, const Constellation& c)
      : name_(std::move(name)), model_(model), c_(c) {}
  std::string name() const override { return name_; }
  IntMatrix detect(const Matrix& y, double sigma, RngStream&) const override {
    IntMatrix out(y.rows(), y.cols());
    for (Eigen::Index r = 0; r < y.rows(); ++r) out.row(r) = detect_row(y.row(r), sigma);
    return out;
  }

 protected:
  virtual IntRowVector detect_row(const RowVector& y, double sigma) const = 0;
  std::string name_;
  ChannelModel model_;
  Constellation c_;
};

class ZfDetector final : public RowwiseDetector {
 public:
  using RowwiseDetector::RowwiseDetector;
  IntMatrix detect(const Matrix& y, double, RngStream&) const override {
    const Matrix soft = y * model_.g_inv();
    IntMatrix out(y.rows(), y.cols());
    for (Eigen::Index r = 0; r < y.rows(); ++r) out.row(r) = slice(soft.row(r), c_);
    return out;
  }

 protected:
  IntRowVector detect_row(const RowVector& y, double) const override { return zf_detect(y, model_, c_).z_hat; }
};

class MmseDetector final : public RowwiseDetector {
 public:
  using RowwiseDetector::RowwiseDetector;

 protected:
  IntRowVector detect_row(const RowVector& y, double sigma) const override {
    return mmse_detect(y, model_, c_, sigma).z_hat;
  }
};

class MldDetector final : public RowwiseDetector {
 public:
  using RowwiseDetector::RowwiseDetector;

 protected:
  IntRowVector detect_row(const RowVector& y, double) const override { return sphere_decode(y, model_, c_).z_hat; }
};

class ParallelotopeDetector final : public RowwiseDetector {
 public:
  static constexpr int kScreenProbes = 2000;
  ParallelotopeDetector(std::string name, const ChannelModel& model, const Constellation& c)
      : RowwiseDetector(std::move(name), model, c), basis_(model.g()) {
    if (model.n() > kMaxExactOracleDimension)
      throw DimensionTooLarge("parallelotope detector supports n <= " + std::to_string(kMaxExactOracleDimension));
    for (int j = 0; j < model.n(); ++j) {
      if (!screen_basis(component_basis(basis_, j), kScreenProbes).passed())
        throw InvalidConfig("parallelotope detector: channel basis fails the quasi-Voronoi screen for component " +
                            std::to_string(j));
    }
  }

 protected:
  IntRowVector detect_row(const RowVector& y, double) const override { return detect_all_exact(y, basis_, c_); }

 private:
  LatticeBasis basis_;
};

class NetworkDetector final : public Detector {
 public:
  NetworkDetector(std::string name, DetectorNetwork net, const ChannelModel& model, const Constellation& c)
      : name_(std::move(name)), net_(std::move(net)), model_(model), c_(c) {
    require_compatible(net_, model_, c_);
  }
  std::string name() const override { return name_; }
  IntMatrix detect(const Matrix& y, double, RngStream& rng) const override {
    return decide(net_, y, model_, initial_points(net_.init, y, model_, c_, rng));
  }

 private:
  std::string name_;
  DetectorNetwork net_;
  ChannelModel model_;
  Constellation c_;
};

class TwinDetector final : public Detector {
 public:
  TwinDetector(std::string name, DetectorNetwork a, DetectorNetwork b, const ChannelModel& model,
               const Constellation& c)
      : name_(std::move(name)), a_(std::move(a)), b_(std::move(b)), model_(model), c_(c) {
    require_compatible(a_, model_, c_);
    require_compatible(b_, model_, c_);
  }
  std::string name() const override { return name_; }
  IntMatrix detect(const Matrix& y, double, RngStream& rng) const override {
    return twin_detect_batch(y, model_, c_, a_, b_, rng);
  }

 private:
  std::string name_;
  DetectorNetwork a_;
  DetectorNetwork b_;
  ChannelModel model_;
  Constellation c_;
};

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

// Trial inputs of one chunk; identical for every detector given the same key.
struct ChunkDraw {
  IntMatrix z;
  Matrix y;
  RngStream detector_rng{0, 0};
};

ChunkDraw draw_chunk(const ChannelModel& model, const Constellation& c, double sigma, std::uint64_t seed,
                     std::size_t snr_index, std::int64_t chunk, std::int64_t count) {
  const std::uint64_t key = (static_cast<std::uint64_t>(snr_index) << 40) ^ static_cast<std::uint64_t>(chunk);
  RngStream rng(seed, key);
  ChunkDraw d;
  d.detector_rng = rng.derive(0x646574ULL);
  const int n = model.n();
  d.z.resize(count, n);
  d.y.resize(count, n);
  for (std::int64_t r = 0; r < count; ++r) {
    const IntRowVector z = sample_message(rng, c, n);
    d.z.row(r) = z;
    d.y.row(r) = transmit(z, model, NoiseSpec{sigma}, rng);
  }
  return d;
}

struct ChunkTally {
  std::int64_t trials = 0;
  std::int64_t symbol_errors = 0;
  std::int64_t vector_errors = 0;
  std::int64_t bayes_symbol_errors = 0;
};

ChunkTally run_chunk(const Detector& det, bool is_mld, bool bayes, const ChannelModel& model,
                     const Constellation& c, double sigma, std::uint64_t seed, std::size_t snr_index,
                     std::int64_t chunk, std::int64_t count) {
  ChunkDraw d = draw_chunk(model, c, sigma, seed, snr_index, chunk, count);
  const IntMatrix decided = det.detect(d.y, sigma, d.detector_rng);
  ChunkTally t;
  t.trials = count;
  for (std::int64_t r = 0; r < count; ++r) {
    const auto wrong = (decided.row(r).array() != d.z.row(r).array()).count();
    t.symbol_errors += wrong;
    t.vector_errors += wrong > 0 ? 1 : 0;
    if (bayes && !is_mld) {
      const IntRowVector ref = sphere_decode(d.y.row(r), model, c).z_hat;
      t.bayes_symbol_errors += (decided.row(r).array() != ref.array()).count();
    }
  }
  return t;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

int worker_count(int requested) {
  if (requested > 0) return requested;
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

}  // namespace

std::unique_ptr<Detector> make_network_detector(std::string name, DetectorNetwork net, const ChannelModel& model,
                                                const Constellation& c) {
  return std::make_unique<NetworkDetector>(std::move(name), std::move(net), model, c);
}

std::unique_ptr<Detector> make_twin_detector(std::string name, DetectorNetwork net_a, DetectorNetwork net_b,
                                             const ChannelModel& model, const Constellation& c) {
  return std::make_unique<TwinDetector>(std::move(name), std::move(net_a), std::move(net_b), model, c);
}

std::unique_ptr<Detector> make_detector(const std::string& spec, const ChannelModel& model, const Constellation& c,
                                        const fs::path& base_dir) {
  if (spec == "zf") return std::make_unique<ZfDetector>(spec, model, c);
  if (spec == "mmse") return std::make_unique<MmseDetector>(spec, model, c);
  if (spec == "mld") return std::make_unique<MldDetector>(spec, model, c);
  if (spec == "parallelotope") return std::make_unique<ParallelotopeDetector>(spec, model, c);
  if (spec.rfind("dnn:", 0) == 0 && spec.size() > 4)
    return make_network_detector(spec, load_checkpoint(resolve(base_dir, spec.substr(4))), model, c);
  if (spec.rfind("twin:", 0) == 0 && spec.size() > 5) {
    TwinNetworks twin = load_twin(resolve(base_dir, spec.substr(5)));
    return make_twin_detector(spec, std::move(twin.net_a), std::move(twin.net_b), model, c);
  }
  throw UnknownDetector("unknown detector '" + spec + "' (expected zf, mmse, mld, parallelotope, dnn:<ckpt>, twin:<manifest>)");
}

WilsonInterval wilson_interval(std::int64_t successes, std::int64_t trials, double z) {
  if (trials <= 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z / denom * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
  WilsonInterval w{std::max(0.0, center - half), std::min(1.0, center + half)};
  if (successes == 0) w.low = 0.0;
  if (successes == trials) w.high = 1.0;
  w.low = std::min(w.low, p);
  w.high = std::max(w.high, p);
  return w;
}

void EvalReport::append(const EvalReport& other) {
  for (const auto& kv : other.metadata)
    if (std::find(metadata.begin(), metadata.end(), kv) == metadata.end()) metadata.push_back(kv);
  rows.insert(rows.end(), other.rows.begin(), other.rows.end());
}

std::string EvalReport::to_csv() const {
  std::ostringstream out;
  for (const auto& [k, v] : metadata) out << "# " << k << "=" << v << "\n";
  out << "detector,snr_db,trials,symbol_errors,vector_errors,ser,vler,ci_low,ci_high,"
         "bayes_symbol_errors,bayes_ser,seed,channel_id\n";
  for (const auto& r : rows) {
    out << r.detector << ',' << format_double(r.snr_db) << ',' << r.trials << ',' << r.symbol_errors << ','
        << r.vector_errors << ',' << format_double(r.ser) << ',' << format_double(r.vler) << ','
        << format_double(r.ci_low) << ',' << format_double(r.ci_high) << ',' << r.bayes_symbol_errors << ','
        << format_double(r.bayes_ser) << ',' << r.seed << ',' << r.channel_id << "\n";
  }
  return out.str();
}

void EvalReport::write_csv(const fs::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << to_csv();
}

EvalReport evaluate(const Detector& detector, const ChannelModel& model, const Constellation& c,
                    const EvalOptions& options) {
  if (options.chunk_trials <= 0 || options.max_trials <= 0 || options.min_errors <= 0)
    throw InvalidConfig("evaluate: chunk_trials, max_trials and min_errors must be positive");
  const int n = model.n();
  const bool is_mld = detector.name() == "mld";
  const int workers = worker_count(options.workers);
  const std::string id = channel_id(model);

  EvalReport report;
  report.metadata.emplace_back("snr_definition", kSnrDefinition);
  report.metadata.emplace_back("channel_id", id);
  report.metadata.emplace_back("n", std::to_string(n));
  report.metadata.emplace_back("M", std::to_string(c.size()));
  if (n <= kMaxEnumerationDimension) report.metadata.emplace_back("diagnostics", format_diagnostics(diagnostics(model)));

  const std::int64_t chunk_size = options.chunk_trials;
  const std::int64_t chunk_limit = (options.max_trials + chunk_size - 1) / chunk_size;

  for (std::size_t s = 0; s < options.snr_db.size(); ++s) {
    const double snr = options.snr_db[s];
    const double sigma = snr_to_sigma(snr, c, model).sigma;
    ChunkTally total;
    bool done = false;
    for (std::int64_t wave = 0; wave < chunk_limit && !done; wave += workers) {
      const std::int64_t wave_end = std::min<std::int64_t>(wave + workers, chunk_limit);
      std::vector<ChunkTally> tallies(static_cast<std::size_t>(wave_end - wave));
      auto job = [&](std::int64_t k) {
        const std::int64_t start = k * chunk_size;
        const std::int64_t count = std::min(chunk_size, options.max_trials - start);
        tallies[static_cast<std::size_t>(k - wave)] =
            run_chunk(detector, is_mld, options.bayes_column, model, c, sigma, options.seed, s, k, count);
      };
      if (wave_end - wave == 1) {
        job(wave);
      } else {
        std::vector<std::thread> pool;
        for (std::int64_t k = wave; k < wave_end; ++k) pool.emplace_back(job, k);
        for (auto& t : pool) t.join();
      }
      // Chunks are folded in index order and the stopping point is decided
      // per chunk, so the outcome is independent of the wave width.
      for (const ChunkTally& t : tallies) {
        total.trials += t.trials;
        total.symbol_errors += t.symbol_errors;
        total.vector_errors += t.vector_errors;
        total.bayes_symbol_errors += t.bayes_symbol_errors;
        if (total.vector_errors >= options.min_errors) {
          done = true;
          break;
        }
      }
    }
    EvalRow row;
    row.detector = detector.name();
    row.snr_db = snr;
    row.trials = total.trials;
    row.symbol_errors = total.symbol_errors;
    row.vector_errors = total.vector_errors;
    const std::int64_t symbols = total.trials * n;
    row.ser = static_cast<double>(total.symbol_errors) / static_cast<double>(symbols);
    row.vler = static_cast<double>(total.vector_errors) / static_cast<double>(total.trials);
    const WilsonInterval ci = wilson_interval(total.symbol_errors, symbols);
    row.ci_low = ci.low;
    row.ci_high = ci.high;
    row.bayes_symbol_errors = total.bayes_symbol_errors;
    row.bayes_ser = static_cast<double>(total.bayes_symbol_errors) / static_cast<double>(symbols);
    row.seed = options.seed;
    row.channel_id = id;
    report.rows.push_back(row);
  }
  return report;
}

double sign_test_upper_tail(std::int64_t k, std::int64_t n) {
  if (k <= 0) return 1.0;
  if (k > n) return 0.0;
  const double ln2 = std::log(2.0);
  const double lg_n1 = std::lgamma(static_cast<double>(n) + 1.0);
  double max_log = -INFINITY;
  std::vector<double> logs;
  logs.reserve(static_cast<std::size_t>(n - k + 1));
  for (std::int64_t i = k; i <= n; ++i) {
    const double l = lg_n1 - std::lgamma(static_cast<double>(i) + 1.0) -
                     std::lgamma(static_cast<double>(n - i) + 1.0) - static_cast<double>(n) * ln2;
    logs.push_back(l);
    max_log = std::max(max_log, l);
  }
  double sum = 0.0;
  for (double l : logs) sum += std::exp(l - max_log);
  return std::min(1.0, std::exp(max_log) * sum);
}

std::vector<PairedComparison> compare_paired(const Detector& a, const Detector& b, const ChannelModel& model,
                                             const Constellation& c, const std::vector<double>& snr_db,
                                             std::int64_t trials, std::uint64_t seed) {
  constexpr std::int64_t chunk_size = 1000;
  std::vector<PairedComparison> out;
  for (std::size_t s = 0; s < snr_db.size(); ++s) {
    PairedComparison pc;
    pc.snr_db = snr_db[s];
    const double sigma = snr_to_sigma(snr_db[s], c, model).sigma;
    for (std::int64_t k = 0; k * chunk_size < trials; ++k) {
      const std::int64_t count = std::min(chunk_size, trials - k * chunk_size);
      ChunkDraw d = draw_chunk(model, c, sigma, seed, s, k, count);
      RngStream rng_b = d.detector_rng;
      const IntMatrix da = a.detect(d.y, sigma, d.detector_rng);
      const IntMatrix db = b.detect(d.y, sigma, rng_b);
      const auto wrong_a = (da.array() != d.z.array());
      const auto wrong_b = (db.array() != d.z.array());
      pc.errors_a += wrong_a.count();
      pc.errors_b += wrong_b.count();
      pc.only_a_wrong += (wrong_a && !wrong_b).count();
      pc.only_b_wrong += (wrong_b && !wrong_a).count();
    }
    pc.symbols = trials * model.n();
    const std::int64_t discordant = pc.only_a_wrong + pc.only_b_wrong;
    pc.p_a_worse = sign_test_upper_tail(pc.only_a_wrong, discordant);
    pc.p_b_worse = sign_test_upper_tail(pc.only_b_wrong, discordant);
    out.push_back(pc);
  }
  return out;
}

const std::vector<ExperimentPreset>& experiment_presets() {
  static const std::vector<ExperimentPreset> presets = {
      {"fig4-smallbatch", 0, 7, 200, OutputHead::multilevel, true, false},
      {"fig5-largebatch", 3, 4, 30000, OutputHead::multilevel, false, false},
      {"fig6-onehot", 10, 4, 30000, OutputHead::one_hot, false, false},
      {"fig8-dense", 10, 7, 30000, OutputHead::multilevel, false, true},
      {"t55", 3, 4, 30000, OutputHead::multilevel, false, true},
  };
  return presets;
}

const ExperimentPreset& find_preset(const std::string& name) {
  for (const auto& p : experiment_presets())
    if (p.name == name) return p;
  throw InvalidConfig("unknown preset '" + name + "'");
}

NetworkShape preset_shape(const ExperimentPreset& preset, int n) {
  NetworkShape s;
  s.n = n;
  s.iterations = preset.iterations > 0 ? preset.iterations : static_cast<int>(std::ceil(1.25 * n));
  s.xi_size = preset.xi_per_n * n;
  s.head = preset.head;
  s.hidden = HiddenActivation::multilevel;
  return s;
}

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << text;
}

std::string gnuplot_script(const std::vector<std::string>& detectors, const std::string& report_name) {
  std::ostringstream g;
  g << "# SER versus SNR, one curve per detector; data in " << report_name << "\n"
    << "set datafile separator ','\n"
    << "set logscale y\n"
    << "set xlabel 'SNR (dB), " << kSnrDefinition << "'\n"
    << "set ylabel 'symbol error rate'\n"
    << "set grid\n"
    << "set key bottom left\n"
    << "plot \\\n";
  for (std::size_t i = 0; i < detectors.size(); ++i) {
    g << "  '" << report_name << "' using 2:(strcol(1) eq '" << detectors[i] << "' ? $6 : 1/0) with linespoints title '"
      << detectors[i] << "'" << (i + 1 < detectors.size() ? ", \\\n" : "\n");
  }
  return g.str();
}

}  // namespace

ExperimentResult run_experiment(const KeyValueConfig& cfg, const fs::path& workdir) {
  const ExperimentPreset& preset = find_preset(cfg.get_string("preset"));
  fs::create_directories(workdir);
  const std::uint64_t seed = cfg.get_u64("seed", 1);
  const Constellation c(static_cast<int>(cfg.get_int("M", 5)));

  ExperimentResult result;
  result.channel = workdir / "channel.csv";

  // Channel: user file when given (required for external lattices), else generated and stored.
  std::optional<ChannelModel> model;
  if (cfg.has("channel")) {
    const fs::path src = resolve(workdir, cfg.get_string("channel"));
    if (!fs::exists(src)) throw MissingChannelFile("channel file not found: " + src.string());
    model.emplace(read_matrix_csv(src));
    if (fs::absolute(src) != fs::absolute(result.channel)) write_matrix_csv(result.channel, model->g());
  } else if (preset.needs_channel_file) {
    throw MissingChannelFile("preset '" + preset.name + "' needs an external channel matrix (set channel=<file>)");
  } else {
    RngStream rng(seed, 0);
    const int n = static_cast<int>(cfg.get_int("n", 8));
    const ConditionRange range{cfg.get_double("cond_min", 10.0), cfg.get_double("cond_max", 25.0)};
    model.emplace(generate_channel(rng, n, range));
    write_matrix_csv(result.channel, model->g());
  }
  const int n = model->n();

  NetworkShape shape = preset_shape(preset, n);
  shape.iterations = static_cast<int>(cfg.get_int("K", shape.iterations));
  shape.xi_size = static_cast<int>(cfg.get_int("xi_size", shape.xi_size));
  shape.head = parse_output_head(cfg.get_string("head", to_string(shape.head)));

  const double target_ser = cfg.get_double("target_ser", 1e-2);
  result.calibrated_snr_db = cfg.has("train_snr_db") ? cfg.get_double("train_snr_db", 0.0)
                                                      : calibrate_training_snr(*model, c, target_ser, seed);

  TrainingConfig base;
  base.train_snr_db = result.calibrated_snr_db;
  base.target_ser = target_ser;
  base.batch_size = static_cast<int>(cfg.get_int("batch_size", preset.batch_size));
  base.total_steps = cfg.get_int("total_steps", preset.twin ? 20000 : 3000);
  base.learning_rate = cfg.get_double("learning_rate", 1e-2);
  base.log_every = static_cast<int>(cfg.get_int("log_every", 100));
  base.validate_every = static_cast<int>(cfg.get_int("validate_every", 500));
  base.validation_samples = static_cast<int>(cfg.get_int("validation_samples", 10000));
  base.label_policy = parse_label_policy(cfg.get_string("label_policy", "transmitted"));
  const bool timing = cfg.get_string("record_timing", "false") == "true";

  struct Job {
    std::string stem;
    InitPolicy init;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  if (preset.twin) {
    jobs = {{"net_a", InitPolicy::random, seed + 1}, {"net_b", InitPolicy::zf, seed + 2}};
  } else {
    jobs = {{"net", parse_init_policy(cfg.get_string("init", "zf")), seed + 1}};
  }

  std::vector<DetectorNetwork> trained;
  for (const Job& job : jobs) {
    TrainingConfig tc = base;
    tc.init_policy = job.init;
    tc.seed = job.seed;
    tc.checkpoint_path = workdir / (job.stem + ".json");
    tc.validate();
    TrainingResult tr = train(tc, *model, c, make_detector_network(shape, c, job.seed));
    const fs::path log_path = workdir / ("train_" + job.stem + ".csv");
    tr.log.write_csv(log_path, timing);
    result.checkpoints.push_back(tc.checkpoint_path);
    result.training_logs.push_back(log_path);
    trained.push_back(std::move(tr.net));
  }

  // Parameter summary.
  std::ostringstream params;
  params << "preset=" << preset.name << "\n"
         << "n=" << n << "\nM=" << c.size() << "\nK=" << shape.iterations << "\nxi_size=" << shape.xi_size
         << "\nhead=" << to_string(shape.head) << "\n";
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const ParameterCount pc = count_parameters(trained[i]);
    params << jobs[i].stem << ".weights_only=" << pc.weights_only << "\n"
           << jobs[i].stem << ".with_biases=" << pc.with_biases << "\n";
    result.parameters.weights_only += pc.weights_only;
    result.parameters.with_biases += pc.with_biases;
  }
  params << "total.weights_only=" << result.parameters.weights_only << "\n"
         << "total.with_biases=" << result.parameters.with_biases << "\n";
  result.params = workdir / "params.txt";
  write_text(result.params, params.str());

  std::vector<std::unique_ptr<Detector>> detectors;
  for (const char* name : {"zf", "mmse", "mld"}) detectors.push_back(make_detector(name, *model, c));
  for (std::size_t i = 0; i < jobs.size(); ++i)
    detectors.push_back(make_network_detector("dnn:" + jobs[i].stem + ".json", trained[i], *model, c));
  if (preset.twin) {
    save_twin_manifest(TwinManifest{"net_a.json", InitPolicy::random, "net_b.json", InitPolicy::zf},
                       workdir / "twin.json");
    detectors.push_back(make_twin_detector("twin:twin.json", trained[0], trained[1], *model, c));
  }

  EvalOptions eo;
  for (double off : cfg.get_double_list("snr_offsets", {-4.0, -2.0, 0.0, 2.0, 4.0}))
    eo.snr_db.push_back(result.calibrated_snr_db + off);
  eo.min_errors = cfg.get_int("min_errors", 100);
  eo.max_trials = cfg.get_int("max_trials", 1000000);
  eo.seed = seed;
  eo.workers = static_cast<int>(cfg.get_int("workers", 0));

  std::vector<std::string> names;
  for (const auto& d : detectors) {
    result.evaluation.append(evaluate(*d, *model, c, eo));
    names.push_back(d->name());
  }
  result.evaluation.metadata.emplace_back("preset", preset.name);
  result.evaluation.metadata.emplace_back("calibrated_snr_db", format_double(result.calibrated_snr_db));
  result.evaluation.metadata.emplace_back("target_ser", format_double(target_ser));
  result.report = workdir / "report.csv";
  result.evaluation.write_csv(result.report);
  result.plot = workdir / "plot.gp";
  write_text(result.plot, gnuplot_script(names, "report.csv"));
  return result;
}

ExperimentResult run_experiment(const fs::path& config_file) {
  const KeyValueConfig cfg = KeyValueConfig::load(config_file);
  const fs::path dir = config_file.parent_path().empty() ? fs::path(".") : config_file.parent_path();
  return run_experiment(cfg, resolve(dir, cfg.get_string("workdir", ".")));
}

}  // namespace mlmimo
