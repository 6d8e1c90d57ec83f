#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mlmimo/checkpoint.hpp"
#include "mlmimo/config.hpp"
#include "mlmimo/harness.hpp"
#include "mlmimo/mld.hpp"
#include "mlmimo/training.hpp"

namespace fs = std::filesystem;
using namespace mlmimo;

namespace {

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

ChannelModel load_channel(const fs::path& path) {
  if (!fs::exists(path)) throw MissingChannelFile("channel file not found: " + path.string());
  return ChannelModel(read_matrix_csv(path));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multilevel MIMO detection: channels, detectors, training and evaluation"};
  app.require_subcommand(1);

  int n = 8;
  double cond_min = 0.0, cond_max = 0.0;
  std::uint64_t seed = 1;
  std::string out_path;
  auto* gen = app.add_subcommand("gen-channel", "sample a Gaussian channel matrix");
  gen->add_option("--n", n, "dimension")->required()->check(CLI::Range(2, 4096));
  gen->add_option("--cond-min", cond_min, "lower condition-number bound");
  gen->add_option("--cond-max", cond_max, "upper condition-number bound");
  gen->add_option("--seed", seed, "random seed");
  gen->add_option("--out", out_path, "output CSV")->required();

  std::string channel_path;
  auto* diag = app.add_subcommand("diag", "print condition number and Hermite figure");
  diag->add_option("--channel", channel_path)->required();

  int levels = 5;
  double target_ser = 1e-2;
  auto* cal = app.add_subcommand("calibrate-snr", "SNR at which the sphere decoder reaches a target SER");
  cal->add_option("--channel", channel_path)->required();
  cal->add_option("--M", levels, "levels per component")->check(CLI::Range(2, 1 << 16));
  cal->add_option("--target-ser", target_ser)->check(CLI::Range(1e-9, 0.999));
  cal->add_option("--seed", seed);

  std::string config_path;
  auto* trn = app.add_subcommand("train", "train a detector network from a key=value config");
  trn->add_option("--config", config_path)->required();

  std::string detector_list, snr_list;
  std::int64_t min_errors = 100, max_trials = 10000000;
  int workers = 0;
  auto* ev = app.add_subcommand("eval", "Monte Carlo error rates of one or more detectors");
  ev->add_option("--channel", channel_path)->required();
  ev->add_option("--detector", detector_list, "comma-separated: zf, mmse, mld, parallelotope, dnn:<ckpt>, twin:<manifest>")
      ->required();
  ev->add_option("--snrs", snr_list, "comma-separated SNRs in dB")->required();
  ev->add_option("--seed", seed);
  ev->add_option("--out", out_path, "report CSV (stdout when omitted)");
  ev->add_option("--M", levels)->check(CLI::Range(2, 1 << 16));
  ev->add_option("--min-errors", min_errors)->check(CLI::PositiveNumber);
  ev->add_option("--max-trials", max_trials)->check(CLI::PositiveNumber);
  ev->add_option("--workers", workers)->check(CLI::NonNegativeNumber);

  std::string preset, workdir;
  std::vector<std::string> overrides;
  auto* exp = app.add_subcommand("experiment", "run a named experiment pipeline");
  exp->add_option("--preset", preset)->required();
  exp->add_option("--workdir", workdir)->required();
  exp->add_option("--config", config_path, "extra key=value file (relative to workdir)");
  exp->add_option("--set", overrides, "key=value override, repeatable");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*gen) {
      std::optional<ConditionRange> range;
      if (cond_min > 0.0 || cond_max > 0.0) {
        if (cond_min < 1.0 || cond_max < cond_min) throw InvalidConfig("need 1 <= cond-min <= cond-max");
        range = ConditionRange{cond_min, cond_max};
      }
      RngStream rng(seed, 0);
      const ChannelModel model = generate_channel(rng, n, range);
      write_matrix_csv(out_path, model.g());
      std::cout << "channel_id=" << channel_id(model) << "\n";
      if (model.n() <= kMaxEnumerationDimension) std::cout << format_diagnostics(diagnostics(model)) << "\n";
    } else if (*diag) {
      const ChannelModel model = load_channel(channel_path);
      std::cout << format_diagnostics(diagnostics(model)) << "\n";
    } else if (*cal) {
      const ChannelModel model = load_channel(channel_path);
      const double snr = calibrate_training_snr(model, Constellation(levels), target_ser, seed);
      std::printf("snr_db=%.6f\n", snr);
    } else if (*trn) {
      const fs::path cfg_file(config_path);
      const fs::path base = cfg_file.parent_path();
      const KeyValueConfig cfg = KeyValueConfig::load(cfg_file);
      const fs::path ch = cfg.get_string("channel");
      const ChannelModel model = load_channel(ch.is_absolute() ? ch : base / ch);
      const Constellation c(static_cast<int>(cfg.get_int("M", 5)));
      TrainingConfig tc = training_config_from(cfg, base);
      if (tc.checkpoint_path.empty()) tc.checkpoint_path = base / "net.json";
      const NetworkShape shape = network_shape_from(cfg, model.n());
      const TrainingResult result = train(tc, model, c, make_detector_network(shape, c, tc.seed));
      const fs::path log = cfg.has("log_path") ? base / cfg.get_string("log_path") : base / "train_log.csv";
      result.log.write_csv(log, cfg.get_string("record_timing", "true") == "true");
      std::printf("train_snr_db=%.6f best_val_ser=%.6g best_step=%lld checkpoint=%s\n", result.log.train_snr_db,
                  result.log.best_val_ser, static_cast<long long>(result.log.best_step),
                  tc.checkpoint_path.string().c_str());
    } else if (*ev) {
      const fs::path ch(channel_path);
      const ChannelModel model = load_channel(ch);
      const Constellation c(levels);
      EvalOptions opt;
      opt.snr_db = parse_double_list(snr_list);
      if (opt.snr_db.empty()) throw InvalidConfig("--snrs is empty");
      opt.seed = seed;
      opt.min_errors = min_errors;
      opt.max_trials = max_trials;
      opt.workers = workers;
      EvalReport report;
      for (const std::string& name : split_list(detector_list))
        report.append(evaluate(*make_detector(name, model, c, fs::current_path()), model, c, opt));
      if (out_path.empty())
        std::cout << report.to_csv();
      else
        report.write_csv(out_path);
    } else if (*exp) {
      const fs::path wd(workdir);
      fs::create_directories(wd);
      KeyValueConfig cfg;
      if (!config_path.empty()) {
        const fs::path p(config_path);
        cfg = KeyValueConfig::load(p.is_absolute() ? p : wd / p);
      }
      cfg.set("preset", preset);
      for (const std::string& kv : overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0) throw InvalidConfig("--set expects key=value, got '" + kv + "'");
        cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
      }
      const ExperimentResult r = run_experiment(cfg, wd);
      std::printf("calibrated_snr_db=%.6f weights_only=%lld with_biases=%lld\nreport=%s\n", r.calibrated_snr_db,
                  static_cast<long long>(r.parameters.weights_only), static_cast<long long>(r.parameters.with_biases),
                  r.report.string().c_str());
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
