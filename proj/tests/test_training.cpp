#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "json.hpp"
#include "mlmimo/checkpoint.hpp"
#include "mlmimo/harness.hpp"
#include "mlmimo/mld.hpp"
#include "mlmimo/training.hpp"
#include "mlmimo/twin.hpp"
#include "oracles.hpp"

using namespace mlmimo;
namespace fs = std::filesystem;

TEST_CASE("TrainingConfig validation") {
  TrainingConfig cfg;
  cfg.noise_policy = NoisePolicy::uniform_in_parallelotope;
  CHECK_THROWS_AS(cfg.validate(), InvalidConfig);
  cfg.label_policy = LabelPolicy::mld;
  CHECK_NOTHROW(cfg.validate());
  cfg.batch_size = 0;
  CHECK_THROWS_AS(cfg.validate(), InvalidConfig);
}

TEST_CASE("calibrate_training_snr") {
  const ChannelModel eye(Matrix::Identity(2, 2));
  const Constellation c(0, 2);
  // Slicing levels {0, 1}: SER = Q(1 / (2 sigma)).
  const double snr = calibrate_training_snr(eye, c, 1e-2, 3);
  const double sigma = snr_to_sigma(snr, c, eye).sigma;
  double lo = 0.01, hi = 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (oracles::q_function(1.0 / (2.0 * mid)) > 1e-2 ? hi : lo) = mid;
  }
  CHECK(std::abs(sigma / lo - 1.0) < 0.05);
  CHECK(calibrate_training_snr(eye, c, 1e-2, 3) == snr);

  RngStream rng(1, 0);
  const ChannelModel g = generate_channel(rng, 4);
  const double low = calibrate_training_snr(g, Constellation(5), 0.5, 1);
  CHECK(low < calibrate_training_snr(g, Constellation(5), 1e-2, 1) - 10.0);
  const double at = calibrate_training_snr(g, Constellation(5), 1e-2, 1);
  const double ser = mld_symbol_error_rate(g, Constellation(5), at, 40000, 99);
  CHECK(ser > 0.7e-2);
  CHECK(ser < 1.4e-2);
}

TEST_CASE("generate_batch policies") {
  RngStream grng(2, 0);
  const ChannelModel g = generate_channel(grng, 4);
  const Constellation c(5);
  TrainingConfig cfg;
  cfg.label_policy = LabelPolicy::mld;
  cfg.train_snr_db = 300.0;
  RngStream rng(3, 0);
  for (const LabeledSample& s : generate_batch(cfg, g, c, rng, 500)) CHECK(s.label == s.z_transmitted);

  cfg.noise_policy = NoisePolicy::uniform_in_parallelotope;
  RowVector mean = RowVector::Zero(4);
  const int count = 20000;
  const auto batch = generate_batch(cfg, g, c, rng, count);
  for (const LabeledSample& s : batch) mean += s.y - s.z_transmitted.cast<double>() * g.g();
  mean /= count;
  // Each coordinate of (w − ½)·G has variance Σ_i G_ij² / 12.
  for (int j = 0; j < 4; ++j) CHECK(std::abs(mean(j)) < 3.0 * std::sqrt(g.g().col(j).squaredNorm() / 12.0 / count));
  for (const LabeledSample& s : batch) CHECK(s.label == sphere_decode(s.y, g, c).z_hat);

  TrainingConfig t;
  t.train_snr_db = 20.0;
  t.init_policy = InitPolicy::zf;
  RngStream r1(4, 0), r2(4, 0);
  const Batch b1 = generate_training_batch(t, g, c, r1, 100);
  const Batch b2 = generate_training_batch(t, g, c, r2, 100);
  CHECK(b1.y == b2.y);
  CHECK(b1.z0 == b2.z0);
  for (int r = 0; r < 100; ++r) CHECK(b1.z0.row(r) == zf_init_point(b1.y.row(r), g, c));
}

TEST_CASE("mislabel statistic at the calibrated SNR (n=4)") {
  RngStream grng(5, 0);
  const ChannelModel g = generate_channel(grng, 4);
  const Constellation c(5);
  const double snr = calibrate_training_snr(g, c, 1e-2, 5);
  const MislabelStats st = measure_mislabels(g, c, snr, 20000, 6);
  CHECK(st.symbol_rate() > 1e-2 / 3.0);
  CHECK(st.symbol_rate() < 3e-2);
  CHECK(st.vector_rate() >= st.symbol_rate());
}

TEST_CASE("train: toy task reaches the sphere decoder") {
  const ChannelModel eye(Matrix::Identity(2, 2));
  const Constellation c(0, 2);
  TrainingConfig cfg;
  cfg.batch_size = 1000;
  cfg.total_steps = 2000;
  cfg.learning_rate = 1e-2;
  cfg.validate_every = 500;
  cfg.validation_samples = 5000;
  cfg.seed = 3;
  const DetectorNetwork net0 = make_detector_network({2, 2, 8}, c, 3);
  const TrainingResult res = train(cfg, eye, c, net0);
  const double snr = res.log.train_snr_db;

  EvalOptions opt;
  opt.snr_db = {snr};
  opt.max_trials = 50000;
  opt.min_errors = 1000000;
  opt.bayes_column = false;
  opt.workers = 1;
  const double dnn = evaluate(*make_network_detector("dnn", res.net, eye, c), eye, c, opt).rows[0].ser;
  const double mld = evaluate(*make_detector("mld", eye, c), eye, c, opt).rows[0].ser;
  CAPTURE(dnn);
  CAPTURE(mld);
  CHECK(dnn <= 1.2 * mld);

  // Reproducible apart from wall-clock timing.
  const TrainingResult again = train(cfg, eye, c, net0);
  CHECK(again.log.to_csv(false) == res.log.to_csv(false));
  CHECK(pack_parameters(again.net.blocks) == pack_parameters(res.net.blocks));
  CHECK(res.log.rows.front().step == cfg.log_every);
}

TEST_CASE("train: one-hot and multilevel heads both learn a toy task") {
  RngStream grng(8, 0);
  const ChannelModel g = generate_channel(grng, 2, ConditionRange{1.0, 3.0});
  const Constellation c(3);
  for (OutputHead head : {OutputHead::multilevel, OutputHead::one_hot}) {
    TrainingConfig cfg;
    cfg.train_snr_db = 30.0;
    cfg.batch_size = 500;
    cfg.total_steps = 1500;
    cfg.learning_rate = 1e-2;
    cfg.validate_every = 500;
    cfg.validation_samples = 4000;
    const TrainingResult res = train(cfg, g, c, make_detector_network({2, 3, 8, head}, c, 4));
    CAPTURE(to_string(head));
    CHECK(res.log.best_val_ser < 1e-2);
  }
}

TEST_CASE("train: non-finite loss aborts with the step") {
  const ChannelModel eye(Matrix::Identity(2, 2));
  const Constellation c(5);
  TrainingConfig cfg;
  cfg.train_snr_db = 40.0;
  cfg.total_steps = 50;
  cfg.validate_every = 0;
  // ẑ0 ≈ y here, so these two terms overflow to +inf and −inf together.
  DetectorNetwork net = make_detector_network({2, 1, 2}, c, 1);
  net.blocks[0].w1_a.row(0) << -1e308, 0.0;
  net.blocks[0].w1_b.row(0) << 1e308, 0.0;
  try {
    train(cfg, eye, c, net);
    FAIL("expected NonFiniteLoss");
  } catch (const NonFiniteLoss& e) {
    CHECK(e.step() == 1);
  }
}

TEST_CASE("training log csv") {
  TrainingLog log;
  log.rows.push_back({0, 1.5, std::nullopt, 0.25});
  log.rows.push_back({100, 0.5, 0.125, 1.0});
  CHECK(log.to_csv() == "step,loss,val_ser,elapsed_s\n0,1.5,,0.250\n100,0.5,0.125,1.000\n");
  CHECK(log.to_csv(false) == "step,loss,val_ser,elapsed_s\n0,1.5,,\n100,0.5,0.125,\n");
}

TEST_CASE("checkpoint round trip") {
  RngStream rng(9, 0);
  const ChannelModel g = generate_channel(rng, 3);
  const Constellation c(5);
  for (OutputHead head : {OutputHead::multilevel, OutputHead::one_hot}) {
    DetectorNetwork net = make_detector_network({3, 2, 5, head, HiddenActivation::sigmoid}, c, 17);
    // Non-trivial biases so every array is exercised.
    Eigen::VectorXd p = pack_parameters(net.blocks);
    for (Eigen::Index i = 0; i < p.size(); ++i) p(i) = rng.gaussian() / 3.0;
    unpack_parameters(net.blocks, p);
    net.init = InitPolicy::random;
    const fs::path path = fs::temp_directory_path() / "mlmimo_ckpt_test.json";
    save_checkpoint(net, path);
    const DetectorNetwork back = load_checkpoint(path);
    CHECK(pack_parameters(back.blocks) == p);
    CHECK(back.init == InitPolicy::random);
    CHECK(back.activation == net.activation);
    CHECK(back.constellation == net.constellation);
    for (int t = 0; t < 100; ++t) {
      RowVector y(3), z0(3);
      for (int i = 0; i < 3; ++i) {
        y(i) = 2 * rng.gaussian();
        z0(i) = rng.uniform(-2, 2);
      }
      const auto a = forward(net, y, g, z0, RowVector::Zero(3));
      const auto b = forward(back, y, g, z0, RowVector::Zero(3));
      CHECK(a.back() == b.back());
    }

    const std::string text = checkpoint_to_string(net);
    CHECK_THROWS_AS(checkpoint_from_string(text.substr(0, text.size() / 2)), CorruptCheckpoint);
    nlohmann::json doc = nlohmann::json::parse(text);
    doc["format_version"] = 99;
    CHECK_THROWS_AS(checkpoint_from_string(doc.dump()), FormatVersionMismatch);
    fs::remove(path);
  }
  const DetectorNetwork net4 = make_detector_network({4, 1, 4}, c, 1);
  CHECK_THROWS_AS(require_compatible(net4, g, c), DimensionMismatch);
  CHECK_THROWS_AS(make_network_detector("x", net4, g, c), DimensionMismatch);
  CHECK_THROWS_AS(load_checkpoint("/nonexistent/ckpt.json"), Error);
}

TEST_CASE("regressor checkpoint round trip") {
  const Regressor r = make_regressor(2, {5, 3}, 4);
  const fs::path path = fs::temp_directory_path() / "mlmimo_reg_test.json";
  save_regressor_checkpoint(r, path);
  const Regressor back = load_regressor_checkpoint(path);
  CHECK(pack_parameters(back) == pack_parameters(r));
  CHECK(regressor_eval(back, RowVector{{0.3, -0.2}}) == regressor_eval(r, RowVector{{0.3, -0.2}}));
  CHECK_THROWS_AS(load_checkpoint(path), Error);
  fs::remove(path);
}
