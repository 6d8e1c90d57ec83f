#include "doctest.h"
#include "mlmimo/classic.hpp"
#include "mlmimo/harness.hpp"

using namespace mlmimo;

TEST_CASE("slice: rounding, clamping, ties") {
  const Constellation c(5);
  CHECK(slice(RowVector{{0.4, -1.6, 3.7}}, c) == IntRowVector{{0, -2, 2}});
  CHECK(slice(RowVector{{-2.0, 0.0, 1.0}}, c) == IntRowVector{{-2, 0, 1}});
  CHECK(slice_scalar(0.5, c) == 0);
  CHECK(slice_scalar(-0.5, c) == -1);
  CHECK(slice_scalar(-1e9, c) == -2);
}

TEST_CASE("slice is idempotent and monotone") {
  const Constellation c(4);
  RngStream rng(1, 0);
  double prev_v = -10.0;
  int prev = slice_scalar(prev_v, c);
  for (int i = 0; i < 2000; ++i) {
    const double v = prev_v + rng.uniform() * 0.02;
    const int s = slice_scalar(v, c);
    CHECK(s >= prev);
    CHECK(slice_scalar(s, c) == s);
    prev = s;
    prev_v = v;
  }
}

TEST_CASE("zf_detect") {
  const Constellation c(5);
  const ChannelModel eye(Matrix::Identity(3, 3));
  const RowVector y{{0.4, -1.6, 3.7}};
  CHECK(zf_detect(y, eye, c).z_hat == slice(y, c));
  CHECK(zf_detect(y, eye, c).z_soft == y);

  // Exhaustive noiseless round trip, n = 4, M = 5.
  RngStream rng(3, 0);
  const ChannelModel g = generate_channel(rng, 4);
  IntRowVector z(4);
  int mismatches = 0;
  for (int code = 0; code < 625; ++code) {
    int r = code;
    for (int i = 0; i < 4; ++i, r /= 5) z(i) = r % 5 - 2;
    if (zf_detect(z.cast<double>() * g.g(), g, c).z_hat != z) ++mismatches;
  }
  CHECK(mismatches == 0);
}

TEST_CASE("mmse_detect") {
  const Constellation c(5);
  const ChannelModel eye(Matrix::Identity(2, 2));
  // sigma^2 / E_s = 1.
  const DetectionResult r = mmse_detect(RowVector{{2.0, -2.0}}, eye, c, std::sqrt(2.0));
  CHECK(r.z_soft(0) == doctest::Approx(1.0));
  CHECK(r.z_soft(1) == doctest::Approx(-1.0));

  RngStream rng(5, 0);
  const ChannelModel g = generate_channel(rng, 6);
  RowVector y(6);
  for (int i = 0; i < 6; ++i) y(i) = rng.gaussian();
  const RowVector zf = zf_detect(y, g, c).z_soft;
  CHECK((mmse_detect(y, g, c, 0.0).z_soft - zf).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((mmse_detect(y, g, c, 1e-8).z_soft - zf).cwiseAbs().maxCoeff() < 1e-6);
  CHECK(mmse_detect(y, g, c, 0.3).z_hat == slice(mmse_detect(y, g, c, 0.3).z_soft, c));
}

TEST_CASE("error-rate ordering on a conditioned n=8 channel") {
  const Constellation c(5);
  RngStream rng(2024, 0);
  const ChannelModel g = generate_channel(rng, 8, ConditionRange{10, 25});
  EvalOptions opt;
  opt.snr_db = {12.0, 18.0, 22.0};
  opt.max_trials = 4000;
  opt.min_errors = 1000000;
  opt.bayes_column = false;
  opt.workers = 1;
  const auto zf = make_detector("zf", g, c);
  const auto mmse = make_detector("mmse", g, c);
  const auto mld = make_detector("mld", g, c);
  const auto zf_vs_mld = compare_paired(*zf, *mld, g, c, opt.snr_db, opt.max_trials, 9);
  for (const auto& p : zf_vs_mld) {
    CHECK(p.errors_a > p.errors_b);
    CHECK(p.p_a_worse < 0.05);
  }
  const auto mmse_vs_zf = compare_paired(*mmse, *zf, g, c, {12.0}, opt.max_trials, 9);
  CHECK(mmse_vs_zf[0].errors_a <= mmse_vs_zf[0].errors_b);
  CHECK(mmse_vs_zf[0].p_b_worse < 0.05);
}
