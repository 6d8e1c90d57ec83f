#include <cmath>

#include "doctest.h"
#include "mlmimo/channel.hpp"

using namespace mlmimo;

TEST_CASE("constellation levels") {
  CHECK(Constellation(5).levels() == std::vector<int>{-2, -1, 0, 1, 2});
  CHECK(Constellation(4).levels() == std::vector<int>{-2, -1, 0, 1});
  CHECK(Constellation(2).levels() == std::vector<int>{-1, 0});
  CHECK(Constellation(1).levels() == std::vector<int>{0});
  CHECK(Constellation(5).mean_energy() == doctest::Approx(2.0));
  CHECK(Constellation(0, 2).levels() == std::vector<int>{0, 1});
  CHECK_THROWS_AS(Constellation(0), InvalidConfig);
}

TEST_CASE("sample_message") {
  RngStream rng(42, 0);
  const IntRowVector z = sample_message(rng, Constellation(1), 6);
  CHECK(z == IntRowVector::Zero(6));

  RngStream a(42, 0), b(42, 0);
  CHECK(sample_message(a, Constellation(5), 8) == sample_message(b, Constellation(5), 8));

  // 10^6 symbols: each level within 3 sigma of 0.2.
  RngStream rng2(1, 2);
  std::vector<long> hist(5, 0);
  const long draws = 125000;
  for (long i = 0; i < draws; ++i) {
    const IntRowVector m = sample_message(rng2, Constellation(5), 8);
    for (int j = 0; j < 8; ++j) ++hist[static_cast<std::size_t>(m(j) + 2)];
  }
  const double total = draws * 8.0;
  for (long h : hist) CHECK(std::abs(h / total - 0.2) < 3 * std::sqrt(0.2 * 0.8 / total));
}

TEST_CASE("transmit") {
  ChannelModel eye(Matrix::Identity(2, 2));
  RngStream rng(1, 0);
  const RowVector y = transmit(IntRowVector{{1, -2}}, eye, NoiseSpec{0.0}, rng);
  CHECK(y == RowVector{{1.0, -2.0}});

  RngStream grng(3, 0);
  const ChannelModel g = generate_channel(grng, 4);
  const IntRowVector z{{1, 0, -2, 2}};
  CHECK(transmit(z, g, NoiseSpec{1e-300}, rng) == z.cast<double>() * g.g());
  CHECK_THROWS_AS(transmit(IntRowVector{{1, 0}}, g, NoiseSpec{0.1}, rng), DimensionMismatch);

  const double sigma = 0.7;
  double acc = 0.0;
  const int trials = 100000;
  for (int t = 0; t < trials; ++t) acc += (transmit(z, g, NoiseSpec{sigma}, rng) - z.cast<double>() * g.g()).squaredNorm();
  CHECK(std::abs(acc / trials / 4 / (sigma * sigma) - 1.0) < 0.02);
}

TEST_CASE("snr_to_sigma") {
  ChannelModel eye(Matrix::Identity(4, 4));
  const Constellation c(5);
  CHECK(snr_to_sigma(10 * std::log10(2.0), c, eye).sigma == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(snr_to_sigma(3.0103, c, eye).sigma == doctest::Approx(1.0).epsilon(1e-5));
  double prev = INFINITY;
  for (double s = -20; s <= 60; s += 5) {
    const double sigma = snr_to_sigma(s, c, eye).sigma;
    CHECK(sigma < prev);
    prev = sigma;
    CHECK(sigma_to_snr(sigma, c, eye) == doctest::Approx(s));
  }
  ChannelModel twice(Matrix(2.0 * Matrix::Identity(4, 4)));
  CHECK(snr_to_sigma(7.0, c, twice).sigma == doctest::Approx(2.0 * snr_to_sigma(7.0, c, eye).sigma));
  // Relabelings with equal E_s give the same sigma.
  CHECK(snr_to_sigma(5.0, Constellation(-1, 2), eye).sigma == snr_to_sigma(5.0, Constellation(0, 2), eye).sigma);
}

TEST_CASE("generate_channel") {
  RngStream rng(7, 0);
  const ChannelModel g = generate_channel(rng, 8, ConditionRange{10, 25});
  const double k = condition_number(g.g());
  CHECK(k >= 10.0);
  CHECK(k <= 25.0);

  RngStream a(9, 1), b(9, 1);
  CHECK(generate_channel(a, 2).g() == generate_channel(b, 2).g());

  RngStream s(10, 0);
  double sum = 0, sum2 = 0;
  const int count = 5000;
  for (int i = 0; i < count; ++i) {
    const Matrix m = generate_channel(s, 4).g();
    sum += m.sum();
    sum2 += m.squaredNorm();
  }
  const double entries = count * 16.0;
  CHECK(std::abs(sum / entries) < 0.02);
  CHECK(std::abs(sum2 / entries - 1.0) < 0.02);

  RngStream r(1, 1);
  CHECK_THROWS_AS(generate_channel(r, 4, ConditionRange{1.0, 1.0 + 1e-9}), RejectionBudgetExceeded);
}

TEST_CASE("channel model caches") {
  RngStream rng(4, 0);
  const ChannelModel g = generate_channel(rng, 5);
  CHECK(g.gt() == g.g().transpose());
  CHECK((g.ggt() - g.g() * g.g().transpose()).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((g.g() * g.g_inv() - Matrix::Identity(5, 5)).cwiseAbs().maxCoeff() < 1e-10);
  const QrFactors& qr = g.qr_of_gt();
  CHECK((qr.q * qr.r - g.gt()).cwiseAbs().maxCoeff() < 1e-10);
  Matrix s(2, 2);
  s << 1, 2, 2, 4;
  CHECK_THROWS_AS(ChannelModel{s}, SingularMatrix);
}

TEST_CASE("diagnostics") {
  const ChannelDiagnostics id = diagnostics(ChannelModel(Matrix::Identity(3, 3)));
  CHECK(id.condition == doctest::Approx(1.0));
  CHECK(std::abs(id.hermite_db) < 1e-12);

  CHECK(std::abs(diagnostics(ChannelModel(Matrix(2.0 * Matrix::Identity(2, 2)))).hermite_db) < 1e-12);

  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 1;
  d(1, 1) = 4;
  // λ1 = 1, |det| = 4: 10·log10(1 / 4^(2/2)).
  CHECK(diagnostics(ChannelModel(d)).hermite_db == doctest::Approx(10 * std::log10(0.25)));

  RngStream rng(6, 0);
  const ChannelModel g = generate_channel(rng, 6);
  const double h = diagnostics(g).hermite_db;
  CHECK(diagnostics(ChannelModel(Matrix(-3.7 * g.g()))).hermite_db == doctest::Approx(h).epsilon(1e-9));

  CHECK(format_diagnostics(ChannelDiagnostics{17.0, -4.7}) == "condition=17 hermite_db=-4.7");
  RngStream big(1, 0);
  CHECK_THROWS_AS(diagnostics(generate_channel(big, 17)), DimensionTooLarge);
}

TEST_CASE("channel_id depends on every entry") {
  Matrix a = Matrix::Identity(3, 3);
  Matrix b = a;
  b(2, 1) = 1e-17;
  CHECK(channel_id(ChannelModel(a)) == channel_id(ChannelModel(a)));
  CHECK(channel_id(ChannelModel(a)) != channel_id(ChannelModel(b)));
}
