#include <cmath>
#include <limits>

#include "doctest.h"
#include "mlmimo/classic.hpp"
#include "mlmimo/mld.hpp"

using namespace mlmimo;

namespace {

// Exhaustive search over the integer box [-r, r]^n, zero vector optional.
IntRowVector box_argmin(const RowVector& y, const Matrix& g, int r, bool exclude_zero) {
  const int n = static_cast<int>(g.rows());
  IntRowVector z = IntRowVector::Constant(n, -r), best = z;
  double best_d = std::numeric_limits<double>::infinity();
  while (true) {
    if (!(exclude_zero && z.isZero())) {
      const double d = (y - z.cast<double>() * g).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = z;
      }
    }
    int i = n - 1;
    while (i >= 0 && z(i) == r) z(i--) = -r;
    if (i < 0) break;
    ++z(i);
  }
  return best;
}

}  // namespace

TEST_CASE("exhaustive_search fixtures") {
  const Constellation c3(3);
  CHECK(exhaustive_search(RowVector{{0.6, -1.4}}, ChannelModel(Matrix::Identity(2, 2)), c3).z_hat ==
        IntRowVector{{1, -1}});
  Matrix g(2, 2);
  g << 2, 0, 1, 1;
  const ChannelModel m(g);
  const DetectionResult r = exhaustive_search(RowVector{{2.6, 0.2}}, m, c3);
  CHECK(r.z_hat == IntRowVector{{1, 0}});
  CHECK(squared_distance(RowVector{{2.6, 0.2}}, r.z_hat, m) == doctest::Approx(0.40));

  RngStream rng(1, 0);
  const ChannelModel big = generate_channel(rng, 11);
  CHECK_THROWS_AS(exhaustive_search(RowVector::Zero(11), big, Constellation(5)), SearchSpaceTooLarge);
}

TEST_CASE("exhaustive_search ties break lexicographically") {
  // y halfway between levels 0 and 1 on G = I: both are optimal.
  const DetectionResult r = exhaustive_search(RowVector{{0.5, -0.5}}, ChannelModel(Matrix::Identity(2, 2)), Constellation(3));
  CHECK(r.z_hat == IntRowVector{{0, -1}});
  CHECK(sphere_decode(RowVector{{0.5, -0.5}}, ChannelModel(Matrix::Identity(2, 2)), Constellation(3)).z_hat == r.z_hat);
}

TEST_CASE("sphere_decode equals exhaustive_search") {
  RngStream rng(77, 0);
  int mismatches = 0;
  for (int t = 0; t < 2000; ++t) {
    const int n = rng.uniform_int(2, 4);
    const Constellation c(2 + rng.uniform_int(0, 3));
    const ChannelModel g = generate_channel(rng, n);
    const IntRowVector z = sample_message(rng, c, n);
    const double sigma = std::pow(10.0, rng.uniform(-2.0, 0.5));
    const RowVector y = transmit(z, g, NoiseSpec{sigma}, rng);
    if (sphere_decode(y, g, c).z_hat != exhaustive_search(y, g, c).z_hat) ++mismatches;
  }
  CHECK(mismatches == 0);
}

TEST_CASE("sphere_decode: noiseless n=8, scale invariance, box constraint") {
  RngStream rng(8, 0);
  const Constellation c(5);
  const ChannelModel g = generate_channel(rng, 8);
  const ChannelModel g2(Matrix(2.5 * g.g()));
  int wrong = 0;
  for (int t = 0; t < 10000; ++t) {
    const IntRowVector z = sample_message(rng, c, 8);
    if (sphere_decode(z.cast<double>() * g.g(), g, c).z_hat != z) ++wrong;
  }
  CHECK(wrong == 0);
  for (int t = 0; t < 300; ++t) {
    RowVector y(8);
    for (int i = 0; i < 8; ++i) y(i) = 6.0 * rng.gaussian();
    const IntRowVector a = sphere_decode(y, g, c).z_hat;
    CHECK(a == sphere_decode(2.5 * y, g2, c).z_hat);
    CHECK(a == sphere_decode(y, g, c).z_hat);
    for (int i = 0; i < 8; ++i) CHECK(c.contains(a(i)));
  }
}

TEST_CASE("shortest_vector") {
  CHECK(shortest_vector(ChannelModel(Matrix::Identity(3, 3))).norm == doctest::Approx(1.0));
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 1;
  d(1, 1) = 4;
  const ShortestVector sv = shortest_vector(ChannelModel(d));
  CHECK(sv.norm == doctest::Approx(1.0));
  CHECK(std::abs(sv.coefficients(0)) == 1);
  CHECK(sv.coefficients(1) == 0);

  Matrix hex(2, 2);
  hex << 1, 0, 0.5, 0.8660254;
  const ShortestVector h = shortest_vector(ChannelModel(hex));
  const IntRowVector ref = box_argmin(RowVector::Zero(2), hex, 3, true);
  CHECK(h.norm == doctest::Approx((ref.cast<double>() * hex).norm()));
  CHECK(h.norm == doctest::Approx(1.0).epsilon(1e-6));

  RngStream rng(2, 0);
  for (int t = 0; t < 50; ++t) {
    const ChannelModel g = generate_channel(rng, 3);
    const IntRowVector b = box_argmin(RowVector::Zero(3), g.g(), 4, true);
    const ShortestVector sv = shortest_vector(g);
    CHECK(sv.norm == doctest::Approx((sv.coefficients.cast<double>() * g.g()).norm()));
    CHECK(sv.norm <= (b.cast<double>() * g.g()).norm() + 1e-12);
    if (sv.coefficients.cwiseAbs().maxCoeff() <= 4) CHECK(sv.norm == doctest::Approx((b.cast<double>() * g.g()).norm()));
  }
}

TEST_CASE("closest_vector matches a box search") {
  RngStream rng(3, 0);
  for (int t = 0; t < 200; ++t) {
    const ChannelModel g = generate_channel(rng, 3);
    RowVector y(3);
    for (int i = 0; i < 3; ++i) y(i) = 3.0 * rng.gaussian();
    const IntRowVector ours = closest_vector(y, g);
    const IntRowVector ref = box_argmin(y, g.g(), 6, false);
    const double d_ours = (y - ours.cast<double>() * g.g()).squaredNorm();
    const double d_ref = (y - ref.cast<double>() * g.g()).squaredNorm();
    CHECK(d_ours <= d_ref + 1e-9);
    if (ours.cwiseAbs().maxCoeff() <= 6) CHECK(d_ours == doctest::Approx(d_ref));
  }
}
