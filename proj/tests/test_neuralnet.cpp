#include <cmath>

#include "doctest.h"
#include "mlmimo/neuralnet.hpp"
#include "mlmimo/twin.hpp"
#include "oracles.hpp"

using namespace mlmimo;

namespace {

Batch random_batch(const ChannelModel& model, const Constellation& c, int rows, std::uint64_t seed) {
  RngStream rng(seed, 0);
  Batch b;
  b.y.resize(rows, model.n());
  b.labels.resize(rows, model.n());
  b.z0.resize(rows, model.n());
  for (int r = 0; r < rows; ++r) {
    const IntRowVector z = sample_message(rng, c, model.n());
    b.labels.row(r) = z;
    b.y.row(r) = transmit(z, model, NoiseSpec{0.3}, rng);
    b.z0.row(r) = random_init_point(rng, c, model.n());
  }
  return b;
}

}  // namespace

TEST_CASE("sigma_c: five-level form") {
  const MultilevelSigmoid act = default_activation(Constellation(5));
  CHECK(act.shifts() == std::vector<double>{-15, -5, 5, 15, 25});
  CHECK(act.offset() == -2.0);
  CHECK(sigma_c(act, 0.0) == doctest::Approx(oracles::logistic(-25.0)).epsilon(1e-6));
  CHECK(std::abs(sigma_c(act, 0.0)) < 1e-10);
  CHECK(sigma_c(act, -10.0) == doctest::Approx(-1.0).epsilon(1e-6));
  CHECK(sigma_c(act, 10.0) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(sigma_c(act, -1e6) == -2.0);
  CHECK(sigma_c(act, 1e6) == 3.0);
  for (double t = -40; t <= 40; t += 0.37)
    CHECK(sigma_c(act, t) == doctest::Approx(oracles::staircase({-15, -5, 5, 15, 25}, -2, t)).epsilon(1e-12));
}

TEST_CASE("default_activation: generic construction") {
  const MultilevelSigmoid two = default_activation(Constellation(0, 2));
  CHECK(two.shifts() == std::vector<double>{5});
  CHECK(two.offset() == 0.0);
  const MultilevelSigmoid three = default_activation(Constellation(3));
  CHECK(three.shifts() == std::vector<double>{-5, 5});
  CHECK(three.offset() == -1.0);
  CHECK(std::abs(sigma_c(three, 0.0)) < 1e-4);
  CHECK_THROWS_AS(default_activation(Constellation(1)), InvalidConfig);
}

TEST_CASE("sigma_c: monotone, plateaus, derivative") {
  for (int m : {2, 3, 4, 5, 7}) {
    const Constellation c(m);
    const MultilevelSigmoid act = default_activation(c);
    double prev = -INFINITY;
    for (double t = -100; t <= 100; t += 0.05) {
      const double v = act(t);
      CHECK(v >= prev);
      prev = v;
      const double fd = (act(t + 1e-6) - act(t - 1e-6)) / 2e-6;
      CHECK(act.derivative(t) == doctest::Approx(fd).epsilon(1e-5));
    }
    for (int level : c.levels()) CHECK(std::abs(act(act.level_scale() * level) - level) < 2e-2);
  }
  CHECK_THROWS_AS(MultilevelSigmoid({1.0, 1.0}, 0.0), InvalidConfig);
}

TEST_CASE("forward: zero weights give sigma_c(0) everywhere") {
  const Constellation c(5);
  RngStream rng(1, 0);
  const ChannelModel g = generate_channel(rng, 3);
  DetectorNetwork net = make_detector_network({3, 4, 6}, c, 1);
  net.blocks = zero_blocks_like(net);
  const auto zs = forward(net, RowVector{{1.0, -2.0, 0.3}}, g, RowVector{{0.5, 0.5, -1.0}}, RowVector::Zero(3));
  REQUIRE(zs.size() == 4);
  for (const RowVector& z : zs)
    for (int i = 0; i < 3; ++i) CHECK(z(i) == sigma_c(net.activation, 0.0));
}

TEST_CASE("forward: hand-built projected-gradient step") {
  // ẑ1 = σ_c(10·ξ), ξ = σ_c(10·u), u = ẑ0 − 2η(ẑ0·GGᵀ − y·Gᵀ), on a 2x2 channel.
  const Constellation c(5);
  Matrix gm(2, 2);
  gm << 1.0, 0.3, -0.2, 0.8;
  const ChannelModel g(gm);
  const double eta = 0.25;
  DetectorNetwork net = make_detector_network({2, 1, 2}, c, 3);
  net.blocks = zero_blocks_like(net);
  IterationBlock& b = net.blocks[0];
  b.w1_a = 10.0 * Matrix::Identity(2, 2);
  b.w1_b = 10.0 * 2.0 * eta * Matrix::Identity(2, 2);
  b.w1_c = -10.0 * 2.0 * eta * Matrix::Identity(2, 2);
  b.w2 = 10.0 * Matrix::Identity(2, 2);

  const RowVector y{{0.7, -1.1}};
  const RowVector z0{{0.2, -0.4}};
  // Hand computation with plain loops.
  const double ggt[2][2] = {{1.0 * 1.0 + 0.3 * 0.3, 1.0 * -0.2 + 0.3 * 0.8}, {-0.2 * 1.0 + 0.8 * 0.3, 0.04 + 0.64}};
  const double ygt[2] = {0.7 * 1.0 + -1.1 * 0.3, 0.7 * -0.2 + -1.1 * 0.8};
  const std::vector<double> shifts{-15, -5, 5, 15, 25};
  for (int i = 0; i < 2; ++i) {
    const double zg = z0(0) * ggt[0][i] + z0(1) * ggt[1][i];
    const double u = z0(i) - 2.0 * eta * (zg - ygt[i]);
    const double xi = oracles::staircase(shifts, -2, 10.0 * u);
    const double expected = oracles::staircase(shifts, -2, 10.0 * xi);
    const auto zs = forward(net, y, g, z0, RowVector::Zero(2));
    CHECK(zs[0](i) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("forward: deterministic, bounded, batch-consistent") {
  const Constellation c(5);
  RngStream rng(2, 0);
  const ChannelModel g = generate_channel(rng, 4);
  const DetectorNetwork net = make_detector_network({4, 3, 16}, c, 9);
  const Batch b = random_batch(g, c, 50, 4);
  const Matrix final_batch = forward_final(net, b.y, g, b.z0);
  for (int r = 0; r < 50; ++r) {
    const auto a1 = forward(net, b.y.row(r), g, b.z0.row(r), RowVector::Zero(4));
    const auto a2 = forward(net, b.y.row(r), g, b.z0.row(r), RowVector::Zero(4));
    for (std::size_t k = 0; k < a1.size(); ++k) {
      CHECK(a1[k] == a2[k]);
      CHECK(a1[k].minCoeff() >= net.activation.lower());
      CHECK(a1[k].maxCoeff() <= net.activation.upper());
    }
    CHECK((a1.back() - final_batch.row(r)).cwiseAbs().maxCoeff() < 1e-12);
  }
  CHECK_THROWS_AS(forward(net, RowVector::Zero(3), g, RowVector::Zero(3), RowVector::Zero(3)), DimensionMismatch);
}

TEST_CASE("loss fixtures") {
  const Constellation c(3);  // σ_c(0) = 0 for this construction
  const ChannelModel g(Matrix::Identity(2, 2));
  DetectorNetwork net = make_detector_network({2, 1, 3}, c, 1);
  net.blocks = zero_blocks_like(net);
  Batch b;
  b.y = Matrix::Zero(1, 2);
  b.z0 = Matrix::Zero(1, 2);
  b.labels = IntMatrix::Zero(1, 2);
  CHECK(loss(net, b, g) < 1e-30);
  const Gradient zero = backward(net, b, g);
  CHECK(pack_parameters(zero.blocks).cwiseAbs().maxCoeff() < 1e-15);

  b.labels(0, 0) = -1;  // ẑ1 = z + (1, 0)
  CHECK(loss(net, b, g) == doctest::Approx(1.0));
}

TEST_CASE("backward: dead paths have zero gradient") {
  const Constellation c(5);
  RngStream rng(3, 0);
  const ChannelModel g = generate_channel(rng, 2);
  const DetectorNetwork net = make_detector_network({2, 1, 4}, c, 5);
  const Gradient gr = backward(net, random_batch(g, c, 20, 8), g);
  CHECK(gr.blocks[0].w1_d.isZero(0.0));
  CHECK(gr.blocks[0].w3.isZero(0.0));
  CHECK(gr.blocks[0].bias3.isZero(0.0));
  CHECK(!gr.blocks[0].w1_a.isZero(0.0));
}

TEST_CASE("backward matches central finite differences") {
  RngStream rng(4, 0);
  const ChannelModel g = generate_channel(rng, 2);
  for (OutputHead head : {OutputHead::multilevel, OutputHead::one_hot}) {
    for (HiddenActivation hidden : {HiddenActivation::multilevel, HiddenActivation::sigmoid}) {
      const Constellation c(5);
      const DetectorNetwork net = make_detector_network({2, 2, 4, head, hidden}, c, 21);
      const oracles::GradientCheck chk = oracles::finite_difference_check(net, random_batch(g, c, 8, 3), g);
      CAPTURE(to_string(head));
      CAPTURE(to_string(hidden));
      CHECK(chk.max_rel_error < 1e-5);
    }
  }
}

TEST_CASE("backward: chunked batch equals the sum of its parts") {
  const Constellation c(5);
  RngStream rng(5, 0);
  const ChannelModel g = generate_channel(rng, 3);
  const DetectorNetwork net = make_detector_network({3, 2, 6}, c, 2);
  const Batch big = random_batch(g, c, 5000, 1);
  const Gradient gr = backward(net, big, g);
  CHECK(gr.loss == doctest::Approx(loss(net, big, g)).epsilon(1e-12));
  const Gradient again = backward(net, big, g);
  CHECK(pack_parameters(gr.blocks) == pack_parameters(again.blocks));
}

TEST_CASE("adam_step") {
  Eigen::VectorXd p = Eigen::VectorXd::Zero(3);
  Eigen::VectorXd gvec(3);
  gvec << 0.5, -2.0, 1e-3;
  AdamState st = make_adam_state(3, 0.01);
  adam_step(p, gvec, st);
  for (int i = 0; i < 3; ++i)
    CHECK(p(i) == doctest::Approx(-0.01 * gvec(i) / (std::abs(gvec(i)) + 1e-8)).epsilon(1e-12));

  Eigen::VectorXd q = Eigen::VectorXd::Constant(3, 1.5);
  AdamState z = make_adam_state(3, 0.01);
  adam_step(q, Eigen::VectorXd::Zero(3), z);
  CHECK(q == Eigen::VectorXd::Constant(3, 1.5));

  Eigen::VectorXd a = Eigen::VectorXd::Ones(3), b = a;
  AdamState sa = make_adam_state(3), sb = make_adam_state(3);
  for (int s = 0; s < 10; ++s) {
    adam_step(a, gvec * s, sa);
    adam_step(b, gvec * s, sb);
  }
  CHECK(a == b);
}

TEST_CASE("loss decreases under Adam on a tiny task") {
  const Constellation c(0, 2);
  RngStream rng(6, 0);
  const ChannelModel g = generate_channel(rng, 2);
  DetectorNetwork net = make_detector_network({2, 2, 8}, c, 4);
  const Batch b = random_batch(g, c, 200, 6);
  const double before = loss(net, b, g);
  Eigen::VectorXd p = pack_parameters(net.blocks);
  AdamState st = make_adam_state(p.size(), 1e-2);
  for (int s = 0; s < 100; ++s) {
    adam_step(p, pack_parameters(backward(net, b, g).blocks), st);
    unpack_parameters(net.blocks, p);
  }
  CHECK(loss(net, b, g) < 0.8 * before);
}

TEST_CASE("count_parameters reproduces the stated sizes") {
  const int n = 8;
  CHECK(count_parameters(NetworkShape{n, 1, 7 * n}).weights_only == 42 * n * n);
  CHECK(count_parameters(NetworkShape{n, 1, 7 * n}).weights_only == 2688);
  const ParameterCount large = count_parameters(NetworkShape{n, 3, 4 * n});
  CHECK(large.weights_only == 3 * 24 * n * n);
  CHECK(large.weights_only == 4608);
  CHECK(large.with_biases == 4752);
  const ParameterCount twin_half = count_parameters(NetworkShape{n, 10, 7 * n});
  CHECK(2 * twin_half.weights_only == 2 * 10 * 42 * n * n);
  const DetectorNetwork net = make_detector_network({n, 3, 4 * n}, Constellation(5), 1);
  CHECK(pack_parameters(net.blocks).size() == large.with_biases);
  const DetectorNetwork oh = make_detector_network({n, 2, 4 * n, OutputHead::one_hot}, Constellation(5), 1);
  CHECK(pack_parameters(oh.blocks).size() == count_parameters(oh).with_biases);
}

TEST_CASE("one-hot head") {
  const Matrix equal = Matrix::Zero(2, 6);
  const Matrix p = grouped_softmax(equal, 3);
  CHECK((p.array() - 1.0 / 3.0).abs().maxCoeff() < 1e-15);
  Matrix sat = Matrix::Zero(1, 3);
  sat(0, 1) = 50.0;
  CHECK(grouped_softmax(sat, 3)(0, 1) == doctest::Approx(1.0).epsilon(1e-15));

  const Constellation c(3);
  RngStream rng(7, 0);
  const ChannelModel g = generate_channel(rng, 2);
  DetectorNetwork net = make_detector_network({2, 2, 4, OutputHead::one_hot}, c, 3);
  net.blocks = zero_blocks_like(net);
  net.blocks[1].bias2 << 0, 0, 50, 0, 50, 0;  // group 0 → level 1, group 1 → level 0
  const OneHotOutput out = one_hot_head_forward(net, RowVector{{0.1, 0.2}}, g, RowVector::Zero(2));
  CHECK(out.decision == IntRowVector{{1, 0}});
  CHECK((out.probabilities.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-12);
  DetectorNetwork ml = make_detector_network({2, 2, 4}, c, 3);
  CHECK_THROWS_AS(one_hot_head_forward(ml, RowVector::Zero(2), g, RowVector::Zero(2)), InvalidConfig);
}
