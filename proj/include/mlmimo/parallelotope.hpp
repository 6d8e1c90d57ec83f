#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "mlmimo/neuralnet.hpp"

namespace mlmimo {

// Lattice generated by the rows b_i of B, expressed in the standard
// coordinates e_i.
class LatticeBasis {
 public:
  explicit LatticeBasis(Matrix b) : lattice_(std::move(b)) {}

  int n() const noexcept { return lattice_.n(); }
  const Matrix& b() const noexcept { return lattice_.g(); }
  // Enumeration and inverse caches live in the channel model of the same matrix.
  const ChannelModel& lattice() const noexcept { return lattice_; }
  // Plateau spacing along e_n: e_n·b_n / ‖e_n‖².
  double tau() const { return b()(n() - 1, n() - 1); }

 private:
  ChannelModel lattice_;
};

struct ParallelotopePoint {
  RowVector y_reduced;  // first n − 1 coordinates of y − t·B
  IntRowVector t;       // floor(y·B⁻¹)
  RowVector y_prime;    // full y − t·B
};

// t = floor(y·B⁻¹), y′ = y − t·B.
ParallelotopePoint mod_parallelotope(const RowVector& y, const LatticeBasis& basis);

// n-th coefficient of the unconstrained closest lattice point.
int nth_cvp_coefficient(const RowVector& y, const LatticeBasis& basis);

inline constexpr int kMaxExactOracleDimension = 8;

// Height h along e_n at which the closest lattice point to (y_reduced, h)
// switches its n-th coefficient from 0 to 1. Bisection to 1e-9 on
// [0, 2‖b_n‖]; throws NoTransitionFound when the coefficient does not cross.
double boundary_oracle_exact(const RowVector& y_reduced, const LatticeBasis& basis);

using BoundaryFunction = std::function<double(const RowVector&)>;

BoundaryFunction exact_boundary(const LatticeBasis& basis);
BoundaryFunction regressor_boundary(Regressor net);

struct ComponentDecision {
  int level = 0;              // clamped to the constellation
  long long coefficient = 0;  // t_n + 1 + floor((y_n − u)/τ) before clamping
  double soft = 0.0;          // multilevel sigmoid of (y_n − u) with plateau spacing τ
};

// Back-translates the boundary height, u = g(y′) + Σ t_i·B[i][n], and reads the
// n-th component off the staircase of period τ.
ComponentDecision detect_component(const RowVector& y, const LatticeBasis& basis, const Constellation& c,
                                   const BoundaryFunction& boundary);

// Basis and point with component j moved into last position (rows and
// columns of B permuted together).
LatticeBasis component_basis(const LatticeBasis& basis, int j);
RowVector component_point(const RowVector& y, int j);

// Convenience loop: each component is moved into last position (rows and
// columns of B permuted together) and detected with the exact oracle.
IntRowVector detect_all_exact(const RowVector& y, const LatticeBasis& basis, const Constellation& c);

// Operational quasi-Voronoi test on random probes y′ ∈ P: along e_n the n-th
// CVP coefficient must start at 0, never decrease and step 0 → 1 exactly once
// inside the bisection bracket, and the staircase decision must match CVP at
// the probe itself.
struct ScreenReport {
  int probes = 0;
  int failures = 0;
  bool passed() const { return failures == 0; }
};

ScreenReport screen_basis(const LatticeBasis& basis, int probes = 10000, std::uint64_t seed = 1);

struct BoundaryTrainingConfig {
  int samples = 2000;
  std::vector<int> hidden{16};
  int steps = 2000;
  double learning_rate = 1e-2;
  int log_every = 100;
  std::uint64_t seed = 1;
};

struct BoundaryTrainingResult {
  Regressor net;
  std::vector<std::pair<int, double>> rms_log;  // (step, training RMS)
};

// Full-batch Adam on (y_reduced, exact boundary) pairs with y′ uniform in P.
BoundaryTrainingResult boundary_mlp_train(const LatticeBasis& basis, const BoundaryTrainingConfig& cfg);
double boundary_mlp_eval(const Regressor& net, const RowVector& y_reduced);

}  // namespace mlmimo
