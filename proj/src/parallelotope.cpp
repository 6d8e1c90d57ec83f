#include "mlmimo/parallelotope.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mlmimo/mld.hpp"

namespace mlmimo {

ParallelotopePoint mod_parallelotope(const RowVector& y, const LatticeBasis& basis) {
  const int n = basis.n();
  if (y.size() != n) throw DimensionMismatch("mod_parallelotope: point dimension mismatch");
  const RowVector coords = y * basis.lattice().g_inv();
  ParallelotopePoint p;
  p.t.resize(n);
  for (int i = 0; i < n; ++i) p.t(i) = static_cast<int>(std::floor(coords(i)));
  p.y_prime = y - p.t.cast<double>() * basis.b();
  p.y_reduced = p.y_prime.head(n - 1);
  return p;
}

int nth_cvp_coefficient(const RowVector& y, const LatticeBasis& basis) {
  return closest_vector(y, basis.lattice())(basis.n() - 1);
}

namespace {

RowVector with_height(const RowVector& y_reduced, double h) {
  RowVector p(y_reduced.size() + 1);
  p.head(y_reduced.size()) = y_reduced;
  p(y_reduced.size()) = h;
  return p;
}

double bracket_top(const LatticeBasis& basis) { return 2.0 * basis.b().row(basis.n() - 1).norm(); }

}  // namespace

double boundary_oracle_exact(const RowVector& y_reduced, const LatticeBasis& basis) {
  const int n = basis.n();
  if (n > kMaxExactOracleDimension) throw DimensionTooLarge("boundary_oracle_exact: n must be at most 8");
  if (y_reduced.size() != n - 1) throw DimensionMismatch("boundary_oracle_exact: expected n - 1 coordinates");
  double lo = 0.0;
  double hi = bracket_top(basis);
  if (nth_cvp_coefficient(with_height(y_reduced, lo), basis) >= 1 ||
      nth_cvp_coefficient(with_height(y_reduced, hi), basis) < 1)
    throw NoTransitionFound("n-th coefficient does not step from 0 to 1 inside [0, 2|b_n|]");
  while (hi - lo > 1e-9) {
    const double mid = 0.5 * (lo + hi);
    (nth_cvp_coefficient(with_height(y_reduced, mid), basis) >= 1 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

BoundaryFunction exact_boundary(const LatticeBasis& basis) {
  return [&basis](const RowVector& y_reduced) { return boundary_oracle_exact(y_reduced, basis); };
}

BoundaryFunction regressor_boundary(Regressor net) {
  return [net = std::move(net)](const RowVector& y_reduced) { return regressor_eval(net, y_reduced); };
}

ComponentDecision detect_component(const RowVector& y, const LatticeBasis& basis, const Constellation& c,
                                   const BoundaryFunction& boundary) {
  const int n = basis.n();
  const ParallelotopePoint p = mod_parallelotope(y, basis);
  double u = boundary(p.y_reduced);
  for (int i = 0; i < n; ++i) u += p.t(i) * basis.b()(i, n - 1);
  const double tau = basis.tau();
  const double x = (y(n - 1) - u) / tau;

  ComponentDecision d;
  d.coefficient = static_cast<long long>(p.t(n - 1)) + 1 + static_cast<long long>(std::floor(x));
  d.level = static_cast<int>(std::clamp<long long>(d.coefficient, c.min_level(), c.max_level()));

  // One sigmoid per level transition, placed where t_n + 1 + floor(x) reaches it.
  // Transitions more than 5 units from x are saturated in double precision;
  // those below x are folded into the offset so wide alphabets stay cheap.
  const double scale = 10.0;
  const long long base = static_cast<long long>(p.t(n - 1)) + 1;
  const long long first = std::max<long long>(c.min_level() + 1, base + static_cast<long long>(std::floor(x)) - 5);
  const long long last = std::min<long long>(c.max_level(), base + static_cast<long long>(std::ceil(x)) + 5);
  std::vector<double> shifts;
  for (long long level = first; level <= last; ++level) shifts.push_back(scale * static_cast<double>(level - base));
  const double offset = static_cast<double>(std::clamp<long long>(first - 1, c.min_level(), c.max_level()));
  d.soft = shifts.empty() ? offset : MultilevelSigmoid(shifts, offset, scale)(scale * x);
  return d;
}

namespace {

std::vector<int> component_order(int n, int j) {
  std::vector<int> order;
  for (int i = 0; i < n; ++i)
    if (i != j) order.push_back(i);
  order.push_back(j);
  return order;
}

}  // namespace

LatticeBasis component_basis(const LatticeBasis& basis, int j) {
  const int n = basis.n();
  const std::vector<int> order = component_order(n, j);
  Matrix pb(n, n);
  for (int r = 0; r < n; ++r)
    for (int col = 0; col < n; ++col)
      pb(r, col) = basis.b()(order[static_cast<std::size_t>(r)], order[static_cast<std::size_t>(col)]);
  return LatticeBasis(pb);
}

RowVector component_point(const RowVector& y, int j) {
  const int n = static_cast<int>(y.size());
  const std::vector<int> order = component_order(n, j);
  RowVector py(n);
  for (int r = 0; r < n; ++r) py(r) = y(order[static_cast<std::size_t>(r)]);
  return py;
}

IntRowVector detect_all_exact(const RowVector& y, const LatticeBasis& basis, const Constellation& c) {
  const int n = basis.n();
  IntRowVector out(n);
  for (int j = 0; j < n; ++j) {
    const LatticeBasis permuted = component_basis(basis, j);
    out(j) = detect_component(component_point(y, j), permuted, c, exact_boundary(permuted)).level;
  }
  return out;
}

ScreenReport screen_basis(const LatticeBasis& basis, int probes, std::uint64_t seed) {
  const int n = basis.n();
  RngStream rng(seed, 0x736372656eULL);
  const double top = bracket_top(basis);
  constexpr int kGrid = 32;
  // Unbounded constellation: only the raw coefficient matters here.
  const Constellation wide(-1000000, 2000001);
  ScreenReport report;
  report.probes = probes;
  for (int p = 0; p < probes; ++p) {
    RowVector w(n);
    for (int i = 0; i < n; ++i) w(i) = rng.uniform();
    const RowVector y_prime = w * basis.b();
    const RowVector y_reduced = y_prime.head(n - 1);
    bool ok = true;
    int previous = nth_cvp_coefficient(with_height(y_reduced, 0.0), basis);
    int steps_up = 0;
    if (previous != 0) ok = false;
    for (int g = 1; ok && g <= kGrid; ++g) {
      const int coef = nth_cvp_coefficient(with_height(y_reduced, top * g / kGrid), basis);
      if (coef < previous) ok = false;
      if (previous == 0 && coef >= 1) {
        ++steps_up;
        if (coef != 1) ok = false;
      }
      previous = coef;
    }
    if (steps_up != 1) ok = false;
    if (ok) {
      try {
        const ComponentDecision d = detect_component(y_prime, basis, wide, exact_boundary(basis));
        ok = d.coefficient == nth_cvp_coefficient(y_prime, basis);
      } catch (const NoTransitionFound&) {
        ok = false;
      }
    }
    if (!ok) ++report.failures;
  }
  return report;
}

BoundaryTrainingResult boundary_mlp_train(const LatticeBasis& basis, const BoundaryTrainingConfig& cfg) {
  const int n = basis.n();
  if (n < 2) throw DimensionMismatch("boundary regressor needs n >= 2");
  if (cfg.samples < 1 || cfg.steps < 1) throw InvalidConfig("boundary training needs samples and steps");
  RngStream rng(cfg.seed, 0x626f756e64ULL);
  Matrix x(cfg.samples, n - 1);
  Eigen::VectorXd target(cfg.samples);
  int filled = 0;
  int attempts = 0;
  while (filled < cfg.samples) {
    if (++attempts > 100 * cfg.samples) throw NoTransitionFound("boundary oracle failed on most training probes");
    RowVector w(n);
    for (int i = 0; i < n; ++i) w(i) = rng.uniform();
    const RowVector y_reduced = (w * basis.b()).head(n - 1);
    try {
      target(filled) = boundary_oracle_exact(y_reduced, basis);
    } catch (const NoTransitionFound&) {
      continue;
    }
    x.row(filled++) = y_reduced;
  }

  BoundaryTrainingResult result{make_regressor(n - 1, cfg.hidden, cfg.seed), {}};
  Eigen::VectorXd params = pack_parameters(result.net);
  AdamState adam = make_adam_state(params.size(), cfg.learning_rate);
  Eigen::VectorXd grad;
  for (int step = 1; step <= cfg.steps; ++step) {
    const double mse = regressor_backward(result.net, x, target, grad);
    if (step == 1 || step % cfg.log_every == 0) result.rms_log.emplace_back(step - 1, std::sqrt(mse));
    adam_step(params, grad, adam);
    unpack_parameters(result.net, params);
  }
  const Eigen::VectorXd fit = regressor_forward(result.net, x);
  result.rms_log.emplace_back(cfg.steps, std::sqrt((fit - target).squaredNorm() / cfg.samples));
  return result;
}

double boundary_mlp_eval(const Regressor& net, const RowVector& y_reduced) { return regressor_eval(net, y_reduced); }

}  // namespace mlmimo
