#include "mlmimo/neuralnet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mlmimo/classic.hpp"

namespace mlmimo {

namespace {

constexpr Eigen::Index kChunkRows = 2048;

inline double logistic(double t) { return 1.0 / (1.0 + std::exp(-t)); }

}  // namespace

// ---------------------------------------------------------------------------
// Activation

MultilevelSigmoid::MultilevelSigmoid(std::vector<double> shifts, double offset, double level_scale)
    : shifts_(std::move(shifts)), offset_(offset), level_scale_(level_scale) {
  for (std::size_t i = 1; i < shifts_.size(); ++i)
    if (!(shifts_[i] > shifts_[i - 1])) throw InvalidConfig("multilevel sigmoid shifts must be strictly increasing");
  exp_shifts_.reserve(shifts_.size());
  for (double s : shifts_) exp_shifts_.push_back(std::exp(s));
}

void MultilevelSigmoid::evaluate(double t, double& value, double& deriv) const {
  // σ(t − τ) = 1 / (1 + e^τ·e^{−t}); one exponential serves every shift.
  const double et = std::exp(-t);
  value = offset_;
  deriv = 0.0;
  for (std::size_t i = 0; i < shifts_.size(); ++i) {
    const double e = std::isfinite(exp_shifts_[i]) ? exp_shifts_[i] * et : std::exp(shifts_[i] - t);
    const double s = 1.0 / (1.0 + e);
    value += s;
    deriv += s * (1.0 - s);
  }
}

double MultilevelSigmoid::operator()(double t) const {
  double v = 0.0;
  double d = 0.0;
  evaluate(t, v, d);
  return v;
}

double MultilevelSigmoid::derivative(double t) const {
  double v = 0.0;
  double d = 0.0;
  evaluate(t, v, d);
  return d;
}

double sigma_c(const MultilevelSigmoid& act, double t) { return act(t); }

MultilevelSigmoid default_activation(const Constellation& c, double level_scale) {
  if (c.size() < 2) throw InvalidConfig("default_activation: need at least two levels");
  if (c.size() == 5 && c.min_level() == -2 && level_scale == 10.0)
    return MultilevelSigmoid({-15.0, -5.0, 5.0, 15.0, 25.0}, -2.0, 10.0);
  std::vector<double> shifts;
  for (int i = 0; i + 1 < c.size(); ++i) shifts.push_back(level_scale * (c.level(i) + 0.5));
  return MultilevelSigmoid(std::move(shifts), c.min_level(), level_scale);
}

std::string to_string(OutputHead h) { return h == OutputHead::one_hot ? "one_hot" : "multilevel"; }
std::string to_string(HiddenActivation h) { return h == HiddenActivation::sigmoid ? "sigmoid" : "multilevel"; }

std::string to_string(InitPolicy p) {
  switch (p) {
    case InitPolicy::zero: return "zero";
    case InitPolicy::random: return "random";
    case InitPolicy::zf: return "zf";
  }
  return "zf";
}

InitPolicy parse_init_policy(const std::string& s) {
  if (s == "zero") return InitPolicy::zero;
  if (s == "random") return InitPolicy::random;
  if (s == "zf") return InitPolicy::zf;
  throw InvalidConfig("unknown init policy '" + s + "'");
}

OutputHead parse_output_head(const std::string& s) {
  if (s == "multilevel") return OutputHead::multilevel;
  if (s == "one_hot") return OutputHead::one_hot;
  throw InvalidConfig("unknown output head '" + s + "'");
}

HiddenActivation parse_hidden_activation(const std::string& s) {
  if (s == "multilevel") return HiddenActivation::multilevel;
  if (s == "sigmoid") return HiddenActivation::sigmoid;
  throw InvalidConfig("unknown hidden activation '" + s + "'");
}

// ---------------------------------------------------------------------------
// Construction

void DetectorNetwork::validate() const {
  const Eigen::Index n = shape.n;
  const Eigen::Index xi = shape.xi_size;
  const Eigen::Index out = output_width();
  if (shape.n < 1 || shape.iterations < 1 || shape.xi_size < 1)
    throw DimensionMismatch("network shape must have positive n, K and xi");
  if (static_cast<int>(blocks.size()) != shape.iterations)
    throw DimensionMismatch("network has " + std::to_string(blocks.size()) + " blocks, expected " +
                            std::to_string(shape.iterations));
  auto check = [](const Matrix& m, Eigen::Index r, Eigen::Index c, const char* what) {
    if (m.rows() != r || m.cols() != c) throw DimensionMismatch(std::string("block field ") + what + " has wrong shape");
    if (!m.allFinite()) throw Error(std::string("block field ") + what + " has non-finite entries");
  };
  auto check_vec = [](const RowVector& v, Eigen::Index len, const char* what) {
    if (v.size() != len) throw DimensionMismatch(std::string("block field ") + what + " has wrong length");
    if (!v.allFinite()) throw Error(std::string("block field ") + what + " has non-finite entries");
  };
  for (const auto& b : blocks) {
    check(b.w1_a, xi, n, "W1_a");
    check(b.w1_b, xi, n, "W1_b");
    check(b.w1_c, xi, n, "W1_c");
    check(b.w1_d, xi, n, "W1_d");
    check_vec(b.bias1, xi, "bias1");
    check(b.w2, out, xi, "W2");
    check_vec(b.bias2, out, "bias2");
    check(b.w3, n, xi, "W3");
    check_vec(b.bias3, n, "bias3");
  }
}

namespace {

Matrix glorot(RngStream& rng, Eigen::Index rows, Eigen::Index cols) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-limit, limit);
  return m;
}

}  // namespace

DetectorNetwork make_detector_network(const NetworkShape& shape, const Constellation& c, std::uint64_t seed) {
  DetectorNetwork net;
  net.shape = shape;
  net.constellation = c;
  net.activation = default_activation(c);
  net.seed = seed;
  RngStream rng(seed, 0x77e1647ULL);
  const int n = shape.n;
  const int xi = shape.xi_size;
  const int out = net.output_width();
  for (int k = 0; k < shape.iterations; ++k) {
    IterationBlock b;
    b.w1_a = glorot(rng, xi, n);
    b.w1_b = glorot(rng, xi, n);
    b.w1_c = glorot(rng, xi, n);
    b.w1_d = glorot(rng, xi, n);
    b.bias1 = RowVector::Zero(xi);
    b.w2 = glorot(rng, out, xi);
    b.bias2 = RowVector::Zero(out);
    b.w3 = glorot(rng, n, xi);
    b.bias3 = RowVector::Zero(n);
    net.blocks.push_back(std::move(b));
  }
  net.validate();
  return net;
}

std::vector<IterationBlock> zero_blocks_like(const DetectorNetwork& net) {
  std::vector<IterationBlock> out = net.blocks;
  for (auto& b : out) {
    for (Matrix* m : {&b.w1_a, &b.w1_b, &b.w1_c, &b.w1_d, &b.w2, &b.w3}) m->setZero();
    for (RowVector* v : {&b.bias1, &b.bias2, &b.bias3}) v->setZero();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Forward / backward

Matrix grouped_softmax(const Matrix& logits, int group) {
  Matrix p(logits.rows(), logits.cols());
  const Eigen::Index groups = logits.cols() / group;
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    for (Eigen::Index g = 0; g < groups; ++g) {
      const auto seg = logits.row(r).segment(g * group, group);
      const double mx = seg.maxCoeff();
      double sum = 0.0;
      for (int m = 0; m < group; ++m) sum += (p(r, g * group + m) = std::exp(seg(m) - mx));
      for (int m = 0; m < group; ++m) p(r, g * group + m) /= sum;
    }
  }
  return p;
}

namespace {

struct Trace {
  Matrix ygt;
  std::vector<Matrix> z;     // K + 1 estimates, z[0] is the initial point
  std::vector<Matrix> v;     // K + 1 hidden carries
  std::vector<Matrix> zggt;  // z[k]·GGᵀ
  std::vector<Matrix> xi;
  std::vector<Matrix> xi_deriv;
  std::vector<Matrix> out_deriv;  // multilevel head: σ_c' of the output pre-activation
  std::vector<Matrix> probs;      // one-hot head
};

void activate_hidden(const DetectorNetwork& net, Matrix& pre, Matrix& deriv) {
  deriv.resize(pre.rows(), pre.cols());
  if (net.shape.hidden == HiddenActivation::sigmoid) {
    for (Eigen::Index i = 0; i < pre.size(); ++i) {
      const double s = logistic(pre.data()[i]);
      pre.data()[i] = s;
      deriv.data()[i] = s * (1.0 - s);
    }
  } else {
    for (Eigen::Index i = 0; i < pre.size(); ++i) net.activation.evaluate(pre.data()[i], pre.data()[i], deriv.data()[i]);
  }
}

void check_inputs(const DetectorNetwork& net, const Matrix& y, const ChannelModel& model, const Matrix& z0) {
  if (model.n() != net.n()) throw DimensionMismatch("network n differs from channel dimension");
  if (y.cols() != net.n() || z0.cols() != net.n() || z0.rows() != y.rows())
    throw DimensionMismatch("received/initial batch shapes do not match the network");
}

Trace run_forward(const DetectorNetwork& net, const Matrix& y, const ChannelModel& model, const Matrix& z0,
                  const Matrix& v0) {
  const int k_count = net.iterations();
  const int levels = net.constellation.size();
  Trace tr;
  tr.ygt = y * model.gt();
  tr.z.reserve(k_count + 1);
  tr.v.reserve(k_count + 1);
  tr.z.push_back(z0);
  tr.v.push_back(v0);
  for (int k = 0; k < k_count; ++k) {
    const IterationBlock& b = net.blocks[static_cast<std::size_t>(k)];
    const Matrix& zk = tr.z[static_cast<std::size_t>(k)];
    tr.zggt.push_back(zk * model.ggt());
    Matrix a1 = zk * b.w1_a.transpose();
    a1.noalias() += tr.ygt * b.w1_b.transpose();
    a1.noalias() += tr.zggt.back() * b.w1_c.transpose();
    a1.noalias() += tr.v[static_cast<std::size_t>(k)] * b.w1_d.transpose();
    a1.rowwise() += b.bias1;
    Matrix d1;
    activate_hidden(net, a1, d1);
    Matrix a2 = a1 * b.w2.transpose();
    a2.rowwise() += b.bias2;
    Matrix vn = a1 * b.w3.transpose();
    vn.rowwise() += b.bias3;
    if (net.shape.head == OutputHead::multilevel) {
      Matrix d2(a2.rows(), a2.cols());
      for (Eigen::Index i = 0; i < a2.size(); ++i) net.activation.evaluate(a2.data()[i], a2.data()[i], d2.data()[i]);
      tr.z.push_back(std::move(a2));
      tr.out_deriv.push_back(std::move(d2));
    } else {
      Matrix p = grouped_softmax(a2, levels);
      Matrix zn = Matrix::Zero(p.rows(), net.n());
      for (Eigen::Index r = 0; r < p.rows(); ++r)
        for (int i = 0; i < net.n(); ++i)
          for (int m = 0; m < levels; ++m) zn(r, i) += p(r, i * levels + m) * net.constellation.level(m);
      tr.z.push_back(std::move(zn));
      tr.probs.push_back(std::move(p));
    }
    tr.xi.push_back(std::move(a1));
    tr.xi_deriv.push_back(std::move(d1));
    tr.v.push_back(std::move(vn));
  }
  return tr;
}

// Sum over the chunk of the per-sample loss (not yet divided by B).
double chunk_loss(const DetectorNetwork& net, const Trace& tr, const IntMatrix& labels) {
  const int k_count = net.iterations();
  const int levels = net.constellation.size();
  double total = 0.0;
  if (net.shape.head == OutputHead::multilevel) {
    const Matrix target = labels.cast<double>();
    for (int k = 1; k <= k_count; ++k) total += (tr.z[static_cast<std::size_t>(k)] - target).squaredNorm();
  } else {
    for (int k = 0; k < k_count; ++k) {
      const Matrix& p = tr.probs[static_cast<std::size_t>(k)];
      for (Eigen::Index r = 0; r < labels.rows(); ++r)
        for (int i = 0; i < net.n(); ++i) {
          const int idx = labels(r, i) - net.constellation.min_level();
          total -= std::log(std::max(p(r, i * levels + idx), std::numeric_limits<double>::min()));
        }
    }
  }
  return total / k_count;
}

void check_labels(const DetectorNetwork& net, const Batch& batch) {
  if (batch.labels.rows() != batch.y.rows() || batch.labels.cols() != net.n())
    throw DimensionMismatch("label batch shape does not match the network");
  for (Eigen::Index i = 0; i < batch.labels.size(); ++i)
    if (!net.constellation.contains(batch.labels.data()[i])) throw InvalidConfig("label outside the constellation");
}

void accumulate_gradient(const DetectorNetwork& net, const Trace& tr, const IntMatrix& labels,
                         const ChannelModel& model, double scale, std::vector<IterationBlock>& grad) {
  const int k_count = net.iterations();
  const int levels = net.constellation.size();
  const Eigen::Index rows = labels.rows();
  const Matrix target = labels.cast<double>();
  Matrix gz_next = Matrix::Zero(rows, net.n());
  Matrix gv_next = Matrix::Zero(rows, net.n());
  for (int k = k_count - 1; k >= 0; --k) {
    const auto ks = static_cast<std::size_t>(k);
    const IterationBlock& b = net.blocks[ks];
    IterationBlock& g = grad[ks];
    const Matrix& z_out = tr.z[ks + 1];
    Matrix ga2;
    if (net.shape.head == OutputHead::multilevel) {
      ga2 = (gz_next + 2.0 * scale * (z_out - target)).cwiseProduct(tr.out_deriv[ks]);
    } else {
      const Matrix& p = tr.probs[ks];
      ga2.resize(rows, p.cols());
      for (Eigen::Index r = 0; r < rows; ++r)
        for (int i = 0; i < net.n(); ++i) {
          const int label_idx = labels(r, i) - net.constellation.min_level();
          for (int m = 0; m < levels; ++m) {
            const Eigen::Index col = i * levels + m;
            const double ce = scale * (p(r, col) - (m == label_idx ? 1.0 : 0.0));
            // ẑ = Σ_m p_m·ℓ_m feeds the next iteration.
            const double carry = gz_next(r, i) * p(r, col) * (net.constellation.level(m) - z_out(r, i));
            ga2(r, col) = ce + carry;
          }
        }
    }
    const Matrix& xi = tr.xi[ks];
    g.w2.noalias() += ga2.transpose() * xi;
    g.bias2 += ga2.colwise().sum();
    g.w3.noalias() += gv_next.transpose() * xi;
    g.bias3 += gv_next.colwise().sum();

    Matrix gxi = ga2 * b.w2;
    gxi.noalias() += gv_next * b.w3;
    const Matrix ga1 = gxi.cwiseProduct(tr.xi_deriv[ks]);
    g.w1_a.noalias() += ga1.transpose() * tr.z[ks];
    g.w1_b.noalias() += ga1.transpose() * tr.ygt;
    g.w1_c.noalias() += ga1.transpose() * tr.zggt[ks];
    g.w1_d.noalias() += ga1.transpose() * tr.v[ks];
    g.bias1 += ga1.colwise().sum();

    gz_next = ga1 * b.w1_a;
    gz_next.noalias() += (ga1 * b.w1_c) * model.ggt().transpose();
    gv_next = ga1 * b.w1_d;
  }
}

}  // namespace

std::vector<RowVector> forward(const DetectorNetwork& net, const RowVector& y, const ChannelModel& model,
                               const RowVector& z0, const RowVector& v0) {
  check_inputs(net, y, model, z0);
  if (v0.size() != net.n()) throw DimensionMismatch("initial hidden vector length mismatch");
  const Trace tr = run_forward(net, y, model, z0, v0);
  std::vector<RowVector> out;
  for (std::size_t k = 1; k < tr.z.size(); ++k) out.emplace_back(tr.z[k].row(0));
  return out;
}

Matrix forward_final(const DetectorNetwork& net, const Matrix& y, const ChannelModel& model, const Matrix& z0) {
  check_inputs(net, y, model, z0);
  Matrix out(y.rows(), net.n());
  for (Eigen::Index start = 0; start < y.rows(); start += kChunkRows) {
    const Eigen::Index len = std::min(kChunkRows, y.rows() - start);
    const Trace tr = run_forward(net, y.middleRows(start, len), model, z0.middleRows(start, len),
                                 Matrix::Zero(len, net.n()));
    out.middleRows(start, len) = tr.z.back();
  }
  return out;
}

IntMatrix decide(const DetectorNetwork& net, const Matrix& y, const ChannelModel& model, const Matrix& z0) {
  check_inputs(net, y, model, z0);
  IntMatrix out(y.rows(), net.n());
  const int levels = net.constellation.size();
  for (Eigen::Index start = 0; start < y.rows(); start += kChunkRows) {
    const Eigen::Index len = std::min(kChunkRows, y.rows() - start);
    const Trace tr = run_forward(net, y.middleRows(start, len), model, z0.middleRows(start, len),
                                 Matrix::Zero(len, net.n()));
    for (Eigen::Index r = 0; r < len; ++r) {
      if (net.shape.head == OutputHead::multilevel) {
        out.row(start + r) = slice(tr.z.back().row(r), net.constellation);
      } else {
        const Matrix& p = tr.probs.back();
        for (int i = 0; i < net.n(); ++i) {
          Eigen::Index best = 0;
          p.row(r).segment(i * levels, levels).maxCoeff(&best);
          out(start + r, i) = net.constellation.level(static_cast<int>(best));
        }
      }
    }
  }
  return out;
}

OneHotOutput one_hot_head_forward(const DetectorNetwork& net, const RowVector& y, const ChannelModel& model,
                                  const RowVector& z0) {
  if (net.shape.head != OutputHead::one_hot) throw InvalidConfig("one_hot_head_forward requires a one-hot head");
  check_inputs(net, y, model, z0);
  const Trace tr = run_forward(net, y, model, z0, RowVector::Zero(net.n()));
  const int levels = net.constellation.size();
  OneHotOutput out;
  out.probabilities.resize(net.n(), levels);
  out.decision.resize(net.n());
  for (int i = 0; i < net.n(); ++i) {
    out.probabilities.row(i) = tr.probs.back().row(0).segment(i * levels, levels);
    Eigen::Index best = 0;
    out.probabilities.row(i).maxCoeff(&best);
    out.decision(i) = net.constellation.level(static_cast<int>(best));
  }
  return out;
}

double loss(const DetectorNetwork& net, const Batch& batch, const ChannelModel& model) {
  check_inputs(net, batch.y, model, batch.z0);
  check_labels(net, batch);
  const Eigen::Index rows = batch.y.rows();
  if (rows == 0) throw InvalidConfig("loss: empty batch");
  double total = 0.0;
  for (Eigen::Index start = 0; start < rows; start += kChunkRows) {
    const Eigen::Index len = std::min(kChunkRows, rows - start);
    const Trace tr = run_forward(net, batch.y.middleRows(start, len), model, batch.z0.middleRows(start, len),
                                 Matrix::Zero(len, net.n()));
    total += chunk_loss(net, tr, batch.labels.middleRows(start, len));
  }
  return total / static_cast<double>(rows);
}

Gradient backward(const DetectorNetwork& net, const Batch& batch, const ChannelModel& model) {
  check_inputs(net, batch.y, model, batch.z0);
  check_labels(net, batch);
  const Eigen::Index rows = batch.y.rows();
  if (rows == 0) throw InvalidConfig("backward: empty batch");
  Gradient g;
  g.blocks = zero_blocks_like(net);
  const double scale = 1.0 / (static_cast<double>(rows) * net.iterations());
  double total = 0.0;
  // Fixed chunk order keeps the reduction deterministic.
  for (Eigen::Index start = 0; start < rows; start += kChunkRows) {
    const Eigen::Index len = std::min(kChunkRows, rows - start);
    const IntMatrix labels = batch.labels.middleRows(start, len);
    const Trace tr = run_forward(net, batch.y.middleRows(start, len), model, batch.z0.middleRows(start, len),
                                 Matrix::Zero(len, net.n()));
    total += chunk_loss(net, tr, labels);
    accumulate_gradient(net, tr, labels, model, scale, g.blocks);
  }
  g.loss = total / static_cast<double>(rows);
  return g;
}

// ---------------------------------------------------------------------------
// Parameters and Adam

Eigen::VectorXd pack_parameters(const std::vector<IterationBlock>& blocks) {
  Eigen::Index total = 0;
  for (const auto& b : blocks)
    total += b.w1_a.size() + b.w1_b.size() + b.w1_c.size() + b.w1_d.size() + b.bias1.size() + b.w2.size() +
             b.bias2.size() + b.w3.size() + b.bias3.size();
  Eigen::VectorXd flat(total);
  Eigen::Index pos = 0;
  auto put = [&](const double* data, Eigen::Index size) {
    flat.segment(pos, size) = Eigen::Map<const Eigen::VectorXd>(data, size);
    pos += size;
  };
  for (const auto& b : blocks) {
    put(b.w1_a.data(), b.w1_a.size());
    put(b.w1_b.data(), b.w1_b.size());
    put(b.w1_c.data(), b.w1_c.size());
    put(b.w1_d.data(), b.w1_d.size());
    put(b.bias1.data(), b.bias1.size());
    put(b.w2.data(), b.w2.size());
    put(b.bias2.data(), b.bias2.size());
    put(b.w3.data(), b.w3.size());
    put(b.bias3.data(), b.bias3.size());
  }
  return flat;
}

void unpack_parameters(std::vector<IterationBlock>& blocks, const Eigen::VectorXd& flat) {
  Eigen::Index pos = 0;
  auto take = [&](double* data, Eigen::Index size) {
    if (pos + size > flat.size()) throw DimensionMismatch("unpack_parameters: flat vector too short");
    Eigen::Map<Eigen::VectorXd>(data, size) = flat.segment(pos, size);
    pos += size;
  };
  for (auto& b : blocks) {
    take(b.w1_a.data(), b.w1_a.size());
    take(b.w1_b.data(), b.w1_b.size());
    take(b.w1_c.data(), b.w1_c.size());
    take(b.w1_d.data(), b.w1_d.size());
    take(b.bias1.data(), b.bias1.size());
    take(b.w2.data(), b.w2.size());
    take(b.bias2.data(), b.bias2.size());
    take(b.w3.data(), b.w3.size());
    take(b.bias3.data(), b.bias3.size());
  }
  if (pos != flat.size()) throw DimensionMismatch("unpack_parameters: flat vector too long");
}

AdamState make_adam_state(Eigen::Index parameter_count, double learning_rate) {
  AdamState s;
  s.learning_rate = learning_rate;
  s.m = Eigen::VectorXd::Zero(parameter_count);
  s.v = Eigen::VectorXd::Zero(parameter_count);
  return s;
}

void adam_step(Eigen::VectorXd& params, const Eigen::VectorXd& grads, AdamState& state) {
  if (params.size() != grads.size() || state.m.size() != params.size() || state.v.size() != params.size())
    throw DimensionMismatch("adam_step: parameter, gradient and state sizes differ");
  ++state.step;
  state.m = state.beta1 * state.m + (1.0 - state.beta1) * grads;
  state.v = state.beta2 * state.v + (1.0 - state.beta2) * grads.cwiseProduct(grads);
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    const double m_hat = state.m(i) / c1;
    const double v_hat = state.v(i) / c2;
    params(i) -= state.learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
  }
}

ParameterCount count_parameters(const NetworkShape& shape, int levels) {
  const std::int64_t n = shape.n;
  const std::int64_t xi = shape.xi_size;
  const std::int64_t k = shape.iterations;
  const std::int64_t out = shape.head == OutputHead::one_hot ? n * levels : n;
  ParameterCount c;
  c.weights_only = k * (4 * xi * n + out * xi + n * xi);
  c.with_biases = c.weights_only + k * (xi + out + n);
  return c;
}

ParameterCount count_parameters(const DetectorNetwork& net) {
  return count_parameters(net.shape, net.constellation.size());
}

// ---------------------------------------------------------------------------
// Regressor

Regressor make_regressor(int input_size, const std::vector<int>& hidden_sizes, std::uint64_t seed) {
  Regressor net;
  net.seed = seed;
  RngStream rng(seed, 0x7265677265ULL);
  int in = input_size;
  for (int h : hidden_sizes) {
    net.layers.push_back({glorot(rng, h, in), RowVector::Zero(h)});
    in = h;
  }
  net.layers.push_back({glorot(rng, 1, in), RowVector::Zero(1)});
  return net;
}

namespace {

// Activations of every layer; acts[0] is the input.
std::vector<Matrix> regressor_trace(const Regressor& net, const Matrix& x) {
  std::vector<Matrix> acts{x};
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    Matrix a = acts.back() * net.layers[l].w.transpose();
    a.rowwise() += net.layers[l].b;
    if (l + 1 < net.layers.size())
      for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = logistic(a.data()[i]);
    acts.push_back(std::move(a));
  }
  return acts;
}

}  // namespace

Eigen::VectorXd regressor_forward(const Regressor& net, const Matrix& x) {
  if (x.cols() != net.input_size()) throw DimensionMismatch("regressor input width mismatch");
  return regressor_trace(net, x).back().col(0);
}

double regressor_eval(const Regressor& net, const RowVector& x) {
  return regressor_forward(net, Matrix(x))(0);
}

double regressor_backward(const Regressor& net, const Matrix& x, const Eigen::VectorXd& target,
                          Eigen::VectorXd& flat_gradient) {
  if (x.rows() != target.size()) throw DimensionMismatch("regressor target length mismatch");
  const std::vector<Matrix> acts = regressor_trace(net, x);
  const Eigen::VectorXd err = acts.back().col(0) - target;
  const double rows = static_cast<double>(x.rows());
  Matrix delta = (2.0 / rows) * Matrix(err);
  std::vector<DenseLayer> grads = net.layers;
  for (std::size_t l = net.layers.size(); l-- > 0;) {
    grads[l].w = delta.transpose() * acts[l];
    grads[l].b = delta.colwise().sum();
    if (l == 0) break;
    Matrix back = delta * net.layers[l].w;
    const Matrix& a = acts[l];
    delta = back.cwiseProduct(a.cwiseProduct((1.0 - a.array()).matrix()));
  }
  Regressor g{grads, net.seed};
  flat_gradient = pack_parameters(g);
  return err.squaredNorm() / rows;
}

Eigen::VectorXd pack_parameters(const Regressor& net) {
  Eigen::Index total = 0;
  for (const auto& l : net.layers) total += l.w.size() + l.b.size();
  Eigen::VectorXd flat(total);
  Eigen::Index pos = 0;
  for (const auto& l : net.layers) {
    flat.segment(pos, l.w.size()) = Eigen::Map<const Eigen::VectorXd>(l.w.data(), l.w.size());
    pos += l.w.size();
    flat.segment(pos, l.b.size()) = Eigen::Map<const Eigen::VectorXd>(l.b.data(), l.b.size());
    pos += l.b.size();
  }
  return flat;
}

void unpack_parameters(Regressor& net, const Eigen::VectorXd& flat) {
  Eigen::Index pos = 0;
  for (auto& l : net.layers) {
    if (pos + l.w.size() + l.b.size() > flat.size()) throw DimensionMismatch("regressor parameters too short");
    Eigen::Map<Eigen::VectorXd>(l.w.data(), l.w.size()) = flat.segment(pos, l.w.size());
    pos += l.w.size();
    Eigen::Map<Eigen::VectorXd>(l.b.data(), l.b.size()) = flat.segment(pos, l.b.size());
    pos += l.b.size();
  }
  if (pos != flat.size()) throw DimensionMismatch("regressor parameters too long");
}

}  // namespace mlmimo
