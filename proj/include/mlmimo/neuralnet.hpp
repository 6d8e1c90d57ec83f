#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mlmimo/channel.hpp"

namespace mlmimo {

// Multi-plateau activation: σ_c(t) = Σ_i σ(t − τ_i) + A.
//
// With the default construction the plateau for integer level L sits around
// t = level_scale·L, so a pre-activation scaled by level_scale lands on a level.
class MultilevelSigmoid {
 public:
  MultilevelSigmoid() = default;
  MultilevelSigmoid(std::vector<double> shifts, double offset, double level_scale = 10.0);

  const std::vector<double>& shifts() const noexcept { return shifts_; }
  double offset() const noexcept { return offset_; }
  double level_scale() const noexcept { return level_scale_; }
  double lower() const noexcept { return offset_; }
  double upper() const noexcept { return offset_ + static_cast<double>(shifts_.size()); }

  double operator()(double t) const;
  double derivative(double t) const;
  // Value and derivative in one pass.
  void evaluate(double t, double& value, double& deriv) const;

  friend bool operator==(const MultilevelSigmoid& a, const MultilevelSigmoid& b) {
    return a.shifts_ == b.shifts_ && a.offset_ == b.offset_ && a.level_scale_ == b.level_scale_;
  }

 private:
  std::vector<double> shifts_;
  std::vector<double> exp_shifts_;  // e^{τ_i}, +inf when it overflows
  double offset_ = 0.0;
  double level_scale_ = 10.0;
};

double sigma_c(const MultilevelSigmoid& act, double t);

// M = 5 centered: the five-sigmoid form with shifts (−15, −5, 5, 15, 25) and offset −2.
// Otherwise M − 1 sigmoids at level_scale·(midpoints between levels), offset = lowest level.
MultilevelSigmoid default_activation(const Constellation& c, double level_scale = 10.0);

enum class OutputHead { multilevel, one_hot };
enum class HiddenActivation { multilevel, sigmoid };
// How ẑ0 is chosen, at training and at inference.
enum class InitPolicy { zero, random, zf };

std::string to_string(OutputHead h);
std::string to_string(HiddenActivation h);
std::string to_string(InitPolicy p);
OutputHead parse_output_head(const std::string& s);
HiddenActivation parse_hidden_activation(const std::string& s);
InitPolicy parse_init_policy(const std::string& s);

// Weights of one unrolled iteration (two layers). Matrices map column inputs:
//   ξ      = act(W1_a·ẑ + W1_b·yGᵀ + W1_c·ẑGGᵀ + W1_d·v + bias1)
//   ẑ_next = σ_c(W2·ξ + bias2)          (one-hot head: softmax groups of M)
//   v_next = W3·ξ + bias3
struct IterationBlock {
  Matrix w1_a, w1_b, w1_c, w1_d;  // xi × n
  RowVector bias1;                 // xi
  Matrix w2;                       // n × xi, or n·M × xi for the one-hot head
  RowVector bias2;
  Matrix w3;                       // n × xi
  RowVector bias3;                 // n
};

struct NetworkShape {
  int n = 0;
  int iterations = 0;
  int xi_size = 0;
  OutputHead head = OutputHead::multilevel;
  HiddenActivation hidden = HiddenActivation::multilevel;
};

struct DetectorNetwork {
  NetworkShape shape;
  Constellation constellation{2};
  MultilevelSigmoid activation;
  std::vector<IterationBlock> blocks;
  InitPolicy init = InitPolicy::zf;
  std::uint64_t seed = 0;

  int n() const noexcept { return shape.n; }
  int iterations() const noexcept { return shape.iterations; }
  int xi_size() const noexcept { return shape.xi_size; }
  int output_width() const noexcept {
    return shape.head == OutputHead::one_hot ? shape.n * constellation.size() : shape.n;
  }
  // Throws DimensionMismatch when a block disagrees with the shape.
  void validate() const;
};

// Glorot-uniform weights in ±√(6/(fan_in + fan_out)), zero biases.
DetectorNetwork make_detector_network(const NetworkShape& shape, const Constellation& c, std::uint64_t seed);

// Same shape as `net`, all parameters zero.
std::vector<IterationBlock> zero_blocks_like(const DetectorNetwork& net);

// Every intermediate estimate ẑ_1 … ẑ_K for one received vector.
std::vector<RowVector> forward(const DetectorNetwork& net, const RowVector& y, const ChannelModel& model,
                               const RowVector& z0, const RowVector& v0);

// Final estimates ẑ_K for a batch (rows are samples), v0 = 0.
Matrix forward_final(const DetectorNetwork& net, const Matrix& y, const ChannelModel& model, const Matrix& z0);

// Hard decisions of the final iteration for a batch: sliced ẑ_K, or the
// per-group arg max for the one-hot head.
IntMatrix decide(const DetectorNetwork& net, const Matrix& y, const ChannelModel& model, const Matrix& z0);

struct OneHotOutput {
  Matrix probabilities;  // n × M, each row sums to 1
  IntRowVector decision;
};

OneHotOutput one_hot_head_forward(const DetectorNetwork& net, const RowVector& y, const ChannelModel& model,
                                  const RowVector& z0);

// Row-wise softmax over groups of `group` consecutive columns.
Matrix grouped_softmax(const Matrix& logits, int group);

struct Batch {
  Matrix y;        // B × n
  IntMatrix labels;  // B × n, constellation levels
  Matrix z0;       // B × n
};

// Multilevel head: mean over the batch of (1/K)·Σ_k ‖z − ẑ_k‖².
// One-hot head: mean over the batch of (1/K)·Σ_k Σ_i −log p_k,i(z_i).
double loss(const DetectorNetwork& net, const Batch& batch, const ChannelModel& model);

struct Gradient {
  std::vector<IterationBlock> blocks;
  double loss = 0.0;
};

Gradient backward(const DetectorNetwork& net, const Batch& batch, const ChannelModel& model);

// Flat parameter vector; order is block by block, fields in declaration order.
Eigen::VectorXd pack_parameters(const std::vector<IterationBlock>& blocks);
void unpack_parameters(std::vector<IterationBlock>& blocks, const Eigen::VectorXd& flat);

struct AdamState {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::int64_t step = 0;
  Eigen::VectorXd m;
  Eigen::VectorXd v;
};

AdamState make_adam_state(Eigen::Index parameter_count, double learning_rate = 1e-3);

// Bias-corrected Adam update of `params` in place.
void adam_step(Eigen::VectorXd& params, const Eigen::VectorXd& grads, AdamState& state);

struct ParameterCount {
  std::int64_t weights_only = 0;
  std::int64_t with_biases = 0;
};

// weights_only = K·(4·ξ·n + n_out·ξ + n·ξ), biases add K·(ξ + n_out + n).
ParameterCount count_parameters(const NetworkShape& shape, int levels = 0);
ParameterCount count_parameters(const DetectorNetwork& net);

// Small feed-forward regressor: sigmoid hidden layers, linear scalar output.
struct DenseLayer {
  Matrix w;  // out × in
  RowVector b;
};

struct Regressor {
  std::vector<DenseLayer> layers;
  std::uint64_t seed = 0;

  int input_size() const { return static_cast<int>(layers.front().w.cols()); }
};

Regressor make_regressor(int input_size, const std::vector<int>& hidden_sizes, std::uint64_t seed);
// One output per row of x.
Eigen::VectorXd regressor_forward(const Regressor& net, const Matrix& x);
double regressor_eval(const Regressor& net, const RowVector& x);
// Mean squared error and its gradient (layers in order, w then b).
double regressor_backward(const Regressor& net, const Matrix& x, const Eigen::VectorXd& target,
                          Eigen::VectorXd& flat_gradient);
Eigen::VectorXd pack_parameters(const Regressor& net);
void unpack_parameters(Regressor& net, const Eigen::VectorXd& flat);

}  // namespace mlmimo
