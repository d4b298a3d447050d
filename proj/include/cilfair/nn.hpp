#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "cilfair/tensor.hpp"

namespace cilfair {

// Dense feed-forward classifier: rectified hidden layers, identity output.
// Weights[l] has shape (layer_sizes[l+1] x layer_sizes[l]); initialization is
// uniform in +-sqrt(6/(fan_in+fan_out)) with zero biases.
struct Mlp {
  std::vector<std::size_t> layer_sizes;  // input dim, hidden dims..., class count
  std::vector<Tensor2> weights;
  std::vector<std::vector<double>> biases;

  static Mlp init(std::vector<std::size_t> sizes, std::uint64_t seed);

  std::size_t input_dim() const { return layer_sizes.front(); }
  std::size_t class_count() const { return layer_sizes.back(); }
  std::size_t layer_count() const { return weights.size(); }

  // Hash over layer sizes and every parameter byte; a forward cache remembers
  // the stamp so backward() can detect a net that changed in between.
  std::uint64_t param_stamp() const;
};

struct Gradients {
  std::vector<Tensor2> weights;
  std::vector<std::vector<double>> biases;
};

// Inverted dropout: during training each hidden activation is kept with
// probability (1-rate) and scaled by 1/(1-rate), so inference needs no
// rescaling. Masks are a pure function of (rng_seed, layer index, shape),
// independent of the data flowing through.
struct DropoutSpec {
  double rate = 0.0;
  std::uint64_t rng_seed = 0;
};

struct ForwardCache {
  Tensor2 input;
  std::vector<Tensor2> pre;            // affine outputs per layer
  std::vector<Tensor2> post;           // after rectifier (+ dropout) per layer
  std::vector<Tensor2> dropout_scale;  // per hidden layer; empty when inactive
  std::uint64_t net_stamp = 0;
};

struct ForwardResult {
  Tensor2 logits;
  ForwardCache cache;
};

// Forward pass over a minibatch (rows are samples). Dropout applies to hidden
// post-activations only; pass std::nullopt (or rate 0) for inference.
ForwardResult forward(const Mlp& net, const Tensor2& batch,
                      const std::optional<DropoutSpec>& dropout = std::nullopt);

// Temperature softmax with max-subtraction. temperature must be > 0.
std::vector<double> softmax(std::span<const double> logits, double temperature);

// Row-wise softmax over the leading `cols` columns of each row (cols =
// logits.cols() when 0). Restricting then normalizing equals renormalizing
// the full softened distribution over that range.
Tensor2 softmax_rows(const Tensor2& logits, double temperature, std::size_t cols = 0);

struct LossGrad {
  double loss = 0.0;
  Tensor2 grad_logits;
};

// Mean negative log-likelihood; labels are output indices in [0, cols).
// grad = (softmax - onehot) / batch.
LossGrad cross_entropy(const Tensor2& logits, const std::vector<int>& labels);

// T^2-scaled mean KL(teacher || softmax(student_shared / T)) over the
// teacher's class range (leading columns); gradient on the non-shared columns
// is zero. Teacher rows must be probability distributions.
LossGrad distillation_loss(const Tensor2& student_logits, const Tensor2& teacher_probs,
                           double temperature);

// Exact gradients of whatever scalar loss produced grad_logits, dropout masks
// included. The cache must come from a forward() on this exact net.
Gradients backward(const Mlp& net, const ForwardCache& cache, const Tensor2& grad_logits);

// w <- w - lr * g, elementwise.
Mlp sgd_step(Mlp net, const Gradients& grads, double learning_rate);

// Grows the output layer to new_total_classes. Old rows and biases are
// preserved bit-exactly; new rows use the init rule, new biases are zero.
Mlp expand_output_layer(const Mlp& net, std::size_t new_total_classes,
                        std::uint64_t rng_seed);

}  // namespace cilfair
