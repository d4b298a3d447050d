#include "cilfair/nn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "cilfair/error.hpp"
#include "cilfair/kernels.hpp"
#include "cilfair/rng.hpp"

namespace cilfair {

namespace {

double init_bound(std::size_t fan_in, std::size_t fan_out) {
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

std::uint64_t hash_doubles(std::uint64_t h, const double* p, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    std::uint64_t bits;
    std::memcpy(&bits, &p[i], sizeof(bits));
    h ^= bits;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

Mlp Mlp::init(std::vector<std::size_t> sizes, std::uint64_t seed) {
  if (sizes.size() < 2) throw ParamError("Mlp: need at least input and output sizes");
  for (std::size_t s : sizes) {
    if (s == 0) throw ParamError("Mlp: zero layer size");
  }
  Mlp net;
  net.layer_sizes = std::move(sizes);
  Rng rng(derive_seed(seed, "init"));
  for (std::size_t l = 0; l + 1 < net.layer_sizes.size(); ++l) {
    const std::size_t in = net.layer_sizes[l];
    const std::size_t out = net.layer_sizes[l + 1];
    Tensor2 w(out, in);
    const double b = init_bound(in, out);
    for (std::size_t i = 0; i < w.size(); ++i) w.data()[i] = rng.uniform(-b, b);
    net.weights.push_back(std::move(w));
    net.biases.emplace_back(out, 0.0);
  }
  return net;
}

std::uint64_t Mlp::param_stamp() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t s : layer_sizes) {
    h ^= s;
    h *= 0x100000001b3ULL;
  }
  for (std::size_t l = 0; l < weights.size(); ++l) {
    h = hash_doubles(h, weights[l].data(), weights[l].size());
    h = hash_doubles(h, biases[l].data(), biases[l].size());
  }
  return h;
}

ForwardResult forward(const Mlp& net, const Tensor2& batch,
                      const std::optional<DropoutSpec>& dropout) {
  if (batch.cols() != net.input_dim()) {
    throw InputError("forward: batch has " + std::to_string(batch.cols()) +
                     " features, net expects " + std::to_string(net.input_dim()));
  }
  if (batch.rows() == 0) throw InputError("forward: empty batch");
  const bool drop = dropout.has_value() && dropout->rate > 0.0;
  if (dropout.has_value() && (dropout->rate < 0.0 || dropout->rate >= 1.0)) {
    throw ParamError("forward: dropout rate must be in [0,1)");
  }

  ForwardCache cache;
  cache.input = batch;
  cache.net_stamp = net.param_stamp();
  const std::size_t rows = batch.rows();
  const Tensor2* cur = &cache.input;
  const std::size_t last = net.layer_count() - 1;

  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    const std::size_t out = net.layer_sizes[l + 1];
    Tensor2 z(rows, out);
    kernels::matmul_nt(cur->data(), net.weights[l].data(), z.data(), rows,
                       net.layer_sizes[l], out);
    kernels::add_bias_rows(z.data(), net.biases[l].data(), rows, out);
    cache.pre.push_back(z);
    if (l < last) {
      kernels::relu(z.data(), z.size());
      if (drop) {
        // mask entries: 0 with probability rate, else 1/(1-rate)
        Tensor2 scale(rows, out);
        Rng mrng(derive_seed(dropout->rng_seed, "dropout-mask", l));
        const double keep_scale = 1.0 / (1.0 - dropout->rate);
        for (std::size_t i = 0; i < scale.size(); ++i) {
          scale.data()[i] = (mrng.uniform() < dropout->rate) ? 0.0 : keep_scale;
        }
        kernels::scale_elements(z.data(), scale.data(), z.size());
        cache.dropout_scale.push_back(std::move(scale));
      }
    }
    cache.post.push_back(std::move(z));
    cur = &cache.post.back();
  }

  ForwardResult res{cache.post.back(), std::move(cache)};
  require_finite(res.logits, "forward logits");
  return res;
}

std::vector<double> softmax(std::span<const double> logits, double temperature) {
  if (!(temperature > 0.0)) throw ParamError("softmax: temperature must be > 0");
  if (logits.empty()) throw InputError("softmax: empty input");
  const double m = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double z = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp((logits[i] - m) / temperature);
    z += p[i];
  }
  for (double& v : p) v /= z;
  return p;
}

Tensor2 softmax_rows(const Tensor2& logits, double temperature, std::size_t cols) {
  if (cols == 0) cols = logits.cols();
  if (cols > logits.cols()) throw InputError("softmax_rows: column range too wide");
  Tensor2 out(logits.rows(), cols);
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    auto p = softmax(logits.row(i).subspan(0, cols), temperature);
    std::copy(p.begin(), p.end(), out.row(i).begin());
  }
  return out;
}

LossGrad cross_entropy(const Tensor2& logits, const std::vector<int>& labels) {
  const std::size_t rows = logits.rows();
  const std::size_t cols = logits.cols();
  if (labels.size() != rows) {
    throw InputError("cross_entropy: got " + std::to_string(labels.size()) +
                     " labels for " + std::to_string(rows) + " rows");
  }
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= cols) {
      throw InputError("cross_entropy: label " + std::to_string(y) + " out of range");
    }
  }
  LossGrad out;
  out.grad_logits = Tensor2(rows, cols);
  double total = 0.0;
  for (std::size_t i = 0; i < rows; ++i) {
    auto zi = logits.row(i);
    const double m = *std::max_element(zi.begin(), zi.end());
    double z = 0.0;
    for (double v : zi) z += std::exp(v - m);
    const double lse = m + std::log(z);
    total += lse - zi[static_cast<std::size_t>(labels[i])];
    auto gi = out.grad_logits.row(i);
    for (std::size_t j = 0; j < cols; ++j) {
      gi[j] = std::exp(zi[j] - lse) / static_cast<double>(rows);
    }
    gi[static_cast<std::size_t>(labels[i])] -= 1.0 / static_cast<double>(rows);
  }
  out.loss = total / static_cast<double>(rows);
  return out;
}

LossGrad distillation_loss(const Tensor2& student_logits, const Tensor2& teacher_probs,
                           double temperature) {
  if (!(temperature > 0.0)) throw ParamError("distillation_loss: temperature must be > 0");
  const std::size_t rows = student_logits.rows();
  const std::size_t shared = teacher_probs.cols();
  if (teacher_probs.rows() != rows || shared > student_logits.cols() || shared == 0) {
    throw InputError("distillation_loss: teacher/student shape mismatch on shared range");
  }
  for (std::size_t i = 0; i < rows; ++i) {
    double s = 0.0;
    for (double v : teacher_probs.row(i)) {
      if (v < 0.0) throw InputError("distillation_loss: negative teacher probability");
      s += v;
    }
    if (std::abs(s - 1.0) > 1e-6) {
      throw InputError("distillation_loss: teacher row does not sum to 1");
    }
  }

  LossGrad out;
  out.grad_logits = Tensor2(rows, student_logits.cols());
  const double t2 = temperature * temperature;
  double total = 0.0;
  for (std::size_t i = 0; i < rows; ++i) {
    auto q = softmax(student_logits.row(i).subspan(0, shared), temperature);
    auto p = teacher_probs.row(i);
    double kl = 0.0;
    for (std::size_t j = 0; j < shared; ++j) {
      if (p[j] > 0.0) kl += p[j] * (std::log(p[j]) - std::log(q[j]));
    }
    total += kl;
    auto gi = out.grad_logits.row(i);
    for (std::size_t j = 0; j < shared; ++j) {
      gi[j] = t2 * (q[j] - p[j]) / (temperature * static_cast<double>(rows));
    }
  }
  out.loss = t2 * total / static_cast<double>(rows);
  return out;
}

Gradients backward(const Mlp& net, const ForwardCache& cache, const Tensor2& grad_logits) {
  if (cache.net_stamp != net.param_stamp()) {
    throw ContractError("backward: cache does not match this net (stale or foreign cache)");
  }
  const std::size_t layers = net.layer_count();
  if (cache.pre.size() != layers ||
      !grad_logits.same_shape(cache.pre.back())) {
    throw ContractError("backward: grad_logits shape does not match the forward pass");
  }
  const std::size_t rows = cache.input.rows();
  const bool drop = !cache.dropout_scale.empty();

  Gradients g;
  g.weights.resize(layers);
  g.biases.resize(layers);

  Tensor2 delta = grad_logits;
  for (std::size_t li = layers; li-- > 0;) {
    const Tensor2& in = (li == 0) ? cache.input : cache.post[li - 1];
    const std::size_t out = net.layer_sizes[li + 1];
    // dW = delta^T * in,  db = colsum(delta)
    g.weights[li] = Tensor2(out, net.layer_sizes[li]);
    kernels::matmul_tn(delta.data(), in.data(), g.weights[li].data(), out, rows,
                       net.layer_sizes[li]);
    g.biases[li].assign(out, 0.0);
    kernels::colsum(delta.data(), g.biases[li].data(), rows, out);
    if (li > 0) {
      Tensor2 prev(rows, net.layer_sizes[li]);
      kernels::matmul_nn(delta.data(), net.weights[li].data(), prev.data(), rows, out,
                         net.layer_sizes[li]);
      if (drop) {
        kernels::scale_elements(prev.data(), cache.dropout_scale[li - 1].data(),
                                prev.size());
      }
      kernels::relu_backward(cache.pre[li - 1].data(), prev.data(), prev.size());
      delta = std::move(prev);
    }
  }
  return g;
}

Mlp sgd_step(Mlp net, const Gradients& grads, double learning_rate) {
  if (grads.weights.size() != net.layer_count()) {
    throw InputError("sgd_step: gradient layer count mismatch");
  }
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    if (!grads.weights[l].same_shape(net.weights[l]) ||
        grads.biases[l].size() != net.biases[l].size()) {
      throw InputError("sgd_step: gradient shape mismatch at layer " + std::to_string(l));
    }
    double* w = net.weights[l].data();
    const double* gw = grads.weights[l].data();
    for (std::size_t i = 0; i < net.weights[l].size(); ++i) w[i] -= learning_rate * gw[i];
    for (std::size_t i = 0; i < net.biases[l].size(); ++i) {
      net.biases[l][i] -= learning_rate * grads.biases[l][i];
    }
  }
  return net;
}

Mlp expand_output_layer(const Mlp& net, std::size_t new_total_classes,
                        std::uint64_t rng_seed) {
  const std::size_t old_classes = net.class_count();
  if (new_total_classes <= old_classes) {
    throw ParamError("expand_output_layer: requested " +
                     std::to_string(new_total_classes) + " classes, net already has " +
                     std::to_string(old_classes));
  }
  Mlp out = net;
  out.layer_sizes.back() = new_total_classes;
  const std::size_t in = net.layer_sizes[net.layer_sizes.size() - 2];
  Tensor2 w(new_total_classes, in);
  std::copy(net.weights.back().data(), net.weights.back().data() + old_classes * in,
            w.data());
  Rng rng(derive_seed(rng_seed, "expand"));
  const double b = init_bound(in, new_total_classes);
  for (std::size_t i = old_classes * in; i < w.size(); ++i) w.data()[i] = rng.uniform(-b, b);
  out.weights.back() = std::move(w);
  out.biases.back().resize(new_total_classes, 0.0);
  return out;
}

}  // namespace cilfair
