#include "cilfair/train.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_set>

#include "cilfair/error.hpp"
#include "cilfair/rng.hpp"

namespace cilfair {

// result = wa * a + wb * b, elementwise over every parameter block
Gradients combine_gradients(const Gradients& a, double wa, const Gradients& b,
                            double wb) {
  if (a.weights.size() != b.weights.size()) {
    throw ContractError("combine_gradients: layer counts differ");
  }
  Gradients out = a;
  for (std::size_t l = 0; l < out.weights.size(); ++l) {
    if (!a.weights[l].same_shape(b.weights[l]) ||
        a.biases[l].size() != b.biases[l].size()) {
      throw ContractError("combine_gradients: shapes differ");
    }
    double* w = out.weights[l].data();
    const double* wbp = b.weights[l].data();
    for (std::size_t i = 0; i < out.weights[l].size(); ++i) {
      w[i] = wa * w[i] + wb * wbp[i];
    }
    for (std::size_t i = 0; i < out.biases[l].size(); ++i) {
      out.biases[l][i] = wa * a.biases[l][i] + wb * b.biases[l][i];
    }
  }
  return out;
}

namespace {

// labels must be exactly the contiguous range [lo, hi)
void check_contiguous_classes(const LabeledDataset& ds, std::size_t lo,
                              std::size_t hi, const char* what) {
  if (ds.class_set.size() != hi - lo) {
    throw InputError(std::string(what) + ": expected " + std::to_string(hi - lo) +
                     " classes, got " + std::to_string(ds.class_set.size()));
  }
  for (std::size_t i = 0; i < ds.class_set.size(); ++i) {
    if (ds.class_set[i] != static_cast<int>(lo + i)) {
      throw InputError(std::string(what) +
                       ": class labels must be contiguous from " + std::to_string(lo));
    }
  }
}

std::vector<std::size_t> batch_rows(const std::vector<std::size_t>& order,
                                    std::size_t batch, std::size_t batch_size) {
  const std::size_t lo = batch * batch_size;
  const std::size_t hi = std::min(lo + batch_size, order.size());
  return {order.begin() + lo, order.begin() + hi};
}

std::size_t batch_count(std::size_t n, std::size_t batch_size) {
  return (n + batch_size - 1) / batch_size;
}

// Max-norm cap on each unit's incoming weight vector, the standard companion
// to dropout training at high learning rates (Srivastava et al., 2014). The
// dropout phase repeatedly revisits a small sample set with 1/(1-rate)
// activation scaling, which lets plain SGD inflate weights without bound on
// unlucky draws; the cap is wide enough that it never binds on a healthy
// trajectory and only arrests that runaway. Applied only while dropout is
// active so dropout-free training is untouched.
constexpr double kDropoutMaxNorm = 4.0;

void apply_max_norm(Mlp& net, double cap) {
  for (auto& w : net.weights) {
    for (std::size_t r = 0; r < w.rows(); ++r) {
      const auto row = w.row(r);
      double sq = 0.0;
      for (double v : row) sq += v * v;
      if (sq > cap * cap) {
        const double scale = cap / std::sqrt(sq);
        for (double& v : row) v *= scale;
      }
    }
  }
}

StepReport evaluate_step(std::size_t step, const Mlp& net, const LabeledDataset& test,
                         const CoverageReport& cov) {
  StepReport rep;
  rep.step = step;
  rep.acc = overall_accuracy(net, test);
  std::tie(rep.precision, rep.recall) = macro_precision_recall(net, test);
  rep.per_class = per_class_accuracy(net, test);
  rep.cwv = cwv(rep.per_class);
  rep.mcd = mcd(rep.per_class);
  rep.coverage = cov;
  return rep;
}

}  // namespace

double lr_at(const LrSchedule& sched, std::size_t epoch, std::size_t total_epochs) {
  double lr = sched.initial;
  for (double frac : sched.decay_fractions) {
    const auto boundary = static_cast<std::size_t>(
        std::floor(frac * static_cast<double>(total_epochs)));
    if (epoch >= boundary) lr *= sched.factor;
  }
  return lr;
}

void TrainConfig::validate() const {
  if (batch_size < 1) throw ParamError("config: batch_size must be >= 1");
  if (!(temperature > 0.0)) throw ParamError("config: temperature must be > 0");
  if (dropout_rate < 0.0 || dropout_rate >= 1.0) {
    throw ParamError("config: dropout rate must be in [0,1)");
  }
  if (eta < 0.0 || eta > 1.0) throw ParamError("config: eta must be in [0,1]");
  if (lambda && (*lambda < 0.0 || *lambda > 1.0)) {
    throw ParamError("config: lambda must be in [0,1]");
  }
  if (!(lr.initial > 0.0)) throw ParamError("config: initial lr must be > 0");
  if (!(lr.factor > 0.0)) throw ParamError("config: lr decay factor must be > 0");
  for (double f : lr.decay_fractions) {
    if (f < 0.0 || f > 1.0) throw ParamError("config: decay fractions must be in [0,1]");
  }
  for (std::size_t h : hidden_sizes) {
    if (h < 1) throw ParamError("config: hidden layer sizes must be >= 1");
  }
  if (exemplar_capacity < 1) throw ParamError("config: exemplar capacity must be >= 1");
  if (coverage.activation_threshold < 0.0 || coverage.activation_threshold > 1.0 ||
      coverage.coverage_threshold < 0.0 || coverage.coverage_threshold > 1.0) {
    throw ParamError("config: coverage thresholds must be in [0,1]");
  }
  if (coverage.max_resample_attempts < 1) {
    throw ParamError("config: max_resample_attempts must be >= 1");
  }
}

std::string method_name(Method m) {
  switch (m) {
    case Method::traditional: return "traditional";
    case Method::refined: return "refined";
  }
  throw ParamError("method_name: unknown method");
}

Method parse_method(const std::string& name) {
  if (name == "traditional") return Method::traditional;
  if (name == "refined") return Method::refined;
  throw ParamError("unknown method: " + name);
}

LossGrad balanced_distill_loss(const Tensor2& student_logits,
                               const std::vector<int>& labels,
                               const Tensor2& teacher_probs,
                               const std::vector<char>& in_error, double lambda,
                               double temperature, bool printed_variant) {
  const std::size_t rows = student_logits.rows();
  const std::size_t cols = student_logits.cols();
  if (labels.size() != rows || in_error.size() != rows) {
    throw InputError("balanced loss: label/error flags must match batch rows");
  }
  if (teacher_probs.rows() != rows) {
    throw ContractError("balanced loss: teacher probabilities missing for batch");
  }
  const std::size_t shared = teacher_probs.cols();
  if (shared == 0 || shared > cols) {
    throw ContractError("balanced loss: teacher class range exceeds student's");
  }
  if (lambda < 0.0 || lambda > 1.0) throw ParamError("balanced loss: lambda in [0,1]");
  if (!(temperature > 0.0)) throw ParamError("balanced loss: temperature > 0");

  // group membership: by default errors take cross-entropy and the rest
  // distill; the printed variant swaps the assignment
  const char distill_flag = printed_variant ? 1 : 0;
  std::size_t n_distill = 0, n_ce = 0;
  for (char f : in_error) ((f == distill_flag) ? n_distill : n_ce) += 1;

  LossGrad out;
  out.grad_logits = Tensor2(rows, cols);
  double loss = 0.0;
  for (std::size_t i = 0; i < rows; ++i) {
    const auto z = student_logits.row(i);
    auto g = out.grad_logits.row(i);
    if (in_error[i] != distill_flag) {
      // cross-entropy toward the label, averaged over the group
      const int y = labels[i];
      if (y < 0 || static_cast<std::size_t>(y) >= cols) {
        throw InputError("balanced loss: label out of range");
      }
      const std::vector<double> q = softmax(z, 1.0);
      loss += -std::log(q[static_cast<std::size_t>(y)]) / static_cast<double>(n_ce);
      for (std::size_t j = 0; j < cols; ++j) {
        g[j] = (q[j] - (static_cast<std::size_t>(y) == j ? 1.0 : 0.0)) /
               static_cast<double>(n_ce);
      }
    } else {
      // temperature distillation toward the teacher, lambda-weighted
      const auto p = teacher_probs.row(i);
      double psum = 0.0;
      for (double v : p) {
        if (!(v >= 0.0)) throw InputError("balanced loss: negative teacher probability");
        psum += v;
      }
      if (std::abs(psum - 1.0) > 1e-6) {
        throw InputError("balanced loss: teacher row does not sum to 1");
      }
      const std::vector<double> q = softmax(z.first(shared), temperature);
      double kl = 0.0;
      for (std::size_t j = 0; j < shared; ++j) {
        if (p[j] > 0.0) kl += p[j] * std::log(p[j] / q[j]);
      }
      const double scale = lambda / static_cast<double>(n_distill);
      loss += scale * temperature * temperature * kl;
      for (std::size_t j = 0; j < shared; ++j) {
        g[j] = scale * temperature * (q[j] - p[j]);
      }
    }
  }
  out.loss = loss;
  return out;
}

Mlp train_base(const LabeledDataset& ds, const TrainConfig& cfg) {
  cfg.validate();
  if (ds.empty()) throw InputError("train_base: empty dataset");
  check_contiguous_classes(ds, 0, ds.class_set.size(), "train_base");

  std::vector<std::size_t> sizes;
  sizes.push_back(ds.feature_dim);
  sizes.insert(sizes.end(), cfg.hidden_sizes.begin(), cfg.hidden_sizes.end());
  sizes.push_back(ds.class_set.size());
  Mlp net = Mlp::init(sizes, derive_seed(cfg.seed, "base-init"));

  for (std::size_t epoch = 0; epoch < cfg.epochs_base; ++epoch) {
    const double lr = lr_at(cfg.lr, epoch, cfg.epochs_base);
    Rng rng(derive_seed(cfg.seed, "base-shuffle", epoch));
    const auto order = shuffled_indices(ds.size(), rng);
    for (std::size_t b = 0; b < batch_count(ds.size(), cfg.batch_size); ++b) {
      const Batch batch = to_batch(ds, batch_rows(order, b, cfg.batch_size));
      const ForwardResult fr = forward(net, batch.features);
      const LossGrad lg = cross_entropy(fr.logits, batch.labels);
      net = sgd_step(net, backward(net, fr.cache, lg.grad_logits), lr);
    }
  }
  return net;
}

Mlp traditional_cil_step(const Mlp& m_base, const LabeledDataset& x_new,
                         const ExemplarMemory& x_s, const TrainConfig& cfg) {
  cfg.validate();
  if (x_new.empty()) throw InputError("cil step: empty new-class dataset");
  if (x_s.samples.empty()) throw InputError("cil step: empty exemplar memory");

  const std::size_t old_classes = m_base.class_count();
  for (const auto& s : x_s.samples) {
    if (s.label < 0 || static_cast<std::size_t>(s.label) >= old_classes) {
      throw ParamError("cil step: exemplar label outside the base class range");
    }
  }
  for (int c : x_new.class_set) {
    if (c >= 0 && static_cast<std::size_t>(c) < old_classes) {
      throw ParamError("cil step: new classes overlap the base classes");
    }
  }
  check_contiguous_classes(x_new, old_classes, old_classes + x_new.class_set.size(),
                           "cil step");
  const std::size_t total = old_classes + x_new.class_set.size();
  const double lambda =
      cfg.lambda.value_or(static_cast<double>(old_classes) / static_cast<double>(total));

  Mlp net = expand_output_layer(m_base, total, derive_seed(cfg.seed, "expand-out"));
  const LabeledDataset mem = x_s.as_dataset(x_new.feature_dim);
  const std::size_t nb_new = batch_count(x_new.size(), cfg.batch_size);
  const std::size_t nb_mem = batch_count(mem.size(), cfg.batch_size);

  for (std::size_t epoch = 0; epoch < cfg.epochs_cil; ++epoch) {
    const double lr = lr_at(cfg.lr, epoch, cfg.epochs_cil);
    Rng rng_new(derive_seed(cfg.seed, "cil-shuffle-new", epoch));
    Rng rng_mem(derive_seed(cfg.seed, "cil-shuffle-mem", epoch));
    const auto order_new = shuffled_indices(x_new.size(), rng_new);
    const auto order_mem = shuffled_indices(mem.size(), rng_mem);
    for (std::size_t b = 0; b < nb_new; ++b) {
      const Batch bn = to_batch(x_new, batch_rows(order_new, b, cfg.batch_size));
      const Batch bm = to_batch(mem, batch_rows(order_mem, b % nb_mem, cfg.batch_size));

      const ForwardResult fn = forward(net, bn.features);
      const LossGrad ln = cross_entropy(fn.logits, bn.labels);
      const Gradients gn = backward(net, fn.cache, ln.grad_logits);

      const ForwardResult fm = forward(net, bm.features);
      const LossGrad lm = cross_entropy(fm.logits, bm.labels);
      const Gradients gm = backward(net, fm.cache, lm.grad_logits);

      net = sgd_step(net, combine_gradients(gn, 1.0 - lambda, gm, lambda), lr);
    }
  }
  return net;
}

ErrorSet compute_error_set(const Mlp& m_new, const LabeledDataset& x_t) {
  if (x_t.empty()) return {};
  const Batch batch = to_batch(x_t);
  for (int y : batch.labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= m_new.class_count()) {
      throw InputError("error set: label outside the model's class range");
    }
  }
  const std::vector<int> pred = predict(m_new, batch.features);
  ErrorSet out;
  for (std::size_t i = 0; i < x_t.size(); ++i) {
    if (pred[i] != batch.labels[i]) out.ids.insert(x_t.samples[i].id);
  }
  return out;
}

Mlp balanced_distill_phase(Mlp net, const LabeledDataset& ds, const Mlp& teacher,
                           const ErrorSet& errors, const TrainConfig& cfg,
                           std::size_t epochs, bool dropout_active,
                           std::uint64_t phase_seed) {
  if (epochs == 0 || ds.empty()) return net;
  cfg.validate();
  if (!cfg.lambda) {
    throw ParamError("distill phase: lambda must be resolved by the caller");
  }
  if (teacher.input_dim() != net.input_dim()) {
    throw InputError("distill phase: teacher input dim differs");
  }
  if (teacher.class_count() > net.class_count()) {
    throw InputError("distill phase: teacher has more classes than student");
  }

  // teacher targets and error flags are fixed for the whole phase
  const Batch all = to_batch(ds);
  for (int y : all.labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= net.class_count()) {
      throw InputError("distill phase: label outside the student's class range");
    }
  }
  const Tensor2 teacher_probs =
      softmax_rows(forward(teacher, all.features).logits, cfg.temperature);
  std::vector<char> in_error(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    in_error[i] = errors.contains(ds.samples[i].id) ? 1 : 0;
  }

  std::uint64_t mask_counter = 0;
  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    const double lr = lr_at(cfg.lr, epoch, epochs);
    Rng rng(derive_seed(phase_seed, "shuffle", epoch));
    const auto order = shuffled_indices(ds.size(), rng);
    for (std::size_t b = 0; b < batch_count(ds.size(), cfg.batch_size); ++b) {
      const auto rows = batch_rows(order, b, cfg.batch_size);
      const Batch batch = to_batch(ds, rows);
      Tensor2 t_rows(rows.size(), teacher_probs.cols());
      std::vector<char> flags(rows.size());
      for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto src = teacher_probs.row(rows[i]);
        std::copy(src.begin(), src.end(), t_rows.row(i).begin());
        flags[i] = in_error[rows[i]];
      }
      std::optional<DropoutSpec> spec;
      if (dropout_active && cfg.dropout_rate > 0.0) {
        spec = DropoutSpec{cfg.dropout_rate,
                           derive_seed(phase_seed, "mask", mask_counter++)};
      }
      const ForwardResult fr = forward(net, batch.features, spec);
      const LossGrad lg =
          balanced_distill_loss(fr.logits, batch.labels, t_rows, flags, *cfg.lambda,
                                cfg.temperature, cfg.totalloss_printed_variant);
      net = sgd_step(net, backward(net, fr.cache, lg.grad_logits), lr);
      if (spec) apply_max_norm(net, kDropoutMaxNorm);
    }
  }
  return net;
}

Mlp selective_train(const Mlp& m_start, const LabeledDataset& x_h,
                    const LabeledDataset& x_l, const Mlp& teacher,
                    const ErrorSet& errors, const TrainConfig& cfg) {
  std::unordered_set<std::int64_t> high_ids;
  for (const auto& s : x_h.samples) high_ids.insert(s.id);
  for (const auto& s : x_l.samples) {
    if (high_ids.count(s.id)) {
      throw ContractError("selective train: splits share sample " +
                          std::to_string(s.id));
    }
  }
  Mlp net = balanced_distill_phase(m_start, x_h, teacher, errors, cfg,
                                   cfg.epochs_dropout_phase, true,
                                   derive_seed(cfg.seed, "sel-drop"));
  return balanced_distill_phase(std::move(net), x_l, teacher, errors, cfg,
                                cfg.epochs_ordinary_phase, false,
                                derive_seed(cfg.seed, "sel-ord"));
}

std::pair<Mlp, StepDiagnostics> refined_cil_step(const Mlp& m_base,
                                                 const LabeledDataset& x_new,
                                                 const LabeledDataset& pool,
                                                 const TrainConfig& cfg) {
  cfg.validate();
  StepDiagnostics diag;
  auto [memory, cov] = verified_sample(m_base, pool, cfg.exemplar_capacity,
                                       cfg.coverage, derive_seed(cfg.seed, "memory"));
  diag.coverage = cov;
  diag.memory = memory;

  const Mlp m_new = traditional_cil_step(m_base, x_new, memory, cfg);

  const LabeledDataset x_t = concat(x_new, memory.as_dataset(x_new.feature_dim));
  diag.divergences =
      differential_analysis(m_base, m_new, x_t, cfg.metric, cfg.temperature);
  const RefinedSplit split = select_samples(diag.divergences, x_t, cfg.eta);
  diag.high_count = split.high.size();
  diag.low_count = split.low.size();

  const ErrorSet errors = compute_error_set(m_new, x_t);
  diag.error_count = errors.ids.size();

  // identical derivation to the traditional step, so the refined training
  // starts from the very same expanded base weights
  const Mlp expanded = expand_output_layer(m_base, m_new.class_count(),
                                           derive_seed(cfg.seed, "expand-out"));
  const Mlp& teacher = cfg.distill_teacher == DistillTeacher::base ? m_base : m_new;

  TrainConfig resolved = cfg;
  if (!resolved.lambda) {
    resolved.lambda = static_cast<double>(m_base.class_count()) /
                      static_cast<double>(m_new.class_count());
  }
  Mlp m_c = selective_train(expanded, split.high, split.low, teacher, errors, resolved);
  return {std::move(m_c), std::move(diag)};
}

RunTrace run_incremental(const LabeledDataset& train, const LabeledDataset& test,
                         const IncrementalSchedule& sched, Method method,
                         const TrainConfig& cfg) {
  cfg.validate();
  if (train.class_set != test.class_set) {
    throw InputError("run: train and test class sets differ");
  }
  if (sched.steps == 0 || sched.classes_per_step == 0) {
    throw ParamError("run: schedule must have steps and classes_per_step >= 1");
  }
  if (sched.steps * sched.classes_per_step > train.class_set.size()) {
    throw ParamError("run: schedule needs more classes than the dataset has");
  }

  // one global class order; labels become contiguous indices in that order
  const std::vector<int> perm = class_permutation(train, sched);
  std::map<int, int> relabel;
  for (std::size_t i = 0; i < perm.size(); ++i) relabel[perm[i]] = static_cast<int>(i);
  const LabeledDataset train_c = remap_labels(train, relabel);
  const LabeledDataset test_c = remap_labels(test, relabel);

  const std::size_t cps = sched.classes_per_step;
  auto classes_in = [&](std::size_t lo, std::size_t hi) {
    std::vector<int> cs;
    for (std::size_t c = lo; c < hi; ++c) cs.push_back(static_cast<int>(c));
    return cs;
  };

  RunTrace trace;
  TrainConfig step_cfg = cfg;
  step_cfg.seed = derive_seed(cfg.seed, "step", 0);

  LabeledDataset x_new = filter_classes(train_c, classes_in(0, cps));
  Mlp net = train_base(x_new, step_cfg);
  {
    const LabeledDataset seen_test = filter_classes(test_c, classes_in(0, cps));
    CoverageReport cov = neuron_coverage(net, x_new, cfg.coverage);
    cov.attempts_used = 1;
    cov.passed = cov.coverage > cfg.coverage.coverage_threshold;
    trace.reports.push_back(evaluate_step(1, net, seen_test, cov));
    trace.details.emplace_back();
  }
  LabeledDataset pool = x_new;

  for (std::size_t k = 1; k < sched.steps; ++k) {
    step_cfg.seed = derive_seed(cfg.seed, "step", k);
    x_new = filter_classes(train_c, classes_in(k * cps, (k + 1) * cps));

    CoverageReport cov;
    StepDiagnostics detail;
    if (method == Method::traditional) {
      const ExemplarMemory mem = random_exemplar_sample(
          pool, cfg.exemplar_capacity, derive_seed(step_cfg.seed, "memory"));
      cov = neuron_coverage(net, mem.as_dataset(train_c.feature_dim), cfg.coverage);
      cov.attempts_used = 1;
      cov.passed = cov.coverage > cfg.coverage.coverage_threshold;
      net = traditional_cil_step(net, x_new, mem, step_cfg);
      detail.coverage = cov;
      detail.memory = mem;
    } else {
      auto [m_c, diag] = refined_cil_step(net, x_new, pool, step_cfg);
      net = std::move(m_c);
      cov = diag.coverage;
      detail = std::move(diag);
    }
    pool = concat(x_new, detail.memory.as_dataset(train_c.feature_dim));

    const LabeledDataset seen_test =
        filter_classes(test_c, classes_in(0, (k + 1) * cps));
    trace.reports.push_back(evaluate_step(k + 1, net, seen_test, cov));
    trace.details.push_back(std::move(detail));
  }
  trace.final_model = std::move(net);
  return trace;
}

}  // namespace cilfair
