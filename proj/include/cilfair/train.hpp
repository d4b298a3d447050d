#pragma once

#include <cstdint>
#include <optional>
#include <unordered_set>
#include <vector>

#include "cilfair/coverage.hpp"
#include "cilfair/data.hpp"
#include "cilfair/metrics.hpp"
#include "cilfair/nn.hpp"
#include "cilfair/refine.hpp"

namespace cilfair {

// Step-decay learning rate: the rate is multiplied by `factor` once the
// epoch index reaches floor(f * total_epochs) for each fraction f.
struct LrSchedule {
  double initial = 0.1;
  std::vector<double> decay_fractions = {0.4, 0.6, 0.8};
  double factor = 0.1;
};

double lr_at(const LrSchedule& sched, std::size_t epoch, std::size_t total_epochs);

// wa * a + wb * b over every parameter block; shapes must agree.
Gradients combine_gradients(const Gradients& a, double wa, const Gradients& b,
                            double wb);

// Whose outputs the refinement phases distill toward: the incremental model
// produced by the traditional step (default) or the pre-step base model.
enum class DistillTeacher { incremental, base };

struct TrainConfig {
  std::vector<std::size_t> hidden_sizes = {64, 64};
  std::size_t epochs_base = 60;
  std::size_t epochs_cil = 40;
  std::size_t epochs_dropout_phase = 20;
  std::size_t epochs_ordinary_phase = 20;
  std::size_t batch_size = 32;
  LrSchedule lr;
  std::optional<double> lambda;  // nullopt = auto: old / (old + new) classes
  double temperature = 2.0;
  double dropout_rate = 0.5;
  double eta = 0.01;
  CoverageConfig coverage;
  double gamma = 0.0;
  std::size_t exemplar_capacity = 80;
  DivergenceMetric metric = DivergenceMetric::jensen_shannon;
  DistillTeacher distill_teacher = DistillTeacher::incremental;
  // When true, the composite loss follows the alternative reading that sends
  // misclassified samples to distillation and the rest to cross-entropy.
  bool totalloss_printed_variant = false;
  std::uint64_t seed = 0;

  void validate() const;  // throws ParamError on out-of-range fields
};

// Sample ids the incremental model misclassifies.
struct ErrorSet {
  std::unordered_set<std::int64_t> ids;
  bool contains(std::int64_t id) const { return ids.count(id) != 0; }
};

// Composite refinement loss over one batch: misclassified samples (per
// `in_error`) take cross-entropy toward their labels; the rest take the
// temperature-distillation term toward teacher_probs, weighted by lambda.
// Each group contributes the mean over its members (zero when empty):
//   L = lambda * mean_{not in error} L_r + mean_{in error} L_CE
// The printed-variant flag swaps which group distills. teacher_probs must
// have one row per batch row, over at most as many classes as the logits.
LossGrad balanced_distill_loss(const Tensor2& student_logits,
                               const std::vector<int>& labels,
                               const Tensor2& teacher_probs,
                               const std::vector<char>& in_error, double lambda,
                               double temperature,
                               bool printed_variant = false);

// Minibatch cross-entropy SGD with per-epoch seeded shuffling and the
// step-decay schedule. Deterministic in (ds, cfg).
Mlp train_base(const LabeledDataset& ds, const TrainConfig& cfg);

// One traditional class-incremental step: expands the output layer for the
// new classes, then optimizes (1-lambda) * CE(new batch) + lambda * CE(memory
// batch) with paired minibatches (the memory cycles within each epoch).
// lambda defaults to old_classes / total_classes.
Mlp traditional_cil_step(const Mlp& m_base, const LabeledDataset& x_new,
                         const ExemplarMemory& x_s, const TrainConfig& cfg);

// E = { (x, y) : argmax m_new(x) != y }, ties to the lowest class index.
ErrorSet compute_error_set(const Mlp& m_new, const LabeledDataset& x_t);

// One training phase of the refinement stage: `epochs` epochs of minibatch
// SGD over ds with the balanced distillation loss, optionally with dropout
// active. Teacher targets are the teacher's temperature softmax. All
// randomness derives from phase_seed alone, so phases are independent.
Mlp balanced_distill_phase(Mlp net, const LabeledDataset& ds, const Mlp& teacher,
                           const ErrorSet& errors, const TrainConfig& cfg,
                           std::size_t epochs, bool dropout_active,
                           std::uint64_t phase_seed);

// Refinement training: a dropout-active phase over the high-divergence split
// followed by an ordinary phase over the rest, both from m_start with the
// balanced distillation loss. Each phase restarts the lr schedule over its
// own epoch budget and draws from its own seed stream, so an empty phase
// leaves the other bit-identical.
Mlp selective_train(const Mlp& m_start, const LabeledDataset& x_h,
                    const LabeledDataset& x_l, const Mlp& teacher,
                    const ErrorSet& errors, const TrainConfig& cfg);

// Everything the refined step learned about its inputs, for reporting and
// for rebuilding the next step's sampling pool.
struct StepDiagnostics {
  CoverageReport coverage;
  std::size_t high_count = 0;
  std::size_t low_count = 0;
  std::size_t error_count = 0;
  std::vector<DivergenceRecord> divergences;
  ExemplarMemory memory;  // the exemplars the step actually trained with
};

// The full refined incremental step: coverage-verified exemplar sampling,
// traditional CIL step to get the incremental model, divergence scoring of
// X^t = X^n ∪ X^s, eta-cutoff split, error-set computation, then selective
// training from the (identically) expanded base model with the incremental
// model as teacher.
std::pair<Mlp, StepDiagnostics> refined_cil_step(const Mlp& m_base,
                                                 const LabeledDataset& x_new,
                                                 const LabeledDataset& pool,
                                                 const TrainConfig& cfg);

enum class Method { traditional, refined };

std::string method_name(Method m);
Method parse_method(const std::string& name);

struct RunTrace {
  std::vector<StepReport> reports;       // one per incremental step
  std::vector<StepDiagnostics> details;  // refined steps; empty otherwise
  Mlp final_model;
};

// Multi-step driver. Both datasets must share a class set; classes are
// permuted once (schedule seed) and relabeled to contiguous indices in
// permutation order. Step 1 trains the base model; step k >= 2 draws the
// exemplar memory from the previous step's training pool (X^n ∪ X^s) and
// runs the chosen incremental step. After each step the model is evaluated
// on the test subset of the classes seen so far.
RunTrace run_incremental(const LabeledDataset& train, const LabeledDataset& test,
                         const IncrementalSchedule& sched, Method method,
                         const TrainConfig& cfg);

}  // namespace cilfair
