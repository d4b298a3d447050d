#include "cilfair/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <mutex>
#include <thread>

#include "cilfair/error.hpp"
#include "cilfair/report_io.hpp"
#include "cilfair/rng.hpp"

namespace cilfair {

namespace {

namespace fs = std::filesystem;

std::string label_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

void prepare_out_dir(const std::string& path, bool force) {
  std::error_code ec;
  fs::create_directories(path, ec);
  if (ec) throw InputError("cannot create output directory " + path);
  if (!force && !fs::is_empty(path)) {
    throw ParamError("output directory " + path +
                     " is not empty; pass --force to write anyway");
  }
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// contiguous class-index ranges used after the driver-style relabeling
std::vector<int> class_range(std::size_t lo, std::size_t hi) {
  std::vector<int> cs;
  for (std::size_t c = lo; c < hi; ++c) cs.push_back(static_cast<int>(c));
  return cs;
}

ProbeRow final_row(const std::string& condition, std::uint64_t seed,
                   const RunTrace& trace) {
  const StepReport& last = trace.reports.back();
  return {condition, seed,         last.acc,
          last.cwv,  last.mcd,     last.coverage.coverage};
}

// the probe experiments on a two-step schedule share this canonicalized view
struct TwoStepView {
  LabeledDataset base_train;  // step-1 classes, relabeled 0..cps-1
  LabeledDataset new_train;   // step-2 classes, relabeled cps..2cps-1
  LabeledDataset seen_test;   // test samples of both steps' classes
};

TwoStepView two_step_view(const SynthSplit& data, const IncrementalSchedule& sched) {
  IncrementalSchedule two = sched;
  two.steps = 2;
  if (2 * two.classes_per_step > data.train.class_set.size()) {
    throw ParamError("probe: dataset has too few classes for two steps");
  }
  const std::vector<int> perm = class_permutation(data.train, two);
  std::map<int, int> relabel;
  for (std::size_t i = 0; i < perm.size(); ++i) relabel[perm[i]] = static_cast<int>(i);
  const LabeledDataset train_c = remap_labels(data.train, relabel);
  const LabeledDataset test_c = remap_labels(data.test, relabel);
  const std::size_t cps = two.classes_per_step;
  TwoStepView view;
  view.base_train = filter_classes(train_c, class_range(0, cps));
  view.new_train = filter_classes(train_c, class_range(cps, 2 * cps));
  view.seen_test = filter_classes(test_c, class_range(0, 2 * cps));
  return view;
}

// like the traditional step, but memory batches distill toward the base
// model's softened outputs instead of taking cross-entropy
Mlp kd_cil_step(const Mlp& m_base, const LabeledDataset& x_new,
                const ExemplarMemory& x_s, const TrainConfig& cfg) {
  cfg.validate();
  const std::size_t old_classes = m_base.class_count();
  const std::size_t total = old_classes + x_new.class_set.size();
  const double lambda =
      cfg.lambda.value_or(static_cast<double>(old_classes) / static_cast<double>(total));

  Mlp net = expand_output_layer(m_base, total, derive_seed(cfg.seed, "expand-out"));
  const LabeledDataset mem = x_s.as_dataset(x_new.feature_dim);
  const Batch mem_all = to_batch(mem);
  const Tensor2 teacher_probs =
      softmax_rows(forward(m_base, mem_all.features).logits, cfg.temperature);

  const auto batch_count = [&](std::size_t n) {
    return (n + cfg.batch_size - 1) / cfg.batch_size;
  };
  const std::size_t nb_new = batch_count(x_new.size());
  const std::size_t nb_mem = batch_count(mem.size());

  for (std::size_t epoch = 0; epoch < cfg.epochs_cil; ++epoch) {
    const double lr = lr_at(cfg.lr, epoch, cfg.epochs_cil);
    Rng rng_new(derive_seed(cfg.seed, "cil-shuffle-new", epoch));
    Rng rng_mem(derive_seed(cfg.seed, "cil-shuffle-mem", epoch));
    const auto order_new = shuffled_indices(x_new.size(), rng_new);
    const auto order_mem = shuffled_indices(mem.size(), rng_mem);
    for (std::size_t b = 0; b < nb_new; ++b) {
      const auto slice = [&](const std::vector<std::size_t>& order, std::size_t blk) {
        const std::size_t lo = blk * cfg.batch_size;
        const std::size_t hi = std::min(lo + cfg.batch_size, order.size());
        return std::vector<std::size_t>(order.begin() + lo, order.begin() + hi);
      };
      const auto rows_new = slice(order_new, b);
      const auto rows_mem = slice(order_mem, b % nb_mem);
      const Batch bn = to_batch(x_new, rows_new);
      const Batch bm = to_batch(mem, rows_mem);

      const ForwardResult fn = forward(net, bn.features);
      const LossGrad ln = cross_entropy(fn.logits, bn.labels);
      const Gradients gn = backward(net, fn.cache, ln.grad_logits);

      Tensor2 t_rows(rows_mem.size(), teacher_probs.cols());
      for (std::size_t i = 0; i < rows_mem.size(); ++i) {
        const auto src = teacher_probs.row(rows_mem[i]);
        std::copy(src.begin(), src.end(), t_rows.row(i).begin());
      }
      const ForwardResult fm = forward(net, bm.features);
      const LossGrad lm = distillation_loss(fm.logits, t_rows, cfg.temperature);
      const Gradients gm = backward(net, fm.cache, lm.grad_logits);

      net = sgd_step(net, combine_gradients(gn, 1.0 - lambda, gm, lambda), lr);
    }
  }
  return net;
}

SweepRow sweep_row(std::vector<std::pair<std::string, std::string>> params,
                   std::uint64_t seed, const RunTrace& trace) {
  SweepRow row;
  row.params = std::move(params);
  row.seed = seed;
  const StepReport& last = trace.reports.back();
  row.acc = last.acc;
  row.cwv = last.cwv;
  row.mcd = last.mcd;
  std::vector<double> accs, cwvs;
  for (const auto& r : trace.reports) {
    accs.push_back(r.acc);
    cwvs.push_back(r.cwv);
  }
  row.acc_mean_all = mean_of(accs);
  row.cwv_mean_all = mean_of(cwvs);
  if (accs.size() > 1) {
    row.acc_mean_except_first =
        mean_of(std::vector<double>(accs.begin() + 1, accs.end()));
    row.cwv_mean_except_first =
        mean_of(std::vector<double>(cwvs.begin() + 1, cwvs.end()));
  } else {
    row.acc_mean_except_first = row.acc_mean_all;
    row.cwv_mean_except_first = row.cwv_mean_all;
  }
  return row;
}

// runs the refined method across all config seeds for one parameter setting
void refined_runs_into(std::vector<SweepRow>& out, const SynthSplit& data,
                       const IncrementalSchedule& sched, const TrainConfig& train,
                       const std::vector<std::uint64_t>& seeds,
                       std::vector<std::pair<std::string, std::string>> params) {
  for (std::uint64_t seed : seeds) {
    TrainConfig t = train;
    t.seed = seed;
    const RunTrace trace =
        run_incremental(data.train, data.test, sched, Method::refined, t);
    out.push_back(sweep_row(params, seed, trace));
  }
}

std::string probe_csv(const std::vector<ProbeRow>& rows) {
  std::string out = "condition,seed,acc,cwv,mcd,coverage\n";
  for (const auto& r : rows) {
    out += r.condition;
    out += "," + std::to_string(r.seed);
    out += "," + format_double(r.acc);
    out += "," + format_double(r.cwv);
    out += "," + format_double(r.mcd);
    out += "," + format_double(r.coverage);
    out += "\n";
  }
  return out;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  if (rows.empty()) throw ContractError("sweep produced no rows");
  std::string out;
  for (const auto& [k, v] : rows.front().params) out += k + ",";
  out +=
      "seed,acc,cwv,mcd,acc_mean_all_steps,cwv_mean_all_steps,"
      "acc_mean_except_first,cwv_mean_except_first\n";
  for (const auto& r : rows) {
    for (const auto& [k, v] : r.params) out += v + ",";
    out += std::to_string(r.seed);
    out += "," + format_double(r.acc);
    out += "," + format_double(r.cwv);
    out += "," + format_double(r.mcd);
    out += "," + format_double(r.acc_mean_all);
    out += "," + format_double(r.cwv_mean_all);
    out += "," + format_double(r.acc_mean_except_first);
    out += "," + format_double(r.cwv_mean_except_first);
    out += "\n";
  }
  return out;
}

nlohmann::json sweep_best(const std::vector<SweepRow>& rows) {
  // lowest mean final-step CWV across seeds wins
  std::map<std::string, std::pair<nlohmann::json, std::vector<double>>> groups;
  for (const auto& r : rows) {
    std::string key;
    nlohmann::json params = nlohmann::json::object();
    for (const auto& [k, v] : r.params) {
      key += k + "=" + v + ";";
      params[k] = v;
    }
    auto& slot = groups[key];
    slot.first = params;
    slot.second.push_back(r.cwv);
  }
  nlohmann::json best;
  double best_cwv = 0.0;
  for (const auto& [key, slot] : groups) {
    const double m = mean_of(slot.second);
    if (best.is_null() || m < best_cwv) {
      best = {{"params", slot.first}, {"cwv_mean", m}};
      best_cwv = m;
    }
  }
  return best;
}

}  // namespace

std::string version_string() { return "cilfair 1.0.0"; }

std::vector<ProbeRow> probe_imbalance(const ExperimentConfig& cfg) {
  const SynthSplit data = load_dataset(cfg.dataset);
  IncrementalSchedule sched = cfg.schedule;
  sched.steps = 2;

  // thin out the classes that will form step 2
  const std::vector<int> perm = class_permutation(data.train, sched);
  const std::size_t cps = sched.classes_per_step;
  if (2 * cps > perm.size()) {
    throw ParamError("probe imbalance: dataset has too few classes for two steps");
  }
  std::map<int, std::size_t> reduced_counts;
  for (std::size_t i = cps; i < 2 * cps; ++i) {
    reduced_counts[perm[i]] = cfg.probe.reduced_per_class;
  }
  const LabeledDataset reduced_train = imbalance_subsample(
      data.train, reduced_counts, derive_seed(cfg.train.seed, "probe-imbalance"));

  std::vector<ProbeRow> rows;
  const std::pair<std::string, const LabeledDataset*> conditions[] = {
      {"balanced", &data.train}, {"reduced", &reduced_train}};
  for (const auto& [name, train] : conditions) {
    for (std::uint64_t seed : cfg.seeds) {
      TrainConfig t = cfg.train;
      t.seed = seed;
      const RunTrace trace =
          run_incremental(*train, data.test, sched, Method::traditional, t);
      rows.push_back(final_row(name, seed, trace));
    }
  }
  return rows;
}

std::vector<ProbeRow> probe_memory(const ExperimentConfig& cfg) {
  const SynthSplit data = load_dataset(cfg.dataset);
  std::vector<ProbeRow> rows;
  for (std::size_t capacity : cfg.probe.capacities) {
    for (std::uint64_t seed : cfg.seeds) {
      TrainConfig t = cfg.train;
      t.exemplar_capacity = capacity;
      t.seed = seed;
      const RunTrace trace = run_incremental(data.train, data.test, cfg.schedule,
                                             Method::traditional, t);
      rows.push_back(final_row(std::to_string(capacity), seed, trace));
    }
  }
  return rows;
}

std::vector<ProbeRow> probe_mask(const ExperimentConfig& cfg) {
  const SynthSplit data = load_dataset(cfg.dataset);
  const std::vector<int> perm = class_permutation(data.train, cfg.schedule);
  const std::size_t cps = cfg.schedule.classes_per_step;
  if (cps >= perm.size()) {
    throw ParamError("probe mask: schedule leaves no incremental classes");
  }
  const LabeledDataset base_part = filter_classes(
      data.train, std::vector<int>(perm.begin(), perm.begin() + cps));
  const LabeledDataset incr_part = filter_classes(
      data.train, std::vector<int>(perm.begin() + cps, perm.end()));

  std::vector<ProbeRow> rows;
  for (double ratio : cfg.probe.mask_ratios) {
    // one mask seed for every ratio, so corruption grows by nesting
    const LabeledDataset masked =
        mask_features(incr_part, ratio, derive_seed(cfg.train.seed, "probe-mask"));
    const LabeledDataset cond_train = concat(base_part, masked);
    for (std::uint64_t seed : cfg.seeds) {
      TrainConfig t = cfg.train;
      t.seed = seed;
      const RunTrace trace = run_incremental(cond_train, data.test, cfg.schedule,
                                             Method::traditional, t);
      rows.push_back(final_row(label_double(ratio), seed, trace));
    }
  }
  return rows;
}

CoverageBiasResult probe_coverage_bias(const ExperimentConfig& cfg) {
  if (cfg.probe.coverage_runs < 2) {
    throw ParamError("probe coverage-bias: need at least 2 runs");
  }
  const SynthSplit data = load_dataset(cfg.dataset);
  const TwoStepView view = two_step_view(data, cfg.schedule);

  TrainConfig base_cfg = cfg.train;
  base_cfg.seed = derive_seed(cfg.train.seed, "probe-cov-base");
  const Mlp m_base = train_base(view.base_train, base_cfg);

  // only the exemplar draw varies across runs; the training seed is fixed so
  // the measured spread is attributable to the sampled memory alone
  TrainConfig step_cfg = cfg.train;
  step_cfg.seed = derive_seed(cfg.train.seed, "probe-cov-train");

  CoverageBiasResult result;
  std::vector<double> coverages, cwvs;
  for (std::size_t i = 0; i < cfg.probe.coverage_runs; ++i) {
    const ExemplarMemory mem = random_exemplar_sample(
        view.base_train, cfg.train.exemplar_capacity,
        derive_seed(cfg.train.seed, "probe-cov-draw", i));
    CoverageConfig probe_cov = cfg.train.coverage;
    probe_cov.activation_threshold = cfg.probe.coverage_activation_threshold;
    const CoverageReport cov = neuron_coverage(
        m_base, mem.as_dataset(view.base_train.feature_dim), probe_cov);
    const Mlp m_new = traditional_cil_step(m_base, view.new_train, mem, step_cfg);

    const ClassAccuracies acc = per_class_accuracy(m_new, view.seen_test);
    ProbeRow row;
    row.condition = "resample";
    row.seed = i;
    row.acc = overall_accuracy(m_new, view.seen_test);
    row.cwv = cwv(acc);
    row.mcd = mcd(acc);
    row.coverage = cov.coverage;
    result.rows.push_back(row);
    coverages.push_back(row.coverage);
    cwvs.push_back(row.cwv);
  }
  result.pearson_r = pearson_correlation(coverages, cwvs);
  return result;
}

std::vector<ProbeRow> probe_distill(const ExperimentConfig& cfg) {
  const SynthSplit data = load_dataset(cfg.dataset);
  const TwoStepView view = two_step_view(data, cfg.schedule);

  std::vector<ProbeRow> rows;
  for (const std::string condition : {"cross_entropy", "distillation"}) {
    for (std::uint64_t seed : cfg.seeds) {
      TrainConfig base_cfg = cfg.train;
      base_cfg.seed = derive_seed(seed, "step", 0);
      const Mlp m_base = train_base(view.base_train, base_cfg);

      TrainConfig step_cfg = cfg.train;
      step_cfg.seed = derive_seed(seed, "step", 1);
      const ExemplarMemory mem =
          random_exemplar_sample(view.base_train, cfg.train.exemplar_capacity,
                                 derive_seed(step_cfg.seed, "memory"));
      const Mlp m_new = condition == "cross_entropy"
                            ? traditional_cil_step(m_base, view.new_train, mem, step_cfg)
                            : kd_cil_step(m_base, view.new_train, mem, step_cfg);

      const ClassAccuracies acc = per_class_accuracy(m_new, view.seen_test);
      const CoverageReport cov = neuron_coverage(
          m_base, mem.as_dataset(view.base_train.feature_dim), cfg.train.coverage);
      rows.push_back({condition, seed, overall_accuracy(m_new, view.seen_test),
                      cwv(acc), mcd(acc), cov.coverage});
    }
  }
  return rows;
}

std::vector<ProbeRow> probe_hard_sample(const ExperimentConfig& cfg) {
  const SynthSplit data = load_dataset(cfg.dataset);
  std::vector<ProbeRow> rows;
  for (Method m : {Method::traditional, Method::refined}) {
    for (std::uint64_t seed : cfg.seeds) {
      TrainConfig t = cfg.train;
      t.seed = seed;
      const RunTrace trace =
          run_incremental(data.train, data.test, cfg.schedule, m, t);
      rows.push_back(final_row(method_name(m), seed, trace));
    }
  }
  return rows;
}

std::vector<SweepRow> sweep_eta(const ExperimentConfig& cfg) {
  const SynthSplit data = load_dataset(cfg.dataset);
  std::vector<SweepRow> rows;
  for (double v : cfg.sweep.eta_values) {
    TrainConfig t = cfg.train;
    t.eta = v;
    refined_runs_into(rows, data, cfg.schedule, t, cfg.seeds,
                      {{"eta", label_double(v)}});
  }
  return rows;
}

std::vector<SweepRow> sweep_coverage_thresholds(const ExperimentConfig& cfg) {
  const SynthSplit data = load_dataset(cfg.dataset);
  std::vector<SweepRow> rows;
  for (double tval : cfg.sweep.t_values) {
    for (double bval : cfg.sweep.beta_values) {
      TrainConfig t = cfg.train;
      t.coverage.activation_threshold = tval;
      t.coverage.coverage_threshold = bval;
      refined_runs_into(rows, data, cfg.schedule, t, cfg.seeds,
                        {{"t", label_double(tval)}, {"beta", label_double(bval)}});
    }
  }
  return rows;
}

std::vector<SweepRow> sweep_divergence_metric(const ExperimentConfig& cfg) {
  const SynthSplit data = load_dataset(cfg.dataset);
  std::vector<SweepRow> rows;
  for (DivergenceMetric m :
       {DivergenceMetric::jensen_shannon, DivergenceMetric::kullback_leibler,
        DivergenceMetric::hellinger}) {
    TrainConfig t = cfg.train;
    t.metric = m;
    refined_runs_into(rows, data, cfg.schedule, t, cfg.seeds,
                      {{"metric", divergence_metric_name(m)}});
  }
  return rows;
}

std::vector<SweepRow> sweep_class_split(const ExperimentConfig& cfg) {
  const SynthSplit data = load_dataset(cfg.dataset);
  std::vector<IncrementalSchedule> splits = cfg.sweep.class_splits;
  if (splits.empty()) {
    // all divisor pairs of the class count with at least two steps
    const std::size_t classes = data.train.class_set.size();
    for (std::size_t steps = 2; steps <= classes; ++steps) {
      if (classes % steps == 0) {
        splits.push_back(
            {steps, classes / steps, cfg.schedule.class_order_seed});
      }
    }
  }
  std::vector<SweepRow> rows;
  for (const IncrementalSchedule& sched : splits) {
    refined_runs_into(rows, data, sched, cfg.train, cfg.seeds,
                      {{"steps", std::to_string(sched.steps)},
                       {"classes_per_step", std::to_string(sched.classes_per_step)}});
  }
  return rows;
}

void cmd_run(const ExperimentConfig& cfg, const CliOptions& opts) {
  const std::string out = opts.out_dir.value_or(cfg.out_dir);
  prepare_out_dir(out, opts.force);
  const SynthSplit data = load_dataset(cfg.dataset);

  struct Task {
    Method method;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (Method m : cfg.methods) {
    for (std::uint64_t seed : cfg.seeds) tasks.push_back({m, seed});
  }

  std::vector<RunTrace> traces(tasks.size());
  std::atomic<std::size_t> next{0};
  std::mutex err_mutex;
  std::exception_ptr first_error;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) break;
      try {
        TrainConfig t = cfg.train;
        t.seed = tasks[i].seed;
        traces[i] = run_incremental(data.train, data.test, cfg.schedule,
                                    tasks[i].method, t);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  if (opts.jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t j = 0; j < std::min(opts.jobs, tasks.size()); ++j) {
      pool.emplace_back(worker);
    }
    for (auto& th : pool) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const std::string stem =
        method_name(tasks[i].method) + "_seed" + std::to_string(tasks[i].seed);
    write_text_file(out + "/" + stem + ".csv", step_reports_csv(traces[i].reports));
    write_text_file(out + "/" + stem + "_trace.json",
                    run_trace_json(traces[i]).dump(2) + "\n");
    save_model(traces[i].final_model, out + "/" + stem + "_model.bin");
    for (std::size_t k = 0; k < traces[i].details.size(); ++k) {
      if (!traces[i].details[k].divergences.empty()) {
        write_text_file(
            out + "/" + stem + "_step" + std::to_string(k + 1) + "_divergences.csv",
            divergences_csv(traces[i].details[k].divergences));
      }
    }
  }

  // cross-seed aggregates per method and step
  nlohmann::json results = nlohmann::json::object();
  for (Method m : cfg.methods) {
    nlohmann::json per_step = nlohmann::json::array();
    for (std::size_t step = 0; step < cfg.schedule.steps; ++step) {
      std::vector<double> accs, cwvs, mcds, covs;
      for (std::size_t i = 0; i < tasks.size(); ++i) {
        if (tasks[i].method != m) continue;
        const StepReport& r = traces[i].reports.at(step);
        accs.push_back(r.acc);
        cwvs.push_back(r.cwv);
        mcds.push_back(r.mcd);
        covs.push_back(r.coverage.coverage);
      }
      per_step.push_back({{"step", step + 1},
                          {"acc_mean", mean_of(accs)},
                          {"acc_median", median_of(accs)},
                          {"cwv_mean", mean_of(cwvs)},
                          {"cwv_median", median_of(cwvs)},
                          {"mcd_mean", mean_of(mcds)},
                          {"mcd_median", median_of(mcds)},
                          {"coverage_mean", mean_of(covs)}});
    }
    results[method_name(m)] = {{"per_step", per_step},
                               {"final_step", per_step.back()}};
  }
  const nlohmann::json summary = {{"config", config_json(cfg)},
                                  {"results", std::move(results)}};
  write_text_file(out + "/summary.json", summary.dump(2) + "\n");
}

void cmd_probe(const std::string& kind, const ExperimentConfig& cfg,
               const CliOptions& opts) {
  const std::string out = opts.out_dir.value_or(cfg.out_dir);
  prepare_out_dir(out, opts.force);

  if (kind == "coverage-bias") {
    const CoverageBiasResult result = probe_coverage_bias(cfg);
    write_text_file(out + "/probe_coverage-bias.csv", probe_csv(result.rows));
    const nlohmann::json extra = {{"pearson_r", result.pearson_r},
                                  {"runs", result.rows.size()}};
    write_text_file(out + "/probe_coverage-bias.json", extra.dump(2) + "\n");
    return;
  }

  std::vector<ProbeRow> rows;
  if (kind == "imbalance") {
    rows = probe_imbalance(cfg);
  } else if (kind == "memory") {
    rows = probe_memory(cfg);
  } else if (kind == "mask") {
    rows = probe_mask(cfg);
  } else if (kind == "distill") {
    rows = probe_distill(cfg);
  } else if (kind == "hard-sample") {
    rows = probe_hard_sample(cfg);
  } else {
    throw ParamError("unknown probe kind: " + kind);
  }
  write_text_file(out + "/probe_" + kind + ".csv", probe_csv(rows));
}

void cmd_sweep(const std::string& param, const ExperimentConfig& cfg,
               const CliOptions& opts) {
  const std::string out = opts.out_dir.value_or(cfg.out_dir);
  prepare_out_dir(out, opts.force);

  std::vector<SweepRow> rows;
  if (param == "eta") {
    rows = sweep_eta(cfg);
  } else if (param == "coverage-thresholds") {
    rows = sweep_coverage_thresholds(cfg);
  } else if (param == "divergence-metric") {
    rows = sweep_divergence_metric(cfg);
  } else if (param == "class-split") {
    rows = sweep_class_split(cfg);
  } else {
    throw ParamError("unknown sweep parameter: " + param);
  }
  write_text_file(out + "/sweep_" + param + ".csv", sweep_csv(rows));
  write_text_file(out + "/sweep_" + param + "_best.json",
                  sweep_best(rows).dump(2) + "\n");
}

}  // namespace cilfair
