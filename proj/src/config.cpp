#include "cilfair/config.hpp"

#include <fstream>
#include <set>

#include "cilfair/error.hpp"

namespace cilfair {

namespace {

using nlohmann::json;

[[noreturn]] void field_error(const std::string& field, const std::string& what) {
  throw ParseError("config: field '" + field + "': " + what);
}

void check_keys(const json& j, const std::string& where,
                const std::set<std::string>& allowed) {
  if (!j.is_object()) field_error(where, "expected an object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) field_error(where + "." + key, "unknown field");
  }
}

template <typename T>
void read_into(const json& j, const std::string& field, T& out) {
  if (!j.contains(field)) return;
  try {
    out = j.at(field).get<T>();
  } catch (const json::exception&) {
    field_error(field, "wrong type");
  }
}

void parse_dataset(const json& j, DatasetConfig& out) {
  check_keys(j, "dataset",
             {"kind", "classes", "per_class_train", "per_class_test", "feature_dim",
              "cluster_spread", "data_seed", "train_path", "test_path"});
  read_into(j, "kind", out.kind);
  if (out.kind != "synthetic" && out.kind != "csv") {
    field_error("dataset.kind", "must be \"synthetic\" or \"csv\"");
  }
  read_into(j, "classes", out.classes);
  read_into(j, "per_class_train", out.per_class_train);
  read_into(j, "per_class_test", out.per_class_test);
  read_into(j, "feature_dim", out.feature_dim);
  read_into(j, "cluster_spread", out.cluster_spread);
  read_into(j, "data_seed", out.data_seed);
  read_into(j, "train_path", out.train_path);
  read_into(j, "test_path", out.test_path);
  if (out.kind == "csv" && (out.train_path.empty() || out.test_path.empty())) {
    field_error("dataset.train_path", "csv datasets need train_path and test_path");
  }
  if (out.kind == "synthetic" &&
      (out.classes == 0 || out.per_class_train == 0 || out.per_class_test == 0 ||
       out.feature_dim == 0)) {
    field_error("dataset", "synthetic counts must be positive");
  }
}

void parse_schedule(const json& j, IncrementalSchedule& out) {
  check_keys(j, "schedule", {"steps", "classes_per_step", "class_order_seed"});
  read_into(j, "steps", out.steps);
  read_into(j, "classes_per_step", out.classes_per_step);
  read_into(j, "class_order_seed", out.class_order_seed);
  if (out.steps == 0 || out.classes_per_step == 0) {
    field_error("schedule", "steps and classes_per_step must be >= 1");
  }
}

void parse_lr(const json& j, LrSchedule& out) {
  check_keys(j, "train.lr", {"initial", "decay_fractions", "factor"});
  read_into(j, "initial", out.initial);
  read_into(j, "decay_fractions", out.decay_fractions);
  read_into(j, "factor", out.factor);
}

void parse_train(const json& j, TrainConfig& out) {
  check_keys(j, "train",
             {"hidden_sizes", "epochs_base", "epochs_cil", "epochs_dropout_phase",
              "epochs_ordinary_phase", "batch_size", "lr", "lambda", "temperature",
              "dropout_rate", "eta", "activation_threshold", "coverage_threshold",
              "quantifier", "max_resample_attempts", "gamma", "exemplar_capacity",
              "divergence_metric", "distill_teacher", "totalloss_printed_variant",
              "seed"});
  read_into(j, "hidden_sizes", out.hidden_sizes);
  read_into(j, "epochs_base", out.epochs_base);
  read_into(j, "epochs_cil", out.epochs_cil);
  read_into(j, "epochs_dropout_phase", out.epochs_dropout_phase);
  read_into(j, "epochs_ordinary_phase", out.epochs_ordinary_phase);
  read_into(j, "batch_size", out.batch_size);
  if (j.contains("lr")) parse_lr(j.at("lr"), out.lr);
  if (j.contains("lambda")) {
    const auto& l = j.at("lambda");
    if (l.is_string()) {
      if (l.get<std::string>() != "auto") {
        field_error("train.lambda", "must be a number in [0,1] or \"auto\"");
      }
      out.lambda.reset();
    } else if (l.is_number()) {
      out.lambda = l.get<double>();
    } else {
      field_error("train.lambda", "must be a number in [0,1] or \"auto\"");
    }
  }
  read_into(j, "temperature", out.temperature);
  read_into(j, "dropout_rate", out.dropout_rate);
  read_into(j, "eta", out.eta);
  read_into(j, "activation_threshold", out.coverage.activation_threshold);
  read_into(j, "coverage_threshold", out.coverage.coverage_threshold);
  if (j.contains("quantifier")) {
    std::string q;
    read_into(j, "quantifier", q);
    if (q == "existential") {
      out.coverage.quantifier = Quantifier::existential;
    } else if (q == "universal") {
      out.coverage.quantifier = Quantifier::universal;
    } else {
      field_error("train.quantifier", "must be \"existential\" or \"universal\"");
    }
  }
  read_into(j, "max_resample_attempts", out.coverage.max_resample_attempts);
  read_into(j, "gamma", out.gamma);
  read_into(j, "exemplar_capacity", out.exemplar_capacity);
  if (j.contains("divergence_metric")) {
    std::string m;
    read_into(j, "divergence_metric", m);
    try {
      out.metric = parse_divergence_metric(m);
    } catch (const ParamError& e) {
      field_error("train.divergence_metric", e.what());
    }
  }
  if (j.contains("distill_teacher")) {
    std::string t;
    read_into(j, "distill_teacher", t);
    if (t == "incremental") {
      out.distill_teacher = DistillTeacher::incremental;
    } else if (t == "base") {
      out.distill_teacher = DistillTeacher::base;
    } else {
      field_error("train.distill_teacher", "must be \"incremental\" or \"base\"");
    }
  }
  read_into(j, "totalloss_printed_variant", out.totalloss_printed_variant);
  read_into(j, "seed", out.seed);
  try {
    out.validate();
  } catch (const ParamError& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
}

void parse_probe(const json& j, ProbeConfig& out) {
  check_keys(j, "probe",
             {"reduced_per_class", "capacities", "mask_ratios", "coverage_runs",
              "coverage_activation_threshold"});
  read_into(j, "reduced_per_class", out.reduced_per_class);
  read_into(j, "capacities", out.capacities);
  read_into(j, "mask_ratios", out.mask_ratios);
  read_into(j, "coverage_runs", out.coverage_runs);
  read_into(j, "coverage_activation_threshold", out.coverage_activation_threshold);
  if (out.capacities.empty()) field_error("probe.capacities", "must be nonempty");
  if (out.mask_ratios.empty()) field_error("probe.mask_ratios", "must be nonempty");
  for (double r : out.mask_ratios) {
    if (r < 0.0 || r > 1.0) field_error("probe.mask_ratios", "ratios must be in [0,1]");
  }
  if (out.coverage_activation_threshold < 0.0 ||
      out.coverage_activation_threshold > 1.0) {
    field_error("probe.coverage_activation_threshold", "must be in [0,1]");
  }
}

void parse_sweep(const json& j, SweepConfig& out) {
  check_keys(j, "sweep", {"eta_values", "t_values", "beta_values", "class_splits"});
  read_into(j, "eta_values", out.eta_values);
  read_into(j, "t_values", out.t_values);
  read_into(j, "beta_values", out.beta_values);
  if (j.contains("class_splits")) {
    out.class_splits.clear();
    const auto& arr = j.at("class_splits");
    if (!arr.is_array()) field_error("sweep.class_splits", "expected an array");
    for (const auto& item : arr) {
      IncrementalSchedule s;
      parse_schedule(item, s);
      out.class_splits.push_back(s);
    }
  }
  if (out.eta_values.empty()) field_error("sweep.eta_values", "must be nonempty");
  for (double v : out.eta_values) {
    if (v < 0.0 || v > 1.0) field_error("sweep.eta_values", "eta must be in [0,1]");
  }
  if (out.t_values.empty() || out.beta_values.empty()) {
    field_error("sweep.t_values", "threshold grids must be nonempty");
  }
}

}  // namespace

ExperimentConfig parse_config(const json& j) {
  ExperimentConfig cfg;
  check_keys(j, "config",
             {"schema_version", "dataset", "schedule", "train", "methods", "seeds",
              "out_dir", "probe", "sweep"});
  read_into(j, "schema_version", cfg.schema_version);
  if (cfg.schema_version != 1) {
    field_error("schema_version", "this build reads schema version 1");
  }
  if (j.contains("dataset")) parse_dataset(j.at("dataset"), cfg.dataset);
  if (j.contains("schedule")) parse_schedule(j.at("schedule"), cfg.schedule);
  if (j.contains("train")) parse_train(j.at("train"), cfg.train);
  if (j.contains("methods")) {
    std::vector<std::string> names;
    read_into(j, "methods", names);
    if (names.empty()) field_error("methods", "must be nonempty");
    cfg.methods.clear();
    for (const auto& n : names) {
      try {
        cfg.methods.push_back(parse_method(n));
      } catch (const ParamError& e) {
        field_error("methods", e.what());
      }
    }
  }
  read_into(j, "seeds", cfg.seeds);
  if (cfg.seeds.empty()) field_error("seeds", "must be nonempty");
  read_into(j, "out_dir", cfg.out_dir);
  if (cfg.out_dir.empty()) field_error("out_dir", "must be nonempty");
  if (j.contains("probe")) parse_probe(j.at("probe"), cfg.probe);
  if (j.contains("sweep")) parse_sweep(j.at("sweep"), cfg.sweep);
  return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ParseError("config: cannot open " + path);
  json j;
  try {
    j = json::parse(f);
  } catch (const json::exception& e) {
    throw ParseError("config: " + path + " is not valid JSON: " + e.what());
  }
  return parse_config(j);
}

nlohmann::json config_json(const ExperimentConfig& cfg) {
  json train = {
      {"hidden_sizes", cfg.train.hidden_sizes},
      {"epochs_base", cfg.train.epochs_base},
      {"epochs_cil", cfg.train.epochs_cil},
      {"epochs_dropout_phase", cfg.train.epochs_dropout_phase},
      {"epochs_ordinary_phase", cfg.train.epochs_ordinary_phase},
      {"batch_size", cfg.train.batch_size},
      {"lr",
       {{"initial", cfg.train.lr.initial},
        {"decay_fractions", cfg.train.lr.decay_fractions},
        {"factor", cfg.train.lr.factor}}},
      {"temperature", cfg.train.temperature},
      {"dropout_rate", cfg.train.dropout_rate},
      {"eta", cfg.train.eta},
      {"activation_threshold", cfg.train.coverage.activation_threshold},
      {"coverage_threshold", cfg.train.coverage.coverage_threshold},
      {"quantifier", cfg.train.coverage.quantifier == Quantifier::existential
                         ? "existential"
                         : "universal"},
      {"max_resample_attempts", cfg.train.coverage.max_resample_attempts},
      {"gamma", cfg.train.gamma},
      {"exemplar_capacity", cfg.train.exemplar_capacity},
      {"divergence_metric", divergence_metric_name(cfg.train.metric)},
      {"distill_teacher",
       cfg.train.distill_teacher == DistillTeacher::base ? "base" : "incremental"},
      {"totalloss_printed_variant", cfg.train.totalloss_printed_variant},
      {"seed", cfg.train.seed},
  };
  if (cfg.train.lambda) {
    train["lambda"] = *cfg.train.lambda;
  } else {
    train["lambda"] = "auto";
  }
  json dataset = {{"kind", cfg.dataset.kind}};
  if (cfg.dataset.kind == "synthetic") {
    dataset["classes"] = cfg.dataset.classes;
    dataset["per_class_train"] = cfg.dataset.per_class_train;
    dataset["per_class_test"] = cfg.dataset.per_class_test;
    dataset["feature_dim"] = cfg.dataset.feature_dim;
    dataset["cluster_spread"] = cfg.dataset.cluster_spread;
    dataset["data_seed"] = cfg.dataset.data_seed;
  } else {
    dataset["train_path"] = cfg.dataset.train_path;
    dataset["test_path"] = cfg.dataset.test_path;
  }
  std::vector<std::string> methods;
  for (Method m : cfg.methods) methods.push_back(method_name(m));
  return {
      {"schema_version", cfg.schema_version},
      {"dataset", std::move(dataset)},
      {"schedule",
       {{"steps", cfg.schedule.steps},
        {"classes_per_step", cfg.schedule.classes_per_step},
        {"class_order_seed", cfg.schedule.class_order_seed}}},
      {"train", std::move(train)},
      {"methods", std::move(methods)},
      {"seeds", cfg.seeds},
      {"out_dir", cfg.out_dir},
  };
}

SynthSplit load_dataset(const DatasetConfig& cfg) {
  if (cfg.kind == "csv") {
    SynthSplit out;
    out.train = load_csv(cfg.train_path);
    out.test = load_csv(cfg.test_path);
    return out;
  }
  return synth_generate_split(cfg.classes, cfg.per_class_train, cfg.per_class_test,
                              cfg.feature_dim, cfg.cluster_spread, cfg.data_seed);
}

}  // namespace cilfair
