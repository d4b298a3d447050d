#include "cilfair/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "cilfair/error.hpp"
#include "cilfair/rng.hpp"

namespace cilfair {

namespace {

std::vector<int> sorted_labels_present(const std::vector<Sample>& samples) {
  std::set<int> s;
  for (const auto& x : samples) s.insert(x.label);
  return {s.begin(), s.end()};
}

// sample indices grouped per class, in class_set order
std::vector<std::vector<std::size_t>> group_by_class(const LabeledDataset& ds) {
  std::unordered_map<int, std::size_t> pos;
  for (std::size_t c = 0; c < ds.class_set.size(); ++c) pos[ds.class_set[c]] = c;
  std::vector<std::vector<std::size_t>> groups(ds.class_set.size());
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    groups[pos.at(ds.samples[i].label)].push_back(i);
  }
  return groups;
}

}  // namespace

LabeledDataset make_dataset(std::vector<Sample> samples, std::size_t feature_dim,
                            std::vector<int> declared_classes) {
  std::unordered_set<std::int64_t> ids;
  for (const auto& s : samples) {
    if (s.features.size() != feature_dim) {
      throw InputError("dataset: sample " + std::to_string(s.id) + " has " +
                       std::to_string(s.features.size()) + " features, expected " +
                       std::to_string(feature_dim));
    }
    if (!ids.insert(s.id).second) {
      throw InputError("dataset: duplicate sample id " + std::to_string(s.id));
    }
  }
  LabeledDataset ds;
  ds.feature_dim = feature_dim;
  ds.samples = std::move(samples);
  if (declared_classes.empty()) {
    ds.class_set = sorted_labels_present(ds.samples);
  } else {
    std::sort(declared_classes.begin(), declared_classes.end());
    declared_classes.erase(std::unique(declared_classes.begin(), declared_classes.end()),
                           declared_classes.end());
    std::set<int> declared(declared_classes.begin(), declared_classes.end());
    for (const auto& s : ds.samples) {
      if (!declared.count(s.label)) {
        throw InputError("dataset: label " + std::to_string(s.label) +
                         " not in declared class set");
      }
    }
    ds.class_set = std::move(declared_classes);
  }
  return ds;
}

Batch to_batch(const LabeledDataset& ds) {
  std::vector<std::size_t> rows(ds.size());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  return to_batch(ds, rows);
}

Batch to_batch(const LabeledDataset& ds, const std::vector<std::size_t>& rows) {
  Batch b;
  b.features = Tensor2(rows.size(), ds.feature_dim);
  b.labels.resize(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Sample& s = ds.samples[rows[i]];
    std::copy(s.features.begin(), s.features.end(), b.features.row(i).begin());
    b.labels[i] = s.label;
  }
  return b;
}

LabeledDataset ExemplarMemory::as_dataset(std::size_t feature_dim) const {
  return make_dataset(samples, feature_dim);
}

SynthSplit synth_generate_split(std::size_t classes, std::size_t per_class_train,
                                std::size_t per_class_test, std::size_t feature_dim,
                                double cluster_spread, std::uint64_t seed) {
  if (classes == 0 || per_class_train == 0 || feature_dim == 0) {
    throw ParamError("synth_generate: counts must be positive");
  }
  if (cluster_spread < 0.0) throw ParamError("synth_generate: negative spread");
  Rng rng(derive_seed(seed, "synth"));
  // Unit-scale centers against spread-scale class noise: at the default
  // spread 1.0 the closest blobs overlap, so a small MLP tops out well below
  // perfect joint accuracy and incremental steps have room to forget.
  std::vector<std::vector<double>> centers(classes, std::vector<double>(feature_dim));
  for (auto& c : centers) {
    for (double& v : c) v = rng.normal();
  }
  std::vector<Sample> train, test;
  train.reserve(classes * per_class_train);
  test.reserve(classes * per_class_test);
  std::int64_t next_id = 0;
  auto draw = [&](std::size_t c) {
    Sample s;
    s.id = next_id++;
    s.label = static_cast<int>(c);
    s.features.resize(feature_dim);
    for (std::size_t d = 0; d < feature_dim; ++d) {
      s.features[d] = centers[c][d] + cluster_spread * rng.normal();
    }
    return s;
  };
  for (std::size_t c = 0; c < classes; ++c) {
    for (std::size_t i = 0; i < per_class_train; ++i) train.push_back(draw(c));
    for (std::size_t i = 0; i < per_class_test; ++i) test.push_back(draw(c));
  }
  SynthSplit out;
  out.train = make_dataset(std::move(train), feature_dim);
  out.test = per_class_test == 0 ? LabeledDataset{}
                                 : make_dataset(std::move(test), feature_dim);
  return out;
}

LabeledDataset synth_generate(std::size_t classes, std::size_t per_class,
                              std::size_t feature_dim, double cluster_spread,
                              std::uint64_t seed) {
  return synth_generate_split(classes, per_class, 0, feature_dim, cluster_spread, seed)
      .train;
}

std::vector<int> class_permutation(const LabeledDataset& ds,
                                   const IncrementalSchedule& sched) {
  std::vector<int> perm = ds.class_set;
  Rng rng(derive_seed(sched.class_order_seed, "class-perm"));
  auto order = shuffled_indices(perm.size(), rng);
  std::vector<int> out(perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i) out[i] = perm[order[i]];
  return out;
}

std::vector<LabeledDataset> split_incremental(const LabeledDataset& ds,
                                              const IncrementalSchedule& sched) {
  if (sched.steps == 0 || sched.classes_per_step == 0) {
    throw ParamError("split_incremental: steps and classes_per_step must be >= 1");
  }
  const std::size_t needed = sched.steps * sched.classes_per_step;
  if (needed > ds.class_set.size()) {
    throw ParamError("split_incremental: schedule needs " + std::to_string(needed) +
                     " classes, dataset has " + std::to_string(ds.class_set.size()));
  }
  const std::vector<int> perm = class_permutation(ds, sched);
  std::vector<LabeledDataset> steps;
  steps.reserve(sched.steps);
  for (std::size_t k = 0; k < sched.steps; ++k) {
    std::vector<int> step_classes(perm.begin() + k * sched.classes_per_step,
                                  perm.begin() + (k + 1) * sched.classes_per_step);
    steps.push_back(filter_classes(ds, step_classes));
  }
  return steps;
}

ExemplarMemory random_exemplar_sample(const LabeledDataset& ds, std::size_t capacity,
                                      std::uint64_t seed) {
  const std::size_t k = ds.class_set.size();
  if (k == 0) throw ParamError("random_exemplar_sample: empty dataset");
  if (capacity < k) {
    throw ParamError("random_exemplar_sample: capacity " + std::to_string(capacity) +
                     " below class count " + std::to_string(k));
  }
  auto groups = group_by_class(ds);
  std::vector<std::size_t> quota(k, capacity / k);
  for (std::size_t c = 0; c < capacity % k; ++c) quota[c] += 1;

  // cap quotas at availability, then re-offer the freed capacity round-robin
  std::size_t freed = 0;
  for (std::size_t c = 0; c < k; ++c) {
    if (quota[c] > groups[c].size()) {
      freed += quota[c] - groups[c].size();
      quota[c] = groups[c].size();
    }
  }
  while (freed > 0) {
    bool placed = false;
    for (std::size_t c = 0; c < k && freed > 0; ++c) {
      if (quota[c] < groups[c].size()) {
        ++quota[c];
        --freed;
        placed = true;
      }
    }
    if (!placed) break;  // pool exhausted
  }

  ExemplarMemory mem;
  mem.capacity = capacity;
  for (std::size_t c = 0; c < k; ++c) {
    Rng rng(derive_seed(seed, "exemplar", c));
    auto order = shuffled_indices(groups[c].size(), rng);
    for (std::size_t i = 0; i < quota[c]; ++i) {
      mem.samples.push_back(ds.samples[groups[c][order[i]]]);
    }
  }
  return mem;
}

LabeledDataset mask_features(const LabeledDataset& ds, double mask_ratio,
                             std::uint64_t seed) {
  if (mask_ratio < 0.0 || mask_ratio > 1.0) {
    throw ParamError("mask_features: ratio must be in [0,1]");
  }
  const std::size_t zeroed = static_cast<std::size_t>(
      std::llround(mask_ratio * static_cast<double>(ds.feature_dim)));
  LabeledDataset out = ds;
  for (std::size_t i = 0; i < out.samples.size(); ++i) {
    Rng rng(derive_seed(seed, "mask", i));
    auto order = shuffled_indices(ds.feature_dim, rng);
    for (std::size_t j = 0; j < zeroed; ++j) out.samples[i].features[order[j]] = 0.0;
  }
  return out;
}

LabeledDataset imbalance_subsample(const LabeledDataset& ds,
                                   const std::map<int, std::size_t>& per_class_counts,
                                   std::uint64_t seed) {
  auto groups = group_by_class(ds);
  std::vector<Sample> kept;
  for (std::size_t c = 0; c < ds.class_set.size(); ++c) {
    const int label = ds.class_set[c];
    auto it = per_class_counts.find(label);
    if (it == per_class_counts.end()) {
      for (std::size_t i : groups[c]) kept.push_back(ds.samples[i]);
      continue;
    }
    if (it->second > groups[c].size()) {
      throw ParamError("imbalance_subsample: class " + std::to_string(label) + " has " +
                       std::to_string(groups[c].size()) + " samples, requested " +
                       std::to_string(it->second));
    }
    Rng rng(derive_seed(seed, "imbalance", c));
    auto order = shuffled_indices(groups[c].size(), rng);
    for (std::size_t i = 0; i < it->second; ++i) {
      kept.push_back(ds.samples[groups[c][order[i]]]);
    }
  }
  return make_dataset(std::move(kept), ds.feature_dim);
}

LabeledDataset filter_classes(const LabeledDataset& ds, const std::vector<int>& classes) {
  std::set<int> want(classes.begin(), classes.end());
  std::vector<Sample> kept;
  for (const auto& s : ds.samples) {
    if (want.count(s.label)) kept.push_back(s);
  }
  return make_dataset(std::move(kept), ds.feature_dim,
                      std::vector<int>(want.begin(), want.end()));
}

LabeledDataset concat(const LabeledDataset& a, const LabeledDataset& b) {
  if (a.feature_dim != b.feature_dim) {
    throw InputError("concat: feature dimensions differ");
  }
  std::vector<Sample> samples = a.samples;
  samples.insert(samples.end(), b.samples.begin(), b.samples.end());
  return make_dataset(std::move(samples), a.feature_dim);
}

LabeledDataset remap_labels(const LabeledDataset& ds, const std::map<int, int>& map) {
  std::vector<Sample> samples = ds.samples;
  for (auto& s : samples) {
    auto it = map.find(s.label);
    if (it == map.end()) {
      throw InputError("remap_labels: no mapping for label " + std::to_string(s.label));
    }
    s.label = it->second;
  }
  return make_dataset(std::move(samples), ds.feature_dim);
}

LabeledDataset load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("load_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("load_csv: empty file " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();

  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string col;
    while (std::getline(ss, col, ',')) header.push_back(col);
  }
  if (header.size() < 2 || header[0] != "id" || header[1] != "label") {
    throw ParseError("load_csv: line 1: header must start with id,label");
  }
  for (std::size_t d = 2; d < header.size(); ++d) {
    if (header[d] != "f" + std::to_string(d - 2)) {
      throw ParseError("load_csv: line 1: expected column f" + std::to_string(d - 2) +
                       ", got " + header[d]);
    }
  }
  const std::size_t dim = header.size() - 2;

  std::vector<Sample> samples;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    {
      std::stringstream ss(line);
      std::string col;
      while (std::getline(ss, col, ',')) cells.push_back(col);
      if (!line.empty() && line.back() == ',') cells.push_back("");
    }
    if (cells.size() != dim + 2) {
      throw ParseError("load_csv: line " + std::to_string(lineno) + ": expected " +
                       std::to_string(dim + 2) + " columns, got " +
                       std::to_string(cells.size()));
    }
    Sample s;
    try {
      std::size_t used = 0;
      s.id = std::stoll(cells[0], &used);
      if (used != cells[0].size()) throw std::invalid_argument("trailing");
      s.label = std::stoi(cells[1], &used);
      if (used != cells[1].size()) throw std::invalid_argument("trailing");
      s.features.resize(dim);
      for (std::size_t d = 0; d < dim; ++d) {
        s.features[d] = std::stod(cells[d + 2], &used);
        if (used != cells[d + 2].size()) throw std::invalid_argument("trailing");
      }
    } catch (const std::exception&) {
      throw ParseError("load_csv: line " + std::to_string(lineno) + ": non-numeric value");
    }
    samples.push_back(std::move(s));
  }
  try {
    return make_dataset(std::move(samples), dim);
  } catch (const InputError& e) {
    throw ParseError(std::string("load_csv: ") + e.what());
  }
}

void save_csv(const LabeledDataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("save_csv: cannot open " + path);
  out << "id,label";
  for (std::size_t d = 0; d < ds.feature_dim; ++d) out << ",f" << d;
  out << "\n";
  char buf[64];
  for (const auto& s : ds.samples) {
    out << s.id << "," << s.label;
    for (double v : s.features) {
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      out << "," << buf;
    }
    out << "\n";
  }
  if (!out) throw ParseError("save_csv: write failed for " + path);
}

}  // namespace cilfair
