#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cilfair/tensor.hpp"

namespace cilfair {

struct Sample {
  std::int64_t id = 0;
  std::vector<double> features;
  int label = 0;
};

// A labeled feature-vector dataset. class_set is kept sorted ascending and is
// either exactly the labels present or a declared superset.
struct LabeledDataset {
  std::vector<Sample> samples;
  std::vector<int> class_set;
  std::size_t feature_dim = 0;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
};

// Validates ids, dimensions, and labels; derives class_set from the labels
// when `declared_classes` is empty.
LabeledDataset make_dataset(std::vector<Sample> samples, std::size_t feature_dim,
                            std::vector<int> declared_classes = {});

// Feature matrix (row per sample) plus the label column.
struct Batch {
  Tensor2 features;
  std::vector<int> labels;
};
Batch to_batch(const LabeledDataset& ds);
Batch to_batch(const LabeledDataset& ds, const std::vector<std::size_t>& rows);

struct IncrementalSchedule {
  std::size_t steps = 1;
  std::size_t classes_per_step = 1;
  std::uint64_t class_order_seed = 0;
};

// Capacity-bounded store of old-class samples.
struct ExemplarMemory {
  std::size_t capacity = 0;
  std::vector<Sample> samples;

  LabeledDataset as_dataset(std::size_t feature_dim) const;
};

// Isotropic Gaussian blob per class: center coordinates ~ N(0,1), samples =
// center + spread*N(0,1). Unit-scale centers leave neighboring blobs partly
// overlapped at the default spread, so a two-hidden-layer model lands in the
// 85-95% joint-accuracy band instead of saturating. Ids are assigned
// sequentially from 0.
LabeledDataset synth_generate(std::size_t classes, std::size_t per_class,
                              std::size_t feature_dim, double cluster_spread,
                              std::uint64_t seed);

// Train and test splits drawn from the same class centers (per class: the
// train samples first, then the test samples, ids continuing across both).
struct SynthSplit {
  LabeledDataset train;
  LabeledDataset test;
};
SynthSplit synth_generate_split(std::size_t classes, std::size_t per_class_train,
                                std::size_t per_class_test, std::size_t feature_dim,
                                double cluster_spread, std::uint64_t seed);

// Label-disjoint step datasets covering the first steps*classes_per_step
// classes of a seeded class permutation.
std::vector<LabeledDataset> split_incremental(const LabeledDataset& ds,
                                              const IncrementalSchedule& sched);

// The permutation used by split_incremental, over ds.class_set.
std::vector<int> class_permutation(const LabeledDataset& ds,
                                   const IncrementalSchedule& sched);

// Equal per-class allocation: floor(capacity/classes) each, remainder to the
// first classes in class_set order; leftover capacity from short classes is
// re-offered round-robin so a saturating capacity keeps every sample.
ExemplarMemory random_exemplar_sample(const LabeledDataset& ds, std::size_t capacity,
                                      std::uint64_t seed);

// Zeroes round(mask_ratio*feature_dim) seeded-random coordinates per sample.
LabeledDataset mask_features(const LabeledDataset& ds, double mask_ratio,
                             std::uint64_t seed);

// Exact per-class subsampling without replacement. Classes absent from the
// map keep all their samples; a count of 0 removes the class.
LabeledDataset imbalance_subsample(const LabeledDataset& ds,
                                   const std::map<int, std::size_t>& per_class_counts,
                                   std::uint64_t seed);

// Keep only samples whose label is in `classes`.
LabeledDataset filter_classes(const LabeledDataset& ds, const std::vector<int>& classes);

// Concatenation; ids must stay unique across the two parts.
LabeledDataset concat(const LabeledDataset& a, const LabeledDataset& b);

// Replace labels through old->new map; throws on unmapped labels.
LabeledDataset remap_labels(const LabeledDataset& ds, const std::map<int, int>& map);

// CSV format: header `id,label,f0,...,f{d-1}`, one sample per line, decimal
// floats with round-trip precision.
LabeledDataset load_csv(const std::string& path);
void save_csv(const LabeledDataset& ds, const std::string& path);

}  // namespace cilfair
