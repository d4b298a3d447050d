#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "cilfair/coverage.hpp"
#include "cilfair/data.hpp"
#include "cilfair/nn.hpp"

namespace cilfair {

// Per-class accuracy on a test set. Classes the net can predict but that have
// no test samples are listed in absent_classes rather than scored as zero.
struct ClassAccuracies {
  std::map<int, double> accuracy;          // class -> correct_c / total_c
  std::map<int, std::size_t> test_counts;  // class -> test samples seen
  std::vector<int> absent_classes;         // net classes with no test samples
};

// Per-step evaluation record; serialization lives in report_io.
struct StepReport {
  std::size_t step = 0;
  double acc = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double cwv = 0.0;
  double mcd = 0.0;
  CoverageReport coverage;
  ClassAccuracies per_class;
};

// Index of the largest element; ties resolve to the lowest index so
// downstream metrics are deterministic.
std::size_t argmax_row(std::span<const double> row);

// Predicted class per row of `features` (argmax logit, lowest-index ties).
std::vector<int> predict(const Mlp& net, const Tensor2& features);

// Requires every test label to be a class the net knows.
ClassAccuracies per_class_accuracy(const Mlp& net, const LabeledDataset& test);

// Population variance of the per-class accuracies (divide by class count).
double cwv(const ClassAccuracies& acc);

// Gap between the best and worst per-class accuracy.
double mcd(const ClassAccuracies& acc);

// Unweighted means over the classes present in the test set. A class the net
// never predicts contributes precision 0.
std::pair<double, double> macro_precision_recall(const Mlp& net,
                                                 const LabeledDataset& test);

// total correct / total samples
double overall_accuracy(const Mlp& net, const LabeledDataset& test);

// True iff the fairness metric strictly worsened by more than gamma.
bool fairness_bug(double f_new, double f_base, double gamma);

// Standard Pearson r; lengths must match and be >= 2, inputs non-constant.
double pearson_correlation(const std::vector<double>& xs,
                           const std::vector<double>& ys);

}  // namespace cilfair
