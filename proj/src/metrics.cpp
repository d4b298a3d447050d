#include "cilfair/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "cilfair/error.hpp"

namespace cilfair {

namespace {

void check_labels(const Mlp& net, const LabeledDataset& test, const char* what) {
  if (test.empty()) throw InputError(std::string(what) + ": empty test set");
  for (const auto& s : test.samples) {
    if (s.label < 0 || static_cast<std::size_t>(s.label) >= net.class_count()) {
      throw InputError(std::string(what) + ": label " + std::to_string(s.label) +
                       " outside the net's class range");
    }
  }
}

}  // namespace

std::size_t argmax_row(std::span<const double> row) {
  if (row.empty()) throw InputError("argmax_row: empty row");
  std::size_t best = 0;
  for (std::size_t j = 1; j < row.size(); ++j) {
    if (row[j] > row[best]) best = j;
  }
  return best;
}

std::vector<int> predict(const Mlp& net, const Tensor2& features) {
  const ForwardResult fr = forward(net, features);
  std::vector<int> out(features.rows());
  for (std::size_t i = 0; i < features.rows(); ++i) {
    out[i] = static_cast<int>(argmax_row(fr.logits.row(i)));
  }
  return out;
}

ClassAccuracies per_class_accuracy(const Mlp& net, const LabeledDataset& test) {
  check_labels(net, test, "per_class_accuracy");
  const Batch batch = to_batch(test);
  const std::vector<int> pred = predict(net, batch.features);

  std::map<int, std::size_t> total, correct;
  for (std::size_t i = 0; i < test.size(); ++i) {
    total[batch.labels[i]] += 1;
    if (pred[i] == batch.labels[i]) correct[batch.labels[i]] += 1;
  }

  ClassAccuracies out;
  for (const auto& [c, n] : total) {
    out.test_counts[c] = n;
    out.accuracy[c] = static_cast<double>(correct[c]) / static_cast<double>(n);
  }
  for (std::size_t c = 0; c < net.class_count(); ++c) {
    if (!total.count(static_cast<int>(c))) {
      out.absent_classes.push_back(static_cast<int>(c));
    }
  }
  return out;
}

double cwv(const ClassAccuracies& acc) {
  if (acc.accuracy.empty()) throw ParamError("cwv: no class accuracies");
  double mean = 0.0;
  for (const auto& [c, a] : acc.accuracy) mean += a;
  mean /= static_cast<double>(acc.accuracy.size());
  double var = 0.0;
  for (const auto& [c, a] : acc.accuracy) var += (a - mean) * (a - mean);
  return var / static_cast<double>(acc.accuracy.size());
}

double mcd(const ClassAccuracies& acc) {
  if (acc.accuracy.empty()) throw ParamError("mcd: no class accuracies");
  double lo = 1.0, hi = 0.0;
  for (const auto& [c, a] : acc.accuracy) {
    lo = std::min(lo, a);
    hi = std::max(hi, a);
  }
  return hi - lo;
}

std::pair<double, double> macro_precision_recall(const Mlp& net,
                                                 const LabeledDataset& test) {
  check_labels(net, test, "macro_precision_recall");
  const Batch batch = to_batch(test);
  const std::vector<int> pred = predict(net, batch.features);

  std::map<int, std::size_t> actual, predicted, true_pos;
  for (std::size_t i = 0; i < test.size(); ++i) {
    actual[batch.labels[i]] += 1;
    predicted[pred[i]] += 1;
    if (pred[i] == batch.labels[i]) true_pos[batch.labels[i]] += 1;
  }

  double prec_sum = 0.0, rec_sum = 0.0;
  for (const auto& [c, n] : actual) {
    const double tp = static_cast<double>(true_pos[c]);
    const auto it = predicted.find(c);
    prec_sum += (it == predicted.end() || it->second == 0)
                    ? 0.0
                    : tp / static_cast<double>(it->second);
    rec_sum += tp / static_cast<double>(n);
  }
  const double k = static_cast<double>(actual.size());
  return {prec_sum / k, rec_sum / k};
}

double overall_accuracy(const Mlp& net, const LabeledDataset& test) {
  check_labels(net, test, "overall_accuracy");
  const Batch batch = to_batch(test);
  const std::vector<int> pred = predict(net, batch.features);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    if (pred[i] == batch.labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(test.size());
}

bool fairness_bug(double f_new, double f_base, double gamma) {
  return f_new - f_base > gamma;
}

double pearson_correlation(const std::vector<double>& xs,
                           const std::vector<double>& ys) {
  if (xs.size() != ys.size()) throw ParamError("pearson: length mismatch");
  if (xs.size() < 2) throw ParamError("pearson: need at least two points");
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw InputError("pearson: correlation undefined for constant input");
  }
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace cilfair
