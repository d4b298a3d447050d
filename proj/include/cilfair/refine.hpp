#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cilfair/data.hpp"
#include "cilfair/nn.hpp"

namespace cilfair {

struct DivergenceRecord {
  std::int64_t sample_id = 0;
  double divergence = 0.0;
};

// Partition of a scored dataset: `high` holds the cutoff_index samples with
// the largest divergences, `low` the rest. Both keep the original dataset
// order; the ranking decides membership only.
struct RefinedSplit {
  LabeledDataset high;
  LabeledDataset low;
  std::size_t cutoff_index = 0;
  double eta = 0.0;
};

enum class DivergenceMetric { jensen_shannon, kullback_leibler, hellinger };

std::string divergence_metric_name(DivergenceMetric m);
DivergenceMetric parse_divergence_metric(const std::string& name);

// All three take probability vectors: equal lengths, nonnegative entries,
// each summing to 1 within 1e-6. Natural log; 0*log(0/m) is 0.
double js_divergence(std::span<const double> p, std::span<const double> q);

// KL(P||Q). Where Q lacks support that P has: with smooth=false this is a
// parameter error; with smooth=true, 1e-12 is added to every Q entry and Q
// renormalized first (keeps metric sweeps total on degenerate inputs).
double kl_divergence(std::span<const double> p, std::span<const double> q,
                     bool smooth = false);

double hellinger_distance(std::span<const double> p, std::span<const double> q);

double divergence(DivergenceMetric m, std::span<const double> p,
                  std::span<const double> q);

// Per-sample divergence between the two models' output distributions:
// P = softmax(base logits, T) and Q = softmax of the new model's logits
// restricted to the base model's class range (restriction before softmax,
// equivalent to renormalizing the restricted softmax). Output order matches
// ds order; scoring is parallelized over pre-assigned slots.
std::vector<DivergenceRecord> differential_analysis(const Mlp& m_base,
                                                    const Mlp& m_new,
                                                    const LabeledDataset& ds,
                                                    DivergenceMetric metric,
                                                    double temperature);

// Ranks records descending by divergence (ties broken by ascending sample
// id) and cuts at floor(eta * n): the top-ranked samples form `high`, the
// rest `low`, each in original ds order. Records must cover ds exactly.
RefinedSplit select_samples(const std::vector<DivergenceRecord>& records,
                            const LabeledDataset& ds, double eta);

}  // namespace cilfair
