#pragma once

#include <cstdint>
#include <utility>

#include "cilfair/data.hpp"
#include "cilfair/nn.hpp"

namespace cilfair {

// Which quantifier marks a neuron covered: some input exceeding the
// activation threshold (existential, the default) or every input (universal).
enum class Quantifier { existential, universal };

struct CoverageConfig {
  double activation_threshold = 0.99;  // t, in [0,1]
  double coverage_threshold = 0.95;    // beta, in [0,1]
  Quantifier quantifier = Quantifier::existential;
  std::size_t max_resample_attempts = 20;
};

struct CoverageReport {
  double coverage = 0.0;  // covered / total
  std::size_t covered_neuron_count = 0;
  std::size_t total_neuron_count = 0;
  std::size_t attempts_used = 0;  // set by verified_sample
  bool passed = false;            // set by verified_sample
};

// Fraction of hidden neurons whose activation clears the threshold.
// Activations are the post-rectifier hidden values, min-max normalized per
// layer per input: n_hat = (a - min) / (max - min) over the neurons of one
// layer for one input, with a constant layer (max == min) normalizing to 0.
// A neuron counts as covered when n_hat > t strictly, for some input
// (existential) or for all inputs (universal). The output layer is excluded.
CoverageReport neuron_coverage(const Mlp& net, const LabeledDataset& ds,
                               const CoverageConfig& cfg);

// Draws random_exemplar_sample(pool, capacity, seed), seed+1, ... until the
// memory's neuron coverage on `net` exceeds beta strictly, or the attempt
// budget runs out. On exhaustion returns the highest-coverage attempt with
// passed=false. Deterministic in all arguments.
std::pair<ExemplarMemory, CoverageReport> verified_sample(
    const Mlp& net, const LabeledDataset& old_pool, std::size_t capacity,
    const CoverageConfig& cfg, std::uint64_t seed);

}  // namespace cilfair
