#include "cilfair/coverage.hpp"

#include <algorithm>
#include <vector>

#include "cilfair/error.hpp"

namespace cilfair {

namespace {

void check_config(const CoverageConfig& cfg) {
  if (cfg.activation_threshold < 0.0 || cfg.activation_threshold > 1.0) {
    throw ParamError("coverage: activation threshold must be in [0,1]");
  }
  if (cfg.coverage_threshold < 0.0 || cfg.coverage_threshold > 1.0) {
    throw ParamError("coverage: coverage threshold must be in [0,1]");
  }
  if (cfg.max_resample_attempts < 1) {
    throw ParamError("coverage: max_resample_attempts must be >= 1");
  }
}

}  // namespace

CoverageReport neuron_coverage(const Mlp& net, const LabeledDataset& ds,
                               const CoverageConfig& cfg) {
  check_config(cfg);
  if (ds.empty()) throw InputError("neuron_coverage: empty dataset");

  const std::size_t hidden_layers = net.layer_count() - 1;
  std::size_t total = 0;
  for (std::size_t l = 0; l < hidden_layers; ++l) total += net.layer_sizes[l + 1];
  if (total == 0) throw InputError("neuron_coverage: net has no hidden neurons");

  const Batch batch = to_batch(ds);
  const ForwardResult fr = forward(net, batch.features);

  // covered[n] starts true under the universal quantifier (an input that
  // misses the threshold clears it) and false under the existential one.
  const bool universal = cfg.quantifier == Quantifier::universal;
  std::vector<char> covered(total, universal ? 1 : 0);
  const double t = cfg.activation_threshold;

  for (std::size_t i = 0; i < ds.size(); ++i) {
    std::size_t base = 0;
    for (std::size_t l = 0; l < hidden_layers; ++l) {
      const auto act = fr.cache.post[l].row(i);
      double lo = act[0], hi = act[0];
      for (double v : act) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      const double span = hi - lo;
      for (std::size_t n = 0; n < act.size(); ++n) {
        const double norm = span > 0.0 ? (act[n] - lo) / span : 0.0;
        const bool exceeds = norm > t;
        if (universal) {
          if (!exceeds) covered[base + n] = 0;
        } else {
          if (exceeds) covered[base + n] = 1;
        }
      }
      base += act.size();
    }
  }

  CoverageReport rep;
  rep.total_neuron_count = total;
  rep.covered_neuron_count =
      static_cast<std::size_t>(std::count(covered.begin(), covered.end(), char(1)));
  rep.coverage = static_cast<double>(rep.covered_neuron_count) /
                 static_cast<double>(rep.total_neuron_count);
  return rep;
}

std::pair<ExemplarMemory, CoverageReport> verified_sample(
    const Mlp& net, const LabeledDataset& old_pool, std::size_t capacity,
    const CoverageConfig& cfg, std::uint64_t seed) {
  check_config(cfg);

  ExemplarMemory best_mem;
  CoverageReport best_rep;
  bool have_best = false;

  for (std::size_t attempt = 0; attempt < cfg.max_resample_attempts; ++attempt) {
    ExemplarMemory mem = random_exemplar_sample(old_pool, capacity, seed + attempt);
    CoverageReport rep = neuron_coverage(net, mem.as_dataset(old_pool.feature_dim), cfg);
    rep.attempts_used = attempt + 1;
    if (rep.coverage > cfg.coverage_threshold) {
      rep.passed = true;
      return {std::move(mem), rep};
    }
    if (!have_best || rep.coverage > best_rep.coverage) {
      best_mem = std::move(mem);
      best_rep = rep;
      have_best = true;
    }
  }
  best_rep.attempts_used = cfg.max_resample_attempts;
  best_rep.passed = false;
  return {std::move(best_mem), best_rep};
}

}  // namespace cilfair
