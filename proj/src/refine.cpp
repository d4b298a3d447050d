#include "cilfair/refine.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "cilfair/error.hpp"

namespace cilfair {

namespace {

void check_distribution(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw ParamError("divergence: length mismatch");
  if (p.empty()) throw ParamError("divergence: empty distributions");
  double sp = 0.0, sq = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!(p[i] >= 0.0) || !(q[i] >= 0.0)) {
      throw ParamError("divergence: negative or non-finite entry");
    }
    sp += p[i];
    sq += q[i];
  }
  if (std::abs(sp - 1.0) > 1e-6 || std::abs(sq - 1.0) > 1e-6) {
    throw ParamError("divergence: inputs must sum to 1");
  }
}

}  // namespace

std::string divergence_metric_name(DivergenceMetric m) {
  switch (m) {
    case DivergenceMetric::jensen_shannon: return "jensen_shannon";
    case DivergenceMetric::kullback_leibler: return "kullback_leibler";
    case DivergenceMetric::hellinger: return "hellinger";
  }
  throw ParamError("divergence_metric_name: unknown metric");
}

DivergenceMetric parse_divergence_metric(const std::string& name) {
  if (name == "jensen_shannon") return DivergenceMetric::jensen_shannon;
  if (name == "kullback_leibler") return DivergenceMetric::kullback_leibler;
  if (name == "hellinger") return DivergenceMetric::hellinger;
  throw ParamError("unknown divergence metric: " + name);
}

double js_divergence(std::span<const double> p, std::span<const double> q) {
  check_distribution(p, q);
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double m = 0.5 * (p[i] + q[i]);
    if (p[i] > 0.0) acc += 0.5 * p[i] * std::log(p[i] / m);
    if (q[i] > 0.0) acc += 0.5 * q[i] * std::log(q[i] / m);
  }
  return acc;
}

double kl_divergence(std::span<const double> p, std::span<const double> q,
                     bool smooth) {
  check_distribution(p, q);
  bool violated = false;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0 && q[i] == 0.0) violated = true;
  }
  std::vector<double> qs;
  std::span<const double> qq = q;
  if (violated) {
    if (!smooth) {
      throw ParamError("kl_divergence: Q lacks support where P is positive");
    }
    qs.assign(q.begin(), q.end());
    double total = 0.0;
    for (double& v : qs) {
      v += 1e-12;
      total += v;
    }
    for (double& v : qs) v /= total;
    qq = qs;
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) acc += p[i] * std::log(p[i] / qq[i]);
  }
  return acc;
}

double hellinger_distance(std::span<const double> p, std::span<const double> q) {
  check_distribution(p, q);
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = std::sqrt(p[i]) - std::sqrt(q[i]);
    acc += d * d;
  }
  return std::sqrt(0.5 * acc);
}

double divergence(DivergenceMetric m, std::span<const double> p,
                  std::span<const double> q) {
  switch (m) {
    case DivergenceMetric::jensen_shannon: return js_divergence(p, q);
    case DivergenceMetric::kullback_leibler: return kl_divergence(p, q, true);
    case DivergenceMetric::hellinger: return hellinger_distance(p, q);
  }
  throw ParamError("divergence: unknown metric");
}

std::vector<DivergenceRecord> differential_analysis(const Mlp& m_base,
                                                    const Mlp& m_new,
                                                    const LabeledDataset& ds,
                                                    DivergenceMetric metric,
                                                    double temperature) {
  if (ds.empty()) throw ParamError("differential_analysis: empty dataset");
  if (m_base.input_dim() != m_new.input_dim()) {
    throw InputError("differential_analysis: input dims differ");
  }
  if (m_base.class_count() > m_new.class_count()) {
    throw InputError(
        "differential_analysis: base model has more classes than new model");
  }
  const std::size_t base_classes = m_base.class_count();

  const Batch batch = to_batch(ds);
  const Tensor2 logits_base = forward(m_base, batch.features).logits;
  const Tensor2 logits_new = forward(m_new, batch.features).logits;
  const Tensor2 p = softmax_rows(logits_base, temperature);
  const Tensor2 q = softmax_rows(logits_new, temperature, base_classes);

  std::vector<DivergenceRecord> out(ds.size());
  const std::int64_t n = static_cast<std::int64_t>(ds.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    out[idx].sample_id = ds.samples[idx].id;
    out[idx].divergence =
        divergence(metric, p.row(idx), q.row(idx).first(base_classes));
  }
  return out;
}

RefinedSplit select_samples(const std::vector<DivergenceRecord>& records,
                            const LabeledDataset& ds, double eta) {
  if (eta < 0.0 || eta > 1.0) throw ParamError("select_samples: eta must be in [0,1]");
  if (records.size() != ds.size()) {
    throw ContractError("select_samples: record count does not match dataset");
  }
  std::unordered_map<std::int64_t, double> score;
  score.reserve(records.size());
  for (const auto& r : records) {
    if (!score.emplace(r.sample_id, r.divergence).second) {
      throw ContractError("select_samples: duplicate record for sample " +
                          std::to_string(r.sample_id));
    }
  }
  std::vector<std::size_t> order(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    order[i] = i;
    if (!score.count(ds.samples[i].id)) {
      throw ContractError("select_samples: no record for sample " +
                          std::to_string(ds.samples[i].id));
    }
  }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double da = score.at(ds.samples[a].id);
    const double db = score.at(ds.samples[b].id);
    if (da != db) return da > db;
    return ds.samples[a].id < ds.samples[b].id;
  });

  const std::size_t cutoff = static_cast<std::size_t>(
      std::floor(eta * static_cast<double>(ds.size())));
  std::vector<char> in_high(ds.size(), 0);
  for (std::size_t r = 0; r < cutoff; ++r) in_high[order[r]] = 1;

  std::vector<Sample> high, low;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    (in_high[i] ? high : low).push_back(ds.samples[i]);
  }
  RefinedSplit split;
  split.high = make_dataset(std::move(high), ds.feature_dim);
  split.low = make_dataset(std::move(low), ds.feature_dim);
  split.cutoff_index = cutoff;
  split.eta = eta;
  return split;
}

}  // namespace cilfair
