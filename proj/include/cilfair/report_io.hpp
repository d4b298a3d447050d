#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cilfair/refine.hpp"
#include "cilfair/train.hpp"

namespace cilfair {

// Shortest exact decimal form of a double ("%.17g"), used in every CSV.
std::string format_double(double v);

// One row per step under the fixed header step,acc,precision,recall,cwv,mcd,coverage
std::string step_reports_csv(const std::vector<StepReport>& reports);

// Fixed header sample_id,divergence
std::string divergences_csv(const std::vector<DivergenceRecord>& records);

nlohmann::json step_report_json(const StepReport& rep);
nlohmann::json run_trace_json(const RunTrace& trace);

// Model checkpoint: a one-line JSON header {"layer_sizes": [...]} followed by
// raw little-endian 64-bit doubles — per layer, the weight matrix row-major,
// then the bias vector.
void save_model(const Mlp& net, const std::string& path);
Mlp load_model(const std::string& path);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace cilfair
