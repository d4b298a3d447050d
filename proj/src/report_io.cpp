#include "cilfair/report_io.hpp"

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "cilfair/error.hpp"

namespace cilfair {

namespace {

void append_le_double(std::string& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof(bits));
  for (int byte = 0; byte < 8; ++byte) {
    out.push_back(static_cast<char>((bits >> (8 * byte)) & 0xff));
  }
}

double read_le_double(const unsigned char* p) {
  std::uint64_t bits = 0;
  for (int byte = 0; byte < 8; ++byte) {
    bits |= static_cast<std::uint64_t>(p[byte]) << (8 * byte);
  }
  double v;
  std::memcpy(&v, &bits, sizeof(v));
  return v;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string step_reports_csv(const std::vector<StepReport>& reports) {
  std::string out = "step,acc,precision,recall,cwv,mcd,coverage\n";
  for (const auto& r : reports) {
    out += std::to_string(r.step);
    out += "," + format_double(r.acc);
    out += "," + format_double(r.precision);
    out += "," + format_double(r.recall);
    out += "," + format_double(r.cwv);
    out += "," + format_double(r.mcd);
    out += "," + format_double(r.coverage.coverage);
    out += "\n";
  }
  return out;
}

std::string divergences_csv(const std::vector<DivergenceRecord>& records) {
  std::string out = "sample_id,divergence\n";
  for (const auto& r : records) {
    out += std::to_string(r.sample_id);
    out += "," + format_double(r.divergence);
    out += "\n";
  }
  return out;
}

nlohmann::json step_report_json(const StepReport& rep) {
  nlohmann::json per_class = nlohmann::json::object();
  for (const auto& [c, a] : rep.per_class.accuracy) {
    per_class[std::to_string(c)] = a;
  }
  return {
      {"step", rep.step},
      {"acc", rep.acc},
      {"precision", rep.precision},
      {"recall", rep.recall},
      {"cwv", rep.cwv},
      {"mcd", rep.mcd},
      {"coverage",
       {{"coverage", rep.coverage.coverage},
        {"covered_neurons", rep.coverage.covered_neuron_count},
        {"total_neurons", rep.coverage.total_neuron_count},
        {"attempts_used", rep.coverage.attempts_used},
        {"passed", rep.coverage.passed}}},
      {"per_class_accuracy", per_class},
      {"absent_classes", rep.per_class.absent_classes},
  };
}

nlohmann::json run_trace_json(const RunTrace& trace) {
  nlohmann::json steps = nlohmann::json::array();
  for (std::size_t i = 0; i < trace.reports.size(); ++i) {
    nlohmann::json step = step_report_json(trace.reports[i]);
    if (i < trace.details.size()) {
      const StepDiagnostics& d = trace.details[i];
      step["refinement"] = {{"high_count", d.high_count},
                            {"low_count", d.low_count},
                            {"error_count", d.error_count},
                            {"memory_size", d.memory.samples.size()}};
    }
    steps.push_back(std::move(step));
  }
  return {{"steps", std::move(steps)}};
}

void save_model(const Mlp& net, const std::string& path) {
  nlohmann::json header = {{"layer_sizes", net.layer_sizes}};
  std::string out = header.dump();
  out.push_back('\n');
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    const Tensor2& w = net.weights[l];
    for (std::size_t i = 0; i < w.size(); ++i) append_le_double(out, w.data()[i]);
    for (double b : net.biases[l]) append_le_double(out, b);
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ParseError("save_model: cannot open " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw ParseError("save_model: write failed for " + path);
}

Mlp load_model(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ParseError("load_model: cannot open " + path);
  std::string header_line;
  if (!std::getline(f, header_line)) {
    throw ParseError("load_model: missing header in " + path);
  }
  std::vector<std::size_t> sizes;
  try {
    const auto header = nlohmann::json::parse(header_line);
    sizes = header.at("layer_sizes").get<std::vector<std::size_t>>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("load_model: bad header in " + path + ": " + e.what());
  }
  if (sizes.size() < 2) throw ParseError("load_model: need at least two layer sizes");
  for (std::size_t s : sizes) {
    if (s == 0) throw ParseError("load_model: zero layer size");
  }

  std::string body((std::istreambuf_iterator<char>(f)),
                   std::istreambuf_iterator<char>());
  std::size_t expected = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    expected += sizes[l + 1] * sizes[l] + sizes[l + 1];
  }
  if (body.size() != expected * 8) {
    throw ParseError("load_model: parameter block is " + std::to_string(body.size()) +
                     " bytes, expected " + std::to_string(expected * 8));
  }

  Mlp net;
  net.layer_sizes = sizes;
  const auto* p = reinterpret_cast<const unsigned char*>(body.data());
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    Tensor2 w(sizes[l + 1], sizes[l]);
    for (std::size_t i = 0; i < w.size(); ++i, p += 8) {
      w.data()[i] = read_le_double(p);
    }
    std::vector<double> b(sizes[l + 1]);
    for (double& v : b) {
      v = read_le_double(p);
      p += 8;
    }
    net.weights.push_back(std::move(w));
    net.biases.push_back(std::move(b));
  }
  return net;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ParseError("cannot open " + path + " for writing");
  f.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!f) throw ParseError("write failed for " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ParseError("cannot open " + path);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

}  // namespace cilfair
