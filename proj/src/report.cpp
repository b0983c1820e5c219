#include "paran/report.hpp"

#include <array>
#include <cstdlib>
#include <cstdio>
#include <ctime>
#include <set>

#include "paran/error.hpp"
#include "paran/experiment.hpp"
#include "paran/generator.hpp"
#include "paran/hash.hpp"
#include "paran/text.hpp"

namespace paran::report {

namespace {

constexpr const char* kMetrics[] = {"rouge2", "bleu", "meteor", "distinct2"};
constexpr const char* kMetricTitles[] = {"Rouge-2", "BLEU", "METEOR", "Distinct-2"};

double to_double(const std::string& s, const std::string& what) {
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size())
    throw ValidationError("deltas.csv: bad number for " + what + ": \"" + s + "\"");
  return v;
}

struct ModelBlock {
  std::string model;
  std::string temperature;
  std::map<std::string, std::array<double, 4>> rows;  // arm -> metrics
  std::optional<std::array<double, 4>> delta;
};

std::string cell(double v, bool bold) {
  std::string s = experiment::format_fixed(v, 4);
  return bold ? "**" + s + "**" : s;
}

}  // namespace

std::string render_report(const csv::Table& cells, const csv::Table& deltas) {
  const std::size_t c_model = deltas.column("model"), c_temp = deltas.column("temperature"),
                    c_row = deltas.column("row");
  std::array<std::size_t, 4> c_metric{};
  for (int i = 0; i < 4; ++i) c_metric[i] = deltas.column(kMetrics[i]);
  const std::size_t k_status = cells.column("status");
  cells.column("model");
  cells.column("temperature");
  cells.column("arm");

  std::vector<ModelBlock> blocks;
  for (const auto& r : deltas.rows) {
    if (blocks.empty() || blocks.back().model != r[c_model]) {
      blocks.push_back({});
      blocks.back().model = r[c_model];
      blocks.back().temperature = r[c_temp];
    }
    std::array<double, 4> v{};
    for (int i = 0; i < 4; ++i) v[i] = to_double(r[c_metric[i]], kMetrics[i]);
    if (r[c_row] == "delta") {
      blocks.back().delta = v;
    } else {
      generator::arm_from_string(r[c_row]);  // validates the label
      blocks.back().rows[r[c_row]] = v;
    }
  }

  std::size_t n_ok = 0, n_failed = 0;
  for (const auto& r : cells.rows) (r[k_status] == "ok" ? n_ok : n_failed)++;

  std::string out = "# PARAN sweep report\n\n";
  out += "Cells: " + std::to_string(n_ok) + " ok, " + std::to_string(n_failed) + " failed\n\n";

  out += "## Persona augmentation by model\n\n";
  out += "| Model | Temp. | Rouge-2 | BLEU | METEOR | Distinct-2 |\n";
  out += "|---|---|---|---|---|---|\n";
  std::array<std::vector<double>, 4> per_metric;
  for (const auto& b : blocks) {
    auto base = b.rows.find("none");
    auto paran = b.rows.find("paran");
    if (base == b.rows.end() || paran == b.rows.end()) continue;
    out += "| " + b.model + " | " + b.temperature;
    for (int i = 0; i < 4; ++i) out += " | " + cell(base->second[i], false);
    out += " |\n| + PARAN | ";
    for (int i = 0; i < 4; ++i)
      out += " | " + cell(paran->second[i], paran->second[i] > base->second[i]);
    out += " |\n";
    if (b.delta)
      for (int i = 0; i < 4; ++i) per_metric[i].push_back((*b.delta)[i]);
  }
  if (!per_metric[0].empty()) {
    out += "| **Avg. Δ** | ";
    for (int i = 0; i < 4; ++i)
      out += " | " + experiment::format_fixed(experiment::avg_delta(per_metric[i]), 2);
    out += " |\n";
  }

  out += "\n## Ablation\n";
  for (const auto& b : blocks) {
    out += "\n### " + b.model + " (temperature " + b.temperature + ")\n\n";
    out += "| Method |";
    for (const char* t : kMetricTitles) out += std::string(" ") + t + " |";
    out += "\n|---|---|---|---|---|\n";
    auto base = b.rows.find("none");
    for (auto arm : generator::all_arms()) {
      auto it = b.rows.find(std::string(generator::to_string(arm)));
      if (it == b.rows.end()) continue;
      out += "| " + std::string(generator::display_name(arm));
      for (int i = 0; i < 4; ++i) {
        bool bold = arm == generator::Arm::paran && base != b.rows.end() &&
                    it->second[i] > base->second[i];
        out += " | " + cell(it->second[i], bold);
      }
      out += " |\n";
    }
    if (b.delta) {
      out += "| Δ";
      for (int i = 0; i < 4; ++i) out += " | " + experiment::format_fixed((*b.delta)[i], 2);
      out += " |\n";
    }
  }
  return out;
}

std::string render_report_files(const std::string& cells_path, const std::string& deltas_path) {
  return render_report(csv::read(cells_path), csv::read(deltas_path));
}

std::string format_instant(std::chrono::system_clock::time_point t) {
  auto ms = std::chrono::floor<std::chrono::milliseconds>(t);
  auto secs = std::chrono::floor<std::chrono::seconds>(ms);
  std::time_t tt = std::chrono::system_clock::to_time_t(secs);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[40];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900,
                tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec,
                static_cast<int>((ms - secs).count()));
  return buf;
}

nlohmann::json RunManifest::to_json() const {
  nlohmann::json j;
  j["command_line"] = command_line;
  j["config_digest"] = config_digest ? nlohmann::json(*config_digest) : nlohmann::json(nullptr);
  j["corpus_digest"] = corpus_digest ? nlohmann::json(*corpus_digest) : nlohmann::json(nullptr);
  j["version"] = version;
  j["started_at"] = format_instant(started_at);
  j["finished_at"] = format_instant(finished_at);
  j["counters"] = counters;
  return j;
}

void RunManifest::write(const std::string& path) const {
  text::write_file_atomic(path, to_json().dump(2) + "\n");
}

std::string file_digest(const std::string& path) { return sha256_hex(text::read_file(path)); }

}  // namespace paran::report
