#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "paran/csv.hpp"

namespace paran::report {

// Markdown report from a sweep's cells.csv and deltas.csv: a per-model
// baseline vs. "+ PARAN" table with an Avg. Δ footer, then one ablation
// block per model (four arms plus Δ). PARAN scores above the baseline are
// bolded. Values use 4 decimals, deltas 2.
std::string render_report(const csv::Table& cells, const csv::Table& deltas);
std::string render_report_files(const std::string& cells_path, const std::string& deltas_path);

struct RunManifest {
  std::vector<std::string> command_line;
  std::optional<std::string> config_digest;
  std::optional<std::string> corpus_digest;
  std::string version;
  std::chrono::system_clock::time_point started_at;
  std::chrono::system_clock::time_point finished_at;
  std::map<std::string, std::uint64_t> counters;

  nlohmann::json to_json() const;
  void write(const std::string& path) const;  // atomic
};

// SHA-256 hex of a file's bytes.
std::string file_digest(const std::string& path);
std::string format_instant(std::chrono::system_clock::time_point t);

}  // namespace paran::report
