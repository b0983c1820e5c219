#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "paran/generator.hpp"
#include "paran/llm_gateway.hpp"
#include "paran/metrics.hpp"

// Temperature x arm x model sweeps, rank-based temperature selection and
// ablation deltas.
namespace paran::experiment {

inline const std::vector<double> kDefaultTemperatures = {0.0, 0.2, 0.4, 0.6, 0.8, 1.0};

// Temperatures reported for the six models in the original study. Offered
// as a lookup for configs (`"fixed_temperatures": "published"`); sweeps
// select their own temperatures unless told otherwise.
const std::map<std::string, double>& published_temperatures();

struct RankWeights {
  double w_rouge2 = 1.0 / 6.0;
  double w_bleu = 1.0 / 6.0;
  double w_meteor = 1.0 / 6.0;
  double w_distinct2 = 0.5;

  // Non-negative and summing to 1 within 1e-9.
  void validate() const;
};

struct SweepConfig {
  std::vector<llm::ModelId> models;
  std::vector<double> temperatures = kDefaultTemperatures;
  std::vector<generator::Arm> arms{generator::all_arms().begin(), generator::all_arms().end()};
  std::string corpus_path;
  std::string personas_path;
  std::size_t concurrency = 4;
  std::string embedder = "mock";
  std::string output_dir = "sweep_out";
  metrics::TokenMode tokenizer = metrics::TokenMode::whitespace;
  int max_tokens = 512;
  RankWeights weights;
  std::optional<std::string> templates_dir;
  // model string ("provider:name") -> temperature used instead of sum-of-ranks.
  std::map<std::string, double> fixed_temperatures;

  void validate() const;
};

SweepConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SweepConfig& c);

struct CellResult {
  llm::ModelId model;
  double temperature = 0.0;
  generator::Arm arm = generator::Arm::paran;
  metrics::MetricScores scores;
  metrics::ArmDiversity diversity;
  std::size_t n_reviews = 0;
  std::optional<std::string> error;

  bool ok() const { return !error.has_value(); }
};

nlohmann::json to_json(const CellResult& c);
CellResult cell_from_json(const nlohmann::json& j);

// (model string, temperature, arm enum order).
bool canonical_less(const CellResult& a, const CellResult& b);

// Ranks 1 = best (highest value); tied values share the mean of their positions.
std::vector<double> average_ranks(std::span<const double> values);

// Weighted rank sum per candidate, in input order.
std::vector<double> rank_scores(std::span<const CellResult> candidates, const RankWeights& w);

// Temperature with the lowest weighted rank sum; ties go to the lower temperature.
double sum_of_ranks(std::span<const CellResult> candidates, const RankWeights& w = {});

// Percent change; throws ValidationError for a non-positive baseline.
double compute_delta(double treated, double baseline);
// Arithmetic mean; throws ValidationError for an empty list.
double avg_delta(std::span<const double> deltas);
double round_to(double value, int decimals);
// Fixed-point text; never prints "-0.00".
std::string format_fixed(double value, int decimals);
// Shortest round-trip form, e.g. "0.2".
std::string format_temperature(double t);

struct Selection {
  llm::ModelId model;
  generator::Arm arm = generator::Arm::paran;
  double temperature = 0.0;
  double score = 0.0;
  std::string source;  // "sum_of_ranks" or "fixed"
};

struct MetricRow {
  double rouge2 = 0.0;
  double bleu = 0.0;
  double meteor = 0.0;
  double distinct2 = 0.0;
};

// One model's ablation block at its selected temperature.
struct AblationTable {
  llm::ModelId model;
  double temperature = 0.0;
  std::map<generator::Arm, MetricRow> rows;
  // PARAN vs. no-persona, per metric; empty when undefined.
  std::optional<MetricRow> delta;
};

struct RobustnessSeries {
  llm::ModelId model;
  std::vector<std::pair<double, double>> points;  // (temperature, bertscore_f1), ascending
  std::vector<double> gaps;                       // requested temperatures with no usable cell
};

std::vector<Selection> select_temperatures(std::span<const CellResult> cells,
                                           const SweepConfig& cfg);
std::vector<AblationTable> ablation_tables(std::span<const CellResult> cells,
                                           std::span<const Selection> selections);
RobustnessSeries robustness_series(std::span<const CellResult> cells, const llm::ModelId& model,
                                   std::span<const double> temperatures);

// Generates and evaluates every cell. Failed cells carry an error and do
// not stop the others. Successful cells are checkpointed under
// <output_dir>/checkpoints; per-cell responses go to <output_dir>/responses.
// The result is in canonical order.
struct SweepStats {
  std::size_t cells_total = 0;
  std::size_t cells_from_checkpoint = 0;
  std::size_t cells_failed = 0;
};
std::vector<CellResult> run_sweep(const SweepConfig& cfg, llm::Gateway& gateway,
                                  metrics::EmbeddingProvider& embedder,
                                  SweepStats* stats = nullptr);

std::string cells_csv(std::span<const CellResult> cells);
std::string selection_csv(std::span<const Selection> selections);
std::string deltas_csv(std::span<const AblationTable> tables);
std::string robustness_csv(std::span<const RobustnessSeries> series);
std::string tradeoff_csv(std::span<const CellResult> cells);

}  // namespace paran::experiment
