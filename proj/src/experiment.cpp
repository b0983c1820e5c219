#include "paran/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <mutex>
#include <set>
#include <thread>

#include "paran/corpus.hpp"
#include "paran/csv.hpp"
#include "paran/error.hpp"
#include "paran/evaluation.hpp"
#include "paran/hash.hpp"
#include "paran/persona.hpp"
#include "paran/prompts.hpp"
#include "paran/text.hpp"

namespace paran::experiment {

namespace fs = std::filesystem;
using generator::Arm;
using nlohmann::json;

const std::map<std::string, double>& published_temperatures() {
  static const std::map<std::string, double> table = {
      {"gpt-4o-mini", 0.6},  {"gpt-3.5-turbo", 0.4}, {"claude-3.5-haiku", 1.0},
      {"llama-3.1-8b", 0.2}, {"llama-3.1-70b", 0.6}, {"nova-lite", 0.8},
  };
  return table;
}

void RankWeights::validate() const {
  for (double w : {w_rouge2, w_bleu, w_meteor, w_distinct2})
    if (!std::isfinite(w) || w < 0.0) throw ValidationError("rank weights must be non-negative");
  double sum = w_rouge2 + w_bleu + w_meteor + w_distinct2;
  if (std::abs(sum - 1.0) > 1e-9)
    throw ValidationError("rank weights must sum to 1 (got " + format_fixed(sum, 12) + ")");
}

void SweepConfig::validate() const {
  if (models.empty()) throw ValidationError("sweep: models must not be empty");
  if (temperatures.empty()) throw ValidationError("sweep: temperatures must not be empty");
  if (arms.empty()) throw ValidationError("sweep: arms must not be empty");
  for (double t : temperatures)
    if (!(t >= 0.0 && t <= 1.0))
      throw ValidationError("sweep: temperature out of [0, 1]: " + format_temperature(t));
  if (concurrency == 0) throw ValidationError("sweep: concurrency must be at least 1");
  if (corpus_path.empty()) throw ValidationError("sweep: corpus_path is required");
  bool needs_personas = std::any_of(arms.begin(), arms.end(), [](Arm a) {
    return generator::uses_explicit(a) || generator::uses_implicit(a);
  });
  if (needs_personas && personas_path.empty())
    throw ValidationError("sweep: personas_path is required for persona arms");
  if (max_tokens <= 0) throw ValidationError("sweep: max_tokens must be positive");
  for (const auto& [model, t] : fixed_temperatures)
    if (!(t >= 0.0 && t <= 1.0))
      throw ValidationError("sweep: fixed temperature for " + model + " out of [0, 1]");
  weights.validate();
}

SweepConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("sweep config must be a JSON object");
  static const std::set<std::string> known = {
      "models",     "temperatures", "arms",      "corpus_path", "personas_path",
      "concurrency", "embedder",    "output_dir", "tokenizer",  "max_tokens",
      "weights",    "templates_dir", "fixed_temperatures"};
  for (const auto& [key, _] : j.items())
    if (!known.count(key)) throw ValidationError("sweep config: unknown key \"" + key + "\"");

  SweepConfig c;
  try {
    if (j.contains("models"))
      for (const auto& m : j.at("models")) c.models.push_back(llm::ModelId::parse(m.get<std::string>()));
    if (j.contains("temperatures")) c.temperatures = j.at("temperatures").get<std::vector<double>>();
    if (j.contains("arms")) {
      c.arms.clear();
      for (const auto& a : j.at("arms")) c.arms.push_back(generator::arm_from_string(a.get<std::string>()));
    }
    if (j.contains("corpus_path")) c.corpus_path = j.at("corpus_path").get<std::string>();
    if (j.contains("personas_path")) c.personas_path = j.at("personas_path").get<std::string>();
    if (j.contains("concurrency")) c.concurrency = j.at("concurrency").get<std::size_t>();
    if (j.contains("embedder")) c.embedder = j.at("embedder").get<std::string>();
    if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
    if (j.contains("tokenizer"))
      c.tokenizer = metrics::token_mode_from_string(j.at("tokenizer").get<std::string>());
    if (j.contains("max_tokens")) c.max_tokens = j.at("max_tokens").get<int>();
    if (j.contains("templates_dir") && !j.at("templates_dir").is_null())
      c.templates_dir = j.at("templates_dir").get<std::string>();
    if (j.contains("weights")) {
      const auto& w = j.at("weights");
      c.weights.w_rouge2 = w.value("rouge2", c.weights.w_rouge2);
      c.weights.w_bleu = w.value("bleu", c.weights.w_bleu);
      c.weights.w_meteor = w.value("meteor", c.weights.w_meteor);
      c.weights.w_distinct2 = w.value("distinct2", c.weights.w_distinct2);
    }
    if (j.contains("fixed_temperatures")) {
      const auto& f = j.at("fixed_temperatures");
      if (f.is_string()) {
        if (f.get<std::string>() != "published")
          throw ValidationError("sweep config: fixed_temperatures must be an object or \"published\"");
        for (const auto& m : c.models) {
          auto it = published_temperatures().find(m.model_name);
          if (it != published_temperatures().end()) c.fixed_temperatures[m.str()] = it->second;
        }
      } else {
        for (const auto& [model, t] : f.items())
          c.fixed_temperatures[llm::ModelId::parse(model).str()] = t.get<double>();
      }
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("sweep config: ") + e.what());
  }
  return c;
}

json to_json(const SweepConfig& c) {
  json j;
  j["models"] = json::array();
  for (const auto& m : c.models) j["models"].push_back(m.str());
  j["temperatures"] = c.temperatures;
  j["arms"] = json::array();
  for (Arm a : c.arms) j["arms"].push_back(std::string(generator::to_string(a)));
  j["corpus_path"] = c.corpus_path;
  j["personas_path"] = c.personas_path;
  j["concurrency"] = c.concurrency;
  j["embedder"] = c.embedder;
  j["output_dir"] = c.output_dir;
  j["tokenizer"] = std::string(metrics::to_string(c.tokenizer));
  j["max_tokens"] = c.max_tokens;
  j["weights"] = {{"rouge2", c.weights.w_rouge2},
                  {"bleu", c.weights.w_bleu},
                  {"meteor", c.weights.w_meteor},
                  {"distinct2", c.weights.w_distinct2}};
  j["templates_dir"] = c.templates_dir ? json(*c.templates_dir) : json(nullptr);
  j["fixed_temperatures"] = c.fixed_temperatures;
  return j;
}

json to_json(const CellResult& c) {
  json j = {{"model", c.model.str()},
            {"temperature", c.temperature},
            {"arm", std::string(generator::to_string(c.arm))},
            {"n_reviews", c.n_reviews},
            {"rouge2", c.scores.rouge2_f},
            {"bleu", c.scores.bleu},
            {"meteor", c.scores.meteor},
            {"bertscore_f1", c.scores.bertscore_f1},
            {"distinct2", c.diversity.distinct2},
            {"n_distinct_bigrams", c.diversity.n_distinct_bigrams},
            {"n_tokens", c.diversity.n_tokens}};
  j["error"] = c.error ? json(*c.error) : json(nullptr);
  return j;
}

CellResult cell_from_json(const json& j) {
  try {
    CellResult c;
    c.model = llm::ModelId::parse(j.at("model").get<std::string>());
    c.temperature = j.at("temperature").get<double>();
    c.arm = generator::arm_from_string(j.at("arm").get<std::string>());
    c.n_reviews = j.at("n_reviews").get<std::size_t>();
    c.scores.rouge2_f = j.at("rouge2").get<double>();
    c.scores.bleu = j.at("bleu").get<double>();
    c.scores.meteor = j.at("meteor").get<double>();
    c.scores.bertscore_f1 = j.at("bertscore_f1").get<double>();
    c.diversity.distinct2 = j.at("distinct2").get<double>();
    c.diversity.n_distinct_bigrams = j.at("n_distinct_bigrams").get<std::size_t>();
    c.diversity.n_tokens = j.at("n_tokens").get<std::size_t>();
    if (j.contains("error") && !j.at("error").is_null()) c.error = j.at("error").get<std::string>();
    return c;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("cell result: ") + e.what());
  }
}

bool canonical_less(const CellResult& a, const CellResult& b) {
  auto ma = a.model.str(), mb = b.model.str();
  if (ma != mb) return ma < mb;
  if (a.temperature != b.temperature) return a.temperature < b.temperature;
  return static_cast<int>(a.arm) < static_cast<int>(b.arm);
}

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::size_t better = 0, equal = 0;
    for (double v : values) {
      if (v > values[i]) ++better;
      else if (v == values[i]) ++equal;
    }
    // Tied block occupies positions better+1 .. better+equal.
    ranks[i] = static_cast<double>(better) + (static_cast<double>(equal) + 1.0) / 2.0;
  }
  return ranks;
}

std::vector<double> rank_scores(std::span<const CellResult> candidates, const RankWeights& w) {
  w.validate();
  const std::size_t n = candidates.size();
  std::vector<double> r2(n), bl(n), me(n), d2(n);
  for (std::size_t i = 0; i < n; ++i) {
    r2[i] = candidates[i].scores.rouge2_f;
    bl[i] = candidates[i].scores.bleu;
    me[i] = candidates[i].scores.meteor;
    d2[i] = candidates[i].diversity.distinct2;
  }
  auto rr = average_ranks(r2), rb = average_ranks(bl), rm = average_ranks(me),
       rd = average_ranks(d2);
  std::vector<double> scores(n);
  for (std::size_t i = 0; i < n; ++i)
    scores[i] = w.w_rouge2 * rr[i] + w.w_bleu * rb[i] + w.w_meteor * rm[i] + w.w_distinct2 * rd[i];
  return scores;
}

namespace {

std::size_t best_index(std::span<const CellResult> candidates, const std::vector<double>& scores) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    if (scores[i] < scores[best] - 1e-12 ||
        (std::abs(scores[i] - scores[best]) <= 1e-12 &&
         candidates[i].temperature < candidates[best].temperature))
      best = i;
  }
  return best;
}

}  // namespace

double sum_of_ranks(std::span<const CellResult> candidates, const RankWeights& w) {
  if (candidates.empty()) throw ValidationError("sum_of_ranks: no candidates");
  auto scores = rank_scores(candidates, w);
  return candidates[best_index(candidates, scores)].temperature;
}

double compute_delta(double treated, double baseline) {
  if (!(baseline > 0.0))
    throw ValidationError("delta undefined for non-positive baseline " + format_fixed(baseline, 6));
  return 100.0 * (treated - baseline) / baseline;
}

double avg_delta(std::span<const double> deltas) {
  if (deltas.empty()) throw ValidationError("avg_delta: empty list");
  double sum = 0.0;
  for (double d : deltas) sum += d;
  return sum / static_cast<double>(deltas.size());
}

double round_to(double value, int decimals) {
  double scale = std::pow(10.0, decimals);
  return std::round(value * scale) / scale;
}

std::string format_fixed(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
  std::string s = buf;
  if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

std::string format_temperature(double t) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, t);
  if (ec != std::errc()) return format_fixed(t, 6);
  return std::string(buf, end);
}

std::vector<Selection> select_temperatures(std::span<const CellResult> cells,
                                           const SweepConfig& cfg) {
  Arm arm = Arm::paran;
  if (std::find(cfg.arms.begin(), cfg.arms.end(), Arm::paran) == cfg.arms.end())
    arm = *std::min_element(cfg.arms.begin(), cfg.arms.end(),
                            [](Arm a, Arm b) { return static_cast<int>(a) < static_cast<int>(b); });

  std::vector<llm::ModelId> models = cfg.models;
  std::sort(models.begin(), models.end(),
            [](const auto& a, const auto& b) { return a.str() < b.str(); });
  models.erase(std::unique(models.begin(), models.end()), models.end());

  std::vector<Selection> out;
  for (const auto& model : models) {
    std::vector<CellResult> cands;
    for (const auto& c : cells)
      if (c.ok() && c.model == model && c.arm == arm) cands.push_back(c);
    std::sort(cands.begin(), cands.end(), canonical_less);

    Selection s;
    s.model = model;
    s.arm = arm;
    auto fixed = cfg.fixed_temperatures.find(model.str());
    if (fixed != cfg.fixed_temperatures.end()) {
      s.temperature = fixed->second;
      s.source = "fixed";
      if (!cands.empty()) {
        auto scores = rank_scores(cands, cfg.weights);
        for (std::size_t i = 0; i < cands.size(); ++i)
          if (cands[i].temperature == s.temperature) s.score = scores[i];
      }
      out.push_back(s);
      continue;
    }
    if (cands.empty()) continue;
    auto scores = rank_scores(cands, cfg.weights);
    std::size_t best = best_index(cands, scores);
    s.temperature = cands[best].temperature;
    s.score = scores[best];
    s.source = "sum_of_ranks";
    out.push_back(s);
  }
  return out;
}

std::vector<AblationTable> ablation_tables(std::span<const CellResult> cells,
                                           std::span<const Selection> selections) {
  std::vector<AblationTable> out;
  for (const auto& s : selections) {
    AblationTable t;
    t.model = s.model;
    t.temperature = s.temperature;
    for (const auto& c : cells) {
      if (!c.ok() || c.model != s.model || c.temperature != s.temperature) continue;
      t.rows[c.arm] = MetricRow{c.scores.rouge2_f, c.scores.bleu, c.scores.meteor,
                                c.diversity.distinct2};
    }
    auto p = t.rows.find(Arm::paran);
    auto b = t.rows.find(Arm::none);
    if (p != t.rows.end() && b != t.rows.end()) {
      const auto& tr = p->second;
      const auto& bl = b->second;
      if (bl.rouge2 > 0 && bl.bleu > 0 && bl.meteor > 0 && bl.distinct2 > 0)
        t.delta = MetricRow{compute_delta(tr.rouge2, bl.rouge2), compute_delta(tr.bleu, bl.bleu),
                            compute_delta(tr.meteor, bl.meteor),
                            compute_delta(tr.distinct2, bl.distinct2)};
    }
    out.push_back(std::move(t));
  }
  return out;
}

RobustnessSeries robustness_series(std::span<const CellResult> cells, const llm::ModelId& model,
                                   std::span<const double> temperatures) {
  RobustnessSeries s;
  s.model = model;
  for (const auto& c : cells)
    if (c.ok() && c.model == model && c.arm == Arm::paran)
      s.points.emplace_back(c.temperature, c.scores.bertscore_f1);
  std::sort(s.points.begin(), s.points.end());
  s.points.erase(std::unique(s.points.begin(), s.points.end(),
                             [](const auto& a, const auto& b) { return a.first == b.first; }),
                 s.points.end());
  std::vector<double> wanted(temperatures.begin(), temperatures.end());
  std::sort(wanted.begin(), wanted.end());
  wanted.erase(std::unique(wanted.begin(), wanted.end()), wanted.end());
  for (double t : wanted) {
    bool have = std::any_of(s.points.begin(), s.points.end(),
                            [t](const auto& p) { return p.first == t; });
    if (!have) s.gaps.push_back(t);
  }
  return s;
}

// ---- sweep execution ----

namespace {

struct CellPlan {
  CellResult cell;
  std::string checkpoint_key;
  bool done = false;
  std::vector<generator::GeneratedResponse> responses;
  std::mutex mu;
  std::optional<std::string> first_error;
};

std::string cell_stem(const CellResult& c) {
  std::string stem = c.model.str() + "_t" + format_temperature(c.temperature) + "_" +
                     std::string(generator::to_string(c.arm));
  for (char& ch : stem)
    if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '.' || ch == '-' || ch == '_'))
      ch = '_';
  return stem;
}

std::string templates_digest(const prompts::PromptTemplates& t) {
  return sha256_hex(t.explicit_extraction + '\0' + t.implicit_extraction + '\0' + t.generation +
                    '\0' + t.explicit_block + '\0' + t.implicit_block);
}

}  // namespace

std::vector<CellResult> run_sweep(const SweepConfig& cfg, llm::Gateway& gateway,
                                  metrics::EmbeddingProvider& embedder, SweepStats* stats) {
  cfg.validate();

  const std::string corpus_bytes = text::read_file(cfg.corpus_path);
  corpus::Corpus corpus = corpus::parse_corpus(corpus_bytes, cfg.corpus_path);
  if (corpus.empty()) throw ValidationError(cfg.corpus_path + ": corpus is empty");

  std::string personas_digest = "none";
  std::map<std::string, persona::PersonaBundle> personas;
  if (!cfg.personas_path.empty()) {
    personas_digest = sha256_hex(text::read_file(cfg.personas_path));
    personas = persona::load_personas(cfg.personas_path);
  }

  prompts::PromptTemplates templates = cfg.templates_dir
                                           ? prompts::PromptTemplates::load(*cfg.templates_dir)
                                           : prompts::PromptTemplates::defaults();

  std::vector<Arm> arms = cfg.arms;
  std::sort(arms.begin(), arms.end(),
            [](Arm a, Arm b) { return static_cast<int>(a) < static_cast<int>(b); });
  arms.erase(std::unique(arms.begin(), arms.end()), arms.end());
  bool needs_personas = std::any_of(arms.begin(), arms.end(), [](Arm a) {
    return generator::uses_explicit(a) || generator::uses_implicit(a);
  });
  if (needs_personas)
    for (const auto& r : corpus.reviews)
      if (!personas.count(r.review_id))
        throw ValidationError(cfg.personas_path + ": no persona for review " + r.review_id);

  std::vector<llm::ModelId> models = cfg.models;
  std::sort(models.begin(), models.end(),
            [](const auto& a, const auto& b) { return a.str() < b.str(); });
  models.erase(std::unique(models.begin(), models.end()), models.end());
  std::vector<double> temps = cfg.temperatures;
  std::sort(temps.begin(), temps.end());
  temps.erase(std::unique(temps.begin(), temps.end()), temps.end());

  const std::string input_digest = sha256_hex(
      sha256_hex(corpus_bytes) + '|' + personas_digest + '|' + templates_digest(templates) + '|' +
      embedder.name() + '|' + std::string(metrics::to_string(cfg.tokenizer)) + '|' +
      std::to_string(cfg.max_tokens));

  const fs::path out_dir = cfg.output_dir;
  const fs::path ckpt_dir = out_dir / "checkpoints";
  const fs::path resp_dir = out_dir / "responses";
  std::error_code ec;
  fs::create_directories(ckpt_dir, ec);
  fs::create_directories(resp_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());

  std::vector<std::unique_ptr<CellPlan>> plans;
  for (const auto& m : models)
    for (double t : temps)
      for (Arm a : arms) {
        auto p = std::make_unique<CellPlan>();
        p->cell.model = m;
        p->cell.temperature = t;
        p->cell.arm = a;
        p->cell.n_reviews = corpus.size();
        p->checkpoint_key = sha256_hex(input_digest + '|' + m.str() + '|' + format_temperature(t) +
                                       '|' + std::string(generator::to_string(a)));
        fs::path ck = ckpt_dir / (p->checkpoint_key + ".json");
        if (fs::exists(ck)) {
          try {
            CellResult loaded = cell_from_json(json::parse(text::read_file(ck.string())));
            if (loaded.ok() && loaded.model == m && loaded.temperature == t && loaded.arm == a) {
              p->cell = loaded;
              p->done = true;
            }
          } catch (const std::exception&) {
            // Unreadable checkpoint: recompute the cell.
          }
        }
        p->responses.resize(corpus.size());
        plans.push_back(std::move(p));
      }

  struct Job {
    CellPlan* plan;
    std::size_t review;
  };
  std::vector<Job> jobs;
  for (auto& p : plans)
    if (!p->done)
      for (std::size_t i = 0; i < corpus.size(); ++i) jobs.push_back({p.get(), i});

  generator::GeneratorOptions gopts;
  gopts.tokenizer = cfg.tokenizer;
  gopts.templates = &templates;

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      std::size_t k = next.fetch_add(1);
      if (k >= jobs.size()) return;
      CellPlan& plan = *jobs[k].plan;
      {
        std::lock_guard lock(plan.mu);
        if (plan.first_error) continue;
      }
      const auto& review = corpus.reviews[jobs[k].review];
      try {
        const persona::PersonaBundle* bundle = nullptr;
        auto it = personas.find(review.review_id);
        if (it != personas.end()) bundle = &it->second;
        llm::DecodingParams params;
        params.temperature = plan.cell.temperature;
        params.max_tokens = cfg.max_tokens;
        auto req = generator::make_request(review, bundle, plan.cell.arm, plan.cell.model, params);
        plan.responses[jobs[k].review] = generator::generate(req, gateway, gopts);
      } catch (const std::exception& e) {
        std::lock_guard lock(plan.mu);
        if (!plan.first_error) plan.first_error = "review " + review.review_id + ": " + e.what();
      }
    }
  };
  std::size_t n_threads = std::min<std::size_t>(cfg.concurrency, std::max<std::size_t>(jobs.size(), 1));
  {
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < n_threads; ++i) pool.emplace_back(worker);
  }

  SweepStats st;
  st.cells_total = plans.size();
  std::vector<CellResult> out;
  for (auto& p : plans) {
    if (p->done) {
      ++st.cells_from_checkpoint;
      out.push_back(p->cell);
      continue;
    }
    if (!p->first_error) {
      try {
        auto ev = metrics::evaluate_arm(p->responses, corpus.reviews, embedder, cfg.tokenizer);
        p->cell.scores = ev.scores;
        p->cell.diversity = ev.diversity;
        p->cell.n_reviews = ev.n;
        generator::save_responses(p->responses, (resp_dir / (cell_stem(p->cell) + ".jsonl")).string());
        text::write_file_atomic((ckpt_dir / (p->checkpoint_key + ".json")).string(),
                          to_json(p->cell).dump(2) + "\n");
      } catch (const std::exception& e) {
        p->first_error = std::string("evaluation: ") + e.what();
      }
    }
    if (p->first_error) {
      p->cell.error = *p->first_error;
      ++st.cells_failed;
    }
    out.push_back(p->cell);
  }
  std::stable_sort(out.begin(), out.end(), canonical_less);
  if (stats) *stats = st;
  return out;
}

// ---- CSV outputs ----

std::string cells_csv(std::span<const CellResult> cells) {
  std::string s = csv::join_row({"model", "temperature", "arm", "n_reviews", "rouge2", "bleu",
                                 "meteor", "bertscore_f1", "distinct2", "status", "error"});
  for (const auto& c : cells) {
    bool ok = c.ok();
    auto num = [&](double v) { return ok ? format_fixed(v, 6) : std::string(); };
    s += csv::join_row({c.model.str(), format_temperature(c.temperature),
                        std::string(generator::to_string(c.arm)), std::to_string(c.n_reviews),
                        num(c.scores.rouge2_f), num(c.scores.bleu), num(c.scores.meteor),
                        num(c.scores.bertscore_f1), num(c.diversity.distinct2),
                        ok ? "ok" : "failed", ok ? "" : *c.error});
  }
  return s;
}

std::string selection_csv(std::span<const Selection> selections) {
  std::string s = csv::join_row({"model", "arm", "temperature", "score", "source"});
  for (const auto& x : selections)
    s += csv::join_row({x.model.str(), std::string(generator::to_string(x.arm)),
                        format_temperature(x.temperature), format_fixed(x.score, 6), x.source});
  return s;
}

std::string deltas_csv(std::span<const AblationTable> tables) {
  std::string s =
      csv::join_row({"model", "temperature", "row", "rouge2", "bleu", "meteor", "distinct2"});
  for (const auto& t : tables) {
    for (Arm a : generator::all_arms()) {
      auto it = t.rows.find(a);
      if (it == t.rows.end()) continue;
      const auto& r = it->second;
      s += csv::join_row({t.model.str(), format_temperature(t.temperature),
                          std::string(generator::to_string(a)), format_fixed(r.rouge2, 6),
                          format_fixed(r.bleu, 6), format_fixed(r.meteor, 6),
                          format_fixed(r.distinct2, 6)});
    }
    if (t.delta)
      s += csv::join_row({t.model.str(), format_temperature(t.temperature), "delta",
                          format_fixed(t.delta->rouge2, 2), format_fixed(t.delta->bleu, 2),
                          format_fixed(t.delta->meteor, 2), format_fixed(t.delta->distinct2, 2)});
  }
  return s;
}

std::string robustness_csv(std::span<const RobustnessSeries> series) {
  std::string s = csv::join_row({"model", "temperature", "bertscore_f1", "status"});
  for (const auto& r : series) {
    std::vector<std::pair<double, std::optional<double>>> rows;
    for (const auto& [t, v] : r.points) rows.emplace_back(t, v);
    for (double g : r.gaps) rows.emplace_back(g, std::nullopt);
    std::sort(rows.begin(), rows.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [t, v] : rows)
      s += csv::join_row({r.model.str(), format_temperature(t), v ? format_fixed(*v, 6) : "",
                          v ? "ok" : "missing"});
  }
  return s;
}

std::string tradeoff_csv(std::span<const CellResult> cells) {
  std::string s = csv::join_row({"model", "temperature", "bleu", "distinct2"});
  std::vector<CellResult> sel;
  for (const auto& c : cells)
    if (c.ok() && c.arm == Arm::paran) sel.push_back(c);
  std::sort(sel.begin(), sel.end(), canonical_less);
  for (const auto& c : sel)
    s += csv::join_row({c.model.str(), format_temperature(c.temperature),
                        format_fixed(c.scores.bleu, 6), format_fixed(c.diversity.distinct2, 6)});
  return s;
}

}  // namespace paran::experiment
