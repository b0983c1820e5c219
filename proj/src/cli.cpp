#include "paran/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <thread>

#include <CLI11.hpp>

#include "paran/corpus.hpp"
#include "paran/csv.hpp"
#include "paran/error.hpp"
#include "paran/evaluation.hpp"
#include "paran/experiment.hpp"
#include "paran/generator.hpp"
#include "paran/hash.hpp"
#include "paran/llm_gateway.hpp"
#include "paran/persona.hpp"
#include "paran/prompts.hpp"
#include "paran/report.hpp"
#include "paran/text.hpp"

namespace paran::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct GatewayFlags {
  std::string cache_dir;
  bool no_cache = false;
  int max_in_flight = 4;
  int retries = 3;
};

void add_gateway_flags(CLI::App* cmd, GatewayFlags& g) {
  cmd->add_option("--cache-dir", g.cache_dir,
                  "Response cache directory (default: $PARAN_CACHE_DIR or .paran_cache)");
  cmd->add_flag("--no-cache", g.no_cache, "Do not read or write the response cache");
  cmd->add_option("--max-in-flight", g.max_in_flight, "Concurrent requests per provider")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--retries", g.retries, "Attempts per request")->check(CLI::PositiveNumber);
}

llm::GatewayOptions gateway_options(const GatewayFlags& g) {
  llm::GatewayOptions o;
  if (!g.no_cache) {
    if (!g.cache_dir.empty()) {
      o.cache_dir = g.cache_dir;
    } else if (const char* env = std::getenv("PARAN_CACHE_DIR"); env && *env) {
      o.cache_dir = env;
    } else {
      o.cache_dir = ".paran_cache";
    }
  }
  o.max_in_flight = g.max_in_flight;
  o.retry.max_attempts = g.retries;
  return o;
}

prompts::PromptTemplates load_templates(const std::string& dir) {
  return dir.empty() ? prompts::PromptTemplates::defaults() : prompts::PromptTemplates::load(dir);
}

// Runs fn(i) for i in [0, n) on up to `threads` workers. The first
// exception (lowest index) is rethrown after all workers finish.
template <class Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn fn) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  auto worker = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= n || failed.load()) return;
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
        failed = true;
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < std::max<std::size_t>(1, std::min(threads, n)); ++t)
      pool.emplace_back(worker);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

struct Manifest {
  report::RunManifest m;
  std::string path;

  void finish() {
    if (path.empty()) return;
    m.finished_at = std::chrono::system_clock::now();
    m.write(path);
  }
};

std::string default_manifest_path(const std::string& out) { return out + ".manifest.json"; }

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"PARAN: persona-augmented review reply generation and evaluation", "paran"};
  app.set_version_flag("--version", PARAN_VERSION);
  app.require_subcommand(1);

  std::string manifest_flag;
  std::string templates_dir;
  app.add_option("--manifest", manifest_flag, "Write the run manifest to this path");
  app.add_option("--templates", templates_dir, "Directory of prompt template overrides");

  Manifest manifest;
  manifest.m.command_line = args;
  manifest.m.version = PARAN_VERSION;
  manifest.m.started_at = std::chrono::system_clock::now();
  auto set_manifest = [&](const std::string& fallback) {
    manifest.path = manifest_flag.empty() ? fallback : manifest_flag;
  };

  // synth
  auto* synth = app.add_subcommand("synth", "Write a seeded synthetic review corpus");
  std::uint64_t seed = 42;
  std::size_t users = 100, merchants = 20, reviews = 1000;
  std::string synth_out;
  synth->add_option("--seed", seed, "RNG seed");
  synth->add_option("--users", users, "Number of users");
  synth->add_option("--merchants", merchants, "Number of merchants");
  synth->add_option("--reviews", reviews, "Number of reviews");
  synth->add_option("--out", synth_out, "Output JSONL")->required();

  // preprocess
  auto* prep = app.add_subcommand("preprocess", "Apply the filter chain to a corpus");
  std::vector<std::string> prep_in;
  std::string prep_out;
  corpus::PreprocessOptions popts;
  prep->add_option("--in", prep_in, "Input JSONL (repeatable)")->required();
  prep->add_option("--out", prep_out, "Output JSONL")->required();
  prep->add_option("--k", popts.k, "k-core threshold")->check(CLI::PositiveNumber);
  prep->add_option("--min-words", popts.min_words, "Minimum words per review");
  prep->add_option("--max-reviews-per-year", popts.max_reviews_per_year,
                   "Reviewer activity limit per calendar year");

  // stats
  auto* stats = app.add_subcommand("stats", "Print users / items / reviews for a corpus");
  std::vector<std::string> stats_in;
  std::string stats_name;
  stats->add_option("--in", stats_in, "Input JSONL (repeatable)")->required();
  stats->add_option("--name", stats_name, "Dataset label (default: file stem)");

  // ping
  auto* ping = app.add_subcommand("ping", "One-token health check against a provider");
  std::string ping_model;
  GatewayFlags ping_gw;
  ping->add_option("--model", ping_model, "provider:name")->required();
  ping->add_option("--max-in-flight", ping_gw.max_in_flight)->check(CLI::PositiveNumber);
  ping->add_option("--retries", ping_gw.retries)->check(CLI::PositiveNumber);

  // personas
  auto* pers = app.add_subcommand("personas", "Extract explicit and implicit personas");
  std::string pers_in, pers_out, pers_model;
  std::size_t pers_conc = 4;
  GatewayFlags pers_gw;
  pers->add_option("--in", pers_in, "Corpus JSONL")->required();
  pers->add_option("--model", pers_model, "provider:name")->required();
  pers->add_option("--out", pers_out, "Output personas JSONL")->required();
  pers->add_option("--concurrency", pers_conc, "Worker threads")->check(CLI::PositiveNumber);
  add_gateway_flags(pers, pers_gw);

  // generate
  auto* gen = app.add_subcommand("generate", "Generate replies for one arm and temperature");
  std::string gen_in, gen_personas, gen_model, gen_arm = "paran", gen_out, gen_tok = "whitespace";
  double gen_temp = 0.0;
  int gen_max_tokens = 512;
  std::size_t gen_conc = 4;
  GatewayFlags gen_gw;
  gen->add_option("--in", gen_in, "Corpus JSONL")->required();
  gen->add_option("--personas", gen_personas, "Personas JSONL (required for persona arms)");
  gen->add_option("--model", gen_model, "provider:name")->required();
  gen->add_option("--arm", gen_arm, "paran | explicit_only | implicit_only | none");
  gen->add_option("--temperature", gen_temp, "Sampling temperature in [0, 1]");
  gen->add_option("--max-tokens", gen_max_tokens, "Completion token limit");
  gen->add_option("--tokenizer", gen_tok, "whitespace | char_bigram");
  gen->add_option("--out", gen_out, "Output responses JSONL")->required();
  gen->add_option("--concurrency", gen_conc, "Worker threads")->check(CLI::PositiveNumber);
  add_gateway_flags(gen, gen_gw);

  // evaluate
  auto* eval = app.add_subcommand("evaluate", "Score responses against their reviews");
  std::string ev_responses, ev_corpus, ev_embedder = "mock", ev_out, ev_tok;
  eval->add_option("--responses", ev_responses, "Responses JSONL")->required();
  eval->add_option("--corpus", ev_corpus, "Corpus JSONL with the reference reviews")->required();
  eval->add_option("--embedder", ev_embedder, "mock | remote");
  eval->add_option("--tokenizer", ev_tok, "Override the tokenizer recorded in the responses");
  eval->add_option("--out", ev_out, "Output scores CSV")->required();

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Run the model x temperature x arm grid");
  std::string sw_config, sw_out_dir, sw_embedder;
  std::size_t sw_conc = 0;
  GatewayFlags sw_gw;
  sweep->add_option("--config", sw_config, "Sweep config JSON")->required();
  sweep->add_option("--out-dir", sw_out_dir, "Override output_dir");
  sweep->add_option("--embedder", sw_embedder, "Override embedder");
  sweep->add_option("--concurrency", sw_conc, "Override concurrency")->check(CLI::PositiveNumber);
  add_gateway_flags(sweep, sw_gw);

  // report
  auto* rep = app.add_subcommand("report", "Render the Markdown report from sweep CSVs");
  std::string rep_cells, rep_deltas, rep_out;
  rep->add_option("--cells", rep_cells, "cells.csv")->required();
  rep->add_option("--deltas", rep_deltas, "deltas.csv")->required();
  rep->add_option("--out", rep_out, "Output file (default: stdout)");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? 0 : static_cast<int>(ErrorKind::usage);
  }

  try {
    if (synth->parsed()) {
      auto c = corpus::synth_corpus(seed, users, merchants, reviews);
      corpus::save_corpus(c, synth_out);
      manifest.m.counters["reviews_out"] = c.size();
      set_manifest(default_manifest_path(synth_out));
      out << "wrote " << c.size() << " reviews to " << synth_out << "\n";
    } else if (prep->parsed()) {
      auto c = corpus::load_corpus(prep_in);
      corpus::PreprocessReport pr;
      auto filtered = corpus::preprocess(c, popts, &pr);
      corpus::save_corpus(filtered, prep_out);
      manifest.m.corpus_digest = report::file_digest(prep_in.front());
      manifest.m.counters["reviews_in"] = pr.input.n_reviews;
      manifest.m.counters["after_min_words"] = pr.after_min_words.n_reviews;
      manifest.m.counters["after_outliers"] = pr.after_outliers.n_reviews;
      manifest.m.counters["reviews_out"] = pr.after_kcore.n_reviews;
      set_manifest(default_manifest_path(prep_out));
      auto line = [&](const char* step, const corpus::CorpusStats& s) {
        out << step << ": " << s.n_users << " users, " << s.n_items << " items, " << s.n_reviews
            << " reviews\n";
      };
      line("input", pr.input);
      line("min-words", pr.after_min_words);
      line("disambiguate", pr.after_disambiguation);
      line("outliers", pr.after_outliers);
      line("k-core", pr.after_kcore);
    } else if (stats->parsed()) {
      auto c = corpus::load_corpus(stats_in);
      std::string name = stats_name.empty() ? fs::path(stats_in.front()).stem().string() : stats_name;
      // Users are counted under the (nickname, merchant address) identity.
      out << corpus::format_stats_table(corpus::corpus_stats(corpus::disambiguate_reviewers(c)), name);
      if (!manifest_flag.empty()) {
        manifest.m.corpus_digest = report::file_digest(stats_in.front());
        manifest.m.counters["reviews_in"] = c.size();
        set_manifest("");
      }
    } else if (ping->parsed()) {
      llm::Gateway gw(gateway_options(GatewayFlags{"", true, ping_gw.max_in_flight, ping_gw.retries}));
      llm::ChatRequest req;
      req.model = llm::ModelId::parse(ping_model);
      req.system = "Health check.";
      req.user = "Reply with OK.";
      req.params.temperature = 0.0;
      req.params.max_tokens = 1;
      auto resp = gw.complete(req, llm::CacheMode::bypass);
      out << "ok " << req.model.str() << " " << resp.latency_ms << "ms\n";
      if (!manifest_flag.empty()) set_manifest("");
    } else if (pers->parsed()) {
      auto c = corpus::load_corpus(pers_in);
      auto model = llm::ModelId::parse(pers_model);
      auto templates = load_templates(templates_dir);
      llm::Gateway gw(gateway_options(pers_gw));
      persona::ExtractionOptions eo;
      eo.templates = &templates;
      std::vector<persona::PersonaBundle> bundles(c.size());
      parallel_for(c.size(), pers_conc, [&](std::size_t i) {
        try {
          bundles[i] = persona::infer_personas(c.reviews[i], model, gw, eo);
        } catch (const Error& e) {
          throw Error(e.kind(), "review " + c.reviews[i].review_id + ": " + e.what());
        }
      });
      persona::save_personas(bundles, pers_out);
      std::size_t warned = 0;
      for (const auto& b : bundles) warned += b.warnings.empty() ? 0 : 1;
      manifest.m.corpus_digest = report::file_digest(pers_in);
      manifest.m.counters["reviews_in"] = c.size();
      manifest.m.counters["personas_out"] = bundles.size();
      manifest.m.counters["bundles_with_warnings"] = warned;
      set_manifest(default_manifest_path(pers_out));
      out << "wrote " << bundles.size() << " persona bundles to " << pers_out << " (" << warned
          << " with warnings)\n";
    } else if (gen->parsed()) {
      auto c = corpus::load_corpus(gen_in);
      auto arm = generator::arm_from_string(gen_arm);
      auto model = llm::ModelId::parse(gen_model);
      std::map<std::string, persona::PersonaBundle> personas;
      if (generator::uses_explicit(arm) || generator::uses_implicit(arm)) {
        if (gen_personas.empty())
          throw UsageError("--personas is required for arm " + gen_arm);
        personas = persona::load_personas(gen_personas);
      }
      auto templates = load_templates(templates_dir);
      llm::Gateway gw(gateway_options(gen_gw));
      generator::GeneratorOptions go;
      go.tokenizer = metrics::token_mode_from_string(gen_tok);
      go.templates = &templates;
      llm::DecodingParams params;
      params.temperature = gen_temp;
      params.max_tokens = gen_max_tokens;
      params.validate();
      std::vector<generator::GeneratedResponse> responses(c.size());
      parallel_for(c.size(), gen_conc, [&](std::size_t i) {
        const auto& r = c.reviews[i];
        const persona::PersonaBundle* bundle = nullptr;
        if (auto it = personas.find(r.review_id); it != personas.end()) bundle = &it->second;
        else if (!personas.empty())
          throw ValidationError(gen_personas + ": no persona for review " + r.review_id);
        responses[i] = generator::generate(generator::make_request(r, bundle, arm, model, params), gw, go);
      });
      generator::save_responses(responses, gen_out);
      manifest.m.corpus_digest = report::file_digest(gen_in);
      manifest.m.counters["reviews_in"] = c.size();
      manifest.m.counters["responses_out"] = responses.size();
      set_manifest(default_manifest_path(gen_out));
      out << "wrote " << responses.size() << " responses to " << gen_out << "\n";
    } else if (eval->parsed()) {
      auto responses = generator::load_responses(ev_responses);
      auto c = corpus::load_corpus(ev_corpus);
      std::map<std::string, const corpus::Review*> by_id;
      for (const auto& r : c.reviews) by_id[r.review_id] = &r;
      auto emb = metrics::make_embedder(ev_embedder);

      struct GroupKey {
        std::string model;
        double temperature;
        int arm;
        auto operator<=>(const GroupKey&) const = default;
      };
      std::map<GroupKey, std::vector<generator::GeneratedResponse>> groups;
      for (auto& r : responses)
        groups[{r.request.model.str(), r.request.params.temperature,
                static_cast<int>(r.request.arm)}]
            .push_back(std::move(r));

      std::string csv_text = csv::join_row(
          {"model", "temperature", "arm", "rouge2", "bleu", "meteor", "distinct2", "bertscore_f1", "n"});
      for (auto& [key, group] : groups) {
        std::vector<corpus::Review> refs;
        for (const auto& r : group) {
          auto it = by_id.find(r.request.review.review_id);
          if (it == by_id.end())
            throw ValidationError(ev_corpus + ": no review " + r.request.review.review_id);
          refs.push_back(*it->second);
        }
        metrics::TokenMode mode =
            ev_tok.empty() ? group.front().tokenizer : metrics::token_mode_from_string(ev_tok);
        auto ev = metrics::evaluate_arm(group, refs, *emb, mode);
        using experiment::format_fixed;
        csv_text += csv::join_row(
            {key.model, experiment::format_temperature(key.temperature),
             std::string(generator::to_string(static_cast<generator::Arm>(key.arm))),
             format_fixed(ev.scores.rouge2_f, 6), format_fixed(ev.scores.bleu, 6),
             format_fixed(ev.scores.meteor, 6), format_fixed(ev.diversity.distinct2, 6),
             format_fixed(ev.scores.bertscore_f1, 6), std::to_string(ev.n)});
      }
      text::write_file_atomic(ev_out, csv_text);
      manifest.m.corpus_digest = report::file_digest(ev_corpus);
      manifest.m.counters["responses_in"] = responses.size();
      manifest.m.counters["groups"] = groups.size();
      set_manifest(default_manifest_path(ev_out));
      out << "wrote " << groups.size() << " score rows to " << ev_out << "\n";
    } else if (sweep->parsed()) {
      json j;
      try {
        j = json::parse(text::read_file(sw_config));
      } catch (const json::parse_error& e) {
        throw ValidationError(sw_config + ": " + e.what());
      }
      auto cfg = experiment::config_from_json(j);
      // Relative paths in the config resolve against the config's directory.
      fs::path base = fs::path(sw_config).parent_path();
      auto resolve = [&](std::string& p) {
        if (!p.empty() && fs::path(p).is_relative()) p = (base / p).lexically_normal().string();
      };
      resolve(cfg.corpus_path);
      resolve(cfg.personas_path);
      resolve(cfg.output_dir);
      if (cfg.templates_dir) resolve(*cfg.templates_dir);
      if (!templates_dir.empty()) cfg.templates_dir = templates_dir;
      if (!sw_out_dir.empty()) cfg.output_dir = sw_out_dir;
      if (!sw_embedder.empty()) cfg.embedder = sw_embedder;
      if (sw_conc) cfg.concurrency = sw_conc;
      cfg.validate();

      auto emb = metrics::make_embedder(cfg.embedder);
      llm::Gateway gw(gateway_options(sw_gw));
      experiment::SweepStats st;
      auto cells = experiment::run_sweep(cfg, gw, *emb, &st);
      auto selections = experiment::select_temperatures(cells, cfg);
      auto tables = experiment::ablation_tables(cells, selections);
      std::vector<experiment::RobustnessSeries> series;
      for (const auto& s : selections)
        series.push_back(experiment::robustness_series(cells, s.model, cfg.temperatures));

      fs::path od = cfg.output_dir;
      auto cells_text = experiment::cells_csv(cells);
      auto deltas_text = experiment::deltas_csv(tables);
      text::write_file_atomic((od / "cells.csv").string(), cells_text);
      text::write_file_atomic((od / "selection.csv").string(), experiment::selection_csv(selections));
      text::write_file_atomic((od / "deltas.csv").string(), deltas_text);
      text::write_file_atomic((od / "robustness.csv").string(), experiment::robustness_csv(series));
      text::write_file_atomic((od / "tradeoff.csv").string(), experiment::tradeoff_csv(cells));
      text::write_file_atomic((od / "report.md").string(),
                        report::render_report(csv::parse(cells_text, "cells.csv"),
                                              csv::parse(deltas_text, "deltas.csv")));

      manifest.m.config_digest = report::file_digest(sw_config);
      manifest.m.corpus_digest = report::file_digest(cfg.corpus_path);
      manifest.m.counters["cells_total"] = st.cells_total;
      manifest.m.counters["cells_failed"] = st.cells_failed;
      set_manifest((od / "manifest.json").string());
      for (const auto& c : cells)
        if (!c.ok())
          err << "paran: warning: cell " << c.model.str() << " t="
              << experiment::format_temperature(c.temperature) << " "
              << generator::to_string(c.arm) << " failed: " << *c.error << "\n";
      for (const auto& s : series)
        for (double g : s.gaps)
          err << "paran: warning: robustness gap for " << s.model.str() << " at t="
              << experiment::format_temperature(g) << "\n";
      out << "sweep: " << st.cells_total << " cells (" << st.cells_from_checkpoint
          << " from checkpoint, " << st.cells_failed << " failed) -> " << od.string() << "\n";
      if (st.cells_failed == st.cells_total) {
        manifest.finish();
        return static_cast<int>(ErrorKind::provider);
      }
    } else if (rep->parsed()) {
      auto text = report::render_report_files(rep_cells, rep_deltas);
      if (rep_out.empty()) {
        out << text;
      } else {
        text::write_file_atomic(rep_out, text);
        set_manifest(default_manifest_path(rep_out));
      }
      if (!manifest_flag.empty()) set_manifest("");
    }
    manifest.finish();
    return 0;
  } catch (const Error& e) {
    err << "paran: error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const nlohmann::json::exception& e) {
    err << "paran: error: " << e.what() << "\n";
    return static_cast<int>(ErrorKind::validation);
  } catch (const fs::filesystem_error& e) {
    err << "paran: error: " << e.what() << "\n";
    return static_cast<int>(ErrorKind::io);
  } catch (const std::exception& e) {
    err << "paran: error: " << e.what() << "\n";
    return static_cast<int>(ErrorKind::validation);
  }
}

int dispatch(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return dispatch(args, std::cout, std::cerr);
}

}  // namespace paran::cli
