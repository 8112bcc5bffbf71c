// veilbench: command-line front end for the injection benchmark toolkit.
//
// Subcommands: generate, inject, extract, serve, run, eval, report,
// annotate, scan. Exit codes: 0 success, 1 usage error, 2 IO or config
// error, 3 upstream service failure.

#include <atomic>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "veilbench/veilbench.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitIoConfig = 2;
constexpr int kExitUpstream = 3;

struct ToolConfig {
  std::uint64_t global_seed = 42;
  int pairs_per_category = 14;
  double tau = 0.60;
  std::string provider = "fallback";  // "fallback" or "remote"
  std::string system_prompt = std::string(veilbench::runner::kDefaultSystemPrompt);
  double temperature = 0.0;
  std::vector<std::string> input_modes = {"raw_html"};
  std::vector<veilbench::runner::ModelEndpoint> endpoints;
  std::optional<veilbench::runner::ModelEndpoint> embedding;
};

veilbench::runner::ModelEndpoint endpoint_from_json(const json& j) {
  veilbench::runner::ModelEndpoint ep;
  ep.model_id = j.value("model_id", std::string());
  ep.base_url = j.value("base_url", std::string());
  ep.model_name = j.value("model_name", std::string());
  ep.api_key_env = j.value("api_key_env", std::string());
  ep.max_parallel = j.value("max_parallel", ep.max_parallel);
  ep.timeout_s = j.value("timeout_s", ep.timeout_s);
  ep.max_retries = j.value("max_retries", ep.max_retries);
  ep.backoff_base_ms = j.value("backoff_base_ms", ep.backoff_base_ms);
  return ep;
}

// JSON config file; any key may be omitted and keeps its default
ToolConfig load_config(const fs::path& path) {
  ToolConfig cfg;
  json j;
  try {
    j = json::parse(veilbench::read_file(path));
  } catch (const json::exception& e) {
    throw veilbench::ConfigError("config " + path.string() + ": " + e.what());
  }
  cfg.global_seed = j.value("global_seed", cfg.global_seed);
  cfg.pairs_per_category = j.value("pairs_per_category", cfg.pairs_per_category);
  cfg.tau = j.value("tau", cfg.tau);
  cfg.provider = j.value("provider", cfg.provider);
  cfg.system_prompt = j.value("system_prompt", cfg.system_prompt);
  cfg.temperature = j.value("temperature", cfg.temperature);
  if (j.contains("input_modes"))
    cfg.input_modes = j.at("input_modes").get<std::vector<std::string>>();
  if (j.contains("endpoints"))
    for (const json& e : j.at("endpoints"))
      cfg.endpoints.push_back(endpoint_from_json(e));
  if (j.contains("embedding"))
    cfg.embedding = endpoint_from_json(j.at("embedding"));
  return cfg;
}

std::unique_ptr<veilbench::metrics::EmbeddingProvider> make_provider(
    const ToolConfig& cfg) {
  if (cfg.provider == "fallback")
    return std::make_unique<veilbench::metrics::FallbackEmbedder>();
  if (cfg.provider == "remote") {
    if (!cfg.embedding)
      throw veilbench::ConfigError(
          "provider \"remote\" needs an \"embedding\" endpoint in the config");
    return std::make_unique<veilbench::runner::RemoteEmbedder>(*cfg.embedding);
  }
  throw veilbench::ConfigError("unknown provider \"" + cfg.provider +
                               "\" (expected \"fallback\" or \"remote\")");
}

veilbench::corpus::CorpusManifest load_corpus(const fs::path& dir) {
  return veilbench::corpus::load_manifest(dir / "manifest.json");
}

std::atomic<bool> g_interrupted{false};
void on_sigint(int) { g_interrupted = true; }

void print_findings(const std::string& label,
                    const std::vector<veilbench::inject::Finding>& findings) {
  std::printf("%s: %zu finding(s)\n", label.c_str(), findings.size());
  for (const auto& f : findings) {
    std::string excerpt = f.excerpt.substr(0, 60);
    for (char& c : excerpt)
      if (c == '\n') c = ' ';
    std::printf("  [%s] at byte %zu: %s%s\n",
                std::string(veilbench::inject::to_string(f.kind)).c_str(),
                f.location, excerpt.c_str(),
                f.excerpt.size() > 60 ? "…" : "");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Covert prompt-injection benchmark toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  app.add_option("--config", config_path, "JSON config file")
      ->envname("VEILBENCH_CONFIG");
  app.add_option("--out", out_dir, "output directory (meaning per subcommand)");
  app.add_option("--seed", seed, "global seed override")
      ->each([&](const std::string&) { seed_set = true; });

  // generate
  auto* cmd_generate = app.add_subcommand(
      "generate", "Generate the clean page corpus and its manifest");
  int gen_pairs = 0;
  cmd_generate->add_option("--pairs", gen_pairs, "pages per category");

  // inject
  auto* cmd_inject = app.add_subcommand(
      "inject", "Add one hidden payload to each clean page");
  std::string inj_corpus = "corpus";
  std::string inj_payloads;
  bool inj_no_markers = false;
  bool inj_meta_replace = false;
  cmd_inject->add_option("--corpus", inj_corpus, "corpus directory");
  cmd_inject->add_option("--payloads", inj_payloads,
                         "payload library JSON (default: built-in)");
  cmd_inject->add_flag("--no-markers", inj_no_markers,
                       "built-in payloads without canary markers");
  cmd_inject->add_flag("--meta-replace", inj_meta_replace,
                       "meta_tag technique replaces the description instead "
                       "of appending");

  // extract
  auto* cmd_extract = app.add_subcommand(
      "extract", "Write visible text of every page to a JSONL file");
  std::string ext_corpus = "corpus";
  cmd_extract->add_option("--corpus", ext_corpus, "corpus directory");

  // serve
  auto* cmd_serve =
      app.add_subcommand("serve", "Serve the corpus over local HTTP");
  std::string srv_corpus = "corpus";
  int srv_port = 0;
  cmd_serve->add_option("--corpus", srv_corpus, "corpus directory");
  cmd_serve->add_option("--port", srv_port, "port (0 = pick a free one)");

  // run
  auto* cmd_run = app.add_subcommand(
      "run", "Request summaries of every page from the configured endpoints");
  std::string run_corpus = "corpus";
  std::string run_id;
  std::string run_cache;
  cmd_run->add_option("--corpus", run_corpus, "corpus directory");
  cmd_run->add_option("--run-id", run_id, "run id (default: derived, resumable)");
  cmd_run->add_option("--cache", run_cache, "response cache directory");

  // eval
  auto* cmd_eval = app.add_subcommand(
      "eval", "Pair clean/injected summaries of a run and score them");
  std::string eval_run_dir;
  std::string eval_corpus = "corpus";
  std::string eval_payloads;
  cmd_eval->add_option("--run", eval_run_dir, "run directory (runs/<run_id>)")
      ->required();
  cmd_eval->add_option("--corpus", eval_corpus, "corpus directory");
  cmd_eval->add_option("--payloads", eval_payloads,
                       "payload library JSON (default: <corpus>/payloads.json)");

  // report
  auto* cmd_report = app.add_subcommand(
      "report", "Aggregate evaluated pairs into CSV tables and Markdown");
  std::string rep_pairs;
  cmd_report->add_option("--pairs", rep_pairs, "pairs.jsonl from eval")
      ->required();

  // annotate
  auto* cmd_annotate = app.add_subcommand(
      "annotate", "Record a manual success/failure label for one pair");
  std::string ann_pairs, ann_page, ann_model, ann_label, ann_note, ann_who,
      ann_mode;
  cmd_annotate->add_option("--pairs", ann_pairs, "pairs.jsonl from eval")
      ->required();
  cmd_annotate->add_option("--page", ann_page, "clean page id")->required();
  cmd_annotate->add_option("--model", ann_model, "model id")->required();
  cmd_annotate->add_option("--label", ann_label, "success|failure|unclear")
      ->required();
  cmd_annotate->add_option("--note", ann_note, "free-form note");
  cmd_annotate->add_option("--annotator", ann_who, "annotator name");
  cmd_annotate->add_option("--mode", ann_mode,
                           "input mode, when the pair exists in several");

  // scan
  auto* cmd_scan = app.add_subcommand(
      "scan", "Flag hidden-content vectors in a page or a whole corpus");
  std::string scan_target;
  std::string scan_baseline;
  cmd_scan->add_option("target", scan_target,
                       "HTML file, or corpus directory with a manifest")
      ->required();
  cmd_scan->add_option("--baseline", scan_baseline,
                       "clean twin to suppress pre-existing benign matches");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    ToolConfig cfg;
    if (!config_path.empty()) cfg = load_config(config_path);
    if (seed_set) cfg.global_seed = seed;
    if (gen_pairs > 0) cfg.pairs_per_category = gen_pairs;

    if (app.got_subcommand(cmd_generate)) {
      fs::path dir = out_dir.empty() ? "corpus" : out_dir;
      veilbench::corpus::CorpusManifest man = veilbench::corpus::generate_corpus(
          cfg.global_seed, cfg.pairs_per_category, dir);
      std::printf("generated %zu clean pages in %s (seed %llu)\n",
                  man.pages.size(), dir.string().c_str(),
                  static_cast<unsigned long long>(man.global_seed));
      return kExitOk;
    }

    if (app.got_subcommand(cmd_inject)) {
      fs::path dir = inj_corpus;
      veilbench::corpus::CorpusManifest man = load_corpus(dir);
      std::vector<veilbench::inject::Payload> payloads =
          inj_payloads.empty()
              ? veilbench::inject::default_payloads(!inj_no_markers)
              : veilbench::inject::load_payloads(inj_payloads);
      veilbench::corpus::CorpusManifest out = veilbench::inject::inject_corpus(
          man, payloads, cfg.global_seed, dir,
          inj_meta_replace ? veilbench::inject::MetaMode::Replace
                           : veilbench::inject::MetaMode::Append);
      std::printf("injected %zu pages (total %zu) in %s\n",
                  out.pages.size() - man.pages.size(), out.pages.size(),
                  dir.string().c_str());
      return kExitOk;
    }

    if (app.got_subcommand(cmd_extract)) {
      fs::path dir = ext_corpus;
      fs::path out = out_dir.empty() ? dir / "visible_text.jsonl"
                                     : fs::path(out_dir);
      std::size_t n =
          veilbench::runner::extract_corpus(load_corpus(dir), dir, out);
      std::printf("extracted visible text of %zu pages to %s\n", n,
                  out.string().c_str());
      return kExitOk;
    }

    if (app.got_subcommand(cmd_serve)) {
      veilbench::runner::CorpusServer server(srv_corpus, srv_port);
      std::signal(SIGINT, on_sigint);
      std::signal(SIGTERM, on_sigint);
      std::printf("serving %s at %s (Ctrl-C to stop)\n", srv_corpus.c_str(),
                  server.base_url().c_str());
      std::fflush(stdout);
      while (!g_interrupted && server.running())
        std::this_thread::sleep_for(std::chrono::milliseconds(100));
      server.stop();
      return kExitOk;
    }

    if (app.got_subcommand(cmd_run)) {
      if (cfg.endpoints.empty())
        throw veilbench::ConfigError(
            "run needs at least one endpoint in --config");
      veilbench::runner::RunOptions opt;
      opt.corpus_dir = run_corpus;
      opt.runs_dir = out_dir.empty() ? "runs" : out_dir;
      opt.run_id = run_id;
      opt.system_prompt = cfg.system_prompt;
      opt.temperature = cfg.temperature;
      if (!run_cache.empty()) opt.cache_dir = run_cache;
      veilbench::runner::RunSummary s = veilbench::runner::run_experiment(
          load_corpus(run_corpus), cfg.endpoints, cfg.input_modes, opt);
      std::printf(
          "run %s: %d requested, %d completed, %d failed, %d cached\n"
          "summaries: %s\n",
          s.run_id.c_str(), s.requested, s.completed, s.failed, s.cached,
          s.summaries_path.string().c_str());
      return s.failed > 0 && s.completed == 0 ? kExitUpstream : kExitOk;
    }

    if (app.got_subcommand(cmd_eval)) {
      fs::path run_dir = eval_run_dir;
      fs::path corpus_dir = eval_corpus;
      json run_header =
          json::parse(veilbench::read_file(run_dir / "run.json"));
      fs::path payloads_path = eval_payloads.empty()
                                   ? corpus_dir / "payloads.json"
                                   : fs::path(eval_payloads);
      std::vector<veilbench::inject::Payload> payloads =
          veilbench::inject::load_payloads(payloads_path);

      std::unique_ptr<veilbench::metrics::EmbeddingProvider> provider =
          make_provider(cfg);
      veilbench::report::EvalConfig ecfg;
      ecfg.tau = cfg.tau;
      ecfg.provider = provider.get();
      veilbench::report::EvalRunResult result = veilbench::report::evaluate_run(
          load_corpus(corpus_dir), corpus_dir, run_dir / "summaries.jsonl",
          payloads, ecfg);

      veilbench::report::PairsMeta meta;
      meta.tau = cfg.tau;
      meta.provider_id = provider->id();
      meta.run_id = run_header.value("run_id", std::string());
      meta.prompt_sha256 = veilbench::sha256_hex(
          run_header.value("system_prompt", std::string()));
      fs::path out = out_dir.empty() ? run_dir / "eval" : fs::path(out_dir);
      fs::create_directories(out);
      veilbench::report::save_pairs(result.pairs, meta, out / "pairs.jsonl");
      std::printf("evaluated %zu pairs (%d without a usable twin)\npairs: %s\n",
                  result.pairs.size(), result.missing_twin,
                  (out / "pairs.jsonl").string().c_str());
      return kExitOk;
    }

    if (app.got_subcommand(cmd_report)) {
      fs::path pairs_path = rep_pairs;
      std::vector<veilbench::report::PairEval> pairs =
          veilbench::report::load_pairs(pairs_path);
      veilbench::report::apply_annotations(pairs, pairs_path);
      veilbench::report::PairsMeta meta =
          veilbench::report::load_pairs_meta(pairs_path);
      fs::path out =
          out_dir.empty() ? pairs_path.parent_path() / "tables" : fs::path(out_dir);
      veilbench::report::emit_report(pairs, meta, out);
      std::printf("report written to %s\n", out.string().c_str());
      return kExitOk;
    }

    if (app.got_subcommand(cmd_annotate)) {
      veilbench::report::annotate(ann_pairs, ann_page, ann_model, ann_label,
                                  ann_note, ann_who, ann_mode);
      std::printf("annotated (%s, %s) as %s\n", ann_page.c_str(),
                  ann_model.c_str(), ann_label.c_str());
      return kExitOk;
    }

    if (app.got_subcommand(cmd_scan)) {
      fs::path target = scan_target;
      if (fs::is_directory(target)) {
        veilbench::corpus::CorpusManifest man = load_corpus(target);
        int flagged = 0;
        for (const veilbench::corpus::PageRecord& r : man.pages) {
          if (r.variant != "injected") continue;
          std::string html = veilbench::read_file(target / r.path);
          std::string clean_rel = r.path;
          std::size_t pos = clean_rel.rfind("_injected.html");
          if (pos != std::string::npos)
            clean_rel = clean_rel.substr(0, pos) + ".html";
          std::string baseline = veilbench::read_file(target / clean_rel);
          auto findings =
              veilbench::inject::scan_hidden_vectors(html, baseline);
          if (!findings.empty()) ++flagged;
          print_findings(r.page_id, findings);
        }
        std::printf("flagged %d injected page(s)\n", flagged);
      } else {
        std::string html = veilbench::read_file(target);
        std::string baseline =
            scan_baseline.empty() ? std::string()
                                  : veilbench::read_file(scan_baseline);
        print_findings(target.string(),
                       veilbench::inject::scan_hidden_vectors(html, baseline));
      }
      return kExitOk;
    }

    return kExitUsage;  // unreachable: require_subcommand(1)
  } catch (const veilbench::ProviderError& e) {
    std::fprintf(stderr, "upstream error: %s\n", e.what());
    return kExitUpstream;
  } catch (const veilbench::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitIoConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitIoConfig;
  }
}
