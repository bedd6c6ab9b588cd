/* Copyright 2026 The dimkit Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "dim/cli/app.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "dim/annotate/caption.hpp"
#include "dim/annotate/pipeline.hpp"
#include "dim/audit/audit.hpp"
#include "dim/cli/log.hpp"
#include "dim/core/clock.hpp"
#include "dim/core/jsonl.hpp"
#include "dim/core/parallel.hpp"
#include "dim/core/text.hpp"
#include "dim/designer/designer.hpp"
#include "dim/eval/eval.hpp"
#include "dim/gateway/http_provider.hpp"
#include "dim/gateway/mock_provider.hpp"
#include "dim/ingest/ingest.hpp"
#include "dim/simfilter/filter.hpp"
#include "dim/version.hpp"

namespace dim::cli {

namespace fs = std::filesystem;

namespace {

class FatalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ProviderConfig {
  std::string kind = "openai";
  std::string model_tag;
  int max_in_flight = 0;  // 0: the global --max-in-flight
  double rpm_limit = 0.0;
};

struct Config {
  Json raw = Json::object();
  std::map<std::string, ProviderConfig> providers;
  simfilter::FilterPolicy filter;
  simfilter::ScoringModels models;
  ingest::SelectionRules rules = ingest::SelectionRules::defaults();
  gateway::MockOptions mock;
  gateway::RetryPolicy retry;

  static Config load(const std::string& path) {
    Config c;
    if (path.empty()) return c;
    if (!fs::is_regular_file(path)) throw FatalError("config file not found: " + path);
    try {
      c.raw = Json::parse(read_file(path));
      if (!c.raw.is_object()) throw FatalError("config must be a JSON object");
      if (c.raw.contains("providers")) {
        for (const auto& [tag, p] : c.raw.at("providers").items()) {
          ProviderConfig pc;
          pc.kind = p.value("kind", "openai");
          pc.model_tag = p.value("model_tag", "");
          pc.max_in_flight = p.value("max_in_flight", 0);
          pc.rpm_limit = p.value("rpm_limit", 0.0);
          if (pc.kind != "openai" && pc.kind != "mock")
            throw FatalError("provider " + tag + ": unknown kind '" + pc.kind + "'");
          c.providers[tag] = pc;
        }
      }
      if (c.raw.contains("filter")) {
        const auto& f = c.raw.at("filter");
        c.filter = simfilter::FilterPolicy::from_json(f);
        c.models.clip_model = f.value("clip_model", c.models.clip_model);
        c.models.dino_model = f.value("dino_model", c.models.dino_model);
      }
      if (c.raw.contains("rules")) c.rules = ingest::SelectionRules::from_json(c.raw.at("rules"));
      if (c.raw.contains("mock")) {
        const auto& m = c.raw.at("mock");
        c.mock.seed = m.value("seed", c.mock.seed);
        c.mock.fail_marker = m.value("fail_marker", c.mock.fail_marker);
        c.mock.words_per_dimension = m.value("words_per_dimension", c.mock.words_per_dimension);
        if (m.contains("fixed_verdict")) {
          auto v = parse_verdict_name(m.at("fixed_verdict").get<std::string>());
          if (!v) throw FatalError("mock.fixed_verdict: unknown verdict");
          c.mock.fixed_verdict = v;
        }
        if (m.contains("fixed_tier")) {
          auto t = parse_tier_name(m.at("fixed_tier").get<std::string>());
          if (!t) throw FatalError("mock.fixed_tier: unknown tier");
          c.mock.fixed_tier = t;
        }
      }
      if (c.raw.contains("retry")) {
        const auto& r = c.raw.at("retry");
        c.retry.base = std::chrono::milliseconds(r.value("base_ms", c.retry.base.count()));
        c.retry.factor = r.value("factor", c.retry.factor);
        c.retry.jitter = r.value("jitter", c.retry.jitter);
        c.retry.max_attempts = r.value("max_attempts", c.retry.max_attempts);
      }
    } catch (const Json::exception& e) {
      throw FatalError(path + ": " + e.what());
    } catch (const std::invalid_argument& e) {
      throw FatalError(path + ": " + e.what());
    }
    return c;
  }
};

struct Globals {
  std::string config;
  bool mock = false;
  int max_in_flight = 4;
  std::string run_dir;
  std::string cache_dir;
  bool quiet = false;
};

std::string compact_timestamp() {
  std::string t = run_timestamp();  // 2026-01-02T03:04:05Z
  t.erase(std::remove_if(t.begin(), t.end(), [](char c) { return c == '-' || c == ':'; }), t.end());
  return t;
}

class Context {
 public:
  Context(Globals g, std::string subcommand, std::ostream& out)
      : g_(std::move(g)), sub_(std::move(subcommand)), out_(out),
        started_(std::chrono::steady_clock::now()) {
    if (g_.max_in_flight < 1) throw FatalError("--max-in-flight must be at least 1");
    cfg_ = Config::load(g_.config);
    if (g_.cache_dir.empty()) {
      if (const char* env = std::getenv("DIM_CACHE_DIR")) g_.cache_dir = env;
    }
  }

  const Config& config() const { return cfg_; }
  const Globals& globals() const { return g_; }
  std::size_t workers() const { return static_cast<std::size_t>(g_.max_in_flight); }

  // Creates the run directory and logger. Called once inputs are validated,
  // so fatal argument errors leave nothing behind.
  void begin() {
    run_dir_ = g_.run_dir.empty() ? fs::path("dim-runs") / (compact_timestamp() + "-" + sub_) : fs::path(g_.run_dir);
    fs::create_directories(run_dir_);
    logger_ = log::make_logger("dim", (run_dir_ / "run.log").string(), g_.quiet);
    Json snapshot = cfg_.raw;
    snapshot["effective"] = {{"mock_providers", g_.mock},
                             {"max_in_flight", g_.max_in_flight},
                             {"cache_dir", g_.cache_dir},
                             {"filter", cfg_.filter.to_json()},
                             {"rules", cfg_.rules.to_json()},
                             {"version", kPipelineVersion}};
    atomic_write_file(run_dir_ / "config.json", snapshot.dump(2) + "\n");
    gateway::GatewayOptions opts;
    if (!g_.cache_dir.empty()) opts.cache_dir = fs::path(g_.cache_dir);
    opts.retry = cfg_.retry;
    gw_ = std::make_unique<gateway::Gateway>(opts);
    logger_->info("dim {} {} run_dir={}", kPipelineVersion, sub_, run_dir_.string());
  }

  const fs::path& run_dir() const { return run_dir_; }
  spdlog::logger& logger() { return *logger_; }

  gateway::Gateway& gateway() { return *gw_; }

  // Registers `tag` with the gateway on first use and returns its model tag.
  std::string provider(const std::string& tag) {
    if (tag.empty()) throw FatalError("empty provider tag");
    auto it = cfg_.providers.find(tag);
    const ProviderConfig pc = it == cfg_.providers.end() ? ProviderConfig{} : it->second;
    const bool mock = g_.mock || pc.kind == "mock";
    std::string model = pc.model_tag;
    if (model.empty()) model = mock ? "mock-" + tag : tag;
    if (!gw_->has_provider(tag)) {
      gateway::ProviderLimits limits;
      limits.max_in_flight = pc.max_in_flight > 0 ? pc.max_in_flight : g_.max_in_flight;
      limits.rpm_limit = pc.rpm_limit;
      if (mock) {
        auto options = cfg_.mock;
        options.model_tag = model;
        gw_->add_provider(tag, std::make_shared<gateway::MockProvider>(options), limits);
      } else {
        if (it == cfg_.providers.end())
          throw FatalError("provider '" + tag + "' is not configured (use --config or --mock-providers)");
        auto provider = std::make_shared<gateway::OpenAiCompatibleProvider>(
            gateway::HttpProviderConfig::from_env(tag, model));
        try {
          provider->check_ready();
        } catch (const gateway::ProviderError& e) {
          throw FatalError(e.what());
        }
        gw_->add_provider(tag, provider, limits);
      }
    }
    return model;
  }

  int finish(int exit_code, Json counts, Json extra = Json::object()) {
    Json cost = Json::object();
    if (gw_) {
      for (const auto& ns : gw_->namespaces()) cost[ns] = gw_->cost_report(ns).to_json();
    }
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started_).count();
    Json summary{{"subcommand", sub_},
                 {"exit_code", exit_code},
                 {"counts", std::move(counts)},
                 {"cost", std::move(cost)},
                 {"wall_time_s", wall},
                 {"version", kPipelineVersion}};
    for (auto& [k, v] : extra.items()) summary[k] = v;
    atomic_write_file(run_dir_ / "summary.json", summary.dump(2) + "\n");
    if (logger_) {
      logger_->info("{} finished with exit code {} in {:.2f}s", sub_, exit_code, wall);
      logger_->flush();
    }
    out_ << "summary: " << (run_dir_ / "summary.json").string() << "\n";
    return exit_code;
  }

 private:
  Globals g_;
  std::string sub_;
  std::ostream& out_;
  std::chrono::steady_clock::time_point started_;
  Config cfg_;
  fs::path run_dir_;
  std::shared_ptr<spdlog::logger> logger_;
  std::unique_ptr<gateway::Gateway> gw_;
};

void require_file(const std::string& path, const char* what) {
  if (path.empty() || !fs::is_regular_file(path)) throw FatalError(std::string(what) + " not found: " + path);
}

void require_parent(const std::string& path) {
  const auto parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
}

std::string jsonl(const std::vector<Json>& lines) {
  std::string buf;
  for (const auto& j : lines) {
    buf += with_schema_version(j).dump();
    buf += '\n';
  }
  return buf;
}

template <typename T>
std::vector<T> read_json_lines(const std::string& path, T (*decoder)(const Json&)) {
  std::vector<T> out;
  JsonlReader reader(path);
  Json j;
  while (reader.next(j)) {
    try {
      check_schema_version(j);
      out.push_back(decoder(j));
    } catch (const std::exception& e) {
      throw FormatError(path + ":" + std::to_string(reader.line_number()) + ": " + e.what());
    }
  }
  return out;
}

annotate::PromptTemplateSet load_templates(const std::string& dir) {
  try {
    return dir.empty() ? annotate::PromptTemplateSet::defaults() : annotate::PromptTemplateSet::load(dir);
  } catch (const annotate::TemplateError& e) {
    throw FatalError(e.what());
  }
}

void write_template_hashes(Context& ctx, const annotate::PromptTemplateSet& t) {
  Json j{{"annotation_hash", t.annotation_hash()}, {"pipeline_version", t.pipeline_version()}};
  atomic_write_file(ctx.run_dir() / "templates.json", j.dump(2) + "\n");
}

// ---- subcommands -----------------------------------------------------------

struct IngestArgs {
  std::vector<std::string> manifests;
  std::string rules;
  std::string out;
};

int cmd_ingest(Context& ctx, const IngestArgs& a) {
  if (a.manifests.empty()) throw FatalError("at least one --manifest is required");
  std::vector<ingest::SourceManifest> manifests;
  for (const auto& path : a.manifests) {
    require_file(path, "manifest");
    auto m = ingest::SourceManifest::load(path);
    const auto dir = fs::path(path).parent_path();
    for (auto& e : m.entries) {
      e.source_image_ref = (dir / e.source_image_ref).lexically_normal().string();
      e.target_image_ref = (dir / e.target_image_ref).lexically_normal().string();
    }
    manifests.push_back(std::move(m));
  }
  auto rules = ctx.config().rules;
  if (!a.rules.empty()) {
    require_file(a.rules, "rules file");
    rules = ingest::SelectionRules::load(a.rules);
  }
  ctx.begin();
  FileImageSource images;
  std::vector<ingest::IngestReport> reports;
  std::vector<EditPair> pairs;
  for (const auto& m : manifests) {
    auto r = ingest::ingest_source(m, rules, images, ctx.workers());
    ctx.logger().info("{}: read {} kept {} dropped {}", m.source_dataset.name(), r.report.read, r.report.kept,
                      r.report.dropped());
    reports.push_back(r.report);
    for (auto& p : r.pairs) pairs.push_back(std::move(p));
  }
  std::sort(pairs.begin(), pairs.end(), [](const EditPair& x, const EditPair& y) { return x.pair_id < y.pair_id; });
  ingest::MixtureSummary mix;
  try {
    mix = ingest::mixture_totals(reports);
  } catch (const std::invalid_argument& e) {
    throw FatalError(e.what());
  }
  require_parent(a.out);
  write_lines(a.out, pairs);
  Json reps = Json::array();
  for (const auto& r : reports) reps.push_back(r.to_json());
  return ctx.finish(kExitOk, {{"pairs", pairs.size()}, {"total", mix.total}},
                    {{"reports", reps}, {"mixture", mix.to_json()}});
}

struct ManifestArgs {
  std::string dir;
  std::string source;
  std::vector<std::string> meta;
  std::string out;
};

int cmd_manifest_from_dir(std::ostream& out, const ManifestArgs& a) {
  if (!fs::is_directory(a.dir)) throw FatalError("not a directory: " + a.dir);
  std::map<std::string, std::string> meta;
  for (const auto& kv : a.meta) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw FatalError("--meta expects key=value, got " + kv);
    meta[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  auto m = ingest::manifest_from_dir(a.dir, SourceDataset::parse(a.source), meta);
  // Refs relative to the manifest location.
  const auto base = fs::absolute(a.out).parent_path();
  for (auto& e : m.entries) {
    e.source_image_ref = fs::relative(fs::absolute(e.source_image_ref), base).string();
    e.target_image_ref = fs::relative(fs::absolute(e.target_image_ref), base).string();
  }
  require_parent(a.out);
  atomic_write_file(a.out, m.to_json().dump(2) + "\n");
  out << m.entries.size() << " entries written to " << a.out << "\n";
  return kExitOk;
}

struct FilterArgs {
  std::string in;
  std::string out;
  std::string decisions;
  std::string embedder = "embedder";
};

int cmd_filter(Context& ctx, const FilterArgs& a) {
  require_file(a.in, "input");
  auto pairs = read_lines<EditPair>(a.in);
  ctx.begin();
  ctx.provider(a.embedder);
  simfilter::GatewayEmbeddingProvider embeddings(ctx.gateway(), a.embedder);
  FileImageSource images;
  auto result = simfilter::filter_pairs(std::move(pairs), images, embeddings, ctx.config().filter, ctx.workers(),
                                        ctx.config().models);
  std::vector<Json> kept, decisions;
  for (const auto& k : result.kept) kept.push_back(simfilter::encode(k));
  std::map<std::string, std::size_t> outcomes;
  for (const auto& d : result.decisions) {
    decisions.push_back(d.to_json());
    ++outcomes[std::string(simfilter::to_string(d.outcome))];
  }
  require_parent(a.out);
  atomic_write_file(a.out, jsonl(kept));
  const fs::path dpath = a.decisions.empty() ? ctx.run_dir() / "decisions.jsonl" : fs::path(a.decisions);
  atomic_write_file(dpath, jsonl(decisions));
  Json failures = Json::array();
  for (const auto& [id, why] : result.failures) {
    failures.push_back({{"pair_id", id}, {"reason", why}});
    ctx.logger().warn("pair {} not scored: {}", id, why);
  }
  const int code = result.failures.empty() ? kExitOk : kExitPartial;
  return ctx.finish(code,
                    {{"input", result.decisions.size() + result.failures.size()},
                     {"kept", result.kept.size()},
                     {"dropped", result.decisions.size() - result.kept.size()},
                     {"failed", result.failures.size()},
                     {"outcomes", outcomes}},
                    {{"failures", failures}});
}

struct AnnotateArgs {
  std::string in;
  std::string templates;
  std::string provider = "annotator";
  std::string checkpoint;
  std::string out;
  bool retry_failed = false;
};

int cmd_annotate(Context& ctx, const AnnotateArgs& a) {
  require_file(a.in, "input");
  auto input = read_json_lines<simfilter::ScoredPair>(a.in, &simfilter::decode_scored_pair);
  auto templates = load_templates(a.templates);
  ctx.begin();
  write_template_hashes(ctx, templates);
  annotate::AnnotateOptions opts;
  opts.provider_tag = a.provider;
  opts.model_tag = ctx.provider(a.provider);
  opts.workers = ctx.workers();
  opts.retry_failed = a.retry_failed;
  FileImageSource images;
  annotate::Annotator annotator(ctx.gateway(), templates, images, opts);
  const fs::path cp = a.checkpoint.empty() ? ctx.run_dir() / "checkpoint" : fs::path(a.checkpoint);
  std::optional<annotate::CheckpointStore> store;
  try {
    store.emplace(cp, annotator.pipeline_version());
  } catch (const annotate::CheckpointError& e) {
    throw FatalError(e.what());
  }
  if (store->dropped_torn_line()) ctx.logger().warn("checkpoint had a torn final entry; it was dropped");
  auto run = annotator.run(input, *store);
  require_parent(a.out);
  write_lines(a.out, run.records);
  for (const auto& [id, reason] : run.summary.failed) ctx.logger().warn("pair {} failed: {}", id, reason);
  const int code = run.summary.count(annotate::Stage::Failed) == 0 ? kExitOk : kExitPartial;
  return ctx.finish(code, run.summary.to_json(), {{"checkpoint", cp.string()}});
}

struct CaptionArgs {
  std::string in;
  std::string templates;
  std::string provider = "captioner";
  std::string mode = "structured";
  std::string out;
};

std::vector<std::string> list_images(const std::string& in) {
  std::vector<std::string> refs;
  if (fs::is_directory(in)) {
    for (const auto& e : fs::directory_iterator(in)) {
      if (!e.is_regular_file()) continue;
      const auto ext = text::to_lower(e.path().extension().string());
      if (ext == ".png" || ext == ".jpg" || ext == ".jpeg" || ext == ".webp" || ext == ".bmp")
        refs.push_back(e.path().string());
    }
  } else {
    require_file(in, "image list");
    const auto base = fs::path(in).parent_path();
    for (auto line : text::split_lines(read_file(in))) {
      auto t = text::trim(line);
      if (t.empty() || t.front() == '#') continue;
      fs::path p(t);
      refs.push_back((p.is_absolute() ? p : base / p).lexically_normal().string());
    }
  }
  std::sort(refs.begin(), refs.end());
  return refs;
}

int cmd_caption(Context& ctx, const CaptionArgs& a) {
  auto refs = list_images(a.in);
  auto templates = load_templates(a.templates);
  annotate::CaptionMode mode;
  try {
    mode = annotate::parse_caption_mode(a.mode);
  } catch (const std::invalid_argument& e) {
    throw FatalError(e.what());
  }
  ctx.begin();
  write_template_hashes(ctx, templates);
  annotate::CaptionOptions opts;
  opts.provider_tag = a.provider;
  opts.model_tag = ctx.provider(a.provider);
  opts.mode = mode;
  FileImageSource images;

  struct Item {
    std::optional<annotate::LongCaption> caption;
    std::string status;  // "ok", "gated", "unreadable", "failed"
    std::string detail;
  };
  std::vector<Item> items(refs.size());
  parallel_for(refs.size(), ctx.workers(), [&](std::size_t i) {
    auto blob = images.load(refs[i]);
    if (!blob) {
      items[i] = {std::nullopt, "unreadable", ""};
      return;
    }
    try {
      auto r = annotate::caption_t2i(ctx.gateway(), templates, *blob, opts);
      if (r.ok()) {
        items[i] = {r.value(), "ok", ""};
      } else {
        items[i] = {std::nullopt, "failed", r.error().dimension + ": " + r.error().detail};
      }
    } catch (const annotate::PreconditionError& e) {
      items[i] = {std::nullopt, "gated", e.what()};
    } catch (const gateway::ProviderError& e) {
      items[i] = {std::nullopt, "failed", std::string("provider_error:") + std::string(gateway::to_string(e.kind()))};
    }
  });
  std::vector<Json> lines;
  std::map<std::string, std::size_t> counts;
  Json failed = Json::array();
  std::size_t words = 0;
  for (std::size_t i = 0; i < refs.size(); ++i) {
    ++counts[items[i].status];
    if (items[i].caption) {
      words += items[i].caption->word_count;
      lines.push_back(items[i].caption->to_json());
    } else if (items[i].status == "failed") {
      failed.push_back({{"image", refs[i]}, {"reason", items[i].detail}});
    }
  }
  require_parent(a.out);
  atomic_write_file(a.out, jsonl(lines));
  Json c{{"input", refs.size()}, {"statuses", counts}, {"total_words", words}};
  return ctx.finish(failed.empty() ? kExitOk : kExitPartial, c, {{"failed", failed}});
}

struct AuditArgs {
  std::string in;
  std::size_t n = 30000;
  std::uint64_t seed = 17;
  std::string judge = "auditor";
  std::string report;
  std::string templates;
  bool with_images = false;
};

int cmd_audit(Context& ctx, const AuditArgs& a) {
  require_file(a.in, "dataset");
  auto templates = load_templates(a.templates);
  std::size_t records = 0;
  {
    JsonlReader reader(a.in);
    Json j;
    while (reader.next(j)) ++records;
  }
  if (a.n > records)
    throw FatalError("--n " + std::to_string(a.n) + " exceeds dataset size " + std::to_string(records));
  ctx.begin();
  audit::AuditOptions opts;
  opts.provider_tag = a.judge;
  opts.model_tag = ctx.provider(a.judge);
  opts.workers = ctx.workers();
  FileImageSource images;
  if (a.with_images) opts.images = &images;
  auto d = audit::audit_sample(a.in, a.n, a.seed, ctx.gateway(), templates, opts);
  const std::string report = a.report.empty() ? (ctx.run_dir() / "audit.json").string() : a.report;
  require_parent(report);
  atomic_write_file(report, d.to_json().dump(2) + "\n");
  Json counts = d.to_json();
  counts.erase("members");
  counts.erase("per_sample");
  return ctx.finish(d.complete ? kExitOk : kExitPartial, counts, {{"report", report}});
}

struct StatsArgs {
  std::string in;
  std::string field = "full_blueprint";
  std::string report;
};

int cmd_stats(Context& ctx, std::ostream& out, const StatsArgs& a) {
  require_file(a.in, "dataset");
  if (a.field != "caption") {
    try {
      audit::parse_field_selector(a.field);
    } catch (const std::invalid_argument& e) {
      throw FatalError(e.what());
    }
  }
  ctx.begin();
  auto s = a.field == "caption" ? audit::caption_stats(a.in)
                                : audit::corpus_stats(fs::path(a.in), audit::parse_field_selector(a.field));
  const auto j = s.to_json();
  if (!a.report.empty()) {
    require_parent(a.report);
    atomic_write_file(a.report, j.dump(2) + "\n");
  }
  out << j.dump(2) << "\n";
  if (s.empty()) ctx.logger().warn("dataset {} is empty; APL reported as 0", a.in);
  return ctx.finish(kExitOk, j);
}

struct DesignArgs {
  std::string image;
  std::string instruction;
  std::string designer = "designer";
  std::string out;
  std::string templates;
};

int cmd_design(Context& ctx, std::ostream& out, const DesignArgs& a) {
  require_file(a.image, "image");
  if (text::trim(a.instruction).empty()) throw FatalError("--instruction is empty");
  auto templates = load_templates(a.templates);
  FileImageSource images;
  auto blob = images.load(a.image);
  if (!blob) throw FatalError("cannot decode image " + a.image);
  ctx.begin();
  designer::DesignerOptions opts;
  opts.designer_tag = a.designer;
  opts.model_tag = ctx.provider(a.designer);
  try {
    auto bp = designer::design_blueprint(ctx.gateway(), *blob, a.instruction, templates, opts);
    const auto rendered = designer::render_for_editor(bp);
    if (!a.out.empty()) {
      require_parent(a.out);
      atomic_write_file(a.out, to_line(bp) + "\n");
    }
    atomic_write_file(ctx.run_dir() / "blueprint.txt", rendered);
    out << rendered;
    return ctx.finish(kExitOk, {{"designed", 1}});
  } catch (const designer::DesignFailed& e) {
    ctx.logger().error("{}", e.what());
    return ctx.finish(kExitPartial, {{"designed", 0}, {"failed", 1}}, {{"error", e.what()}});
  }
}

struct EvaluateArgs {
  std::string submission;
  std::string scores;
  std::string style = "imgedit9";
  std::string judge = "judge";
  std::string report;
  std::string label;
  std::string templates;
};

int cmd_evaluate(Context& ctx, std::ostream& out, const EvaluateArgs& a) {
  if (a.submission.empty() == a.scores.empty()) throw FatalError("give exactly one of --submission or --scores");
  eval::BenchmarkStyle style;
  std::vector<JudgeScore> scores;
  std::optional<eval::EvalSubmission> sub;
  if (!a.scores.empty()) {
    require_file(a.scores, "scores file");
    try {
      style = eval::parse_style(a.style);
    } catch (const std::invalid_argument& e) {
      throw FatalError(e.what());
    }
    scores = read_lines<JudgeScore>(a.scores);
  } else {
    require_file(a.submission, "submission");
    sub = eval::EvalSubmission::load(a.submission);
    style = sub->style;
  }
  auto templates = load_templates(a.templates);
  ctx.begin();
  std::vector<std::pair<std::string, std::string>> failed;
  if (sub) {
    eval::JudgeOptions opts;
    opts.judge_tag = a.judge;
    opts.model_tag = ctx.provider(a.judge);
    FileImageSource images;
    std::vector<std::optional<JudgeScore>> judged(sub->samples.size());
    std::vector<std::string> reasons(sub->samples.size());
    parallel_for(sub->samples.size(), ctx.workers(), [&](std::size_t i) {
      auto r = eval::judge_sample(ctx.gateway(), sub->samples[i], style, images, templates, opts);
      if (r.ok()) {
        judged[i] = r.value();
      } else {
        reasons[i] = r.error();
      }
    });
    for (std::size_t i = 0; i < judged.size(); ++i) {
      if (judged[i]) {
        scores.push_back(*judged[i]);
      } else {
        failed.emplace_back(sub->samples[i].sample_id, reasons[i]);
      }
    }
  }
  eval::EvalReport report;
  try {
    report = eval::aggregate(scores, style);
  } catch (const std::invalid_argument& e) {
    throw FatalError(e.what());
  }
  report.failed = failed;
  const std::string path = a.report.empty() ? (ctx.run_dir() / "report.json").string() : a.report;
  require_parent(path);
  atomic_write_file(path, report.to_json().dump(2) + "\n");
  const auto table = report.to_table(a.label.empty() ? (sub ? a.judge : std::string("scores")) : a.label);
  atomic_write_file(fs::path(path).replace_extension(".txt"), table);
  out << table;
  const int code = failed.empty() && !report.partial ? kExitOk : kExitPartial;
  return ctx.finish(code,
                    {{"scored", scores.size()}, {"failed", failed.size()}, {"partial", report.partial}},
                    {{"report", path}});
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"dim: curate chain-of-thought annotated image-edit datasets", "dim"};
  app.set_version_flag("--version", std::string(kPipelineVersion));
  app.require_subcommand(1);

  Globals g;
  app.add_option("--config", g.config, "JSON configuration file");
  app.add_flag("--mock-providers", g.mock, "Answer every provider call with the offline mock");
  app.add_option("--max-in-flight", g.max_in_flight, "Worker and per-provider concurrency ceiling");
  app.add_option("--run-dir", g.run_dir, "Directory for the run summary, logs and snapshots");
  app.add_option("--cache-dir", g.cache_dir, "Persistent response cache (default: $DIM_CACHE_DIR)");
  app.add_flag("--quiet", g.quiet, "Do not log to stderr");

  IngestArgs ingest_a;
  auto* ingest_c = app.add_subcommand("ingest", "Apply selection rules to source manifests");
  ingest_c->add_option("--manifest", ingest_a.manifests, "Source manifest (repeatable)")->required();
  ingest_c->add_option("--rules", ingest_a.rules, "Selection rules JSON");
  ingest_c->add_option("--out", ingest_a.out, "Output pairs (JSON lines)")->required();

  ManifestArgs manifest_a;
  auto* manifest_c = app.add_subcommand("manifest-from-dir", "Build a manifest from <stem>_source/_target/.txt files");
  manifest_c->add_option("--dir", manifest_a.dir)->required();
  manifest_c->add_option("--source", manifest_a.source)->required();
  manifest_c->add_option("--meta", manifest_a.meta, "key=value metadata for every entry");
  manifest_c->add_option("--out", manifest_a.out)->required();

  FilterArgs filter_a;
  auto* filter_c = app.add_subcommand("filter", "Similarity and keyword filter");
  filter_c->add_option("--in", filter_a.in)->required();
  filter_c->add_option("--out", filter_a.out, "Kept pairs with scores")->required();
  filter_c->add_option("--decisions", filter_a.decisions, "Per-pair decisions (default: run dir)");
  filter_c->add_option("--embedder", filter_a.embedder, "Provider tag serving embeddings");

  AnnotateArgs annotate_a;
  auto* annotate_c = app.add_subcommand("annotate", "Verdict, instruction optimization and blueprint generation");
  annotate_c->add_option("--in", annotate_a.in, "Kept pairs from filter")->required();
  annotate_c->add_option("--templates", annotate_a.templates, "Template directory overriding the defaults");
  annotate_c->add_option("--provider", annotate_a.provider);
  annotate_c->add_option("--checkpoint", annotate_a.checkpoint, "Checkpoint directory (default: run dir)");
  annotate_c->add_option("--out", annotate_a.out, "Dataset records (JSON lines)")->required();
  annotate_c->add_flag("--retry-failed", annotate_a.retry_failed, "Resume Failed pairs from their failed stage");

  CaptionArgs caption_a;
  auto* caption_c = app.add_subcommand("caption-t2i", "Multi-dimension long captions for text-to-image data");
  caption_c->add_option("--in", caption_a.in, "Image directory or file listing image paths")->required();
  caption_c->add_option("--templates", caption_a.templates);
  caption_c->add_option("--provider", caption_a.provider);
  caption_c->add_option("--mode", caption_a.mode, "structured | per_dimension");
  caption_c->add_option("--out", caption_a.out)->required();

  AuditArgs audit_a;
  auto* audit_c = app.add_subcommand("audit", "Seeded sample judged on the four-tier rubric");
  audit_c->add_option("--in", audit_a.in)->required();
  audit_c->add_option("--n", audit_a.n, "Sample size");
  audit_c->add_option("--seed", audit_a.seed);
  audit_c->add_option("--judge", audit_a.judge);
  audit_c->add_option("--report", audit_a.report);
  audit_c->add_option("--templates", audit_a.templates);
  audit_c->add_flag("--with-images", audit_a.with_images, "Attach source and edited images to judge calls");

  StatsArgs stats_a;
  auto* stats_c = app.add_subcommand("stats", "Average prompt length and per-source counts");
  stats_c->add_option("--in", stats_a.in)->required();
  stats_c->add_option("--field", stats_a.field, "raw_instruction | optimized_instruction | full_blueprint | caption");
  stats_c->add_option("--report", stats_a.report);

  DesignArgs design_a;
  auto* design_c = app.add_subcommand("design", "Blueprint from a source image and instruction");
  design_c->add_option("--image", design_a.image)->required();
  design_c->add_option("--instruction", design_a.instruction)->required();
  design_c->add_option("--designer", design_a.designer);
  design_c->add_option("--out", design_a.out, "Blueprint JSON line");
  design_c->add_option("--templates", design_a.templates);

  EvaluateArgs eval_a;
  auto* eval_c = app.add_subcommand("evaluate", "Judge edited images and aggregate per task");
  eval_c->add_option("--submission", eval_a.submission);
  eval_c->add_option("--scores", eval_a.scores, "Precomputed judge scores (JSON lines)");
  eval_c->add_option("--style", eval_a.style, "imgedit9 | gedit11 (with --scores)");
  eval_c->add_option("--judge", eval_a.judge);
  eval_c->add_option("--report", eval_a.report);
  eval_c->add_option("--label", eval_a.label, "Row label in the text table");
  eval_c->add_option("--templates", eval_a.templates);

  std::string templates_dir;
  auto* init_c = app.add_subcommand("init-templates", "Write the default prompt templates for editing");
  init_c->add_option("--dir", templates_dir)->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::Success& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitFatal;
  }

  const std::string sub = app.get_subcommands().front()->get_name();
  try {
    if (sub == "manifest-from-dir") return cmd_manifest_from_dir(out, manifest_a);
    if (sub == "init-templates") {
      annotate::PromptTemplateSet::defaults().write(templates_dir);
      out << "templates written to " << templates_dir << "\n";
      return kExitOk;
    }
    Context ctx(g, sub, out);
    if (sub == "ingest") return cmd_ingest(ctx, ingest_a);
    if (sub == "filter") return cmd_filter(ctx, filter_a);
    if (sub == "annotate") return cmd_annotate(ctx, annotate_a);
    if (sub == "caption-t2i") return cmd_caption(ctx, caption_a);
    if (sub == "audit") return cmd_audit(ctx, audit_a);
    if (sub == "stats") return cmd_stats(ctx, out, stats_a);
    if (sub == "design") return cmd_design(ctx, out, design_a);
    if (sub == "evaluate") return cmd_evaluate(ctx, out, eval_a);
  } catch (const FatalError& e) {
    err << "dim " << sub << ": " << e.what() << "\n";
    return kExitFatal;
  } catch (const std::exception& e) {
    err << "dim " << sub << ": " << e.what() << "\n";
    return kExitFatal;
  }
  err << app.help();
  return kExitFatal;
}

}  // namespace dim::cli
