#pragma once

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "desksim/http_backend.hpp"
#include "desksim/log.hpp"
#include "desksim/market.hpp"
#include "desksim/metrics.hpp"
#include "desksim/prompts.hpp"
#include "desksim/reports.hpp"
#include "desksim/strategy.hpp"
#include "desksim/version.hpp"

namespace desksim {

// ---------------------------------------------------------------------------
// Run configuration. One declarative JSON file drives a run; CLI flags
// override individual fields. Relative paths resolve against the config
// file's directory.
// ---------------------------------------------------------------------------

struct BackendConfig {
  std::string kind;  // "scripted" | "http"
  // http
  std::string base_url;
  std::string path = "/v1/chat/completions";
  std::string model;
  std::string api_key_env;
  int timeout_seconds = 60;
  int min_interval_ms = 0;
  // scripted
  std::filesystem::path script;
};

struct StrategyConfig {
  StrategyKind kind = StrategyKind::SingleTrader;
  PromptVariant variant;
  PipelineBackends backends;
  TraderInput trader_input = TraderInput::NewsAndAnalysis;

  // File label: "<index>-<kind>[-<head>]-<horizon>-<seniority>".
  std::string label(size_t index) const {
    std::string out = std::to_string(index) + "-" + to_string(kind);
    if (kind == StrategyKind::HOm) out += "-" + backends.head;
    out += std::string("-") + (variant.horizon == Horizon::ShortTerm ? "st" : "lt");
    out += variant.seniority == Seniority::Junior ? "-jr" : "-sr";
    return out;
  }
};

struct RunConfig {
  std::filesystem::path news;
  std::filesystem::path trading_records;
  std::filesystem::path prices;
  std::filesystem::path calendar;
  std::filesystem::path prompts_dir = "prompts";
  std::filesystem::path cache_dir;
  std::filesystem::path output_dir = "out";
  int workers = 4;
  SamplingParams sampling;
  RetryPolicy retry;
  EffectiveDatePolicy effective_date = EffectiveDatePolicy::SameDay;
  std::map<std::string, BackendConfig> backends;
  std::vector<StrategyConfig> strategies;

  static RunConfig from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir);
  static RunConfig load(const std::filesystem::path& file);

  // Full echo of the effective configuration (recorded in manifests).
  nlohmann::json canonical_json() const;
  // Digest over the fields that determine run output. Where files land
  // (output_dir, cache_dir) and how fast they are produced (workers, retry)
  // never change a single output byte, so they stay out of the digest and a
  // rerun into a fresh directory reproduces logs headers included.
  nlohmann::json semantic_json() const;
  std::string digest() const { return Sha256::hex_digest(semantic_json().dump()); }

  void validate_for_simulate() const;
};

namespace detail {

inline std::filesystem::path resolve(const std::filesystem::path& base,
                                     const std::filesystem::path& p) {
  if (p.empty() || p.is_absolute()) return p;
  return base / p;
}

}  // namespace detail

inline RunConfig RunConfig::from_json(const nlohmann::json& doc,
                                      const std::filesystem::path& base_dir) {
  RunConfig config;
  try {
    auto path_field = [&](const char* name) -> std::filesystem::path {
      if (!doc.contains(name)) return {};
      return detail::resolve(base_dir, doc[name].get<std::string>());
    };
    config.news = path_field("news");
    config.trading_records = path_field("trading_records");
    config.prices = path_field("prices");
    config.calendar = path_field("calendar");
    if (doc.contains("prompts_dir")) config.prompts_dir = detail::resolve(base_dir, doc["prompts_dir"].get<std::string>());
    if (doc.contains("cache_dir")) config.cache_dir = detail::resolve(base_dir, doc["cache_dir"].get<std::string>());
    if (doc.contains("output_dir")) config.output_dir = detail::resolve(base_dir, doc["output_dir"].get<std::string>());
    config.workers = doc.value("workers", 4);
    if (doc.contains("sampling")) {
      config.sampling.temperature = doc["sampling"].value("temperature", 0.0);
      config.sampling.max_output = doc["sampling"].value("max_output", 512);
    }
    if (doc.contains("retry")) {
      config.retry.attempts = doc["retry"].value("attempts", 5);
      config.retry.base_delay_ms = doc["retry"].value("base_delay_ms", 500);
      config.retry.max_delay_ms = doc["retry"].value("max_delay_ms", 30000);
    }
    if (doc.contains("effective_date")) {
      config.effective_date = effective_date_policy_from_string(doc["effective_date"].get<std::string>());
    }
    if (doc.contains("backends")) {
      for (const auto& [name, spec] : doc["backends"].items()) {
        BackendConfig backend;
        backend.kind = spec.value("kind", "http");
        backend.base_url = spec.value("base_url", "");
        backend.path = spec.value("path", "/v1/chat/completions");
        backend.model = spec.value("model", "");
        backend.api_key_env = spec.value("api_key_env", "");
        backend.timeout_seconds = spec.value("timeout_seconds", 60);
        backend.min_interval_ms = spec.value("min_interval_ms", 0);
        if (spec.contains("script")) backend.script = detail::resolve(base_dir, spec["script"].get<std::string>());
        config.backends.emplace(name, std::move(backend));
      }
    }
    if (doc.contains("strategies")) {
      for (const auto& spec : doc["strategies"]) {
        StrategyConfig strategy;
        strategy.kind = strategy_from_string(spec.at("kind").get<std::string>());
        strategy.variant.horizon = horizon_from_string(spec.value("horizon", "short_term"));
        strategy.variant.seniority = seniority_from_string(spec.value("seniority", "junior"));
        strategy.backends.analyst = spec.value("analyst", "");
        strategy.backends.trader = spec.value("trader", "");
        strategy.backends.trader_b = spec.value("trader_b", "");
        strategy.backends.head = spec.value("head", "");
        strategy.trader_input = trader_input_from_string(spec.value("trader_input", "news_and_analysis"));
        config.strategies.push_back(std::move(strategy));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed run config: ") + e.what());
  } catch (const DataError& e) {
    throw ConfigError(std::string("malformed run config: ") + e.what());
  }
  return config;
}

inline RunConfig RunConfig::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open config file: " + file.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config file " + file.string() + " is not valid JSON: " + e.what());
  }
  return from_json(doc, file.parent_path());
}

inline nlohmann::json RunConfig::semantic_json() const {
  nlohmann::json doc;
  doc["news"] = news.string();
  doc["trading_records"] = trading_records.string();
  doc["prices"] = prices.string();
  doc["calendar"] = calendar.string();
  doc["prompts_dir"] = prompts_dir.string();
  doc["sampling"] = {{"temperature", sampling.temperature}, {"max_output", sampling.max_output}};
  doc["effective_date"] = to_string(effective_date);
  for (const auto& [name, backend] : backends) {
    doc["backends"][name] = {{"kind", backend.kind},
                             {"base_url", backend.base_url},
                             {"path", backend.path},
                             {"model", backend.model},
                             {"script", backend.script.string()}};
  }
  doc["strategies"] = nlohmann::json::array();
  for (const auto& strategy : strategies) {
    doc["strategies"].push_back({{"kind", to_string(strategy.kind)},
                                 {"horizon", to_string(strategy.variant.horizon)},
                                 {"seniority", to_string(strategy.variant.seniority)},
                                 {"analyst", strategy.backends.analyst},
                                 {"trader", strategy.backends.trader},
                                 {"trader_b", strategy.backends.trader_b},
                                 {"head", strategy.backends.head},
                                 {"trader_input", to_string(strategy.trader_input)}});
  }
  return doc;
}

inline nlohmann::json RunConfig::canonical_json() const {
  nlohmann::json doc = semantic_json();
  doc["cache_dir"] = cache_dir.string();
  doc["output_dir"] = output_dir.string();
  doc["workers"] = workers;
  doc["retry"] = {{"attempts", retry.attempts},
                  {"base_delay_ms", retry.base_delay_ms},
                  {"max_delay_ms", retry.max_delay_ms}};
  for (const auto& [name, backend] : backends) {
    doc["backends"][name]["api_key_env"] = backend.api_key_env;
    doc["backends"][name]["timeout_seconds"] = backend.timeout_seconds;
    doc["backends"][name]["min_interval_ms"] = backend.min_interval_ms;
  }
  return doc;
}

inline void RunConfig::validate_for_simulate() const {
  if (news.empty()) throw ConfigError("config is missing the news corpus path");
  if (strategies.empty()) throw ConfigError("config lists no strategies to run");
  std::set<std::string> used;
  for (size_t i = 0; i < strategies.size(); ++i) {
    const auto& s = strategies[i];
    auto require_backend = [&](const std::string& role, const std::string& name) {
      if (name.empty()) {
        throw ConfigError("strategy " + std::to_string(i) + " (" + to_string(s.kind) +
                          ") is missing its " + role + " backend");
      }
      if (!backends.count(name)) {
        throw ConfigError("strategy " + std::to_string(i) + " references unknown backend '" +
                          name + "'");
      }
      used.insert(name);
    };
    require_backend("trader", s.backends.trader);
    if (s.kind != StrategyKind::SingleTrader) require_backend("analyst", s.backends.analyst);
    if (s.kind == StrategyKind::HO || s.kind == StrategyKind::HOm)
      require_backend("head", s.backends.head);
    if (s.kind == StrategyKind::HOm) {
      require_backend("second trader", s.backends.trader_b);
      if (s.backends.trader == s.backends.trader_b) {
        throw ConfigError("strategy " + std::to_string(i) +
                          ": hom requires two distinct trader backends");
      }
    }
  }
  // Remote credentials are checked up front so a sweep never dies mid-run on
  // a missing key.
  for (const auto& name : used) {
    const auto& backend = backends.at(name);
    if (backend.kind == "http" && !backend.api_key_env.empty()) {
      const char* value = std::getenv(backend.api_key_env.c_str());
      if (value == nullptr || *value == '\0') {
        throw ConfigError("backend '" + name + "' needs environment variable " +
                          backend.api_key_env);
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Gateway assembly.
// ---------------------------------------------------------------------------

inline std::vector<ScriptedBackend::Rule> load_script(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open backend script: " + file.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("backend script " + file.string() + " is not valid JSON: " + e.what());
  }
  std::vector<ScriptedBackend::Rule> rules;
  for (const auto& entry : doc) {
    rules.push_back({entry.value("match", ""), entry.value("response", "")});
  }
  return rules;
}

inline std::unique_ptr<Gateway> build_gateway(const RunConfig& config) {
  auto gateway = std::make_unique<Gateway>(config.cache_dir, config.retry);
  for (const auto& [name, backend] : config.backends) {
    if (backend.kind == "scripted") {
      std::vector<ScriptedBackend::Rule> rules;
      if (!backend.script.empty()) rules = load_script(backend.script);
      gateway->register_backend(name, std::make_unique<ScriptedBackend>(std::move(rules)),
                                backend.min_interval_ms);
    } else if (backend.kind == "http") {
      HttpBackend::Config http;
      http.base_url = backend.base_url;
      http.path = backend.path;
      http.model = backend.model;
      http.api_key_env = backend.api_key_env;
      http.timeout_seconds = backend.timeout_seconds;
      gateway->register_backend(name, std::make_unique<HttpBackend>(std::move(http)),
                                backend.min_interval_ms);
    } else {
      throw ConfigError("backend '" + name + "' has unknown kind '" + backend.kind + "'");
    }
  }
  return gateway;
}

// ---------------------------------------------------------------------------
// Bounded worker pool. Task order in, result order out; scheduling never
// changes what gets written.
// ---------------------------------------------------------------------------

inline void parallel_for(size_t count, int workers, const std::function<void(size_t)>& work) {
  const int n = std::max(1, workers);
  if (n == 1 || count <= 1) {
    for (size_t i = 0; i < count; ++i) work(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(n));
  for (int t = 0; t < n; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        const size_t index = next.fetch_add(1);
        if (index >= count) return;
        try {
          work(index);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& thread : pool) thread.join();
  if (failure) std::rethrow_exception(failure);
}

// ---------------------------------------------------------------------------
// Run manifest.
// ---------------------------------------------------------------------------

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline void write_json_atomic(const std::filesystem::path& path, const nlohmann::json& doc) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());
    out << doc.dump(2) << "\n";
  }
  std::filesystem::rename(tmp, path);
}

struct SimulateResult {
  std::string config_digest;
  std::vector<std::filesystem::path> outcome_logs;
  std::filesystem::path transcript_path;
  std::filesystem::path manifest_path;
  long long outcomes = 0;
  long long skipped = 0;
};

// ---------------------------------------------------------------------------
// simulate: every (article, strategy) pipeline, outcome logs in corpus order,
// transcripts, manifest. Rerunning against a warm cache touches no backend
// and reproduces the logs byte for byte.
// ---------------------------------------------------------------------------

inline SimulateResult cmd_simulate(const RunConfig& config) {
  config.validate_for_simulate();
  const auto articles = load_news(config.news);
  if (articles.empty()) throw DataError("news corpus is empty: " + config.news.string());
  TemplateSet templates = TemplateSet::load(config.prompts_dir);
  auto gateway = build_gateway(config);

  const std::string started_at = utc_timestamp();
  const size_t strategy_count = config.strategies.size();
  std::vector<std::vector<PipelineOutcome>> results(strategy_count);
  for (auto& row : results) row.resize(articles.size());

  const size_t task_count = strategy_count * articles.size();
  parallel_for(task_count, config.workers, [&](size_t task) {
    const size_t strategy_index = task / articles.size();
    const size_t article_index = task % articles.size();
    const StrategyConfig& strategy = config.strategies[strategy_index];
    PipelineEnv env{*gateway, templates, config.sampling};
    PipelineSpec spec{strategy.kind, strategy.variant, strategy.backends, strategy.trader_input};
    results[strategy_index][article_index] = run_pipeline(env, articles[article_index], spec);
  });

  std::filesystem::create_directories(config.output_dir);
  const std::string config_digest = config.digest();

  SimulateResult result;
  result.config_digest = config_digest;
  result.transcript_path = config.output_dir / "transcripts.jsonl.gz";
  TranscriptWriter transcripts(result.transcript_path);
  long long skipped = 0;
  for (size_t s = 0; s < strategy_count; ++s) {
    for (auto& outcome : results[s]) {
      outcome.transcript_refs.clear();
      for (const auto& record : outcome.transcript) {
        outcome.transcript_refs.push_back(transcripts.append(record));
      }
      if (outcome.skipped()) ++skipped;
      ++result.outcomes;
    }
    const auto log_path =
        config.output_dir / ("outcomes-" + config.strategies[s].label(s) + ".jsonl");
    write_outcome_log(log_path, results[s], config_digest);
    result.outcome_logs.push_back(log_path);
  }
  transcripts.close();
  result.skipped = skipped;

  nlohmann::json manifest;
  manifest["schema"] = kManifestSchema;
  manifest["code_version"] = kVersion;
  manifest["config_digest"] = config_digest;
  manifest["config"] = config.canonical_json();
  manifest["template_digest"] = templates.digest();
  manifest["started_at"] = started_at;
  manifest["finished_at"] = utc_timestamp();
  for (const auto& [name, kind] : gateway->backend_kinds()) {
    manifest["backends"].push_back(
        {{"name", name}, {"kind", kind}, {"model", gateway->backend_model(name)}});
  }
  manifest["coverage"] = {{"articles", articles.size()},
                          {"strategies", strategy_count},
                          {"outcomes", result.outcomes},
                          {"skipped", result.skipped}};
  for (const auto& path : result.outcome_logs) {
    manifest["outcome_logs"].push_back(path.filename().string());
  }
  manifest["transcripts"] = result.transcript_path.filename().string();
  result.manifest_path = config.output_dir / "manifest.json";
  write_json_atomic(result.manifest_path, manifest);
  return result;
}

// ---------------------------------------------------------------------------
// evaluate: table-style reports from outcome logs plus market data.
// ---------------------------------------------------------------------------

struct EvalOptions {
  std::vector<std::filesystem::path> logs;
  std::filesystem::path second_log;  // columns of the cross-tab
  std::set<std::string> kinds;       // decisions consistency crosstab approval market
  std::filesystem::path out_dir;
};

struct EvalResult {
  std::vector<std::filesystem::path> reports;
  std::map<std::string, std::string> warnings;
};

inline const std::set<std::string>& known_report_kinds() {
  static const std::set<std::string> kKinds = {"decisions", "consistency", "crosstab", "approval",
                                               "market"};
  return kKinds;
}

inline EvalResult cmd_evaluate(const RunConfig& config, const EvalOptions& options) {
  EvalResult result;
  if (options.kinds.empty()) {
    result.warnings["kinds"] = "no report kinds requested; nothing to do";
    return result;
  }
  for (const auto& kind : options.kinds) {
    if (!known_report_kinds().count(kind)) throw ConfigError("unknown report kind: " + kind);
  }
  if (options.logs.empty()) throw ConfigError("evaluate needs at least one outcome log");

  std::vector<PipelineOutcome> outcomes;
  std::set<std::string> run_digests;
  for (const auto& path : options.logs) {
    OutcomeLog log = read_outcome_log(path);
    run_digests.insert(log.run_digest);
    for (auto& outcome : log.outcomes) outcomes.push_back(std::move(outcome));
  }
  std::string stamp;
  for (const auto& digest : run_digests) {
    if (!stamp.empty()) stamp += "+";
    stamp += digest;
  }

  const bool wants_decisions = options.kinds.count("decisions") > 0;
  const bool wants_consistency = options.kinds.count("consistency") > 0;
  const bool wants_market = options.kinds.count("market") > 0;

  // consistency and market reports cannot run without corpus + calendar (and
  // labels resp. prices); the decisions report uses them only for its
  // optional institutions row.
  if (wants_consistency || wants_market) {
    if (config.news.empty()) throw ConfigError("this report kind needs the news corpus path");
    if (config.calendar.empty()) throw ConfigError("this report kind needs the calendar path");
  }
  if (wants_consistency && config.trading_records.empty()) {
    throw ConfigError("the consistency report needs the trading records path");
  }
  if (wants_market && config.prices.empty()) {
    throw ConfigError("the market report needs the price table path");
  }

  const bool market_inputs_available =
      !config.news.empty() && !config.calendar.empty() &&
      (wants_decisions || wants_consistency || wants_market);

  std::optional<ArticleIndex> articles;
  std::vector<NewsArticle> corpus;
  TradingCalendar calendar;
  if (market_inputs_available) {
    corpus = load_news(config.news);
    articles.emplace(corpus);
    calendar = load_calendar(config.calendar);
  }
  std::optional<LabelStore> labels;
  if (market_inputs_available && !config.trading_records.empty()) {
    labels = LabelStore::build(load_trading_records(config.trading_records));
  }
  std::optional<PriceTable> prices;
  if (wants_market) {
    prices = PriceTable::build(load_prices(config.prices));
  }

  std::filesystem::create_directories(options.out_dir);
  auto groups = group_outcomes(outcomes);

  // Institution rows are computed over the distinct articles the logs cover.
  std::vector<const NewsArticle*> evaluated_articles;
  if (articles) {
    std::set<std::string> seen;
    for (const auto& outcome : outcomes) {
      if (seen.insert(outcome.article_id).second) {
        evaluated_articles.push_back(&articles->at(outcome.article_id));
      }
    }
  }

  auto emit = [&](const std::string& kind, const Report& report) {
    const auto text_path = options.out_dir / ("report-" + kind + ".txt");
    const auto json_path = options.out_dir / ("report-" + kind + ".json");
    std::ofstream text(text_path, std::ios::binary | std::ios::trunc);
    text << report.text;
    write_json_atomic(json_path, report.data);
    result.reports.push_back(text_path);
    result.reports.push_back(json_path);
  };

  if (options.kinds.count("decisions")) {
    std::optional<DecisionStats> institution_stats;
    if (labels) {
      DecisionStats stats;
      for (const auto* article : evaluated_articles) {
        auto label = align_article(*article, *labels, calendar, config.effective_date);
        if (!label) continue;
        switch (*label) {
          case Decision::Overweight: ++stats.overweight; break;
          case Decision::Neutral: ++stats.neutral; break;
          case Decision::Underweight: ++stats.underweight; break;
        }
      }
      if (stats.total() > 0) institution_stats = stats;
    }
    emit("decisions", decision_stats_report(groups, institution_stats, stamp));
  }

  if (options.kinds.count("consistency")) {
    if (!labels) throw ConfigError("the consistency report needs the trading records path");
    std::map<std::string, std::pair<ConsistencyReport, JoinCoverage>> rows;
    for (const auto& [label, group] : groups) {
      JoinCoverage coverage;
      auto pairs = join_with_labels(group, *articles, *labels, calendar, config.effective_date,
                                    &coverage);
      rows.emplace(label, std::make_pair(consistency(pairs), coverage));
    }
    auto report = consistency_report(rows, stamp);
    report.data["ambiguous_labels_excluded"] = labels->ambiguous_count();
    emit("consistency", report);
  }

  if (options.kinds.count("crosstab")) {
    if (options.second_log.empty()) {
      throw ConfigError("the crosstab report needs a second outcome log (--log-b)");
    }
    OutcomeLog second = read_outcome_log(options.second_log);
    auto pairs = pair_outcomes_by_article(outcomes, second.outcomes);
    auto tab = cross_tab(pairs);
    std::string first_label = outcomes.empty() ? "rows" : group_label(outcomes.front());
    std::string second_label =
        second.outcomes.empty() ? "cols" : group_label(second.outcomes.front());
    emit("crosstab", cross_tab_report(tab, first_label, second_label, stamp));
  }

  if (options.kinds.count("approval")) {
    std::map<std::string, ApprovalStats> rows;
    for (const auto& [label, group] : groups) {
      auto stats = approval_stats(group);
      if (stats.invocations > 0) rows.emplace(label, stats);
    }
    emit("approval", approval_report(rows, stamp));
  }

  if (options.kinds.count("market")) {
    std::map<std::string, MarketConsistency> rows;
    for (const auto& [label, group] : groups) {
      auto items = market_items_from_outcomes(group, *articles, calendar, config.effective_date);
      rows.emplace(label, market_consistency(items, *prices, calendar));
    }
    if (labels) {
      std::vector<MarketItem> institution_items;
      for (const auto* article : evaluated_articles) {
        auto label = align_article(*article, *labels, calendar, config.effective_date);
        auto base = effective_date(*article, calendar, config.effective_date);
        if (!label || !base) continue;
        institution_items.push_back({article->ticker, *base, *label});
      }
      rows.emplace("institutions", market_consistency(institution_items, *prices, calendar));
    }
    emit("market", market_report(rows, stamp));
  }

  return result;
}

// ---------------------------------------------------------------------------
// replay-seniority: re-run only the head-trader calls of an HO/HOm log under
// both seniority wordings against the frozen trader suggestions, so approval
// differences cannot come from fresh trader output.
// ---------------------------------------------------------------------------

struct ReplayResult {
  std::filesystem::path junior_log;
  std::filesystem::path senior_log;
  long long replayed = 0;
  long long carried = 0;  // records copied unchanged (neutral or skipped sources)
};

inline ReplayResult cmd_replay_seniority(const RunConfig& config,
                                         const std::filesystem::path& source_log) {
  OutcomeLog source = read_outcome_log(source_log);
  bool any_replayable = false;
  for (const auto& outcome : source.outcomes) {
    if (outcome.strategy != StrategyKind::HO && outcome.strategy != StrategyKind::HOm) {
      throw DataError("replay-seniority expects an HO/HOm log; found a " +
                      std::string(to_string(outcome.strategy)) + " record");
    }
    if (!outcome.skipped() && !outcome.traders.empty()) any_replayable = true;
  }
  if (!any_replayable) {
    throw DataError("source log carries no trader suggestions to replay");
  }

  const auto articles_vec = load_news(config.news);
  ArticleIndex articles(articles_vec);
  TemplateSet templates = TemplateSet::load(config.prompts_dir);
  auto gateway = build_gateway(config);

  std::filesystem::create_directories(config.output_dir);
  const std::string config_digest = config.digest();

  ReplayResult result;
  std::map<Seniority, std::vector<PipelineOutcome>> replayed;
  for (Seniority seniority : {Seniority::Junior, Seniority::Senior}) {
    auto& out = replayed[seniority];
    out.reserve(source.outcomes.size());
    for (const auto& outcome : source.outcomes) {
      PipelineOutcome replay = outcome;
      replay.transcript.clear();
      replay.transcript_refs.clear();
      replay.variant.seniority = seniority;
      replay.head.reset();

      std::vector<TraderSuggestion> actionable;
      for (const auto& s : outcome.traders) {
        if (s.action != AgentAction::Neither) actionable.push_back(s);
      }
      if (outcome.skipped() || actionable.empty()) {
        out.push_back(std::move(replay));  // nothing for a head trader to veto
        continue;
      }
      if (!outcome.analyst) {
        throw DataError("record for article " + outcome.article_id +
                        " lacks the analysis text needed to rebuild the head prompt");
      }

      PipelineEnv env{*gateway, templates, config.sampling};
      try {
        HeadTraderVerdict verdict =
            run_head_trader(env, replay.transcript, articles.at(outcome.article_id),
                            *outcome.analyst, actionable, replay.variant,
                            outcome.head ? outcome.head->backend : outcome.head_backend);
        switch (verdict.verdict) {
          case HeadVerdictKind::Follow:
            replay.final = action_to_decision(actionable[0].action);
            break;
          case HeadVerdictKind::FollowTraderA:
            replay.final = action_to_decision(actionable[0].action);
            break;
          case HeadVerdictKind::FollowTraderB:
            replay.final = action_to_decision(actionable[1].action);
            break;
          case HeadVerdictKind::NotFollow:
            replay.final = Decision::Neutral;
            break;
        }
        replay.head = std::move(verdict);
      } catch (const Error& e) {
        replay.final.reset();
        replay.skip_reason = std::string(e.code()) + ": " + e.what();
      }
      out.push_back(std::move(replay));
    }
  }

  TranscriptWriter transcripts(config.output_dir / "replay-transcripts.jsonl.gz");
  for (Seniority seniority : {Seniority::Junior, Seniority::Senior}) {
    for (auto& outcome : replayed[seniority]) {
      for (const auto& record : outcome.transcript) {
        outcome.transcript_refs.push_back(transcripts.append(record));
      }
    }
  }
  transcripts.close();

  for (const auto& outcome : replayed[Seniority::Junior]) {
    if (outcome.head) ++result.replayed;
    else ++result.carried;
  }

  result.junior_log = config.output_dir / "outcomes-replay-junior.jsonl";
  result.senior_log = config.output_dir / "outcomes-replay-senior.jsonl";
  write_outcome_log(result.junior_log, replayed[Seniority::Junior], config_digest);
  write_outcome_log(result.senior_log, replayed[Seniority::Senior], config_digest);

  nlohmann::json manifest;
  manifest["schema"] = kManifestSchema;
  manifest["code_version"] = kVersion;
  manifest["config_digest"] = config_digest;
  manifest["template_digest"] = templates.digest();
  manifest["source_log"] = source_log.string();
  manifest["source_run"] = source.run_digest;
  manifest["mode"] = "replay_seniority";
  manifest["replayed"] = result.replayed;
  manifest["carried"] = result.carried;
  manifest["finished_at"] = utc_timestamp();
  write_json_atomic(config.output_dir / "replay-manifest.json", manifest);
  return result;
}

// ---------------------------------------------------------------------------
// validate-data: ingest everything named by the config and report coverage.
// ---------------------------------------------------------------------------

struct DataReport {
  long long articles = 0;
  long long trading_records = 0;
  long long labels = 0;
  long long ambiguous_labels = 0;
  long long price_rows = 0;
  long long calendar_days = 0;
  long long articles_with_label = 0;
  long long articles_missing_label = 0;
  long long articles_with_price_cover_t1 = 0;
};

inline DataReport cmd_validate_data(const RunConfig& config) {
  DataReport report;
  if (config.news.empty()) throw ConfigError("config is missing the news corpus path");
  auto articles = load_news(config.news);
  report.articles = static_cast<long long>(articles.size());

  TradingCalendar calendar;
  if (!config.calendar.empty()) {
    calendar = load_calendar(config.calendar);
    report.calendar_days = static_cast<long long>(calendar.size());
  }
  std::optional<LabelStore> labels;
  if (!config.trading_records.empty()) {
    auto records = load_trading_records(config.trading_records);
    report.trading_records = static_cast<long long>(records.size());
    labels = LabelStore::build(records);
    report.labels = static_cast<long long>(labels->size());
    report.ambiguous_labels = static_cast<long long>(labels->ambiguous_count());
  }
  std::optional<PriceTable> prices;
  if (!config.prices.empty()) {
    auto points = load_prices(config.prices);
    report.price_rows = static_cast<long long>(points.size());
    prices = PriceTable::build(points);
  }

  if (labels && !calendar.empty()) {
    for (const auto& article : articles) {
      if (align_article(article, *labels, calendar, config.effective_date)) {
        ++report.articles_with_label;
      } else {
        ++report.articles_missing_label;
      }
    }
  }
  if (prices && !calendar.empty()) {
    for (const auto& article : articles) {
      auto base = effective_date(article, calendar, config.effective_date);
      if (base && forward_move(*prices, article.ticker, *base, 1, calendar)) {
        ++report.articles_with_price_cover_t1;
      }
    }
  }
  return report;
}

}  // namespace desksim
