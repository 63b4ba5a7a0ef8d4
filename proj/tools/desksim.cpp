#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "desksim/desksim.hpp"

namespace {

// Exit codes: 0 clean, 2 config error, 3 data error, 4 completed with
// per-article skips, 1 anything else.
constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitPartialSkips = 4;

struct CommonFlags {
  std::string config_path;
  std::string news;
  std::string trading_records;
  std::string prices;
  std::string calendar;
  std::string prompts_dir;
  std::string cache_dir;
  std::string output_dir;
  int workers = 0;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("-c,--config", flags.config_path, "run configuration file (JSON)")->required();
  cmd->add_option("--news", flags.news, "override: news corpus (JSONL)");
  cmd->add_option("--trading-records", flags.trading_records, "override: trading record table (CSV)");
  cmd->add_option("--prices", flags.prices, "override: price table (CSV)");
  cmd->add_option("--calendar", flags.calendar, "override: trading calendar file");
  cmd->add_option("--prompts-dir", flags.prompts_dir, "override: prompt template directory");
  cmd->add_option("--cache-dir", flags.cache_dir, "override: response cache directory");
  cmd->add_option("--output-dir", flags.output_dir, "override: output directory");
  cmd->add_option("--workers", flags.workers, "override: worker pool width");
}

desksim::RunConfig load_config(const CommonFlags& flags) {
  auto config = desksim::RunConfig::load(flags.config_path);
  if (!flags.news.empty()) config.news = flags.news;
  if (!flags.trading_records.empty()) config.trading_records = flags.trading_records;
  if (!flags.prices.empty()) config.prices = flags.prices;
  if (!flags.calendar.empty()) config.calendar = flags.calendar;
  if (!flags.prompts_dir.empty()) config.prompts_dir = flags.prompts_dir;
  if (!flags.cache_dir.empty()) config.cache_dir = flags.cache_dir;
  if (!flags.output_dir.empty()) config.output_dir = flags.output_dir;
  if (flags.workers > 0) config.workers = flags.workers;
  return config;
}

int run_simulate(const CommonFlags& flags) {
  auto config = load_config(flags);
  auto result = desksim::cmd_simulate(config);
  std::cout << "run " << result.config_digest << "\n";
  std::cout << "outcomes: " << result.outcomes << " (skipped " << result.skipped << ")\n";
  for (const auto& log : result.outcome_logs) std::cout << "log: " << log.string() << "\n";
  std::cout << "transcripts: " << result.transcript_path.string() << "\n";
  std::cout << "manifest: " << result.manifest_path.string() << "\n";
  return result.skipped > 0 ? kExitPartialSkips : kExitOk;
}

int run_evaluate(const CommonFlags& flags, const std::vector<std::string>& logs,
                 const std::string& log_b, const std::vector<std::string>& kinds,
                 const std::string& report_dir) {
  auto config = load_config(flags);
  desksim::EvalOptions options;
  for (const auto& log : logs) options.logs.emplace_back(log);
  if (!log_b.empty()) options.second_log = log_b;
  options.kinds.insert(kinds.begin(), kinds.end());
  options.out_dir = report_dir.empty() ? config.output_dir : std::filesystem::path(report_dir);
  auto result = desksim::cmd_evaluate(config, options);
  for (const auto& [key, warning] : result.warnings) std::cerr << "warning: " << warning << "\n";
  for (const auto& report : result.reports) std::cout << "report: " << report.string() << "\n";
  return kExitOk;
}

int run_replay(const CommonFlags& flags, const std::string& source_log) {
  auto config = load_config(flags);
  auto result = desksim::cmd_replay_seniority(config, source_log);
  std::cout << "replayed head-trader calls: " << result.replayed << " (carried unchanged "
            << result.carried << ")\n";
  std::cout << "log: " << result.junior_log.string() << "\n";
  std::cout << "log: " << result.senior_log.string() << "\n";
  return kExitOk;
}

int run_validate(const CommonFlags& flags) {
  auto config = load_config(flags);
  auto report = desksim::cmd_validate_data(config);
  std::cout << "articles: " << report.articles << "\n";
  std::cout << "trading records: " << report.trading_records << " (labels " << report.labels
            << ", ambiguous excluded " << report.ambiguous_labels << ")\n";
  std::cout << "price rows: " << report.price_rows << "\n";
  std::cout << "calendar days: " << report.calendar_days << "\n";
  if (report.articles_with_label + report.articles_missing_label > 0) {
    std::cout << "articles with aligned label: " << report.articles_with_label << " (missing "
              << report.articles_missing_label << ")\n";
  }
  if (report.articles_with_price_cover_t1 > 0) {
    std::cout << "articles with t+1 price cover: " << report.articles_with_price_cover_t1 << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hierarchical multi-agent trading-desk simulation over news corpora"};
  app.require_subcommand(1);
  app.set_version_flag("--version", desksim::kVersion);

  CommonFlags sim_flags;
  auto* simulate = app.add_subcommand("simulate", "replay the corpus through configured pipelines");
  add_common_flags(simulate, sim_flags);

  CommonFlags eval_flags;
  std::vector<std::string> eval_logs;
  std::string eval_log_b;
  std::vector<std::string> eval_kinds;
  std::string eval_report_dir;
  auto* evaluate = app.add_subcommand("evaluate", "compute reports from outcome logs");
  add_common_flags(evaluate, eval_flags);
  evaluate->add_option("--log", eval_logs, "outcome log(s) to evaluate")->required();
  evaluate->add_option("--log-b", eval_log_b, "second outcome log (cross-tab columns)");
  evaluate
      ->add_option("--report", eval_kinds,
                   "report kinds: decisions consistency crosstab approval market")
      ->delimiter(',');
  evaluate->add_option("--report-dir", eval_report_dir, "directory for report files");

  CommonFlags replay_flags;
  std::string replay_source;
  auto* replay = app.add_subcommand("replay-seniority",
                                    "re-run head-trader approvals under both seniority wordings");
  add_common_flags(replay, replay_flags);
  replay->add_option("--log", replay_source, "source HO/HOm outcome log")->required();

  CommonFlags validate_flags;
  auto* validate = app.add_subcommand("validate-data", "ingest corpus files and report coverage");
  add_common_flags(validate, validate_flags);

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) return run_simulate(sim_flags);
    if (evaluate->parsed()) return run_evaluate(eval_flags, eval_logs, eval_log_b, eval_kinds,
                                                eval_report_dir);
    if (replay->parsed()) return run_replay(replay_flags, replay_source);
    if (validate->parsed()) return run_validate(validate_flags);
  } catch (const desksim::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const desksim::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const desksim::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInternal;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}
