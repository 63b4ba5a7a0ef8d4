#pragma once

// Shared test scaffolding: temp dirs, fixture builders, and the independent
// brute-force oracles the metric tests check against.

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "desksim/desksim.hpp"

namespace testsupport {

inline std::filesystem::path prompt_dir() { return DESKSIM_PROMPT_DIR; }

inline const desksim::TemplateSet& templates() {
  static desksim::TemplateSet set = desksim::TemplateSet::load(prompt_dir());
  return set;
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<unsigned> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("desksim-test-" + tag + "-" + std::to_string(::getpid()) + "-" +
             std::to_string(counter.fetch_add(1)));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path file(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline desksim::NewsArticle make_article(const std::string& id, const std::string& ticker = "2330",
                                         const desksim::Date& date = {2019, 3, 4},
                                         const std::string& title = "capacity expansion announced",
                                         const std::string& content = "the fab will add a new line") {
  return desksim::NewsArticle{id, ticker, date, title, content, "unit-test"};
}

// Mon-Fri calendar over several weeks of March 2019 (2019-03-04 is a Monday).
inline desksim::TradingCalendar weekday_calendar() {
  std::vector<desksim::Date> days;
  for (int day = 1; day <= 31; ++day) {
    desksim::Date d{2019, 3, day};
    // 2019-03-03 was a Sunday, so weekday index = day % 7 with 3 -> Sunday.
    int weekday = day % 7;  // 4=>Mon ... 1=>Fri, 2=>Sat, 3=>Sun
    if (weekday == 2 || weekday == 3) continue;
    days.push_back(d);
  }
  return desksim::TradingCalendar(std::move(days));
}

// ---------------------------------------------------------------------------
// Independent oracles (deliberately naive).
// ---------------------------------------------------------------------------

struct OracleConsistency {
  long long match_over = 0, agent_over = 0;
  long long match_under = 0, agent_under = 0;
};

inline OracleConsistency brute_force_consistency(
    const std::vector<desksim::AgentInstitutionPair>& pairs) {
  OracleConsistency out;
  for (const auto& pair : pairs) {
    if (pair.agent == desksim::Decision::Overweight) {
      out.agent_over += 1;
      if (pair.institution == desksim::Decision::Overweight) out.match_over += 1;
    }
    if (pair.agent == desksim::Decision::Underweight) {
      out.agent_under += 1;
      if (pair.institution == desksim::Decision::Underweight) out.match_under += 1;
    }
  }
  return out;
}

inline desksim::Decision random_decision(std::mt19937& rng) {
  std::uniform_int_distribution<int> dist(0, 2);
  return desksim::decision_at(dist(rng));
}

// Minimal outcome record used to feed metric functions directly.
inline desksim::PipelineOutcome make_outcome(const std::string& article_id, desksim::Decision final,
                                             desksim::StrategyKind kind = desksim::StrategyKind::SingleTrader) {
  desksim::PipelineOutcome outcome;
  outcome.article_id = article_id;
  outcome.strategy = kind;
  outcome.final = final;
  return outcome;
}

inline desksim::PipelineOutcome make_skipped(const std::string& article_id) {
  desksim::PipelineOutcome outcome;
  outcome.article_id = article_id;
  outcome.skip_reason = "unparsable_action: test";
  return outcome;
}

}  // namespace testsupport
