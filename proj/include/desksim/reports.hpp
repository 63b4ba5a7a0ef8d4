#pragma once

#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "desksim/metrics.hpp"

namespace desksim {

// ---------------------------------------------------------------------------
// Joining outcome logs with market data.
// ---------------------------------------------------------------------------

class ArticleIndex {
 public:
  explicit ArticleIndex(const std::vector<NewsArticle>& articles) {
    for (const auto& a : articles) by_id_.emplace(a.article_id, &a);
  }

  const NewsArticle& at(const std::string& article_id) const {
    auto it = by_id_.find(article_id);
    if (it == by_id_.end()) throw DataError("outcome references unknown article id: " + article_id);
    return *it->second;
  }

 private:
  std::map<std::string, const NewsArticle*> by_id_;
};

struct JoinCoverage {
  long long outcomes = 0;       // records seen
  long long skipped = 0;        // excluded: pipeline skipped the article
  long long missing_label = 0;  // excluded: no institution label on the aligned day
  long long paired = 0;         // rows that entered the metric
};

// Pairs each non-skipped outcome with the institution label of the trading
// day after the article's effective date.
inline std::vector<AgentInstitutionPair> join_with_labels(
    std::span<const PipelineOutcome> outcomes, const ArticleIndex& articles, const LabelStore& labels,
    const TradingCalendar& calendar, EffectiveDatePolicy policy, JoinCoverage* coverage = nullptr) {
  JoinCoverage local;
  std::vector<AgentInstitutionPair> pairs;
  for (const auto& outcome : outcomes) {
    ++local.outcomes;
    if (!outcome.final) {
      ++local.skipped;
      continue;
    }
    const NewsArticle& article = articles.at(outcome.article_id);
    auto label = align_article(article, labels, calendar, policy);
    if (!label) {
      ++local.missing_label;
      continue;
    }
    pairs.push_back({*outcome.final, *label});
    ++local.paired;
  }
  if (coverage != nullptr) *coverage = local;
  return pairs;
}

inline std::vector<MarketItem> market_items_from_outcomes(std::span<const PipelineOutcome> outcomes,
                                                          const ArticleIndex& articles,
                                                          const TradingCalendar& calendar,
                                                          EffectiveDatePolicy policy) {
  std::vector<MarketItem> items;
  for (const auto& outcome : outcomes) {
    if (!outcome.final) continue;
    const NewsArticle& article = articles.at(outcome.article_id);
    auto base = effective_date(article, calendar, policy);
    if (!base) continue;
    items.push_back({article.ticker, *base, *outcome.final});
  }
  return items;
}

// ---------------------------------------------------------------------------
// Formatting. Percentages print with two decimals; undefined ratios print an
// em dash with their raw counts so a zero denominator is never shown as 0%.
// ---------------------------------------------------------------------------

namespace fmt {

inline std::string percent(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f%%", value * 100.0);
  return buf;
}

inline std::string ratio(const Ratio& r) {
  if (auto v = r.value()) {
    return percent(*v) + " (" + std::to_string(r.num) + "/" + std::to_string(r.den) + ")";
  }
  return "— (" + std::to_string(r.num) + "/" + std::to_string(r.den) + ")";
}

inline std::string pad(const std::string& text, size_t width) {
  return text.size() >= width ? text : text + std::string(width - text.size(), ' ');
}

}  // namespace fmt

inline nlohmann::json ratio_json(const Ratio& r) {
  nlohmann::json out = {{"num", r.num}, {"den", r.den}};
  if (auto v = r.value()) {
    out["value"] = *v;
  } else {
    out["value"] = nullptr;
  }
  return out;
}

// Grouping key for report rows: one row per (strategy, variant, head backend)
// combination found in the evaluated logs.
inline std::string group_label(const PipelineOutcome& outcome) {
  std::string label = to_string(outcome.strategy);
  if (!outcome.head_backend.empty()) label += "(" + outcome.head_backend + ")";
  label += std::string(" ") + to_string(outcome.variant.horizon) + " " +
           to_string(outcome.variant.seniority);
  return label;
}

inline std::map<std::string, std::vector<PipelineOutcome>> group_outcomes(
    std::span<const PipelineOutcome> outcomes) {
  std::map<std::string, std::vector<PipelineOutcome>> groups;
  for (const auto& outcome : outcomes) groups[group_label(outcome)].push_back(outcome);
  return groups;
}

struct Report {
  std::string text;
  nlohmann::json data;
};

// ---------------------------------------------------------------------------
// Decision-mix report (agent rows plus an institutions row when labels are
// supplied).
// ---------------------------------------------------------------------------

inline Report decision_stats_report(const std::map<std::string, std::vector<PipelineOutcome>>& groups,
                                    const std::optional<DecisionStats>& institutions,
                                    const std::string& run_digest) {
  Report report;
  report.data = {{"schema", "desksim.report.decisions.v1"}, {"run", run_digest}};
  std::ostringstream text;
  text << "decision mix (share of non-skipped outcomes)\n";
  text << fmt::pad("group", 36) << fmt::pad("overweight", 12) << fmt::pad("neutral", 12)
       << fmt::pad("underweight", 12) << "count\n";
  auto row = [&](const std::string& label, const DecisionStats& stats) {
    text << fmt::pad(label, 36) << fmt::pad(fmt::percent(stats.p_overweight()), 12)
         << fmt::pad(fmt::percent(stats.p_neutral()), 12)
         << fmt::pad(fmt::percent(stats.p_underweight()), 12) << stats.total() << "\n";
    report.data["rows"].push_back({{"group", label},
                                   {"overweight", stats.p_overweight()},
                                   {"neutral", stats.p_neutral()},
                                   {"underweight", stats.p_underweight()},
                                   {"counts",
                                    {{"overweight", stats.overweight},
                                     {"neutral", stats.neutral},
                                     {"underweight", stats.underweight}}}});
  };
  if (institutions) row("institutions", *institutions);
  for (const auto& [label, outcomes] : groups) {
    auto decisions = final_decisions(outcomes);
    if (decisions.empty()) continue;
    row(label, decision_stats(decisions));
  }
  report.text = text.str();
  return report;
}

// ---------------------------------------------------------------------------
// Consistency-with-institutions report.
// ---------------------------------------------------------------------------

inline Report consistency_report(
    const std::map<std::string, std::pair<ConsistencyReport, JoinCoverage>>& rows,
    const std::string& run_digest) {
  Report report;
  report.data = {{"schema", "desksim.report.consistency.v1"}, {"run", run_digest}};
  std::ostringstream text;
  text << "consistency with institution labels\n";
  text << fmt::pad("group", 36) << fmt::pad("overall", 22) << fmt::pad("overweight", 22)
       << fmt::pad("underweight", 22) << "excluded(skip/nolabel)\n";
  for (const auto& [label, entry] : rows) {
    const auto& [consistency, coverage] = entry;
    text << fmt::pad(label, 36) << fmt::pad(fmt::ratio(consistency.overall), 22)
         << fmt::pad(fmt::ratio(consistency.overweight), 22)
         << fmt::pad(fmt::ratio(consistency.underweight), 22) << coverage.skipped << "/"
         << coverage.missing_label << "\n";
    report.data["rows"].push_back({{"group", label},
                                   {"overall", ratio_json(consistency.overall)},
                                   {"overweight", ratio_json(consistency.overweight)},
                                   {"underweight", ratio_json(consistency.underweight)},
                                   {"coverage",
                                    {{"outcomes", coverage.outcomes},
                                     {"skipped", coverage.skipped},
                                     {"missing_label", coverage.missing_label},
                                     {"paired", coverage.paired}}}});
  }
  report.text = text.str();
  return report;
}

// ---------------------------------------------------------------------------
// Cross tabulation of two runs (first log = rows, second log = columns).
// ---------------------------------------------------------------------------

inline Report cross_tab_report(const CrossTab& tab, const std::string& first_label,
                               const std::string& second_label, const std::string& run_digest) {
  Report report;
  report.data = {{"schema", "desksim.report.crosstab.v1"},
                 {"run", run_digest},
                 {"rows_log", first_label},
                 {"cols_log", second_label},
                 {"total_pairs", tab.total}};
  static constexpr const char* kNames[3] = {"overweight", "neutral", "underweight"};
  std::ostringstream text;
  text << "decision cross-tab: rows=" << first_label << " cols=" << second_label << "\n";
  text << fmt::pad("", 14);
  for (const auto* name : kNames) text << fmt::pad(name, 14);
  text << "row total\n";
  for (int r = 0; r < 3; ++r) {
    text << fmt::pad(kNames[r], 14);
    for (int c = 0; c < 3; ++c) {
      text << fmt::pad(fmt::percent(tab.proportion(r, c)), 14);
      report.data["cells"][kNames[r]][kNames[c]] = tab.proportion(r, c);
      report.data["counts"][kNames[r]][kNames[c]] = tab.counts[r][c];
    }
    text << fmt::percent(tab.row_marginal(r)) << "\n";
    report.data["row_marginals"][kNames[r]] = tab.row_marginal(r);
  }
  text << fmt::pad("col total", 14);
  for (int c = 0; c < 3; ++c) {
    text << fmt::pad(fmt::percent(tab.col_marginal(c)), 14);
    report.data["col_marginals"][kNames[c]] = tab.col_marginal(c);
  }
  text << "\n";
  report.text = text.str();
  return report;
}

// ---------------------------------------------------------------------------
// Approval-rate report (per seniority, optionally alongside consistency).
// ---------------------------------------------------------------------------

inline Report approval_report(const std::map<std::string, ApprovalStats>& rows,
                              const std::string& run_digest) {
  Report report;
  report.data = {{"schema", "desksim.report.approval.v1"}, {"run", run_digest}};
  std::ostringstream text;
  text << "head-trader approval rate\n";
  text << fmt::pad("group", 36) << "approval\n";
  for (const auto& [label, stats] : rows) {
    text << fmt::pad(label, 36) << fmt::ratio(stats.rate()) << "\n";
    report.data["rows"].push_back({{"group", label},
                                   {"approval", ratio_json(stats.rate())},
                                   {"invocations", stats.invocations},
                                   {"approvals", stats.approvals}});
  }
  report.text = text.str();
  return report;
}

// ---------------------------------------------------------------------------
// Market-alignment report.
// ---------------------------------------------------------------------------

inline Report market_report(const std::map<std::string, MarketConsistency>& rows,
                            const std::string& run_digest) {
  Report report;
  report.data = {{"schema", "desksim.report.market.v1"}, {"run", run_digest}};
  std::ostringstream text;
  text << "alignment between decisions and forward price moves\n";
  text << fmt::pad("group", 36);
  bool header_written = false;
  for (const auto& [label, mc] : rows) {
    if (!header_written) {
      for (int h : mc.horizons) {
        text << fmt::pad("over t+" + std::to_string(h), 22)
             << fmt::pad("under t+" + std::to_string(h), 22);
      }
      text << "excluded\n";
      header_written = true;
    }
    text << fmt::pad(label, 36);
    nlohmann::json row = {{"group", label}};
    long long excluded = 0;
    for (size_t i = 0; i < mc.horizons.size(); ++i) {
      text << fmt::pad(fmt::ratio(mc.overweight[i]), 22) << fmt::pad(fmt::ratio(mc.underweight[i]), 22);
      const std::string key = "t+" + std::to_string(mc.horizons[i]);
      row["overweight"][key] = ratio_json(mc.overweight[i]);
      row["underweight"][key] = ratio_json(mc.underweight[i]);
      row["missing_price"][key] = mc.missing_price[i];
      excluded += mc.missing_price[i];
    }
    text << excluded << "\n";
    report.data["rows"].push_back(std::move(row));
  }
  report.text = text.str();
  return report;
}

}  // namespace desksim
