#pragma once

#include <array>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "desksim/domain.hpp"
#include "desksim/errors.hpp"
#include "desksim/market.hpp"
#include "desksim/strategy.hpp"

namespace desksim {

// Exact integer numerator/denominator; a zero denominator means the ratio is
// undefined and is reported with its counts, never as 0.
struct Ratio {
  long long num = 0;
  long long den = 0;

  std::optional<double> value() const {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
  }

  bool operator==(const Ratio&) const = default;
};

inline int decision_index(Decision d) {
  switch (d) {
    case Decision::Overweight: return 0;
    case Decision::Neutral: return 1;
    case Decision::Underweight: return 2;
  }
  return -1;
}

inline Decision decision_at(int index) {
  static constexpr Decision kOrder[3] = {Decision::Overweight, Decision::Neutral,
                                         Decision::Underweight};
  return kOrder[index];
}

// ---------------------------------------------------------------------------
// Decision statistics: the overweight/neutral/underweight mix of a log.
// ---------------------------------------------------------------------------

struct DecisionStats {
  long long overweight = 0;
  long long neutral = 0;
  long long underweight = 0;

  long long total() const { return overweight + neutral + underweight; }
  double p_overweight() const { return static_cast<double>(overweight) / static_cast<double>(total()); }
  double p_neutral() const { return static_cast<double>(neutral) / static_cast<double>(total()); }
  double p_underweight() const { return static_cast<double>(underweight) / static_cast<double>(total()); }
};

inline DecisionStats decision_stats(std::span<const Decision> decisions) {
  if (decisions.empty()) throw EmptyInput("decision_stats over an empty log");
  DecisionStats stats;
  for (Decision d : decisions) {
    switch (d) {
      case Decision::Overweight: ++stats.overweight; break;
      case Decision::Neutral: ++stats.neutral; break;
      case Decision::Underweight: ++stats.underweight; break;
    }
  }
  return stats;
}

// Final decisions of the non-skipped outcomes in a log.
inline std::vector<Decision> final_decisions(std::span<const PipelineOutcome> outcomes) {
  std::vector<Decision> out;
  out.reserve(outcomes.size());
  for (const auto& o : outcomes) {
    if (o.final) out.push_back(*o.final);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Consistency with institutions: the share of the agent's actionable
// (overweight/underweight) decisions that the institutions made too. Neutral
// agent decisions never enter any denominator.
// ---------------------------------------------------------------------------

struct AgentInstitutionPair {
  Decision agent = Decision::Neutral;
  Decision institution = Decision::Neutral;
};

struct ConsistencyReport {
  Ratio overall;
  Ratio overweight;
  Ratio underweight;
};

inline ConsistencyReport consistency(std::span<const AgentInstitutionPair> pairs) {
  ConsistencyReport report;
  for (const auto& pair : pairs) {
    if (pair.agent == Decision::Overweight) {
      ++report.overweight.den;
      if (pair.institution == Decision::Overweight) ++report.overweight.num;
    } else if (pair.agent == Decision::Underweight) {
      ++report.underweight.den;
      if (pair.institution == Decision::Underweight) ++report.underweight.num;
    }
  }
  report.overall.num = report.overweight.num + report.underweight.num;
  report.overall.den = report.overweight.den + report.underweight.den;
  return report;
}

// ---------------------------------------------------------------------------
// Cross tabulation of two runs over the same articles (the short-/long-term
// comparison). Cells are joint proportions over pairs present and non-skipped
// in both logs; rows index the first log's decision.
// ---------------------------------------------------------------------------

struct CrossTab {
  std::array<std::array<long long, 3>, 3> counts{};  // [first][second]
  long long total = 0;

  double proportion(int row, int col) const {
    return total == 0 ? 0.0 : static_cast<double>(counts[row][col]) / static_cast<double>(total);
  }
  long long row_count(int row) const { return counts[row][0] + counts[row][1] + counts[row][2]; }
  long long col_count(int col) const { return counts[0][col] + counts[1][col] + counts[2][col]; }
  double row_marginal(int row) const {
    return total == 0 ? 0.0 : static_cast<double>(row_count(row)) / static_cast<double>(total);
  }
  double col_marginal(int col) const {
    return total == 0 ? 0.0 : static_cast<double>(col_count(col)) / static_cast<double>(total);
  }
};

inline CrossTab cross_tab(std::span<const std::pair<Decision, Decision>> pairs) {
  if (pairs.empty()) throw EmptyInput("cross_tab over an empty pairing");
  CrossTab tab;
  for (const auto& [first, second] : pairs) {
    ++tab.counts[decision_index(first)][decision_index(second)];
    ++tab.total;
  }
  return tab;
}

// Joins two outcome logs on article id, dropping pairs skipped in either log.
inline std::vector<std::pair<Decision, Decision>> pair_outcomes_by_article(
    std::span<const PipelineOutcome> first, std::span<const PipelineOutcome> second) {
  std::set<std::string> second_articles;
  std::map<std::string, Decision> second_by_article;
  for (const auto& o : second) {
    second_articles.insert(o.article_id);
    if (o.final) second_by_article.emplace(o.article_id, *o.final);
  }
  std::vector<std::pair<Decision, Decision>> pairs;
  bool any_shared = false;
  for (const auto& o : first) {
    if (!second_articles.count(o.article_id)) continue;
    any_shared = true;
    if (!o.final) continue;
    auto it = second_by_article.find(o.article_id);
    if (it != second_by_article.end()) pairs.emplace_back(*o.final, it->second);
  }
  if (!any_shared) throw DisjointLogs("outcome logs share no article ids");
  return pairs;
}

// ---------------------------------------------------------------------------
// Head-trader approval rate: Follow (or Follow Trader A/B) over head-trader
// invocations. Outcomes where the head trader never ran (Neither suggestions,
// skipped articles) are not invocations.
// ---------------------------------------------------------------------------

struct ApprovalStats {
  long long invocations = 0;
  long long approvals = 0;

  Ratio rate() const { return Ratio{approvals, invocations}; }
};

inline ApprovalStats approval_stats(std::span<const PipelineOutcome> outcomes) {
  ApprovalStats stats;
  for (const auto& o : outcomes) {
    if (!o.head) continue;
    ++stats.invocations;
    switch (o.head->verdict) {
      case HeadVerdictKind::Follow:
      case HeadVerdictKind::FollowTraderA:
      case HeadVerdictKind::FollowTraderB:
        ++stats.approvals;
        break;
      case HeadVerdictKind::NotFollow:
        break;
    }
  }
  return stats;
}

inline std::map<Seniority, ApprovalStats> approval_stats_by_seniority(
    std::span<const PipelineOutcome> outcomes) {
  std::map<Seniority, ApprovalStats> grouped;
  for (const auto& o : outcomes) {
    if (!o.head) continue;
    auto& stats = grouped[o.variant.seniority];
    ++stats.invocations;
    if (o.head->verdict != HeadVerdictKind::NotFollow) ++stats.approvals;
  }
  return grouped;
}

// ---------------------------------------------------------------------------
// Market alignment: an overweight decision at day t is aligned when the close
// strictly rises by t+T, an underweight decision when it strictly falls. Flat
// moves are unaligned for both classes. Items without full price coverage are
// excluded and counted.
// ---------------------------------------------------------------------------

struct MarketItem {
  std::string ticker;
  Date base_date;
  Decision decision = Decision::Neutral;
};

struct MarketConsistency {
  std::vector<int> horizons;
  std::vector<Ratio> overweight;      // parallel to horizons
  std::vector<Ratio> underweight;     // parallel to horizons
  std::vector<long long> missing_price;  // exclusions per horizon (actionable items only)
};

inline MarketConsistency market_consistency(std::span<const MarketItem> items,
                                            const PriceTable& prices,
                                            const TradingCalendar& calendar,
                                            std::vector<int> horizons = {1, 5}) {
  MarketConsistency result;
  result.horizons = std::move(horizons);
  result.overweight.resize(result.horizons.size());
  result.underweight.resize(result.horizons.size());
  result.missing_price.resize(result.horizons.size(), 0);

  for (size_t h = 0; h < result.horizons.size(); ++h) {
    for (const auto& item : items) {
      if (item.decision == Decision::Neutral) continue;
      auto direction = forward_move(prices, item.ticker, item.base_date, result.horizons[h], calendar);
      if (!direction) {
        ++result.missing_price[h];
        continue;
      }
      if (item.decision == Decision::Overweight) {
        ++result.overweight[h].den;
        if (*direction == PriceDirection::Up) ++result.overweight[h].num;
      } else {
        ++result.underweight[h].den;
        if (*direction == PriceDirection::Down) ++result.underweight[h].num;
      }
    }
  }
  return result;
}

}  // namespace desksim
