#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

#include "desksim/errors.hpp"

namespace desksim {

// ---------------------------------------------------------------------------
// Calendar dates. Daily granularity throughout; there are no intraday
// timestamps anywhere in the engine.
// ---------------------------------------------------------------------------

struct Date {
  int year = 0;
  int month = 0;  // 1..12
  int day = 0;    // 1..31

  auto operator<=>(const Date&) const = default;

  static bool is_leap_year(int y) {
    return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
  }

  static int days_in_month(int y, int m) {
    static constexpr int kDays[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (m == 2 && is_leap_year(y)) return 29;
    return kDays[m - 1];
  }

  bool valid() const {
    return year >= 1 && month >= 1 && month <= 12 && day >= 1 &&
           day <= days_in_month(year, month);
  }

  // Parses "YYYY-MM-DD". Anything else is a data error.
  static Date parse(std::string_view text) {
    auto fail = [&] {
      throw DataError("invalid date: '" + std::string(text) + "' (expected YYYY-MM-DD)");
    };
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') fail();
    auto num = [&](size_t pos, size_t len) {
      int value = 0;
      for (size_t i = pos; i < pos + len; ++i) {
        if (text[i] < '0' || text[i] > '9') fail();
        value = value * 10 + (text[i] - '0');
      }
      return value;
    };
    Date d{num(0, 4), num(5, 2), num(8, 2)};
    if (!d.valid()) fail();
    return d;
  }

  std::string to_string() const {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
    return buf;
  }
};

// ---------------------------------------------------------------------------
// Decision vocabulary shared by agents and institution labels.
// ---------------------------------------------------------------------------

enum class Decision { Overweight, Neutral, Underweight };

enum class AgentAction { Long, Short, Neither };

enum class StrategyKind { SingleTrader, CoT, HO, HOm };

enum class Horizon { ShortTerm, LongTerm };

enum class Seniority { Junior, Senior };

inline Decision action_to_decision(AgentAction action) {
  switch (action) {
    case AgentAction::Long: return Decision::Overweight;
    case AgentAction::Short: return Decision::Underweight;
    case AgentAction::Neither: return Decision::Neutral;
  }
  throw Error("unreachable: bad AgentAction");
}

inline AgentAction decision_to_action(Decision decision) {
  switch (decision) {
    case Decision::Overweight: return AgentAction::Long;
    case Decision::Underweight: return AgentAction::Short;
    case Decision::Neutral: return AgentAction::Neither;
  }
  throw Error("unreachable: bad Decision");
}

inline const char* to_string(Decision d) {
  switch (d) {
    case Decision::Overweight: return "overweight";
    case Decision::Neutral: return "neutral";
    case Decision::Underweight: return "underweight";
  }
  return "?";
}

inline Decision decision_from_string(std::string_view s) {
  if (s == "overweight") return Decision::Overweight;
  if (s == "neutral") return Decision::Neutral;
  if (s == "underweight") return Decision::Underweight;
  throw DataError("unknown decision: '" + std::string(s) + "'");
}

inline const char* to_string(AgentAction a) {
  switch (a) {
    case AgentAction::Long: return "long";
    case AgentAction::Short: return "short";
    case AgentAction::Neither: return "neither";
  }
  return "?";
}

inline AgentAction action_from_string(std::string_view s) {
  if (s == "long") return AgentAction::Long;
  if (s == "short") return AgentAction::Short;
  if (s == "neither") return AgentAction::Neither;
  throw DataError("unknown action: '" + std::string(s) + "'");
}

inline const char* to_string(StrategyKind k) {
  switch (k) {
    case StrategyKind::SingleTrader: return "single_trader";
    case StrategyKind::CoT: return "cot";
    case StrategyKind::HO: return "ho";
    case StrategyKind::HOm: return "hom";
  }
  return "?";
}

inline StrategyKind strategy_from_string(std::string_view s) {
  if (s == "single_trader") return StrategyKind::SingleTrader;
  if (s == "cot") return StrategyKind::CoT;
  if (s == "ho") return StrategyKind::HO;
  if (s == "hom") return StrategyKind::HOm;
  throw DataError("unknown strategy: '" + std::string(s) + "'");
}

inline const char* to_string(Horizon h) {
  return h == Horizon::ShortTerm ? "short_term" : "long_term";
}

inline Horizon horizon_from_string(std::string_view s) {
  if (s == "short_term") return Horizon::ShortTerm;
  if (s == "long_term") return Horizon::LongTerm;
  throw DataError("unknown horizon: '" + std::string(s) + "'");
}

inline const char* to_string(Seniority s) {
  return s == Seniority::Junior ? "junior" : "senior";
}

inline Seniority seniority_from_string(std::string_view s) {
  if (s == "junior") return Seniority::Junior;
  if (s == "senior") return Seniority::Senior;
  throw DataError("unknown seniority: '" + std::string(s) + "'");
}

// ---------------------------------------------------------------------------
// Ingested corpus rows.
// ---------------------------------------------------------------------------

struct NewsArticle {
  std::string article_id;
  std::string ticker;
  Date published_at;
  std::string title;
  std::string content;
  std::string source;
};

struct TradingRecord {
  std::string ticker;
  Date trade_date;
  std::int64_t total_buy_volume = 0;
  std::int64_t total_sell_volume = 0;
  std::int64_t institution_count = 0;

  bool valid() const {
    if (total_buy_volume < 0 || total_sell_volume < 0 || institution_count < 0) return false;
    // No institutions trading implies no volume either way.
    if (institution_count == 0 && (total_buy_volume != 0 || total_sell_volume != 0)) return false;
    return true;
  }
};

struct PricePoint {
  std::string ticker;
  Date trade_date;
  double close_price = 0.0;

  bool valid() const { return close_price > 0.0; }
};

// ---------------------------------------------------------------------------
// Trading calendar: the ordered set of dates the exchange was open. Agent
// decisions apply to the trading day after a news release, so every date
// arithmetic in the engine goes through here instead of naive day addition.
// ---------------------------------------------------------------------------

class TradingCalendar {
 public:
  TradingCalendar() = default;

  explicit TradingCalendar(std::vector<Date> days) : days_(std::move(days)) {
    for (size_t i = 0; i < days_.size(); ++i) {
      if (!days_[i].valid()) throw DataError("calendar contains invalid date " + days_[i].to_string());
      if (i > 0 && !(days_[i - 1] < days_[i]))
        throw DataError("calendar dates must be strictly increasing near " + days_[i].to_string());
    }
  }

  const std::vector<Date>& days() const { return days_; }
  bool empty() const { return days_.empty(); }
  size_t size() const { return days_.size(); }

  bool contains(const Date& d) const {
    return std::binary_search(days_.begin(), days_.end(), d);
  }

  // k-th trading date strictly after d. d itself need not be a trading day.
  Date next(const Date& d, int k = 1) const {
    if (k < 1) throw Error("next_trading_day offset must be >= 1");
    auto it = std::upper_bound(days_.begin(), days_.end(), d);
    auto remaining = static_cast<long>(days_.end() - it);
    if (remaining < k) {
      throw CalendarExhausted("no trading date " + std::to_string(k) + " days after " + d.to_string());
    }
    return *(it + (k - 1));
  }

 private:
  std::vector<Date> days_;
};

inline Date next_trading_day(const TradingCalendar& calendar, const Date& d, int k = 1) {
  return calendar.next(d, k);
}

}  // namespace desksim
