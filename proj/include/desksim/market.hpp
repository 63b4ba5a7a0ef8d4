#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "desksim/domain.hpp"
#include "desksim/errors.hpp"

namespace desksim {

// ---------------------------------------------------------------------------
// Institution labels: overweight when professional institutions bought more
// than they sold that day, underweight for the reverse, neutral when none
// traded. A buy=sell tie with institutions active has no defined label; such
// days are surfaced as ambiguous and excluded.
// ---------------------------------------------------------------------------

enum class LabelKind { Overweight, Underweight, Neutral, Ambiguous };

inline LabelKind classify_record(const TradingRecord& record) {
  if (record.institution_count == 0) return LabelKind::Neutral;
  if (record.total_buy_volume > record.total_sell_volume) return LabelKind::Overweight;
  if (record.total_sell_volume > record.total_buy_volume) return LabelKind::Underweight;
  return LabelKind::Ambiguous;
}

class LabelStore {
 public:
  static LabelStore build(const std::vector<TradingRecord>& records) {
    LabelStore store;
    for (const auto& record : records) {
      if (!record.valid()) {
        throw DataError("invalid trading record for " + record.ticker + " on " +
                        record.trade_date.to_string());
      }
      auto key = std::make_pair(record.ticker, record.trade_date);
      switch (classify_record(record)) {
        case LabelKind::Overweight: store.labels_[key] = Decision::Overweight; break;
        case LabelKind::Underweight: store.labels_[key] = Decision::Underweight; break;
        case LabelKind::Neutral: store.labels_[key] = Decision::Neutral; break;
        case LabelKind::Ambiguous:
          ++store.ambiguous_;
          break;  // excluded, but counted for the coverage report
      }
    }
    return store;
  }

  std::optional<Decision> find(const std::string& ticker, const Date& date) const {
    auto it = labels_.find(std::make_pair(ticker, date));
    if (it == labels_.end()) return std::nullopt;
    return it->second;
  }

  size_t size() const { return labels_.size(); }
  size_t ambiguous_count() const { return ambiguous_; }

 private:
  std::map<std::pair<std::string, Date>, Decision> labels_;
  size_t ambiguous_ = 0;
};

// ---------------------------------------------------------------------------
// Prices and forward moves.
// ---------------------------------------------------------------------------

class PriceTable {
 public:
  static PriceTable build(const std::vector<PricePoint>& points) {
    PriceTable table;
    for (const auto& point : points) {
      if (!point.valid()) {
        throw DataError("non-positive close for " + point.ticker + " on " +
                        point.trade_date.to_string());
      }
      auto [it, inserted] =
          table.closes_.emplace(std::make_pair(point.ticker, point.trade_date), point.close_price);
      if (!inserted) {
        throw DataError("duplicate price row for " + point.ticker + " on " +
                        point.trade_date.to_string());
      }
    }
    return table;
  }

  std::optional<double> close(const std::string& ticker, const Date& date) const {
    auto it = closes_.find(std::make_pair(ticker, date));
    if (it == closes_.end()) return std::nullopt;
    return it->second;
  }

  size_t size() const { return closes_.size(); }

 private:
  std::map<std::pair<std::string, Date>, double> closes_;
};

enum class PriceDirection { Up, Down, Flat };

inline const char* to_string(PriceDirection d) {
  switch (d) {
    case PriceDirection::Up: return "up";
    case PriceDirection::Down: return "down";
    case PriceDirection::Flat: return "flat";
  }
  return "?";
}

// Direction of the close T trading days after t relative to the close at t.
// Missing either close excludes the item (reported, never guessed).
inline std::optional<PriceDirection> forward_move(const PriceTable& prices, const std::string& ticker,
                                                  const Date& t, int horizon,
                                                  const TradingCalendar& calendar) {
  auto base = prices.close(ticker, t);
  if (!base) return std::nullopt;
  Date target;
  try {
    target = calendar.next(t, horizon);
  } catch (const CalendarExhausted&) {
    return std::nullopt;
  }
  auto later = prices.close(ticker, target);
  if (!later) return std::nullopt;
  if (*later > *base) return PriceDirection::Up;
  if (*later < *base) return PriceDirection::Down;
  return PriceDirection::Flat;
}

// ---------------------------------------------------------------------------
// Article alignment. Agent decisions are compared against the institution
// label of the trading day after the article's effective date. News published
// on a non-trading day keeps that day as its effective date; its next trading
// day is simply further away. The NextTradingDay policy shifts the effective
// date itself for corpora where publication timestamps are known to be after
// the close.
// ---------------------------------------------------------------------------

enum class EffectiveDatePolicy { SameDay, NextTradingDay };

inline const char* to_string(EffectiveDatePolicy p) {
  return p == EffectiveDatePolicy::SameDay ? "same_day" : "next_trading_day";
}

inline EffectiveDatePolicy effective_date_policy_from_string(std::string_view s) {
  if (s == "same_day") return EffectiveDatePolicy::SameDay;
  if (s == "next_trading_day") return EffectiveDatePolicy::NextTradingDay;
  throw DataError("unknown effective date policy: '" + std::string(s) + "'");
}

inline std::optional<Date> effective_date(const NewsArticle& article, const TradingCalendar& calendar,
                                          EffectiveDatePolicy policy) {
  if (policy == EffectiveDatePolicy::SameDay) return article.published_at;
  try {
    return calendar.next(article.published_at, 1);
  } catch (const CalendarExhausted&) {
    return std::nullopt;
  }
}

// Institution label an agent decision on this article is compared against;
// empty when the calendar or the label table runs out (a coverage exclusion).
inline std::optional<Decision> align_article(const NewsArticle& article, const LabelStore& labels,
                                             const TradingCalendar& calendar,
                                             EffectiveDatePolicy policy = EffectiveDatePolicy::SameDay) {
  auto base = effective_date(article, calendar, policy);
  if (!base) return std::nullopt;
  Date label_date;
  try {
    label_date = calendar.next(*base, 1);
  } catch (const CalendarExhausted&) {
    return std::nullopt;
  }
  return labels.find(article.ticker, label_date);
}

// ---------------------------------------------------------------------------
// File ingestion. News arrives as line-delimited JSON records; trading
// records and prices as comma-separated tables with a fixed header; the
// calendar as one ISO date per line.
// ---------------------------------------------------------------------------

namespace ingest {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream stream(line);
  while (std::getline(stream, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

inline std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

}  // namespace ingest

// Required fields: date, ticker, title, content, source. An optional "id"
// field overrides the generated line-based article id.
inline std::vector<NewsArticle> load_news(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open news corpus: " + path.string());
  std::vector<NewsArticle> articles;
  std::set<std::string> seen_ids;
  std::string line;
  long long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = ingest::strip_cr(line);
    if (line.empty()) continue;
    nlohmann::json row;
    try {
      row = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": invalid JSON: " + e.what());
    }
    auto require = [&](const char* field) -> std::string {
      if (!row.contains(field) || !row[field].is_string()) {
        throw DataError(path.string() + ":" + std::to_string(line_no) + ": missing field '" +
                        field + "'");
      }
      return row[field].get<std::string>();
    };
    NewsArticle article;
    article.article_id = row.contains("id") ? row["id"].get<std::string>()
                                            : "line-" + std::to_string(line_no);
    article.ticker = require("ticker");
    article.published_at = Date::parse(require("date"));
    article.title = require("title");
    article.content = require("content");
    article.source = require("source");
    if (article.ticker.empty()) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": empty ticker");
    }
    if (!seen_ids.insert(article.article_id).second) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": duplicate article id '" +
                      article.article_id + "'");
    }
    articles.push_back(std::move(article));
  }
  return articles;
}

// Header: ticker,date,buy_volume,sell_volume,institution_count
inline std::vector<TradingRecord> load_trading_records(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open trading records: " + path.string());
  std::string line;
  if (!std::getline(in, line) ||
      ingest::strip_cr(line) != "ticker,date,buy_volume,sell_volume,institution_count") {
    throw SchemaMismatch("unexpected trading record header in " + path.string());
  }
  std::vector<TradingRecord> records;
  std::set<std::pair<std::string, Date>> seen;
  long long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = ingest::strip_cr(line);
    if (line.empty()) continue;
    auto fields = ingest::split_csv_line(line);
    if (fields.size() != 5) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected 5 fields");
    }
    TradingRecord record;
    record.ticker = fields[0];
    record.trade_date = Date::parse(fields[1]);
    try {
      record.total_buy_volume = std::stoll(fields[2]);
      record.total_sell_volume = std::stoll(fields[3]);
      record.institution_count = std::stoll(fields[4]);
    } catch (const std::exception&) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": non-numeric volume field");
    }
    if (!record.valid()) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": inconsistent record");
    }
    if (!seen.insert({record.ticker, record.trade_date}).second) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": duplicate (ticker,date)");
    }
    records.push_back(std::move(record));
  }
  return records;
}

// Header: ticker,date,close
inline std::vector<PricePoint> load_prices(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open price table: " + path.string());
  std::string line;
  if (!std::getline(in, line) || ingest::strip_cr(line) != "ticker,date,close") {
    throw SchemaMismatch("unexpected price table header in " + path.string());
  }
  std::vector<PricePoint> points;
  long long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = ingest::strip_cr(line);
    if (line.empty()) continue;
    auto fields = ingest::split_csv_line(line);
    if (fields.size() != 3) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected 3 fields");
    }
    PricePoint point;
    point.ticker = fields[0];
    point.trade_date = Date::parse(fields[1]);
    try {
      point.close_price = std::stod(fields[2]);
    } catch (const std::exception&) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": non-numeric close");
    }
    if (!point.valid()) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": non-positive close");
    }
    points.push_back(std::move(point));
  }
  return points;
}

// One ISO date per line, strictly increasing.
inline TradingCalendar load_calendar(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open calendar: " + path.string());
  std::vector<Date> days;
  std::string line;
  while (std::getline(in, line)) {
    line = ingest::strip_cr(line);
    if (line.empty()) continue;
    days.push_back(Date::parse(line));
  }
  return TradingCalendar(std::move(days));
}

}  // namespace desksim
