#include <doctest.h>

#include <algorithm>
#include <random>

#include "desksim/metrics.hpp"
#include "desksim/reports.hpp"
#include "support.hpp"

using namespace desksim;

TEST_CASE("decision stats proportions") {
  std::vector<Decision> log;
  log.insert(log.end(), 1986, Decision::Overweight);
  log.insert(log.end(), 7027, Decision::Neutral);
  log.insert(log.end(), 987, Decision::Underweight);
  auto stats = decision_stats(log);
  CHECK(stats.p_overweight() == doctest::Approx(0.1986).epsilon(1e-12));
  CHECK(stats.p_neutral() == doctest::Approx(0.7027).epsilon(1e-12));
  CHECK(stats.p_underweight() == doctest::Approx(0.0987).epsilon(1e-12));
  CHECK(stats.p_overweight() + stats.p_neutral() + stats.p_underweight() ==
        doctest::Approx(1.0).epsilon(1e-9));

  std::vector<Decision> all_neutral(10, Decision::Neutral);
  auto neutral_stats = decision_stats(all_neutral);
  CHECK(neutral_stats.p_neutral() == 1.0);
  CHECK(neutral_stats.p_overweight() == 0.0);

  CHECK_THROWS_AS(decision_stats(std::vector<Decision>{}), EmptyInput);
}

TEST_CASE("consistency with a single class") {
  std::vector<AgentInstitutionPair> pairs;
  for (int i = 0; i < 100; ++i) {
    pairs.push_back({Decision::Overweight,
                     i < 45 ? Decision::Overweight : Decision::Underweight});
  }
  auto report = consistency(pairs);
  CHECK(report.overall.num == 45);
  CHECK(report.overall.den == 100);
  CHECK(report.overweight.value() == doctest::Approx(0.45));
  CHECK_FALSE(report.underweight.value().has_value());
  CHECK(report.underweight.den == 0);
}

TEST_CASE("consistency matches the brute-force oracle on random logs") {
  std::mt19937 rng(17);
  std::uniform_int_distribution<int> size_dist(1, 200);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<AgentInstitutionPair> pairs;
    const int n = size_dist(rng);
    pairs.reserve(n);
    for (int i = 0; i < n; ++i) {
      pairs.push_back({testsupport::random_decision(rng), testsupport::random_decision(rng)});
    }
    auto report = consistency(pairs);
    auto oracle = testsupport::brute_force_consistency(pairs);
    REQUIRE(report.overweight.num == oracle.match_over);
    REQUIRE(report.overweight.den == oracle.agent_over);
    REQUIRE(report.underweight.num == oracle.match_under);
    REQUIRE(report.underweight.den == oracle.agent_under);
    REQUIRE(report.overall.num == oracle.match_over + oracle.match_under);
    REQUIRE(report.overall.den == oracle.agent_over + oracle.agent_under);
  }
}

TEST_CASE("neutral agent decisions never change consistency ratios") {
  std::mt19937 rng(23);
  std::vector<AgentInstitutionPair> pairs;
  for (int i = 0; i < 150; ++i) {
    pairs.push_back({testsupport::random_decision(rng), testsupport::random_decision(rng)});
  }
  auto before = consistency(pairs);
  for (int i = 0; i < 50; ++i) {
    pairs.push_back({Decision::Neutral, testsupport::random_decision(rng)});
  }
  auto after = consistency(pairs);
  CHECK(before.overall == after.overall);
  CHECK(before.overweight == after.overweight);
  CHECK(before.underweight == after.underweight);
}

TEST_CASE("consistency is permutation invariant and decomposes exactly") {
  std::mt19937 rng(29);
  std::vector<AgentInstitutionPair> pairs;
  for (int i = 0; i < 500; ++i) {
    pairs.push_back({testsupport::random_decision(rng), testsupport::random_decision(rng)});
  }
  auto report = consistency(pairs);
  std::shuffle(pairs.begin(), pairs.end(), rng);
  auto shuffled = consistency(pairs);
  CHECK(report.overall == shuffled.overall);
  CHECK(report.overweight == shuffled.overweight);
  CHECK(report.underweight == shuffled.underweight);
  // overall is the denominator-weighted mean of the class ratios
  CHECK(report.overall.num == report.overweight.num + report.underweight.num);
  CHECK(report.overall.den == report.overweight.den + report.underweight.den);
}

TEST_CASE("cross tab of identical logs is diagonal") {
  std::vector<PipelineOutcome> log;
  log.push_back(testsupport::make_outcome("a1", Decision::Overweight));
  log.push_back(testsupport::make_outcome("a2", Decision::Neutral));
  log.push_back(testsupport::make_outcome("a3", Decision::Underweight));
  auto pairs = pair_outcomes_by_article(log, log);
  auto tab = cross_tab(pairs);
  CHECK(tab.total == 3);
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      CHECK(tab.counts[r][c] == (r == c ? 1 : 0));
    }
  }
}

TEST_CASE("cross tab skips articles skipped in either log and detects disjoint logs") {
  std::vector<PipelineOutcome> first = {testsupport::make_outcome("a1", Decision::Overweight),
                                        testsupport::make_skipped("a2"),
                                        testsupport::make_outcome("a3", Decision::Neutral)};
  std::vector<PipelineOutcome> second = {testsupport::make_outcome("a1", Decision::Overweight),
                                         testsupport::make_outcome("a2", Decision::Neutral),
                                         testsupport::make_skipped("a3")};
  auto pairs = pair_outcomes_by_article(first, second);
  CHECK(pairs.size() == 1);

  std::vector<PipelineOutcome> unrelated = {testsupport::make_outcome("zz", Decision::Neutral)};
  CHECK_THROWS_AS(pair_outcomes_by_article(first, unrelated), DisjointLogs);
}

TEST_CASE("cross tab marginals equal per-log decision stats on the shared set") {
  std::mt19937 rng(31);
  std::vector<PipelineOutcome> first, second;
  for (int i = 0; i < 400; ++i) {
    const std::string id = "a" + std::to_string(i);
    first.push_back(testsupport::make_outcome(id, testsupport::random_decision(rng)));
    second.push_back(testsupport::make_outcome(id, testsupport::random_decision(rng)));
  }
  auto pairs = pair_outcomes_by_article(first, second);
  auto tab = cross_tab(pairs);

  std::vector<Decision> first_decisions, second_decisions;
  for (const auto& [a, b] : pairs) {
    first_decisions.push_back(a);
    second_decisions.push_back(b);
  }
  auto first_stats = decision_stats(first_decisions);
  auto second_stats = decision_stats(second_decisions);
  CHECK(tab.row_count(0) == first_stats.overweight);
  CHECK(tab.row_count(1) == first_stats.neutral);
  CHECK(tab.row_count(2) == first_stats.underweight);
  CHECK(tab.col_count(0) == second_stats.overweight);
  CHECK(tab.col_count(1) == second_stats.neutral);
  CHECK(tab.col_count(2) == second_stats.underweight);
}

TEST_CASE("approval stats count only head invocations") {
  std::vector<PipelineOutcome> log;
  for (int i = 0; i < 10; ++i) {
    auto outcome = testsupport::make_outcome("a" + std::to_string(i), Decision::Overweight,
                                             StrategyKind::HO);
    if (i < 6) {
      HeadTraderVerdict v;
      v.verdict = i < 2 ? HeadVerdictKind::Follow : HeadVerdictKind::NotFollow;
      outcome.head = v;
      if (v.verdict == HeadVerdictKind::NotFollow) outcome.final = Decision::Neutral;
    } else {
      outcome.final = Decision::Neutral;  // trader said neither; no invocation
    }
    log.push_back(std::move(outcome));
  }
  auto stats = approval_stats(log);
  CHECK(stats.invocations == 6);
  CHECK(stats.approvals == 2);
  CHECK(stats.rate().value() == doctest::Approx(2.0 / 6.0));

  std::vector<PipelineOutcome> none;
  auto empty = approval_stats(none);
  CHECK(empty.invocations == 0);
  CHECK_FALSE(empty.rate().value().has_value());
}

TEST_CASE("approval stats split by seniority") {
  std::vector<PipelineOutcome> log;
  for (int i = 0; i < 8; ++i) {
    auto outcome = testsupport::make_outcome("a" + std::to_string(i), Decision::Overweight,
                                             StrategyKind::HO);
    outcome.variant.seniority = i % 2 == 0 ? Seniority::Junior : Seniority::Senior;
    HeadTraderVerdict v;
    v.verdict = (i % 4 == 1 || i % 4 == 3) ? HeadVerdictKind::Follow : HeadVerdictKind::NotFollow;
    outcome.head = v;
    log.push_back(std::move(outcome));
  }
  auto grouped = approval_stats_by_seniority(log);
  CHECK(grouped[Seniority::Junior].invocations == 4);
  CHECK(grouped[Seniority::Junior].approvals == 0);
  CHECK(grouped[Seniority::Senior].invocations == 4);
  CHECK(grouped[Seniority::Senior].approvals == 4);
  // replayed identical suggestions: denominators equal across groups
  CHECK(grouped[Seniority::Junior].invocations == grouped[Seniority::Senior].invocations);
}

TEST_CASE("market consistency on a one-element log") {
  auto calendar = testsupport::weekday_calendar();
  auto prices = PriceTable::build({{"2330", {2019, 3, 4}, 100.0}, {"2330", {2019, 3, 5}, 101.0}});
  std::vector<MarketItem> items = {{"2330", {2019, 3, 4}, Decision::Overweight}};
  auto mc = market_consistency(items, prices, calendar, {1});
  REQUIRE(mc.horizons == std::vector<int>{1});
  CHECK(mc.overweight[0].num == 1);
  CHECK(mc.overweight[0].den == 1);
  CHECK(mc.underweight[0].den == 0);
  CHECK(mc.missing_price[0] == 0);
}

TEST_CASE("flat forward moves are unaligned for both classes") {
  auto calendar = testsupport::weekday_calendar();
  auto prices = PriceTable::build({{"2330", {2019, 3, 4}, 100.0}, {"2330", {2019, 3, 5}, 100.0}});
  std::vector<MarketItem> items = {{"2330", {2019, 3, 4}, Decision::Overweight},
                                   {"2330", {2019, 3, 4}, Decision::Underweight}};
  auto mc = market_consistency(items, prices, calendar, {1});
  CHECK(mc.overweight[0].num == 0);
  CHECK(mc.overweight[0].den == 1);
  CHECK(mc.underweight[0].num == 0);
  CHECK(mc.underweight[0].den == 1);
}

TEST_CASE("market consistency reproduces a tuned alignment share") {
  // 2000 overweight decisions, 1211 above a rising close: 60.55% aligned.
  auto calendar = TradingCalendar({{2019, 3, 4}, {2019, 3, 5}});
  std::vector<PricePoint> points;
  std::vector<MarketItem> items;
  for (int i = 0; i < 2000; ++i) {
    const std::string ticker = "t" + std::to_string(i);
    points.push_back({ticker, {2019, 3, 4}, 100.0});
    points.push_back({ticker, {2019, 3, 5}, i < 1211 ? 101.0 : 99.0});
    items.push_back({ticker, {2019, 3, 4}, Decision::Overweight});
  }
  auto prices = PriceTable::build(points);
  auto mc = market_consistency(items, prices, calendar, {1});
  CHECK(mc.overweight[0].num == 1211);
  CHECK(mc.overweight[0].den == 2000);
  CHECK(*mc.overweight[0].value() == doctest::Approx(0.6055).epsilon(1e-12));
}

TEST_CASE("undefined ratios format as a dash with counts") {
  CHECK(fmt::ratio({0, 0}) == "— (0/0)");
  CHECK(fmt::ratio({45, 100}) == "45.00% (45/100)");
  CHECK(fmt::percent(0.4477) == "44.77%");
}
