#pragma once

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "desksim/agents.hpp"
#include "desksim/domain.hpp"
#include "desksim/errors.hpp"

namespace desksim {

// One strategy's final decision for one article, with full provenance. The
// final decision is always derived from the composition rules below; the
// head trader filters suggestions but can never introduce a position no
// trader proposed.
struct PipelineOutcome {
  std::string article_id;
  StrategyKind strategy = StrategyKind::SingleTrader;
  std::string head_backend;  // which backend led, names the HOm variant
  PromptVariant variant;

  std::optional<Decision> final;  // empty => article skipped
  std::string skip_reason;        // "<error code>: <message>" when skipped

  std::optional<AnalystReport> analyst;
  std::vector<TraderSuggestion> traders;
  std::optional<HeadTraderVerdict> head;

  std::vector<TranscriptRecord> transcript;  // in-memory; persisted separately
  std::vector<long long> transcript_refs;    // ids assigned by the log writer

  bool skipped() const { return !final.has_value(); }
};

struct PipelineBackends {
  std::string analyst;
  std::string trader;
  std::string trader_b;  // HOm only; must differ from trader
  std::string head;
};

namespace detail {

inline void mark_skipped(PipelineOutcome& outcome, const Error& cause) {
  outcome.final.reset();
  outcome.skip_reason = std::string(cause.code()) + ": " + cause.what();
}

// Single-suggestion approval: Follow keeps the trader's decision, NotFollow
// shrinks it to Neutral.
inline Decision apply_single_verdict(const HeadTraderVerdict& verdict, const TraderSuggestion& s) {
  switch (verdict.verdict) {
    case HeadVerdictKind::Follow: return action_to_decision(s.action);
    case HeadVerdictKind::NotFollow: return Decision::Neutral;
    default: throw Error("dual-context verdict in single-suggestion pipeline");
  }
}

}  // namespace detail

inline PipelineOutcome run_single_trader(PipelineEnv& env, const NewsArticle& article,
                                         const PromptVariant& variant,
                                         const PipelineBackends& backends) {
  PipelineOutcome outcome;
  outcome.article_id = article.article_id;
  outcome.strategy = StrategyKind::SingleTrader;
  outcome.variant = variant;
  try {
    TraderSuggestion s = run_trader(env, outcome.transcript, article, std::nullopt,
                                    TraderInput::NewsOnly, variant, backends.trader);
    outcome.final = action_to_decision(s.action);
    outcome.traders.push_back(std::move(s));
  } catch (const Error& e) {
    detail::mark_skipped(outcome, e);
  }
  return outcome;
}

inline PipelineOutcome run_cot(PipelineEnv& env, const NewsArticle& article,
                               const PromptVariant& variant, const PipelineBackends& backends,
                               TraderInput trader_input = TraderInput::NewsAndAnalysis) {
  PipelineOutcome outcome;
  outcome.article_id = article.article_id;
  outcome.strategy = StrategyKind::CoT;
  outcome.variant = variant;
  try {
    AnalystReport report = run_analyst(env, outcome.transcript, article, backends.analyst);
    outcome.analyst = report;
    TraderSuggestion s = run_trader(env, outcome.transcript, article, report, trader_input, variant,
                                    backends.trader);
    outcome.final = action_to_decision(s.action);
    outcome.traders.push_back(std::move(s));
  } catch (const Error& e) {
    detail::mark_skipped(outcome, e);
  }
  return outcome;
}

// Analyst -> trader -> head trader. A Neither suggestion never reaches the
// head trader: the outcome is Neutral with no approval call.
inline PipelineOutcome run_ho(PipelineEnv& env, const NewsArticle& article,
                              const PromptVariant& variant, const PipelineBackends& backends,
                              TraderInput trader_input = TraderInput::NewsAndAnalysis) {
  PipelineOutcome outcome;
  outcome.article_id = article.article_id;
  outcome.strategy = StrategyKind::HO;
  outcome.variant = variant;
  try {
    AnalystReport report = run_analyst(env, outcome.transcript, article, backends.analyst);
    outcome.analyst = report;
    TraderSuggestion s = run_trader(env, outcome.transcript, article, report, trader_input, variant,
                                    backends.trader);
    outcome.traders.push_back(s);
    if (s.action == AgentAction::Neither) {
      outcome.final = Decision::Neutral;
      return outcome;
    }
    std::array<TraderSuggestion, 1> suggestions{s};
    HeadTraderVerdict verdict = run_head_trader(env, outcome.transcript, article, report,
                                                suggestions, variant, backends.head);
    outcome.final = detail::apply_single_verdict(verdict, s);
    outcome.head = std::move(verdict);
  } catch (const Error& e) {
    detail::mark_skipped(outcome, e);
  }
  return outcome;
}

// Two traders on distinct backends feed one head trader. With one actionable
// suggestion the approval degenerates to the single-suggestion form; with two
// the head trader picks one or neither.
inline PipelineOutcome run_hom(PipelineEnv& env, const NewsArticle& article,
                               const PromptVariant& variant, const PipelineBackends& backends,
                               TraderInput trader_input = TraderInput::NewsAndAnalysis) {
  if (backends.trader == backends.trader_b) {
    throw ConfigError("hom requires two distinct trader backends");
  }
  PipelineOutcome outcome;
  outcome.article_id = article.article_id;
  outcome.strategy = StrategyKind::HOm;
  outcome.head_backend = backends.head;
  outcome.variant = variant;
  try {
    AnalystReport report = run_analyst(env, outcome.transcript, article, backends.analyst);
    outcome.analyst = report;
    TraderSuggestion a = run_trader(env, outcome.transcript, article, report, trader_input, variant,
                                    backends.trader);
    TraderSuggestion b = run_trader(env, outcome.transcript, article, report, trader_input, variant,
                                    backends.trader_b);
    outcome.traders = {a, b};

    const bool a_actionable = a.action != AgentAction::Neither;
    const bool b_actionable = b.action != AgentAction::Neither;
    if (!a_actionable && !b_actionable) {
      outcome.final = Decision::Neutral;
      return outcome;
    }
    if (a_actionable != b_actionable) {
      const TraderSuggestion& active = a_actionable ? a : b;
      std::array<TraderSuggestion, 1> suggestions{active};
      HeadTraderVerdict verdict = run_head_trader(env, outcome.transcript, article, report,
                                                  suggestions, variant, backends.head);
      outcome.final = detail::apply_single_verdict(verdict, active);
      outcome.head = std::move(verdict);
      return outcome;
    }

    std::array<TraderSuggestion, 2> suggestions{a, b};
    HeadTraderVerdict verdict = run_head_trader(env, outcome.transcript, article, report,
                                                suggestions, variant, backends.head);
    switch (verdict.verdict) {
      case HeadVerdictKind::FollowTraderA: outcome.final = action_to_decision(a.action); break;
      case HeadVerdictKind::FollowTraderB: outcome.final = action_to_decision(b.action); break;
      case HeadVerdictKind::NotFollow: outcome.final = Decision::Neutral; break;
      case HeadVerdictKind::Follow:
        throw Error("single-context verdict in dual-suggestion pipeline");
    }
    outcome.head = std::move(verdict);
  } catch (const Error& e) {
    detail::mark_skipped(outcome, e);
  }
  return outcome;
}

// Dispatch for configured strategy entries.
struct PipelineSpec {
  StrategyKind kind = StrategyKind::SingleTrader;
  PromptVariant variant;
  PipelineBackends backends;
  TraderInput trader_input = TraderInput::NewsAndAnalysis;
};

inline PipelineOutcome run_pipeline(PipelineEnv& env, const NewsArticle& article,
                                    const PipelineSpec& spec) {
  switch (spec.kind) {
    case StrategyKind::SingleTrader:
      return run_single_trader(env, article, spec.variant, spec.backends);
    case StrategyKind::CoT:
      return run_cot(env, article, spec.variant, spec.backends, spec.trader_input);
    case StrategyKind::HO:
      return run_ho(env, article, spec.variant, spec.backends, spec.trader_input);
    case StrategyKind::HOm:
      return run_hom(env, article, spec.variant, spec.backends, spec.trader_input);
  }
  throw Error("unreachable: bad StrategyKind");
}

}  // namespace desksim
