#pragma once

#include <cctype>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "desksim/domain.hpp"
#include "desksim/errors.hpp"
#include "desksim/gateway.hpp"
#include "desksim/prompts.hpp"

namespace desksim {

// ---------------------------------------------------------------------------
// Structured agent outputs
// ---------------------------------------------------------------------------

struct AnalystReport {
  std::string text;
  std::string article_id;
};

struct TraderSuggestion {
  AgentAction action = AgentAction::Neither;
  std::string thoughts;
  std::string backend;
  std::string raw;  // full model output the action was extracted from
};

enum class HeadVerdictKind { Follow, NotFollow, FollowTraderA, FollowTraderB };

inline const char* to_string(HeadVerdictKind v) {
  switch (v) {
    case HeadVerdictKind::Follow: return "follow";
    case HeadVerdictKind::NotFollow: return "not_follow";
    case HeadVerdictKind::FollowTraderA: return "follow_trader_a";
    case HeadVerdictKind::FollowTraderB: return "follow_trader_b";
  }
  return "?";
}

inline HeadVerdictKind head_verdict_from_string(std::string_view s) {
  if (s == "follow") return HeadVerdictKind::Follow;
  if (s == "not_follow") return HeadVerdictKind::NotFollow;
  if (s == "follow_trader_a") return HeadVerdictKind::FollowTraderA;
  if (s == "follow_trader_b") return HeadVerdictKind::FollowTraderB;
  throw DataError("unknown head verdict: '" + std::string(s) + "'");
}

struct HeadTraderVerdict {
  HeadVerdictKind verdict = HeadVerdictKind::NotFollow;
  std::string thoughts;
  std::string backend;
  std::string raw;
};

// Which inputs the trader prompt carries.
enum class TraderInput { NewsOnly, AnalysisOnly, NewsAndAnalysis };

inline const char* to_string(TraderInput t) {
  switch (t) {
    case TraderInput::NewsOnly: return "news_only";
    case TraderInput::AnalysisOnly: return "analysis_only";
    case TraderInput::NewsAndAnalysis: return "news_and_analysis";
  }
  return "?";
}

inline TraderInput trader_input_from_string(std::string_view s) {
  if (s == "news_only") return TraderInput::NewsOnly;
  if (s == "analysis_only") return TraderInput::AnalysisOnly;
  if (s == "news_and_analysis") return TraderInput::NewsAndAnalysis;
  throw DataError("unknown trader input mode: '" + std::string(s) + "'");
}

enum class HeadContext { Single, Dual };

// ---------------------------------------------------------------------------
// Reply grammar. The response templates constrain the vocabulary; parsing
// either recovers a structured value or raises a typed error. Nothing ever
// defaults to Neither/NotFollow.
// ---------------------------------------------------------------------------

namespace reply {

inline char lower(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }

inline bool is_letter(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }

// Case-insensitive search; `needle` must be lowercase.
inline size_t find_ci(std::string_view text, std::string_view needle) {
  if (needle.empty() || text.size() < needle.size()) return std::string_view::npos;
  for (size_t i = 0; i + needle.size() <= text.size(); ++i) {
    size_t j = 0;
    while (j < needle.size() && lower(text[i + j]) == needle[j]) ++j;
    if (j == needle.size()) return i;
  }
  return std::string_view::npos;
}

// Position right after the first "[action]" marker, or npos.
inline size_t after_action_marker(std::string_view raw) {
  size_t pos = find_ci(raw, "[action]");
  return pos == std::string_view::npos ? pos : pos + 8;
}

// Skips separators between the marker and the token: whitespace, colon,
// dash, quotes, brackets, emphasis characters.
inline size_t skip_separators(std::string_view text, size_t pos) {
  while (pos < text.size()) {
    char c = text[pos];
    if (std::isspace(static_cast<unsigned char>(c)) || c == ':' || c == '-' || c == '"' ||
        c == '\'' || c == '`' || c == '*' || c == '(' || c == '[') {
      ++pos;
    } else {
      break;
    }
  }
  return pos;
}

// Matches `word` case-insensitively at `pos` with a word boundary after it.
inline bool match_word(std::string_view text, size_t pos, std::string_view word) {
  if (pos + word.size() > text.size()) return false;
  for (size_t i = 0; i < word.size(); ++i) {
    if (lower(text[pos + i]) != word[i]) return false;
  }
  size_t end = pos + word.size();
  return end == text.size() || !is_letter(text[end]);
}

// One or more gap characters between words of a multi-word token.
inline size_t skip_word_gap(std::string_view text, size_t pos) {
  size_t start = pos;
  while (pos < text.size()) {
    char c = text[pos];
    if (std::isspace(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '"' || c == '\'') {
      ++pos;
    } else {
      break;
    }
  }
  return pos == start ? std::string_view::npos : pos;
}

inline std::string trim(std::string_view text) {
  size_t begin = 0;
  size_t end = text.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(text[begin]))) ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(text[end - 1]))) --end;
  return std::string(text.substr(begin, end - begin));
}

// Text following the first "[thoughts]" marker, empty when absent.
inline std::string extract_thoughts(std::string_view raw) {
  size_t pos = find_ci(raw, "[thoughts]");
  if (pos == std::string_view::npos) return {};
  pos += 10;
  while (pos < raw.size() && (raw[pos] == ':' || raw[pos] == ' ' || raw[pos] == '\t')) ++pos;
  return trim(raw.substr(pos));
}

}  // namespace reply

struct ParsedTraderReply {
  AgentAction action = AgentAction::Neither;
  std::string thoughts;
};

// Extracts the action token following the first "[Action]" marker. Only the
// three template tokens are recognized (case-insensitive, quotes and
// punctuation around the token tolerated); synonyms like "buy" are rejected.
inline ParsedTraderReply parse_trader_reply(std::string_view raw) {
  size_t pos = reply::after_action_marker(raw);
  if (pos == std::string_view::npos) {
    throw UnparsableAction("no [Action] marker in trader reply");
  }
  pos = reply::skip_separators(raw, pos);
  ParsedTraderReply out;
  if (reply::match_word(raw, pos, "long")) {
    out.action = AgentAction::Long;
  } else if (reply::match_word(raw, pos, "short")) {
    out.action = AgentAction::Short;
  } else if (reply::match_word(raw, pos, "neither")) {
    out.action = AgentAction::Neither;
  } else {
    throw UnparsableAction("no recognized action token after [Action] marker");
  }
  out.thoughts = reply::extract_thoughts(raw);
  return out;
}

// Head-trader verdicts. "not follow" is checked before "follow"; the dual
// context additionally requires naming which trader is endorsed.
inline HeadTraderVerdict parse_head_trader_reply(std::string_view raw, HeadContext context) {
  size_t pos = reply::after_action_marker(raw);
  if (pos == std::string_view::npos) {
    throw UnparsableVerdict("no [Action] marker in head trader reply");
  }
  pos = reply::skip_separators(raw, pos);

  HeadTraderVerdict out;
  out.raw = std::string(raw);
  out.thoughts = reply::extract_thoughts(raw);

  if (reply::match_word(raw, pos, "not")) {
    size_t gap = reply::skip_word_gap(raw, pos + 3);
    if (gap != std::string_view::npos && reply::match_word(raw, gap, "follow")) {
      out.verdict = HeadVerdictKind::NotFollow;
      return out;
    }
    throw UnparsableVerdict("unrecognized verdict token after [Action] marker");
  }

  if (!reply::match_word(raw, pos, "follow")) {
    throw UnparsableVerdict("unrecognized verdict token after [Action] marker");
  }

  if (context == HeadContext::Single) {
    out.verdict = HeadVerdictKind::Follow;
    return out;
  }

  // Dual context: "follow trader a" / "follow trader b".
  size_t gap = reply::skip_word_gap(raw, pos + 6);
  if (gap != std::string_view::npos && reply::match_word(raw, gap, "trader")) {
    size_t after = reply::skip_word_gap(raw, gap + 6);
    if (after != std::string_view::npos) {
      if (reply::match_word(raw, after, "a")) {
        out.verdict = HeadVerdictKind::FollowTraderA;
        return out;
      }
      if (reply::match_word(raw, after, "b")) {
        out.verdict = HeadVerdictKind::FollowTraderB;
        return out;
      }
    }
  }
  throw UnparsableVerdict("dual-context follow verdict does not name trader A or B");
}

// Canonical rendering of the trader response template; feeding this through
// parse_trader_reply recovers the same action.
inline std::string format_trader_reply(AgentAction action, const std::string& thoughts) {
  std::string out = std::string("[Action]: ") + to_string(action);
  if (!thoughts.empty()) out += "\n[Thoughts]: " + thoughts;
  return out;
}

inline std::string format_suggestion(const TraderSuggestion& suggestion) {
  return format_trader_reply(suggestion.action, suggestion.thoughts);
}

// ---------------------------------------------------------------------------
// Agent steps: render prompt, call the gateway, parse, record a transcript.
// ---------------------------------------------------------------------------

struct TranscriptRecord {
  std::string role;
  std::string backend;
  std::string prompt;
  std::string raw;
  std::string parsed;  // compact summary of the structured result
};

struct PipelineEnv {
  Gateway& gateway;
  const TemplateSet& templates;
  SamplingParams sampling;
};

namespace detail {

inline std::string call_backend(PipelineEnv& env, std::vector<TranscriptRecord>& transcript,
                                const std::string& role, const std::string& backend,
                                const std::string& prompt) {
  CompletionResponse response = env.gateway.complete({backend, prompt, env.sampling});
  transcript.push_back({role, backend, prompt, response.text, {}});
  return response.text;
}

}  // namespace detail

inline AnalystReport run_analyst(PipelineEnv& env, std::vector<TranscriptRecord>& transcript,
                                 const NewsArticle& article, const std::string& backend) {
  Bindings bindings{{slots::kNewsTitle, article.title}, {slots::kNewsContent, article.content}};
  const std::string prompt =
      render(env.templates.for_role(PromptRole::Analyst), PromptVariant{}, bindings);
  std::string text = detail::call_backend(env, transcript, "analyst", backend, prompt);
  return AnalystReport{std::move(text), article.article_id};
}

inline TraderSuggestion run_trader(PipelineEnv& env, std::vector<TranscriptRecord>& transcript,
                                   const NewsArticle& article,
                                   const std::optional<AnalystReport>& analysis, TraderInput input,
                                   const PromptVariant& variant, const std::string& backend) {
  PromptRole role = PromptRole::TraderFromNews;
  Bindings bindings{{slots::kCompany, article.ticker}};
  switch (input) {
    case TraderInput::NewsOnly:
      bindings[slots::kNewsTitle] = article.title;
      bindings[slots::kNewsContent] = article.content;
      break;
    case TraderInput::AnalysisOnly:
      role = PromptRole::TraderFromAnalysis;
      if (!analysis) throw Error("trader input mode requires an analyst report");
      bindings[slots::kAnalysis] = analysis->text;
      break;
    case TraderInput::NewsAndAnalysis:
      role = PromptRole::TraderFromBoth;
      if (!analysis) throw Error("trader input mode requires an analyst report");
      bindings[slots::kNewsTitle] = article.title;
      bindings[slots::kNewsContent] = article.content;
      bindings[slots::kAnalysis] = analysis->text;
      break;
  }
  const std::string prompt = render(env.templates.for_role(role), variant, bindings);
  std::string raw = detail::call_backend(env, transcript, "trader", backend, prompt);
  ParsedTraderReply parsed = parse_trader_reply(raw);
  transcript.back().parsed = to_string(parsed.action);
  return TraderSuggestion{parsed.action, std::move(parsed.thoughts), backend, std::move(raw)};
}

inline HeadTraderVerdict run_head_trader(PipelineEnv& env, std::vector<TranscriptRecord>& transcript,
                                         const NewsArticle& article, const AnalystReport& analysis,
                                         std::span<const TraderSuggestion> suggestions,
                                         const PromptVariant& variant, const std::string& backend) {
  if (suggestions.empty() || suggestions.size() > 2) {
    throw Error("head trader expects one or two suggestions");
  }
  for (const auto& s : suggestions) {
    if (s.action == AgentAction::Neither) {
      throw Error("head trader invoked with a non-actionable suggestion");
    }
  }

  Bindings bindings{{slots::kCompany, article.ticker},
                    {slots::kNewsTitle, article.title},
                    {slots::kNewsContent, article.content},
                    {slots::kAnalysis, analysis.text}};
  PromptRole role = PromptRole::HeadTrader;
  HeadContext context = HeadContext::Single;
  if (suggestions.size() == 1) {
    bindings[slots::kSuggestion] = format_suggestion(suggestions[0]);
  } else {
    role = PromptRole::HeadTraderDual;
    context = HeadContext::Dual;
    bindings[slots::kSuggestionA] = format_suggestion(suggestions[0]);
    bindings[slots::kSuggestionB] = format_suggestion(suggestions[1]);
  }

  const std::string prompt = render(env.templates.for_role(role), variant, bindings);
  std::string raw = detail::call_backend(env, transcript, "head_trader", backend, prompt);
  HeadTraderVerdict verdict = parse_head_trader_reply(raw, context);
  verdict.backend = backend;
  transcript.back().parsed = to_string(verdict.verdict);
  return verdict;
}

}  // namespace desksim
