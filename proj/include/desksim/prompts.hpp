#pragma once

#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "desksim/domain.hpp"
#include "desksim/errors.hpp"
#include "desksim/sha256.hpp"
#include "desksim/version.hpp"

namespace desksim {

// Prompt bodies live in text assets under a prompts directory, one file per
// role plus a manifest naming each template's slots and variant axes. The
// engine never composes prompt wording in code; it only substitutes the two
// controlled variant spans and interpolates slots.

enum class PromptRole {
  Analyst,
  TraderFromNews,
  TraderFromAnalysis,
  TraderFromBoth,
  HeadTrader,
  HeadTraderDual,
};

inline const char* to_string(PromptRole role) {
  switch (role) {
    case PromptRole::Analyst: return "analyst";
    case PromptRole::TraderFromNews: return "trader_news";
    case PromptRole::TraderFromAnalysis: return "trader_analysis";
    case PromptRole::TraderFromBoth: return "trader_news_analysis";
    case PromptRole::HeadTrader: return "head_trader";
    case PromptRole::HeadTraderDual: return "head_trader_dual";
  }
  return "?";
}

// Slot vocabulary. The dual head-trader template labels its two suggestions
// with dedicated slots; everything else uses the original five.
namespace slots {
inline constexpr const char* kCompany = "Company";
inline constexpr const char* kNewsTitle = "News Title";
inline constexpr const char* kNewsContent = "News Content";
inline constexpr const char* kAnalysis = "Analyst's Analysis";
inline constexpr const char* kSuggestion = "Trader's suggestion";
inline constexpr const char* kSuggestionA = "Trader A's suggestion";
inline constexpr const char* kSuggestionB = "Trader B's suggestion";
}  // namespace slots

inline const std::set<std::string>& known_slots() {
  static const std::set<std::string> kKnown = {
      slots::kCompany,     slots::kNewsTitle,   slots::kNewsContent, slots::kAnalysis,
      slots::kSuggestion,  slots::kSuggestionA, slots::kSuggestionB};
  return kKnown;
}

// The two controlled substitution spans. The short-term objective sentence is
// the baseline text inside the trader template; the long-term sentence
// replaces it verbatim. The seniority axis swaps the word junior/senior.
inline constexpr std::string_view kShortTermObjective =
    "Our objective is to capitalize on potential market movements within the upcoming week. To aid "
    "our decision, it's vital to gauge whether the recent news will significantly influence investor "
    "views and cause short-term price fluctuations.";
inline constexpr std::string_view kLongTermObjective =
    "Our strategy is to hold the position for a year, considering long-term effects and potential "
    "price movements.";

struct PromptVariant {
  Horizon horizon = Horizon::ShortTerm;
  Seniority seniority = Seniority::Junior;

  bool operator==(const PromptVariant&) const = default;
};

struct PromptTemplate {
  PromptRole role = PromptRole::Analyst;
  std::string body;                // baseline text: short-term objective, junior wording
  std::set<std::string> slots;     // placeholders the body may reference
  bool horizon_axis = false;       // objective sentence swaps under LongTerm
  bool seniority_axis = false;     // junior/senior word swaps under Senior
};

using Bindings = std::map<std::string, std::string>;

namespace detail {

inline size_t count_occurrences(std::string_view text, std::string_view needle) {
  size_t count = 0;
  for (size_t pos = text.find(needle); pos != std::string_view::npos;
       pos = text.find(needle, pos + needle.size()))
    ++count;
  return count;
}

inline std::string replace_all(std::string text, std::string_view from, std::string_view to) {
  std::string out;
  out.reserve(text.size());
  size_t pos = 0;
  for (size_t hit = text.find(from); hit != std::string::npos; hit = text.find(from, pos)) {
    out.append(text, pos, hit - pos);
    out.append(to);
    pos = hit + from.size();
  }
  out.append(text, pos, std::string::npos);
  return out;
}

// Whole-word, case-preserving swap of the seniority word: junior -> senior,
// Junior -> Senior.
inline std::string swap_seniority_word(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  size_t i = 0;
  auto is_word = [](unsigned char c) { return std::isalpha(c) != 0; };
  while (i < text.size()) {
    bool boundary_before = i == 0 || !is_word(static_cast<unsigned char>(text[i - 1]));
    if (boundary_before && i + 6 <= text.size()) {
      std::string_view word(text.data() + i, 6);
      bool boundary_after = i + 6 == text.size() || !is_word(static_cast<unsigned char>(text[i + 6]));
      if (boundary_after && (word == "junior" || word == "Junior")) {
        out.append(word == "junior" ? "senior" : "Senior");
        i += 6;
        continue;
      }
    }
    out.push_back(text[i]);
    ++i;
  }
  return out;
}

}  // namespace detail

// Variant substitutions first, then slot interpolation. Bound text is copied
// verbatim and never re-scanned, so news content containing braces or the
// seniority word cannot alter the template.
inline std::string render(const PromptTemplate& tpl, const PromptVariant& variant,
                          const Bindings& bindings) {
  std::string body = tpl.body;
  if (tpl.horizon_axis && variant.horizon == Horizon::LongTerm) {
    body = detail::replace_all(std::move(body), kShortTermObjective, kLongTermObjective);
  }
  if (tpl.seniority_axis && variant.seniority == Seniority::Senior) {
    body = detail::swap_seniority_word(body);
  }

  std::string out;
  out.reserve(body.size() + 256);
  size_t pos = 0;
  while (pos < body.size()) {
    size_t open = body.find('{', pos);
    if (open == std::string::npos) {
      out.append(body, pos, std::string::npos);
      break;
    }
    out.append(body, pos, open - pos);
    size_t close = body.find('}', open + 1);
    if (close == std::string::npos) throw MissingSlot("unterminated placeholder in " + std::string(to_string(tpl.role)));
    std::string name = body.substr(open + 1, close - open - 1);
    auto bound = bindings.find(name);
    if (bound == bindings.end() || bound->second.empty()) {
      throw MissingSlot("slot '" + name + "' is unbound for template " + to_string(tpl.role));
    }
    out.append(bound->second);
    pos = close + 1;
  }
  return out;
}

// Loads and validates the template assets of one prompts directory.
class TemplateSet {
 public:
  static TemplateSet load(const std::filesystem::path& dir) {
    std::ifstream manifest_file(dir / "manifest.json");
    if (!manifest_file) throw ConfigError("cannot open prompt manifest: " + (dir / "manifest.json").string());
    nlohmann::json manifest;
    try {
      manifest_file >> manifest;
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("invalid prompt manifest: ") + e.what());
    }
    if (manifest.value("schema", "") != kPromptManifestSchema) {
      throw ConfigError("prompt manifest has unknown schema tag");
    }

    TemplateSet set;
    Sha256 digest;
    static constexpr PromptRole kRoles[] = {
        PromptRole::Analyst,        PromptRole::TraderFromNews, PromptRole::TraderFromAnalysis,
        PromptRole::TraderFromBoth, PromptRole::HeadTrader,     PromptRole::HeadTraderDual};
    for (PromptRole role : kRoles) {
      const char* name = to_string(role);
      if (!manifest["templates"].contains(name)) {
        throw ConfigError(std::string("prompt manifest is missing template: ") + name);
      }
      const auto& entry = manifest["templates"][name];
      PromptTemplate tpl;
      tpl.role = role;
      for (const auto& slot : entry.at("slots")) {
        std::string s = slot.get<std::string>();
        if (!known_slots().count(s)) throw ConfigError("unknown slot '" + s + "' in template " + name);
        tpl.slots.insert(std::move(s));
      }
      for (const auto& axis : entry.at("variant_axes")) {
        std::string a = axis.get<std::string>();
        if (a == "horizon") tpl.horizon_axis = true;
        else if (a == "seniority") tpl.seniority_axis = true;
        else throw ConfigError("unknown variant axis '" + a + "' in template " + name);
      }
      tpl.body = read_body(dir / entry.at("file").get<std::string>());
      validate(tpl);
      digest.update(name);
      digest.update("\0", 1);
      digest.update(tpl.body);
      digest.update("\0", 1);
      set.templates_.emplace(role, std::move(tpl));
    }
    set.digest_ = Sha256::hex(digest.finish());
    return set;
  }

  const PromptTemplate& for_role(PromptRole role) const {
    auto it = templates_.find(role);
    if (it == templates_.end()) throw ConfigError(std::string("no template loaded for ") + to_string(role));
    return it->second;
  }

  // Content digest over every template body; recorded in run manifests so a
  // report is traceable to the exact prompt wording.
  const std::string& digest() const { return digest_; }

 private:
  static std::string read_body(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw ConfigError("cannot open prompt template: " + file.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    std::string body = buf.str();
    // The trailing newline closing the asset file is not part of the prompt.
    if (!body.empty() && body.back() == '\n') body.pop_back();
    if (!body.empty() && body.back() == '\r') body.pop_back();
    if (body.empty()) throw ConfigError("empty prompt template: " + file.string());
    return body;
  }

  static void validate(const PromptTemplate& tpl) {
    const std::string role = to_string(tpl.role);
    // Every placeholder must name a declared slot.
    size_t pos = 0;
    while (pos < tpl.body.size()) {
      size_t open = tpl.body.find('{', pos);
      if (open == std::string::npos) break;
      size_t close = tpl.body.find('}', open + 1);
      if (close == std::string::npos) throw ConfigError("unterminated placeholder in template " + role);
      std::string name = tpl.body.substr(open + 1, close - open - 1);
      if (!tpl.slots.count(name)) {
        throw ConfigError("template " + role + " references undeclared slot '" + name + "'");
      }
      pos = close + 1;
    }
    if (tpl.horizon_axis && detail::count_occurrences(tpl.body, kShortTermObjective) != 1) {
      throw ConfigError("template " + role + " must contain the objective sentence exactly once");
    }
    if (tpl.seniority_axis) {
      std::string swapped = detail::swap_seniority_word(tpl.body);
      if (swapped == tpl.body) throw ConfigError("template " + role + " has no seniority word to swap");
      auto lowered = [](std::string s) {
        for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        return s;
      };
      if (lowered(swapped).find("junior") != std::string::npos) {
        throw ConfigError("template " + role + " contains a seniority word the swap cannot reach");
      }
    }
  }

  std::map<PromptRole, PromptTemplate> templates_;
  std::string digest_;
};

}  // namespace desksim
