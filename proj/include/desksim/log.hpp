#pragma once

#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <zlib.h>

#include "desksim/errors.hpp"
#include "desksim/strategy.hpp"
#include "desksim/version.hpp"

namespace desksim {

// Outcome logs are line-delimited JSON: a header record carrying the schema
// tag and the producing run's config digest, then one record per pipeline
// outcome in corpus order. nlohmann orders object keys, so identical outcomes
// serialize to identical bytes.

inline nlohmann::json outcome_to_json(const PipelineOutcome& outcome) {
  nlohmann::json row;
  row["article_id"] = outcome.article_id;
  row["strategy"] = to_string(outcome.strategy);
  if (!outcome.head_backend.empty()) row["head_backend"] = outcome.head_backend;
  row["variant"] = {{"horizon", to_string(outcome.variant.horizon)},
                    {"seniority", to_string(outcome.variant.seniority)}};
  if (outcome.final) {
    row["final"] = to_string(*outcome.final);
  } else {
    row["final"] = "skipped";
    row["skip_reason"] = outcome.skip_reason;
  }
  if (outcome.analyst) row["analysis"] = outcome.analyst->text;
  if (!outcome.traders.empty()) {
    nlohmann::json traders = nlohmann::json::array();
    for (const auto& t : outcome.traders) {
      traders.push_back({{"action", to_string(t.action)},
                         {"thoughts", t.thoughts},
                         {"backend", t.backend}});
    }
    row["traders"] = std::move(traders);
  }
  if (outcome.head) {
    row["head"] = {{"verdict", to_string(outcome.head->verdict)},
                   {"thoughts", outcome.head->thoughts},
                   {"backend", outcome.head->backend}};
  }
  if (!outcome.transcript_refs.empty()) row["transcript"] = outcome.transcript_refs;
  return row;
}

inline PipelineOutcome outcome_from_json(const nlohmann::json& row) {
  PipelineOutcome outcome;
  outcome.article_id = row.at("article_id").get<std::string>();
  outcome.strategy = strategy_from_string(row.at("strategy").get<std::string>());
  outcome.head_backend = row.value("head_backend", "");
  outcome.variant.horizon = horizon_from_string(row.at("variant").at("horizon").get<std::string>());
  outcome.variant.seniority =
      seniority_from_string(row.at("variant").at("seniority").get<std::string>());
  const std::string final = row.at("final").get<std::string>();
  if (final == "skipped") {
    outcome.skip_reason = row.value("skip_reason", "");
  } else {
    outcome.final = decision_from_string(final);
  }
  if (row.contains("analysis")) {
    outcome.analyst = AnalystReport{row["analysis"].get<std::string>(), outcome.article_id};
  }
  if (row.contains("traders")) {
    for (const auto& t : row["traders"]) {
      TraderSuggestion s;
      s.action = action_from_string(t.at("action").get<std::string>());
      s.thoughts = t.value("thoughts", "");
      s.backend = t.value("backend", "");
      outcome.traders.push_back(std::move(s));
    }
  }
  if (row.contains("head")) {
    HeadTraderVerdict v;
    v.verdict = head_verdict_from_string(row["head"].at("verdict").get<std::string>());
    v.thoughts = row["head"].value("thoughts", "");
    v.backend = row["head"].value("backend", "");
    outcome.head = std::move(v);
  }
  if (row.contains("transcript")) {
    outcome.transcript_refs = row["transcript"].get<std::vector<long long>>();
  }
  return outcome;
}

inline void write_outcome_log(const std::filesystem::path& path,
                              std::span<const PipelineOutcome> outcomes,
                              const std::string& run_digest) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write outcome log: " + path.string());
  nlohmann::json header = {{"schema", kOutcomeSchema}, {"run", run_digest}};
  out << header.dump() << "\n";
  for (const auto& outcome : outcomes) {
    out << outcome_to_json(outcome).dump() << "\n";
  }
}

struct OutcomeLog {
  std::string run_digest;
  std::vector<PipelineOutcome> outcomes;
};

inline OutcomeLog read_outcome_log(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open outcome log: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw SchemaMismatch("outcome log is empty: " + path.string());
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception&) {
    throw SchemaMismatch("outcome log has no header record: " + path.string());
  }
  if (header.value("schema", "") != kOutcomeSchema) {
    throw SchemaMismatch("unsupported outcome log schema in " + path.string());
  }
  OutcomeLog log;
  log.run_digest = header.value("run", "");
  long long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      log.outcomes.push_back(outcome_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": bad outcome record: " +
                      e.what());
    }
  }
  return log;
}

// ---------------------------------------------------------------------------
// Transcripts: every (prompt, raw reply, parsed summary) triple, one gzipped
// JSONL file per run. Records are numbered in log order; outcome records
// point back via those ids.
// ---------------------------------------------------------------------------

class TranscriptWriter {
 public:
  explicit TranscriptWriter(const std::filesystem::path& path) {
    file_ = gzopen(path.string().c_str(), "wb");
    if (file_ == nullptr) throw DataError("cannot write transcripts: " + path.string());
    nlohmann::json header = {{"schema", kTranscriptSchema}};
    write_line(header.dump());
  }

  TranscriptWriter(const TranscriptWriter&) = delete;
  TranscriptWriter& operator=(const TranscriptWriter&) = delete;

  ~TranscriptWriter() { close(); }

  long long append(const TranscriptRecord& record) {
    nlohmann::json row = {{"id", next_id_},       {"role", record.role},
                          {"backend", record.backend}, {"prompt", record.prompt},
                          {"raw", record.raw},    {"parsed", record.parsed}};
    write_line(row.dump());
    return next_id_++;
  }

  void close() {
    if (file_ != nullptr) {
      gzclose(file_);
      file_ = nullptr;
    }
  }

 private:
  void write_line(const std::string& line) {
    gzwrite(file_, line.data(), static_cast<unsigned>(line.size()));
    gzwrite(file_, "\n", 1);
  }

  gzFile file_ = nullptr;
  long long next_id_ = 0;
};

inline std::vector<TranscriptRecord> read_transcripts(const std::filesystem::path& path) {
  gzFile file = gzopen(path.string().c_str(), "rb");
  if (file == nullptr) throw DataError("cannot open transcripts: " + path.string());
  std::string buffer;
  char chunk[1 << 15];
  int got = 0;
  while ((got = gzread(file, chunk, sizeof(chunk))) > 0) buffer.append(chunk, static_cast<size_t>(got));
  gzclose(file);

  std::vector<TranscriptRecord> records;
  size_t pos = 0;
  bool saw_header = false;
  while (pos < buffer.size()) {
    size_t end = buffer.find('\n', pos);
    if (end == std::string::npos) end = buffer.size();
    std::string line = buffer.substr(pos, end - pos);
    pos = end + 1;
    if (line.empty()) continue;
    nlohmann::json row = nlohmann::json::parse(line);
    if (!saw_header) {
      if (row.value("schema", "") != kTranscriptSchema) {
        throw SchemaMismatch("unsupported transcript schema in " + path.string());
      }
      saw_header = true;
      continue;
    }
    records.push_back({row.value("role", ""), row.value("backend", ""), row.value("prompt", ""),
                       row.value("raw", ""), row.value("parsed", "")});
  }
  return records;
}

}  // namespace desksim
