#pragma once

namespace desksim {

inline constexpr const char* kVersion = "0.1.0";

// Schema tags written into persisted files; bump on incompatible layout changes.
inline constexpr const char* kOutcomeSchema = "desksim.outcome.v1";
inline constexpr const char* kTranscriptSchema = "desksim.transcript.v1";
inline constexpr const char* kManifestSchema = "desksim.manifest.v1";
inline constexpr const char* kPromptManifestSchema = "desksim.prompts.v1";

}  // namespace desksim
