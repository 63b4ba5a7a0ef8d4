#pragma once

#include <stdexcept>
#include <string>

namespace desksim {

// Base for every error the engine raises. `code()` is a stable short tag
// used in skip reasons and log records; messages are free-form.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& message) : std::runtime_error(message) {}
  virtual const char* code() const noexcept { return "error"; }
};

#define DESKSIM_DEFINE_ERROR(Name, Base, tag)                         \
  class Name : public Base {                                          \
   public:                                                            \
    explicit Name(const std::string& message) : Base(message) {}      \
    const char* code() const noexcept override { return tag; }        \
  }

// Startup / input-file problems. Config errors abort a run before any
// output is written; data errors point at a malformed corpus file.
DESKSIM_DEFINE_ERROR(ConfigError, Error, "config_error");
DESKSIM_DEFINE_ERROR(DataError, Error, "data_error");
DESKSIM_DEFINE_ERROR(SchemaMismatch, DataError, "schema_mismatch");

// core domain
DESKSIM_DEFINE_ERROR(CalendarExhausted, Error, "calendar_exhausted");

// gateway
DESKSIM_DEFINE_ERROR(GatewayError, Error, "gateway_error");
DESKSIM_DEFINE_ERROR(BackendUnavailable, GatewayError, "backend_unavailable");
DESKSIM_DEFINE_ERROR(RateLimited, GatewayError, "rate_limited");
DESKSIM_DEFINE_ERROR(EmptyResponse, GatewayError, "empty_response");
// Transient failures (network drop, 5xx) are retried by the gateway and only
// ever surface as BackendUnavailable once attempts are exhausted.
DESKSIM_DEFINE_ERROR(TransientBackendError, GatewayError, "transient_backend_error");

// prompt rendering
DESKSIM_DEFINE_ERROR(MissingSlot, Error, "missing_slot");

// reply parsing
DESKSIM_DEFINE_ERROR(ParseError, Error, "parse_error");
DESKSIM_DEFINE_ERROR(UnparsableAction, ParseError, "unparsable_action");
DESKSIM_DEFINE_ERROR(UnparsableVerdict, ParseError, "unparsable_verdict");

// metrics
DESKSIM_DEFINE_ERROR(EmptyInput, Error, "empty_input");
DESKSIM_DEFINE_ERROR(DisjointLogs, Error, "disjoint_logs");

#undef DESKSIM_DEFINE_ERROR

}  // namespace desksim
