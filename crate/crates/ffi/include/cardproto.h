#ifndef CARDPROTO_H
#define CARDPROTO_H

#include <stddef.h>
#include <stdint.h>

// Result of a library call.
typedef enum CpStatus {
  CP_STATUS_OK = 0,
  // A required pointer was null.
  CP_STATUS_NULL_ARGUMENT = 1,
  // A string argument was not valid UTF-8.
  CP_STATUS_INVALID_UTF8 = 2,
  // Unknown protocol, bad parameters, malformed JSON or prior.
  CP_STATUS_INVALID_ARGUMENT = 3,
  // The script did not parse or failed a static check.
  CP_STATUS_SCRIPT_REJECTED = 4,
  // Enumeration ran past its step budget.
  CP_STATUS_BUDGET_EXCEEDED = 5,
  // The analysis finished and found a correctness or security failure.
  CP_STATUS_CHECK_FAILED = 6,
  // An internal error; the message says more.
  CP_STATUS_INTERNAL = 7,
} CpStatus;

// A protocol ready for analysis.
typedef struct CpProtocol CpProtocol;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Builds a built-in protocol. `params_json` may be null or a JSON object
// with optional keys `n`, `k` and `g`.
//
// # Safety
// `name` and `params_json` must be null or NUL-terminated strings; `out`
// must be a valid pointer.
enum CpStatus cp_protocol_builtin(const char *name,
                                  const char *params_json,
                                  struct CpProtocol **out);

// Parses and checks a `.cardp` script.
//
// # Safety
// `source` must be a NUL-terminated string; `out` must be a valid pointer.
enum CpStatus cp_protocol_from_script(const char *source, struct CpProtocol **out);

// Releases a protocol. Null is ignored.
//
// # Safety
// `protocol` must come from this library and not be freed twice.
void cp_protocol_free(struct CpProtocol *protocol);

// Number of cards the protocol uses, or 0 for a null handle.
//
// # Safety
// `protocol` must be null or a live handle.
size_t cp_protocol_card_count(const struct CpProtocol *protocol);

// Writes the resource count as a JSON string to `out_json`.
//
// # Safety
// `protocol` must be a live handle; `out_json` must be a valid pointer.
enum CpStatus cp_protocol_resources(const struct CpProtocol *protocol, char **out_json);

// Runs the full analysis and writes the report as JSON to `out_json`.
//
// `budget` is the per-input step budget (0 for the default). `prior` may be
// null; otherwise posterior tables are included, observing the first
// `depth` reveals or whole traces when `depth` is negative. Returns
// `CP_STATUS_CHECK_FAILED` when the report is written but does not pass.
//
// # Safety
// `protocol` must be a live handle, `prior` null or a NUL-terminated
// string, and `out_json` a valid pointer.
enum CpStatus cp_protocol_verify_json(const struct CpProtocol *protocol,
                                      uint64_t budget,
                                      const char *prior,
                                      int64_t depth,
                                      char **out_json);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must come from this library and not be freed twice.
void cp_string_free(char *s);

// Message for the last failed call on this thread, or null. The pointer
// stays valid until the next call into the library on the same thread.
const char *cp_last_error(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CARDPROTO_H */
