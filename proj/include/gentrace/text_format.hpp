#pragma once

// Line-oriented trace text, one event per line:
//
//   line   := NAT "[" NAT "]" TYPE attr*
//   attr   := ID | NAME | domain | "node(" NAT ")" | event | "{" event,* "}" | "expl{" ID,* "}" | term
//   domain := "[" part ("," part)* "]"        part := INT | INT "-" (INT | "mx")
//   event  := "bot" | ID ":" KIND [":" ID]
//
// plus "# key: value" header lines before the first event. Strict mode only
// accepts the canonical rendering; lenient mode also takes the idioms of the
// historical listings and records each deviation.

#include <gentrace/domain.hpp>
#include <gentrace/fd_solver.hpp>
#include <gentrace/gentra4cp.hpp>

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace gentrace {

enum class ParseMode
{
    strict,
    lenient
};

class ParseError : public std::runtime_error
{
  public:
    ParseError(std::size_t line, std::size_t column, const std::string & why) :
        std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + why),
        line(line),
        column(column),
        reason(why)
    {
    }

    std::size_t line;
    std::size_t column;
    std::string reason;
};

struct Deviation
{
    std::size_t line = 0;  // 1-based source line
    std::string kind;
    std::string detail;

    auto operator<=>(const Deviation &) const = default;
    auto operator==(const Deviation &) const -> bool = default;
};

struct TraceDocument
{
    std::vector<std::pair<std::string, std::string>> header;
    std::vector<GenericEvent> events;
    std::vector<Deviation> deviations;
    Dialect dialect = Dialect::generic;
    Value mx = default_mx;
    bool truncated = false;  // the listing ended with "..."

    [[nodiscard]] auto chrono_base() const -> long { return events.empty() ? 0 : events.front().chrono; }
    [[nodiscard]] auto header_value(std::string_view key) const -> std::optional<std::string>;

    auto operator==(const TraceDocument &) const -> bool = default;
};

struct ParseOptions
{
    ParseMode mode = ParseMode::strict;
    Dialect dialect = Dialect::generic;  // a "dialect" header takes precedence
    std::optional<Value> mx;             // overrides an "mx" header
};

[[nodiscard]] auto parse_trace(std::string_view text, const ParseOptions & options = {}) -> TraceDocument;
[[nodiscard]] auto serialize_trace(const TraceDocument & doc) -> std::string;

/// Canonical attribute text of one event (no newline).
[[nodiscard]] auto format_event(const GenericEvent & e, Value mx = default_mx) -> std::string;
[[nodiscard]] auto parse_domain(std::string_view text, Value mx = default_mx) -> FiniteDomain;

/// A document for a generated trace, with its chrono base taken from the events.
[[nodiscard]] auto make_document(const std::vector<GenericEvent> & events, Dialect dialect,
    std::vector<std::pair<std::string, std::string>> header = {}) -> TraceDocument;
/// The actual trace the document denotes, starting from the empty initial state.
[[nodiscard]] auto to_actual_trace(const TraceDocument & doc) -> GenericActualTrace;

struct ProblemOptions
{
    Value mx = default_mx;
};

// Problem text, one declaration per line, "#" starts a comment:
//   var I 0..mx            var X [0-3,7]
//   con c1 element(I,[2,5,7],A)      (label optional; eq / eqc / neq / element0 too)
//   branch (eq(A,I) | eqc(A,2))
//   label I,A
[[nodiscard]] auto parse_problem(std::string_view text, const ProblemOptions & options = {}) -> Problem;

}
