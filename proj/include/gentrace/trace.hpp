#pragma once

// Traces, segments and prefix-closed trace domains.
//
// A trace is an initial state followed by a finite sequence of events. States
// and events are opaque to this header: they only need equality and a strict
// weak ordering so prefix sets can be materialized as ordered sets.

#include <compare>
#include <concepts>
#include <cstddef>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace gentrace {

class TraceError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

template <typename Event>
struct Segment
{
    std::vector<Event> events;

    [[nodiscard]] auto size() const -> std::size_t { return events.size(); }
    [[nodiscard]] auto empty() const -> bool { return events.empty(); }

    auto operator<=>(const Segment &) const = default;
    auto operator==(const Segment &) const -> bool = default;
};

template <typename State, typename Event>
struct BasicTrace
{
    State initial_state{};
    std::vector<Event> events;

    [[nodiscard]] auto size() const -> std::size_t { return events.size(); }

    auto operator<=>(const BasicTrace &) const = default;
    auto operator==(const BasicTrace &) const -> bool = default;
};

template <typename State, typename Event>
[[nodiscard]] auto prefix(const BasicTrace<State, Event> & t, std::size_t k) -> BasicTrace<State, Event>
{
    if (k > t.size())
        throw TraceError("prefix size " + std::to_string(k) + " exceeds trace size " + std::to_string(t.size()));
    return BasicTrace<State, Event>{t.initial_state, {t.events.begin(), t.events.begin() + static_cast<std::ptrdiff_t>(k)}};
}

template <typename State, typename Event>
[[nodiscard]] auto is_prefix_of(const BasicTrace<State, Event> & p, const BasicTrace<State, Event> & t) -> bool
{
    if (p.size() > t.size() || ! (p.initial_state == t.initial_state))
        return false;
    for (std::size_t i = 0; i < p.size(); ++i)
        if (! (p.events[i] == t.events[i]))
            return false;
    return true;
}

template <typename Event>
[[nodiscard]] auto concat(const Segment<Event> & a, const Segment<Event> & b) -> Segment<Event>
{
    Segment<Event> out{a.events};
    out.events.insert(out.events.end(), b.events.begin(), b.events.end());
    return out;
}

template <typename State, typename Event>
[[nodiscard]] auto append(const BasicTrace<State, Event> & t, const Segment<Event> & s) -> BasicTrace<State, Event>
{
    BasicTrace<State, Event> out{t};
    out.events.insert(out.events.end(), s.events.begin(), s.events.end());
    return out;
}

template <typename State, typename Event>
using PrefixSet = std::set<BasicTrace<State, Event>>;

// Opaque payloads for traces whose kind (virtual or actual) is only known at
// run time. Mixing kinds inside one trace or one trace set is an error.

enum class PayloadKind
{
    virtual_event,
    actual_event
};

struct VirtualPayload
{
    std::string action;
    std::string state;

    auto operator<=>(const VirtualPayload &) const = default;
    auto operator==(const VirtualPayload &) const -> bool = default;
};

struct ActualPayload
{
    std::vector<std::string> attributes;

    auto operator<=>(const ActualPayload &) const = default;
    auto operator==(const ActualPayload &) const -> bool = default;
};

struct TraceEvent
{
    std::variant<VirtualPayload, ActualPayload> payload;

    auto operator<=>(const TraceEvent &) const = default;
    auto operator==(const TraceEvent &) const -> bool = default;
};

[[nodiscard]] inline auto payload_kind(const TraceEvent & e) -> PayloadKind
{
    return std::holds_alternative<VirtualPayload>(e.payload) ? PayloadKind::virtual_event : PayloadKind::actual_event;
}

using OpaqueTrace = BasicTrace<std::string, TraceEvent>;

namespace detail
{
    template <typename Event>
    concept HasPayloadKind = requires(const Event & e) {
        { payload_kind(e) } -> std::same_as<PayloadKind>;
    };

    template <typename State, typename Event, typename Range>
    auto check_single_kind(const Range & traces) -> void
    {
        if constexpr (HasPayloadKind<Event>) {
            bool seen = false;
            PayloadKind kind{};
            for (const BasicTrace<State, Event> & t : traces)
                for (const Event & e : t.events) {
                    auto k = payload_kind(e);
                    if (! seen) {
                        seen = true;
                        kind = k;
                    }
                    else if (k != kind)
                        throw TraceError("kind mismatch: virtual and actual events mixed");
                }
        }
    }
}

template <typename State, typename Event>
[[nodiscard]] auto all_prefixes(const std::set<BasicTrace<State, Event>> & traces) -> PrefixSet<State, Event>
{
    detail::check_single_kind<State, Event>(traces);
    PrefixSet<State, Event> out;
    for (const auto & t : traces)
        for (std::size_t k = 0; k <= t.size(); ++k)
            out.insert(prefix(t, k));
    return out;
}

template <typename State, typename Event>
[[nodiscard]] auto all_prefixes(const std::vector<BasicTrace<State, Event>> & traces) -> PrefixSet<State, Event>
{
    return all_prefixes(std::set<BasicTrace<State, Event>>(traces.begin(), traces.end()));
}

/// Every non-empty prefix has its one-shorter prefix in the set.
template <typename State, typename Event>
[[nodiscard]] auto is_prefix_closed(const PrefixSet<State, Event> & x) -> bool
{
    for (const auto & t : x)
        if (t.size() > 0 && ! x.contains(prefix(t, t.size() - 1)))
            return false;
    return true;
}

template <typename State, typename Event>
auto require_prefix_closed(const PrefixSet<State, Event> & x, const char * what) -> void
{
    if (! is_prefix_closed(x))
        throw TraceError(std::string("invariant violation: ") + what + " is not prefix-closed");
}

template <typename State, typename Event>
[[nodiscard]] auto domain_join(const PrefixSet<State, Event> & x, const PrefixSet<State, Event> & y) -> PrefixSet<State, Event>
{
    require_prefix_closed(x, "left operand");
    require_prefix_closed(y, "right operand");
    PrefixSet<State, Event> out{x};
    out.insert(y.begin(), y.end());
    return out;
}

template <typename State, typename Event>
[[nodiscard]] auto domain_meet(const PrefixSet<State, Event> & x, const PrefixSet<State, Event> & y) -> PrefixSet<State, Event>
{
    require_prefix_closed(x, "left operand");
    require_prefix_closed(y, "right operand");
    PrefixSet<State, Event> out;
    for (const auto & t : x)
        if (y.contains(t))
            out.insert(t);
    return out;
}

template <typename State, typename Event>
[[nodiscard]] auto is_subdomain(const PrefixSet<State, Event> & x, const PrefixSet<State, Event> & y) -> bool
{
    for (const auto & t : x)
        if (! y.contains(t))
            return false;
    return true;
}

}
