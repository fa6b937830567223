#pragma once

// Observational semantics: a transition relation over virtual states together
// with a local extraction function (state change to attribute record) and a
// local reconstruction function (attribute record to state change). Extended
// to whole traces, extraction and reconstruction must be mutually inverse.

#include <gentrace/trace.hpp>

#include <algorithm>
#include <concepts>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace gentrace {

template <typename State, typename Action>
struct Step
{
    Action action{};
    State state{};

    auto operator<=>(const Step &) const = default;
    auto operator==(const Step &) const -> bool = default;
};

template <typename State, typename Action>
using VirtualTrace = BasicTrace<State, Step<State, Action>>;

template <typename State, typename Actual>
using ActualTrace = BasicTrace<State, Actual>;

/// Raised by extraction when a virtual step is not a transition.
class TransitionViolation : public std::runtime_error
{
  public:
    TransitionViolation(std::size_t index, const std::string & why) :
        std::runtime_error("transition violation at event " + std::to_string(index) + ": " + why),
        index(index)
    {
    }

    std::size_t index;
};

/// Raised by reconstruction at the first record that cannot be replayed.
class ReconstructionFailure : public std::runtime_error
{
  public:
    ReconstructionFailure(std::size_t index, const std::string & why) :
        std::runtime_error("reconstruction failure at event " + std::to_string(index) + ": " + why),
        index(index),
        reason(why)
    {
    }

    std::size_t index;
    std::string reason;
};

// The tuple <S, R, A, T, E_l, I_l, S_0>. The state and record domains are the
// member types; transition is a membership test; extract_local and
// reconstruct_local throw (any std::exception) where they are undefined.
template <typename OS>
concept ObservationalSemantics = requires(const OS & os, const typename OS::State & s,
    const typename OS::Action & r, const typename OS::Actual & a) {
    typename OS::State;
    typename OS::Action;
    typename OS::Actual;
    { os.is_initial(s) } -> std::convertible_to<bool>;
    { os.is_actual(a) } -> std::convertible_to<bool>;
    { os.transition(s, r, s) } -> std::convertible_to<bool>;
    { os.extract_local(s, r, s) } -> std::same_as<typename OS::Actual>;
    { os.reconstruct_local(s, a) } -> std::same_as<std::pair<typename OS::Action, typename OS::State>>;
};

template <ObservationalSemantics OS>
using VirtualTraceOf = VirtualTrace<typename OS::State, typename OS::Action>;

template <ObservationalSemantics OS>
using ActualTraceOf = ActualTrace<typename OS::State, typename OS::Actual>;

template <ObservationalSemantics OS>
[[nodiscard]] auto extract(const OS & os, const VirtualTraceOf<OS> & vt) -> ActualTraceOf<OS>
{
    if (! os.is_initial(vt.initial_state))
        throw TransitionViolation(0, "initial state not in S_0");
    ActualTraceOf<OS> out{vt.initial_state, {}};
    out.events.reserve(vt.size());
    const typename OS::State * previous = &vt.initial_state;
    for (std::size_t i = 0; i < vt.size(); ++i) {
        const auto & step = vt.events[i];
        if (! os.transition(*previous, step.action, step.state))
            throw TransitionViolation(i, "step is not in T");
        try {
            out.events.push_back(os.extract_local(*previous, step.action, step.state));
        }
        catch (const std::exception & e) {
            throw TransitionViolation(i, e.what());
        }
        previous = &step.state;
    }
    return out;
}

template <ObservationalSemantics OS>
[[nodiscard]] auto reconstruct(const OS & os, const ActualTraceOf<OS> & at) -> VirtualTraceOf<OS>
{
    if (! os.is_initial(at.initial_state))
        throw ReconstructionFailure(0, "initial state not in S_0");
    VirtualTraceOf<OS> out{at.initial_state, {}};
    out.events.reserve(at.size());
    const typename OS::State * previous = &at.initial_state;
    for (std::size_t i = 0; i < at.size(); ++i) {
        if (! os.is_actual(at.events[i]))
            throw ReconstructionFailure(i, "record is not in A");
        try {
            auto [r, next] = os.reconstruct_local(*previous, at.events[i]);
            out.events.push_back({std::move(r), std::move(next)});
        }
        catch (const ReconstructionFailure &) {
            throw;
        }
        catch (const std::exception & e) {
            throw ReconstructionFailure(i, e.what());
        }
        if (! os.transition(*previous, out.events.back().action, out.events.back().state))
            throw ReconstructionFailure(i, "reconstructed step is not in T");
        previous = &out.events.back().state;
    }
    return out;
}

struct FaithfulnessEntry
{
    std::size_t trace_index = 0;
    bool ok = true;
    std::optional<std::size_t> divergence;
    std::string detail;
};

struct FaithfulnessReport
{
    std::vector<FaithfulnessEntry> entries;

    [[nodiscard]] auto ok() const -> bool
    {
        for (const auto & e : entries)
            if (! e.ok)
                return false;
        return true;
    }
};

namespace detail
{
    template <typename Trace>
    auto first_divergence(const Trace & a, const Trace & b) -> std::optional<std::size_t>
    {
        std::size_t n = std::min(a.size(), b.size());
        for (std::size_t i = 0; i < n; ++i)
            if (! (a.events[i] == b.events[i]))
                return i;
        if (a.size() != b.size())
            return n;
        return std::nullopt;
    }
}

/// reconstruct(extract(t)) = t for every virtual sample.
template <ObservationalSemantics OS>
[[nodiscard]] auto check_faithful(const OS & os, std::span<const VirtualTraceOf<OS>> samples) -> FaithfulnessReport
{
    FaithfulnessReport report;
    for (std::size_t k = 0; k < samples.size(); ++k) {
        FaithfulnessEntry entry;
        entry.trace_index = k;
        try {
            auto back = reconstruct(os, extract(os, samples[k]));
            if (! (back.initial_state == samples[k].initial_state)) {
                entry.ok = false;
                entry.divergence = 0;
                entry.detail = "initial state differs";
            }
            else if (auto d = detail::first_divergence(back, samples[k])) {
                entry.ok = false;
                entry.divergence = d;
                entry.detail = "virtual event differs";
            }
        }
        catch (const TransitionViolation & e) {
            entry = {k, false, e.index, e.what()};
        }
        catch (const ReconstructionFailure & e) {
            entry = {k, false, e.index, e.what()};
        }
        report.entries.push_back(std::move(entry));
    }
    return report;
}

/// Dual direction: extract(reconstruct(a)) = a for every actual sample.
template <ObservationalSemantics OS>
[[nodiscard]] auto check_faithful_actual(const OS & os, std::span<const ActualTraceOf<OS>> samples) -> FaithfulnessReport
{
    FaithfulnessReport report;
    for (std::size_t k = 0; k < samples.size(); ++k) {
        FaithfulnessEntry entry;
        entry.trace_index = k;
        try {
            auto back = extract(os, reconstruct(os, samples[k]));
            if (auto d = detail::first_divergence(back, samples[k])) {
                entry.ok = false;
                entry.divergence = d;
                entry.detail = "attribute record differs";
            }
        }
        catch (const TransitionViolation & e) {
            entry = {k, false, e.index, e.what()};
        }
        catch (const ReconstructionFailure & e) {
            entry = {k, false, e.index, e.what()};
        }
        report.entries.push_back(std::move(entry));
    }
    return report;
}

/// Extraction recovered from reconstruction alone: the unique candidate record
/// a with I_l(s, a) = (r, s'). Only meaningful where I_l is injective per state.
template <ObservationalSemantics OS>
[[nodiscard]] auto extract_via_reconstruction(const OS & os, const typename OS::State & s, const typename OS::Action & r,
    const typename OS::State & next, std::span<const typename OS::Actual> candidates) -> std::optional<typename OS::Actual>
{
    std::optional<typename OS::Actual> found;
    for (const auto & a : candidates) {
        try {
            auto [r2, s2] = os.reconstruct_local(s, a);
            if (r2 == r && s2 == next) {
                if (found && ! (*found == a))
                    return std::nullopt;
                found = a;
            }
        }
        catch (const std::exception &) {
        }
    }
    return found;
}

}
