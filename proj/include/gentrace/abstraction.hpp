#pragma once

// Relations between traces: parametric subtraces (projection of parameters
// and action types), derivations between prefix sets and their composition,
// simulation evidence via a state mapping, generic-trace compliance, and the
// concrete PaLM to generic mapping.

#include <gentrace/gentra4cp.hpp>
#include <gentrace/palm.hpp>
#include <gentrace/semantics.hpp>
#include <gentrace/trace.hpp>

#include <algorithm>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace gentrace {

struct RuleAccess
{
    std::set<std::string> uses;
    std::set<std::string> modifies;
};

// Static dependency table of an OS. A parameter p depends on p' when some rule
// modifying p uses p'. Composite parameters hold snapshots of the others and
// are projected along with them.
struct OsSignature
{
    std::string name;
    std::set<std::string> params;
    std::set<std::string> actions;
    std::map<std::string, RuleAccess> rules;
    std::set<std::string> composite;
};

[[nodiscard]] auto gentra4cp_signature() -> OsSignature;
[[nodiscard]] auto palm_signature() -> OsSignature;

/// Exempts `subject` (an action) from the check on `param`; "*" matches any parameter.
struct Waiver
{
    std::string subject;
    std::string param;
    std::string reason;
};

struct ParamProjection
{
    std::set<std::string> kept_params;
    std::set<std::string> kept_actions;
    std::vector<Waiver> waivers;
};

[[nodiscard]] auto identity_projection(const OsSignature & sig) -> ParamProjection;
/// All events but jumpTo and solved, parameter E dropped.
[[nodiscard]] auto palm_profile_projection() -> ParamProjection;
/// The PaLM process with its explanations ignored.
[[nodiscard]] auto palm_without_explanations() -> ParamProjection;

class InvalidProjection : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

struct ProjectionFinding
{
    std::string subject;
    std::string param;
    std::string message;
    std::optional<std::string> waived_by;
};

/// Every finding of the static checks, waived or not.
[[nodiscard]] auto projection_findings(const OsSignature & sig, const ParamProjection & p) -> std::vector<ProjectionFinding>;

struct ProjectedSignature
{
    OsSignature signature;
    std::vector<ProjectionFinding> waived;
};

/// Throws InvalidProjection naming the first unwaived finding.
[[nodiscard]] auto project(const OsSignature & sig, const ParamProjection & p) -> ProjectedSignature;

/// The generic semantics restricted to the projection: actions limited, E
/// tracked only when kept, and an audit that flags access to dropped parameters.
[[nodiscard]] auto project(const GenTra4CP & os, const ParamProjection & p) -> GenTra4CP;

/// Replays a trace under a projected generic semantics with a fresh audit.
[[nodiscard]] auto audited_replay(const GenTra4CP & projected, const GenericActualTrace & at) -> AccessAudit;

// ---------------------------------------------------------------- derivations

template <typename Concrete, typename Derived>
struct Derivation
{
    std::string name;
    std::function<std::optional<Derived>(const Concrete &)> map;
    bool surjective_hint = false;
};

template <typename T>
[[nodiscard]] auto identity_derivation() -> Derivation<T, T>
{
    return {"identity", [](const T & t) -> std::optional<T> { return t; }, true};
}

/// compose(d1, d2) = d1 o d2: apply d2 first.
template <typename A, typename B, typename C>
[[nodiscard]] auto compose(const Derivation<B, C> & d1, const Derivation<A, B> & d2) -> Derivation<A, C>
{
    return {d1.name + " o " + d2.name,
        [f = d1.map, g = d2.map](const A & a) -> std::optional<C> {
            auto b = g(a);
            if (! b)
                return std::nullopt;
            return f(*b);
        },
        d1.surjective_hint && d2.surjective_hint};
}

/// Prefix-wise derivation from an event-level map (nullopt erases the event).
template <typename S1, typename E1, typename S2, typename E2>
[[nodiscard]] auto eventwise_derivation(std::string name, std::function<S2(const S1 &)> initial,
    std::function<std::optional<E2>(const E1 &)> event) -> Derivation<BasicTrace<S1, E1>, BasicTrace<S2, E2>>
{
    return {std::move(name), [initial, event](const BasicTrace<S1, E1> & t) -> std::optional<BasicTrace<S2, E2>> {
                BasicTrace<S2, E2> out{initial(t.initial_state), {}};
                for (const auto & e : t.events)
                    if (auto m = event(e))
                        out.events.push_back(std::move(*m));
                return out;
            }};
}

struct ChainViolation
{
    std::size_t trace = 0;
    std::size_t prefix = 0;  // concrete prefix size where the chain breaks
    std::string message;
};

struct ChainReport
{
    std::size_t traces = 0;
    std::size_t contiguous = 0;  // traces witnessed by the contiguous chain
    std::size_t searched = 0;    // traces needing the subsequence search
    std::size_t search_bound = 0;
    std::vector<ChainViolation> violations;

    [[nodiscard]] auto ok() const -> bool { return violations.empty(); }
};

namespace detail
{
    template <typename T>
    auto extends_by_one(const T & shorter, const T & longer) -> bool
    {
        return longer.size() == shorter.size() + 1 && is_prefix_of(shorter, longer);
    }
}

// Def. 3 on samples: for every concrete trace t and every prefix of D(t) of
// size i, an increasing chain of concrete prefixes whose images are the
// derived prefixes of sizes 0..i. The contiguous chain over all prefixes of t
// is tried first; otherwise a greedy search over prefixes in order (bounded by
// the prefix count) looks for the witnesses.
template <typename Concrete, typename Derived>
[[nodiscard]] auto check_derivation(const Derivation<Concrete, Derived> & D, std::span<const Concrete> concrete,
    const std::function<bool(const Derived &)> & derived_initial) -> ChainReport
{
    // Images are recomputed rather than stored: keeping all of them is
    // quadratic in the trace length.
    ChainReport report;
    report.traces = concrete.size();
    for (std::size_t k = 0; k < concrete.size(); ++k) {
        const auto & t = concrete[k];
        auto fail = [&](std::size_t at, std::string why) { report.violations.push_back({k, at, std::move(why)}); };
        auto first = D.map(prefix(t, 0));
        if (! first) {
            fail(0, "derivation undefined on this prefix");
            continue;
        }
        if (first->size() != 0 || ! derived_initial(*first)) {
            fail(0, "image of the empty prefix is not an initial derived trace");
            continue;
        }
        std::optional<std::size_t> missing;
        std::optional<std::size_t> broken;
        auto previous = std::move(*first);
        for (std::size_t i = 1; i <= t.size(); ++i) {
            auto image = D.map(prefix(t, i));
            if (! image) {
                missing = i;
                break;
            }
            if (! broken && ! (*image == previous) && ! detail::extends_by_one(previous, *image))
                broken = i;
            previous = std::move(*image);
        }
        if (missing) {
            fail(*missing, "derivation undefined on this prefix");
            continue;
        }
        if (! broken) {
            ++report.contiguous;
            continue;
        }
        ++report.searched;
        report.search_bound = std::max(report.search_bound, t.size() + 1);
        // previous now holds D(t); witness its prefixes greedily in order
        const auto & target = previous;
        std::size_t want = 0;
        for (std::size_t i = 0; i <= t.size() && want <= target.size(); ++i) {
            auto image = D.map(prefix(t, i));
            if (image->size() == want && is_prefix_of(*image, target))
                ++want;
        }
        if (want <= target.size())
            fail(*broken, "no concrete prefix maps to the derived prefix of size " + std::to_string(want));
    }
    return report;
}

// ------------------------------------------------------------------ simulation

template <typename SC, typename AC, typename SD, typename AD>
struct StateMapping
{
    std::function<SD(const SC &)> d;
    std::map<AC, AD> h;
    std::set<AD> derived_actions;
};

struct SimulationViolation
{
    std::size_t trace = 0;
    std::size_t index = 0;
    std::string message;
};

struct SimulationReport
{
    bool structural_ok = true;
    std::vector<std::string> structural;
    std::size_t traces = 0;
    std::size_t transitions = 0;
    std::vector<SimulationViolation> violations;

    [[nodiscard]] auto ok() const -> bool { return structural_ok && violations.empty(); }
};

// Def. 4 on samples: d(s0) initial, and every concrete transition (s, r, s')
// maps to a derived transition (d(s), h(r), d(s')).
template <ObservationalSemantics OSC, ObservationalSemantics OSD>
[[nodiscard]] auto check_simulable(const OSC & os_c, const OSD & os_d,
    const StateMapping<typename OSC::State, typename OSC::Action, typename OSD::State, typename OSD::Action> & m,
    std::span<const VirtualTraceOf<OSC>> samples) -> SimulationReport
{
    SimulationReport report;
    report.traces = samples.size();
    std::set<typename OSD::Action> image;
    for (const auto & [from, to] : m.h)
        if (! image.insert(to).second) {
            report.structural_ok = false;
            report.structural.push_back("h is not one-one");
        }
    if (image != m.derived_actions) {
        report.structural_ok = false;
        report.structural.push_back("h is not onto the derived action set");
    }
    for (const auto & t : samples) {
        if (! (m.d(t.initial_state) == m.d(t.initial_state))) {
            report.structural_ok = false;
            report.structural.push_back("d is not functional on an initial state");
        }
    }
    if (! report.structural_ok)
        return report;
    for (std::size_t k = 0; k < samples.size(); ++k) {
        const auto & t = samples[k];
        if (! os_d.is_initial(m.d(t.initial_state))) {
            report.violations.push_back({k, 0, "d(s0) is not an initial derived state"});
            continue;
        }
        const auto * pre = &t.initial_state;
        for (std::size_t i = 0; i < t.size(); ++i) {
            const auto & step = t.events[i];
            ++report.transitions;
            auto h = m.h.find(step.action);
            if (! os_c.transition(*pre, step.action, step.state))
                report.violations.push_back({k, i, "sample step is not a concrete transition"});
            else if (h == m.h.end())
                report.violations.push_back({k, i, "action outside the domain of h"});
            else if (! os_d.transition(m.d(*pre), h->second, m.d(step.state)))
                report.violations.push_back({k, i, "mapped step is not a derived transition"});
            if (! report.violations.empty() && report.violations.back().trace == k
                && report.violations.back().index == i)
                break;
            pre = &step.state;
        }
    }
    return report;
}

/// d = to_generic (the Annex mapping), h = identity on the PaLM action set.
[[nodiscard]] auto annex_mapping() -> StateMapping<PalmState, EventType, GenTraState, EventType>;

// -------------------------------------------------------------- PaLM mapping

class MappingError : public std::runtime_error
{
  public:
    MappingError(std::size_t index, const std::string & why) :
        std::runtime_error("event " + std::to_string(index) + ": " + why),
        index(index)
    {
    }

    std::size_t index;
};

/// Drops explanations, wake kinds and variable names. Throws MappingError on
/// jumpTo or solved.
[[nodiscard]] auto palm_event_to_generic(const GenericEvent & e, std::size_t index = 0) -> GenericEvent;
[[nodiscard]] auto palm_to_generic(const std::vector<GenericEvent> & events, long chrono_base = 0) -> GenericActualTrace;
[[nodiscard]] auto palm_to_generic(const PalmActualTrace & at) -> GenericActualTrace;
/// The virtual-level counterpart: d on every state, h on every action.
[[nodiscard]] auto palm_virtual_to_generic(const PalmVirtualTrace & vt) -> GenericVirtualTrace;
[[nodiscard]] auto palm_derivation() -> Derivation<PalmActualTrace, GenericActualTrace>;

// -------------------------------------------------------------- compliance

struct ProcessEvidence
{
    std::vector<GenericActualTrace> derived;
    ChainReport chain;
};

struct ComplianceProcess
{
    std::string name;
    ParamProjection projection;
    GuardSet guards = default_guards();
    std::function<ProcessEvidence()> run;
};

struct ProcessVerdict
{
    std::string name;
    bool chain_ok = false;
    bool projection_ok = false;
    std::size_t traces = 0;
    std::size_t valid = 0;
    std::size_t guard_violations = 0;
    std::vector<std::string> uncovered_actions;
    std::vector<std::string> unchanged_params;
    std::vector<std::string> failures;  // first failure per trace, with locator

    [[nodiscard]] auto compliant() const -> bool
    {
        return chain_ok && projection_ok && valid == traces && guard_violations == 0 && uncovered_actions.empty()
            && unchanged_params.empty();
    }
};

struct ComplianceReport
{
    std::vector<ProcessVerdict> processes;

    [[nodiscard]] auto compliant() const -> bool
    {
        return std::all_of(processes.begin(), processes.end(), [](const ProcessVerdict & p) { return p.compliant(); });
    }
};

[[nodiscard]] auto fd_process(std::string name, std::vector<GenericActualTrace> traces) -> ComplianceProcess;
[[nodiscard]] auto palm_process(std::string name, std::vector<PalmActualTrace> traces, ParamProjection projection,
    GuardSet guards) -> ComplianceProcess;

/// Def. 5 on samples: per process, derive, check the chain, validate under the
/// projected generic semantics with guards, and require the projected action
/// and parameter sets to be exercised.
[[nodiscard]] auto check_generic(const std::vector<ComplianceProcess> & processes) -> ComplianceReport;

/// Parameter p differs between two generic states.
[[nodiscard]] auto param_changed(const GenTraState & a, const GenTraState & b, Param p) -> bool;

// -------------------------------------------------------------- commutation

struct CommutationReport
{
    std::size_t traces = 0;
    std::vector<SimulationViolation> violations;

    [[nodiscard]] auto ok() const -> bool { return violations.empty(); }
};

// Under the reading D_v o I_c = I_d o D_w: reconstructing the mapped actual
// trace equals mapping the reconstructed virtual trace.
template <ObservationalSemantics OSC, ObservationalSemantics OSD>
[[nodiscard]] auto commutation_check(const OSC & os_c, const OSD & os_d,
    const std::function<ActualTraceOf<OSD>(const ActualTraceOf<OSC> &)> & D_w,
    const std::function<VirtualTraceOf<OSD>(const VirtualTraceOf<OSC> &)> & D_v,
    std::span<const ActualTraceOf<OSC>> samples) -> CommutationReport
{
    CommutationReport report;
    report.traces = samples.size();
    for (std::size_t k = 0; k < samples.size(); ++k) {
        try {
            auto left = reconstruct(os_d, D_w(samples[k]));
            auto right = D_v(reconstruct(os_c, samples[k]));
            if (! (left.initial_state == right.initial_state))
                report.violations.push_back({k, 0, "initial states differ"});
            else if (auto i = detail::first_divergence(left, right))
                report.violations.push_back({k, *i, "virtual traces differ"});
        }
        catch (const ReconstructionFailure & e) {
            report.violations.push_back({k, e.index, e.what()});
        }
        catch (const MappingError & e) {
            report.violations.push_back({k, e.index, e.what()});
        }
    }
    return report;
}

// -------------------------------------------------------------- reports

[[nodiscard]] auto format_report(const std::string & check, const ChainReport & r) -> std::string;
[[nodiscard]] auto format_report(const std::string & check, const SimulationReport & r) -> std::string;
[[nodiscard]] auto format_report(const std::string & check, const ComplianceReport & r) -> std::string;
[[nodiscard]] auto format_report(const std::string & check, const CommutationReport & r) -> std::string;
[[nodiscard]] auto format_report(const std::string & check, const ValidationReport & r) -> std::string;

}
