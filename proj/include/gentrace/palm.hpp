#pragma once

// Explanation-based solver simulator: the state of the PaLM OS (queue split in
// head Q_h and tail Q_t, at most one active pair, an explanation function),
// its replay semantics, and a solver emitting PaLM-dialect traces with
// repair-style backtracking (deactivate + restore, no jumpTo, no solved).

#include <gentrace/fd_solver.hpp>
#include <gentrace/gentra4cp.hpp>

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace gentrace {

/// E(v, d) = because, for every d in values.
struct ExplanationEntry
{
    VarId var;
    FiniteDomain values;
    std::set<ConstraintId> because;

    auto operator<=>(const ExplanationEntry &) const = default;
    auto operator==(const ExplanationEntry &) const -> bool = default;
};

struct PalmSolverState
{
    std::set<VarId> variables;
    std::map<VarId, std::string> names;
    CowMap<ConstraintId, ConstraintDecl> constraints;
    Domains domains;
    Domains initial_domains;
    std::optional<ActivePair> active;  // A, at most one pair
    std::set<ConstraintId> rejected;   // R
    std::set<ConstraintId> sleeping;   // S_c
    std::optional<SolverEvent> head;   // Q_h
    std::vector<SolverEvent> queue;    // Q_t
    std::vector<ExplanationEntry> explanations;

    auto operator<=>(const PalmSolverState &) const = default;
    auto operator==(const PalmSolverState &) const -> bool = default;
};

struct PalmState
{
    PalmSolverState solver;
    SearchTree<PalmSolverState> tree = root_tree<PalmSolverState>();
    long next_chrono = 0;

    auto operator<=>(const PalmState &) const = default;
    auto operator==(const PalmState &) const -> bool = default;
};

[[nodiscard]] auto palm_initial_state(long chrono_base = 0) -> PalmState;

/// sigma for PaLM: the constraints of A, S_c and R.
[[nodiscard]] auto palm_store(const PalmSolverState & s) -> std::set<ConstraintId>;
/// Constraint sets explaining the removal of d from D(v); empty if none recorded.
[[nodiscard]] auto explanation_of(const PalmSolverState & s, const VarId & v, Value d) -> std::optional<std::set<ConstraintId>>;
/// Values of v whose explanation is no longer contained in sigma.
[[nodiscard]] auto restorable_values(const PalmSolverState & s, const VarId & v) -> FiniteDomain;
/// dependence(c, a): a is bottom or concerns a variable of c.
[[nodiscard]] auto dependence(const PalmSolverState & s, const ConstraintId & c, const SolverEvent & a) -> bool;
/// select(a): the first event of Q_t some sleeping constraint depends on.
[[nodiscard]] auto select_event(const PalmSolverState & s) -> std::optional<SolverEvent>;

/// The Annex state mapping d: identity on the shared parameters, E empty,
/// S_e = Q_t and the scheduled event = Q_h; snapshots are mapped recursively.
[[nodiscard]] auto to_generic(const PalmSolverState & s) -> SolverState;
[[nodiscard]] auto to_generic(const PalmState & s) -> GenTraState;

using PalmVirtualTrace = VirtualTrace<PalmState, EventType>;
using PalmActualTrace = ActualTrace<PalmState, GenericEvent>;

// The OS of the PaLM process. Actual records are GenericEvents in the PaLM
// dialect: reduce carries its explanation, restore the erased explanations.
class PalmOS
{
  public:
    using State = PalmState;
    using Action = EventType;
    using Actual = GenericEvent;

    [[nodiscard]] auto is_initial(const State & s) const -> bool;
    [[nodiscard]] auto is_actual(const Actual & a) const -> bool;
    [[nodiscard]] auto transition(const State & s, Action r, const State & next) const -> bool;
    [[nodiscard]] auto extract_local(const State & s, Action r, const State & next) const -> Actual;
    /// Throws RuleViolation naming the rule and the failed condition.
    [[nodiscard]] auto reconstruct_local(const State & s, const Actual & a) const -> std::pair<Action, State>;
};

[[nodiscard]] auto palm_actions() -> std::set<EventType>;

class PalmCheckFailure : public std::runtime_error
{
  public:
    PalmCheckFailure(std::size_t index, std::string property, const std::string & why) :
        std::runtime_error("event " + std::to_string(index) + ": " + property + ": " + why),
        index(index),
        property(std::move(property))
    {
    }

    std::size_t index;
    std::string property;
};

struct PalmSolveOptions
{
    std::size_t max_events = 1'000'000;
    std::size_t max_nodes = 100'000;
    bool keep_virtual = true;
};

struct PalmSolveResult
{
    std::vector<Assignment> solutions;
    PalmActualTrace actual;
    PalmVirtualTrace virtual_trace;
    std::size_t checks = 0;  // property evaluations performed
};

/// element constraints are read 0-based, as the PaLM variant of the example.
[[nodiscard]] auto zero_based(Problem p) -> Problem;

/// Throws PalmCheckFailure if P1-P3, the singleton discipline, explanation
/// soundness or a guard fails; LimitExceeded on the limits.
[[nodiscard]] auto palm_solve(const Problem & p, const PalmSolveOptions & options = {}) -> PalmSolveResult;

}
