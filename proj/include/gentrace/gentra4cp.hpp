#pragma once

// The generic trace for finite-domain solving: solver state, search-tree
// state, the fifteen event types with their attribute records, the store
// predicates, and the observational semantics (transition, extraction,
// reconstruction) plus validation and guard checking.

#include <gentrace/constraints.hpp>
#include <gentrace/cow_map.hpp>
#include <gentrace/domain.hpp>
#include <gentrace/semantics.hpp>

#include <array>
#include <compare>
#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace gentrace {

enum class EventKind
{
    dom,
    min,
    max,
    val,
    bottom
};

// A propagation-level happening, distinct from a trace event. The bottom
// event carries no variable and no origin.
struct SolverEvent
{
    EventKind kind = EventKind::bottom;
    std::optional<VarId> var;
    std::optional<ConstraintId> origin;

    auto operator<=>(const SolverEvent &) const = default;
    auto operator==(const SolverEvent &) const -> bool = default;
};

[[nodiscard]] auto bottom_event() -> SolverEvent;
[[nodiscard]] auto solver_event(EventKind kind, VarId var) -> SolverEvent;
[[nodiscard]] auto to_string(EventKind k) -> std::string_view;
/// "v1:dom", "v1:dom:c3" with an origin, "bot" for the bottom event.
[[nodiscard]] auto to_string(const SolverEvent & e) -> std::string;
[[nodiscard]] auto parse_event_kind(std::string_view s) -> std::optional<EventKind>;
[[nodiscard]] auto parse_solver_event(std::string_view s) -> std::optional<SolverEvent>;

enum class EventType
{
    new_variable,
    new_constraint,
    post,
    new_child,
    jump_to,
    solution,
    failure,
    deactivate,
    restore,
    reduce,
    suspend,
    solved,
    reject,
    awake,
    schedule
};

[[nodiscard]] auto all_event_types() -> const std::array<EventType, 15> &;
[[nodiscard]] auto to_string(EventType t) -> std::string_view;
[[nodiscard]] auto parse_event_type(std::string_view s) -> std::optional<EventType>;

using NodeId = long;
inline constexpr NodeId root_node = 0;

struct ActivePair
{
    ConstraintId constraint;
    SolverEvent event;

    auto operator<=>(const ActivePair &) const = default;
    auto operator==(const ActivePair &) const -> bool = default;
};

struct SolverState
{
    std::set<VarId> variables;                          // V
    CowMap<ConstraintId, ConstraintDecl> constraints;  // C
    Domains domains;                                    // D
    Domains initial_domains;                            // D_{v,i}
    std::set<ActivePair> active;                        // A
    std::set<ConstraintId> solved;                      // E
    std::set<ConstraintId> rejected;                    // R
    std::set<ConstraintId> sleeping;                    // S_c
    std::vector<SolverEvent> pending;                   // S_e, insertion-ordered set
    std::optional<SolverEvent> current_event;           // the scheduled event

    auto operator<=>(const SolverState &) const = default;
    auto operator==(const SolverState &) const -> bool = default;
};

// Immutable shared value with value semantics for comparison; keeps the
// per-node snapshots cheap to copy along a trace of states.
template <typename T>
class Frozen
{
  public:
    Frozen() : _p(std::make_shared<const T>()) {}
    Frozen(T value) : _p(std::make_shared<const T>(std::move(value))) {}

    [[nodiscard]] auto get() const -> const T & { return *_p; }
    [[nodiscard]] auto share() const -> const std::shared_ptr<const T> & { return _p; }

    auto operator<=>(const Frozen & o) const { return _p == o._p ? decltype(*_p <=> *o._p){} : *_p <=> *o._p; }
    auto operator==(const Frozen & o) const -> bool { return detail::shared_equal(_p, o._p); }

  private:
    std::shared_ptr<const T> _p;
};

template <typename Snapshot>
struct TreeNodes
{
    std::vector<NodeId> order;                     // N, creation order
    std::map<NodeId, Frozen<Snapshot>> snapshots;  // Sigma
    std::map<NodeId, int> depth;                   // delta

    auto operator<=>(const TreeNodes &) const = default;
    auto operator==(const TreeNodes &) const -> bool = default;
};

// The node tables are shared between consecutive states and copied only when
// a node is added.
template <typename Snapshot>
struct SearchTree
{
    Frozen<TreeNodes<Snapshot>> data;
    NodeId current = root_node;

    [[nodiscard]] auto nodes() const -> const std::vector<NodeId> & { return data.get().order; }
    [[nodiscard]] auto snapshots() const -> const std::map<NodeId, Frozen<Snapshot>> & { return data.get().snapshots; }
    [[nodiscard]] auto depths() const -> const std::map<NodeId, int> & { return data.get().depth; }
    [[nodiscard]] auto contains(NodeId n) const -> bool { return snapshots().contains(n); }
    [[nodiscard]] auto depth(NodeId n) const -> int { return depths().at(n); }
    [[nodiscard]] auto current_depth() const -> int { return depth(current); }
    [[nodiscard]] auto snapshot(NodeId n) const -> const Snapshot & { return snapshots().at(n).get(); }

    auto add_node(NodeId n, Snapshot snapshot) -> void
    {
        auto next = data.get();
        int d = next.depth.at(current) + 1;
        next.order.push_back(n);
        next.snapshots.emplace(n, std::move(snapshot));
        next.depth.emplace(n, d);
        data = Frozen<TreeNodes<Snapshot>>(std::move(next));
        current = n;
    }

    auto operator<=>(const SearchTree &) const = default;
    auto operator==(const SearchTree &) const -> bool = default;
};

template <typename Snapshot>
[[nodiscard]] auto root_tree() -> SearchTree<Snapshot>
{
    TreeNodes<Snapshot> t;
    t.order.push_back(root_node);
    t.snapshots.emplace(root_node, Snapshot{});
    t.depth.emplace(root_node, 0);
    return {Frozen<TreeNodes<Snapshot>>(std::move(t)), root_node};
}

struct GenTraState
{
    SolverState solver;
    SearchTree<SolverState> tree = root_tree<SolverState>();
    long next_chrono = 1;  // serial number of the next trace event

    auto operator<=>(const GenTraState &) const = default;
    auto operator==(const GenTraState &) const -> bool = default;
};

[[nodiscard]] auto initial_state(long chrono_base = 1) -> GenTraState;

enum class WakeKind
{
    min,
    max,
    empty,
    dom,
    val
};

[[nodiscard]] auto to_string(WakeKind k) -> std::string_view;
[[nodiscard]] auto parse_wake_kind(std::string_view s) -> std::optional<WakeKind>;

// One attribute record. Which fields are present is fixed by the type:
//   newVariable v D_{v,i}         newConstraint c decl
//   post/deactivate/suspend/solved c
//   restore v Delta_v [a-bar]      newChild/solution/failure n
//   jumpTo n n'                    reduce c v a-bar Delta a
//   reject/awake/schedule c a
// The last group of fields only appears in the explanation-based dialect.
struct GenericEvent
{
    long chrono = 0;
    int depth = 0;
    EventType type = EventType::post;

    std::optional<ConstraintId> constraint;
    std::optional<VarId> variable;
    std::optional<FiniteDomain> domain;
    std::vector<SolverEvent> generated;
    std::optional<SolverEvent> event;
    std::optional<ConstraintDecl> decl;
    std::optional<NodeId> node;
    std::optional<NodeId> from_node;

    std::optional<std::string> name;
    std::optional<WakeKind> wake;
    std::optional<std::vector<ConstraintId>> explanation;
    std::optional<std::string> raw_decl;

    auto operator<=>(const GenericEvent &) const = default;
    auto operator==(const GenericEvent &) const -> bool = default;
};

enum class Dialect
{
    generic,
    palm
};

/// Empty when the record has exactly the fields its type requires.
[[nodiscard]] auto shape_error(const GenericEvent & e, Dialect dialect) -> std::optional<std::string>;

/// Parameters of the virtual state, as named by the dependency tables.
enum class Param
{
    N,
    Sigma,
    delta,
    current,
    V,
    C,
    D,
    A,
    E,
    R,
    S_c,
    S_e
};

[[nodiscard]] auto to_string(Param p) -> std::string_view;
[[nodiscard]] auto parse_param(std::string_view s) -> std::optional<Param>;

enum class Guard
{
    G1,
    G2,
    G3,
    G4,
    G5
};

using GuardSet = std::set<Guard>;
[[nodiscard]] auto to_string(Guard g) -> std::string_view;
[[nodiscard]] auto default_guards() -> GuardSet;
[[nodiscard]] auto all_guards() -> GuardSet;

// Records every parameter a replay reads or writes. Accesses to parameters in
// `forbidden` are logged as violations.
struct AccessAudit
{
    std::set<Param> read;
    std::set<Param> written;
    std::set<Param> forbidden;
    std::vector<std::string> violations;

    auto note(Param p, bool write, EventType rule) -> void;
};

struct SemanticsOptions
{
    bool strict_reduce = false;  // reduce also retires (c, a) from A
    std::set<EventType> actions{all_event_types().begin(), all_event_types().end()};
    bool track_solved = true;  // parameter E is part of the state
    std::shared_ptr<AccessAudit> audit;
};

/// The explanation-based profile: no jumpTo, no solved, E dropped.
[[nodiscard]] auto palm_profile_options() -> SemanticsOptions;

class RuleViolation : public std::runtime_error
{
  public:
    RuleViolation(EventType rule, std::string condition);

    EventType rule;
    std::string condition;
};

class StoreInvariantError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

// Store predicates. Each is a single function so alternative readings can be
// swapped without touching the rules.

/// sigma = constraints of A, S_c, E (when tracked) and R; throws
/// StoreInvariantError if the parts overlap or sigma is not within C.
[[nodiscard]] auto store(const SolverState & s, bool include_solved = true) -> std::set<ConstraintId>;
[[nodiscard]] auto constraint_false(const SolverState & s, const ConstraintId & c) -> bool;
[[nodiscard]] auto constraint_solved(const SolverState & s, const ConstraintId & c) -> bool;
/// a is bottom, or a concerns a variable of c (every constraint watches all kinds).
[[nodiscard]] auto watches(const ConstraintDecl & c, const SolverEvent & a) -> bool;
/// c sleeps and watches a.
[[nodiscard]] auto awcond(const SolverState & s, const ConstraintId & c, const SolverEvent & a) -> bool;
/// First sleeping constraint (id order) that a would wake.
[[nodiscard]] auto acting_constraint(const SolverState & s, const SolverEvent & a) -> std::optional<ConstraintId>;
/// Propagation at rest with something left to branch on.
[[nodiscard]] auto is_choice_point(const SolverState & s) -> bool;
[[nodiscard]] auto is_solution_state(const SolverState & s, bool include_solved = true) -> bool;
[[nodiscard]] auto is_failure_state(const SolverState & s) -> bool;

/// Solver events for a domain change: dom always, min / max when that bound
/// moved, val when the result is a singleton. Nothing for an emptied domain.
[[nodiscard]] auto events_for_change(const VarId & v, const FiniteDomain & before, const FiniteDomain & after)
    -> std::vector<SolverEvent>;
[[nodiscard]] auto wake_kind_for_change(const FiniteDomain & before, const FiniteDomain & after) -> WakeKind;

using GenericVirtualTrace = VirtualTrace<GenTraState, EventType>;
using GenericActualTrace = ActualTrace<GenTraState, GenericEvent>;

class GenTra4CP
{
  public:
    using State = GenTraState;
    using Action = EventType;
    using Actual = GenericEvent;

    explicit GenTra4CP(SemanticsOptions options = {});

    [[nodiscard]] auto options() const -> const SemanticsOptions & { return _options; }

    [[nodiscard]] auto is_initial(const State & s) const -> bool;
    [[nodiscard]] auto is_actual(const Actual & a) const -> bool;
    [[nodiscard]] auto transition(const State & s, Action r, const State & next) const -> bool;
    /// Attribute record computed from the state delta; throws if (s, r, next) is not a transition.
    [[nodiscard]] auto extract_local(const State & s, Action r, const State & next) const -> Actual;
    /// Throws RuleViolation naming the rule and the failed condition.
    [[nodiscard]] auto reconstruct_local(const State & s, const Actual & a) const -> std::pair<Action, State>;
    [[nodiscard]] auto apply(const State & s, const Actual & a) const -> State;

  private:
    SemanticsOptions _options;
};

struct GuardViolation
{
    std::size_t index = 0;
    Guard guard = Guard::G1;
    std::string message;
};

struct GuardReport
{
    std::vector<GuardViolation> violations;

    [[nodiscard]] auto ok() const -> bool { return violations.empty(); }
};

/// Guards are evaluated on the state in which each event is applied.
[[nodiscard]] auto check_guards(const GenericVirtualTrace & vt, const GuardSet & guards = default_guards()) -> GuardReport;

struct ValidationOptions
{
    SemanticsOptions semantics;
    GuardSet guards = default_guards();
};

[[nodiscard]] auto palm_profile_validation() -> ValidationOptions;

struct ValidationReport
{
    bool replayed = false;
    std::size_t events = 0;
    std::optional<std::size_t> failed_index;
    std::string rule;
    std::string condition;
    GenericVirtualTrace virtual_trace;
    GuardReport guards;

    [[nodiscard]] auto ok() const -> bool { return replayed && guards.ok(); }
};

[[nodiscard]] auto validate(const GenericActualTrace & at, const ValidationOptions & options = {}) -> ValidationReport;

}
