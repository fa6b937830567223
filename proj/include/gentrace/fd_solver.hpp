#pragma once

// A small depth-first finite-domain solver whose every state change is one
// generic trace event. Propagation is the schedule / awake / reduce* /
// (suspend | solved | reject) loop; search posts branch constraints under a
// newChild node and backtracks with deactivate, restore and jumpTo.

#include <gentrace/constraints.hpp>
#include <gentrace/gentra4cp.hpp>

#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace gentrace {

struct ProblemVariable
{
    std::string name;
    FiniteDomain domain;
};

struct ProblemConstraint
{
    std::string label;    // user-facing label, informational only
    ConstraintDecl decl;  // variables referenced by problem name
};

// Variables and constraints are referenced by their problem names; the solver
// assigns trace ids v1, v2, ... and c1, c2, ... in declaration order.
struct Problem
{
    std::vector<ProblemVariable> variables;
    std::vector<ProblemConstraint> constraints;
    std::vector<std::vector<ConstraintDecl>> branches;  // disjunctions, explored in order
    std::vector<std::string> label_order;                // labeled first, then the rest

    /// Throws ConstraintError on undeclared or duplicate names and ill-formed constraints.
    auto check() const -> void;
};

using Assignment = std::map<std::string, Value>;

/// All assignments (over the problem's variables) satisfying every constraint
/// and one alternative of each disjunction. Exponential; oracle use only.
[[nodiscard]] auto brute_force_solutions(const Problem & p, std::uint64_t max_tuples = 1u << 22) -> std::vector<Assignment>;

struct SolveOptions
{
    bool strict_reduce = false;
    std::size_t max_events = 1'000'000;
    std::size_t max_nodes = 100'000;
    bool keep_virtual = true;
};

struct SolveResult
{
    std::vector<Assignment> solutions;
    GenericActualTrace actual;
    GenericVirtualTrace virtual_trace;
    std::map<VarId, std::string> names;  // trace id -> problem name
};

class LimitExceeded : public std::runtime_error
{
  public:
    LimitExceeded(const std::string & what, GenericActualTrace partial) :
        std::runtime_error(what),
        partial(std::move(partial))
    {
    }

    GenericActualTrace partial;
};

[[nodiscard]] auto solve(const Problem & p, const SolveOptions & options = {}) -> SolveResult;

struct PropagationResult
{
    GenTraState state;
    std::vector<GenericEvent> events;
    bool consistent = true;  // false when a constraint was rejected
};

/// Runs the propagation loop from s to a fixpoint or the first rejection.
[[nodiscard]] auto propagate(const GenTraState & s, const SolveOptions & options = {}) -> PropagationResult;

}
