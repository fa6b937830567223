#pragma once

// Identifiers and the supported finite-domain constraints, with their
// declarative reading (holds), the two store predicates (false / solved) and
// the exact filtering used by both solvers.

#include <gentrace/domain.hpp>

#include <compare>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gentrace {

/// Orders "c2" before "c10": alphabetic stem, then numeric suffix.
[[nodiscard]] auto natural_compare(const std::string & a, const std::string & b) -> std::strong_ordering;

template <typename Tag>
struct Id
{
    std::string name;

    auto operator<=>(const Id & other) const -> std::strong_ordering { return natural_compare(name, other.name); }
    auto operator==(const Id & other) const -> bool { return name == other.name; }
};

struct VarTag;
struct ConstraintTag;
using VarId = Id<VarTag>;
using ConstraintId = Id<ConstraintTag>;

using Domains = std::map<VarId, FiniteDomain>;

enum class ConstraintKind
{
    element,  // V = L[I], I indexed from index_base
    x_eq_y,
    x_eq_c,
    x_neq_y
};

struct ConstraintDecl
{
    ConstraintKind kind = ConstraintKind::x_eq_y;
    std::vector<VarId> vars;  // element: {I, V}; x_eq_c: {X}; binary: {X, Y}
    std::vector<Value> list;  // element only
    Value constant = 0;       // x_eq_c only
    int index_base = 1;       // element only

    auto operator<=>(const ConstraintDecl &) const = default;
    auto operator==(const ConstraintDecl &) const -> bool = default;
};

class ConstraintError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

/// Throws ConstraintError on arity or argument-shape mismatches.
auto check_well_formed(const ConstraintDecl & c) -> void;

[[nodiscard]] auto make_element(VarId index, std::vector<Value> list, VarId value, int index_base = 1) -> ConstraintDecl;
[[nodiscard]] auto make_eq(VarId x, VarId y) -> ConstraintDecl;
[[nodiscard]] auto make_eqc(VarId x, Value k) -> ConstraintDecl;
[[nodiscard]] auto make_neq(VarId x, VarId y) -> ConstraintDecl;

[[nodiscard]] auto holds(const ConstraintDecl & c, const std::map<VarId, Value> & assignment) -> bool;

/// Exact (domain-consistent) filtering: the largest sub-domains keeping only
/// supported values. A variable with no support gets the empty domain.
[[nodiscard]] auto filter(const ConstraintDecl & c, const Domains & d) -> Domains;

/// No supporting tuple exists (covers any empty variable domain).
[[nodiscard]] auto is_false(const ConstraintDecl & c, const Domains & d) -> bool;

/// Every combination of values in the current domains satisfies c.
[[nodiscard]] auto is_solved(const ConstraintDecl & c, const Domains & d) -> bool;

/// Canonical term, e.g. "element(v1,[2,5,7],v2)", "element0(...)", "x_eq_c(v2,2)".
[[nodiscard]] auto to_string(const ConstraintDecl & c) -> std::string;

}
