#include <gentrace/constraints.hpp>

#include <cctype>
#include <set>
#include <string_view>

using std::map;
using std::string;
using std::vector;

namespace gentrace {

namespace
{
    struct NaturalKey
    {
        std::string_view stem;
        bool has_number = false;
        long long number = 0;
    };

    auto split(std::string_view s) -> NaturalKey
    {
        std::size_t i = s.size();
        while (i > 0 && std::isdigit(static_cast<unsigned char>(s[i - 1])))
            --i;
        if (i == s.size() || s.size() - i > 17)
            return {s};
        NaturalKey k{s.substr(0, i), true, 0};
        for (std::size_t j = i; j < s.size(); ++j)
            k.number = k.number * 10 + (s[j] - '0');
        if (! k.stem.empty() && k.stem.back() == '-') {
            k.stem.remove_suffix(1);
            k.number = -k.number;
        }
        return k;
    }

    auto dom(const Domains & d, const VarId & v) -> const FiniteDomain &
    {
        auto it = d.find(v);
        if (it == d.end())
            throw ConstraintError("no domain for variable " + v.name);
        return it->second;
    }

    auto element_range(const ConstraintDecl & c) -> FiniteDomain
    {
        return FiniteDomain::range(c.index_base, c.index_base + static_cast<Value>(c.list.size()) - 1);
    }

    auto at(const ConstraintDecl & c, Value i) -> Value
    {
        return c.list[static_cast<std::size_t>(i - c.index_base)];
    }
}

auto natural_compare(const string & a, const string & b) -> std::strong_ordering
{
    auto ka = split(a), kb = split(b);
    if (auto cmp = ka.stem <=> kb.stem; cmp != 0)
        return cmp;
    if (ka.has_number != kb.has_number)
        return ka.has_number <=> kb.has_number;
    if (auto cmp = ka.number <=> kb.number; cmp != 0)
        return cmp;
    return a <=> b;
}

auto check_well_formed(const ConstraintDecl & c) -> void
{
    std::size_t expected = c.kind == ConstraintKind::x_eq_c ? 1 : 2;
    if (c.vars.size() != expected)
        throw ConstraintError("wrong arity for " + to_string(c));
    if (expected == 2 && c.vars[0] == c.vars[1])
        throw ConstraintError("repeated variable in " + to_string(c));
    if (c.kind == ConstraintKind::element && c.list.empty())
        throw ConstraintError("element over an empty list");
    if (c.kind == ConstraintKind::element && c.index_base != 0 && c.index_base != 1)
        throw ConstraintError("element index base must be 0 or 1");
    if (c.kind != ConstraintKind::element && ! c.list.empty())
        throw ConstraintError("unexpected list argument in " + to_string(c));
}

auto make_element(VarId index, vector<Value> list, VarId value, int index_base) -> ConstraintDecl
{
    return ConstraintDecl{ConstraintKind::element, {std::move(index), std::move(value)}, std::move(list), 0, index_base};
}

auto make_eq(VarId x, VarId y) -> ConstraintDecl
{
    return ConstraintDecl{ConstraintKind::x_eq_y, {std::move(x), std::move(y)}, {}, 0, 1};
}

auto make_eqc(VarId x, Value k) -> ConstraintDecl
{
    return ConstraintDecl{ConstraintKind::x_eq_c, {std::move(x)}, {}, k, 1};
}

auto make_neq(VarId x, VarId y) -> ConstraintDecl
{
    return ConstraintDecl{ConstraintKind::x_neq_y, {std::move(x), std::move(y)}, {}, 0, 1};
}

auto holds(const ConstraintDecl & c, const map<VarId, Value> & a) -> bool
{
    auto val = [&](const VarId & v) {
        auto it = a.find(v);
        if (it == a.end())
            throw ConstraintError("unassigned variable " + v.name);
        return it->second;
    };
    switch (c.kind) {
    case ConstraintKind::element: {
        Value i = val(c.vars[0]);
        if (i < c.index_base || i >= c.index_base + static_cast<Value>(c.list.size()))
            return false;
        return at(c, i) == val(c.vars[1]);
    }
    case ConstraintKind::x_eq_y: return val(c.vars[0]) == val(c.vars[1]);
    case ConstraintKind::x_eq_c: return val(c.vars[0]) == c.constant;
    case ConstraintKind::x_neq_y: return val(c.vars[0]) != val(c.vars[1]);
    }
    return false;
}

auto filter(const ConstraintDecl & c, const Domains & d) -> Domains
{
    Domains out;
    switch (c.kind) {
    case ConstraintKind::element: {
        const auto & di = dom(d, c.vars[0]);
        const auto & dv = dom(d, c.vars[1]);
        vector<Value> index, value;
        for (Value i : di.intersect(element_range(c)).values())
            if (dv.contains(at(c, i))) {
                index.push_back(i);
                value.push_back(at(c, i));
            }
        out[c.vars[0]] = FiniteDomain::of(index);
        out[c.vars[1]] = dv.intersect(FiniteDomain::of(value));
        break;
    }
    case ConstraintKind::x_eq_y: {
        auto both = dom(d, c.vars[0]).intersect(dom(d, c.vars[1]));
        out[c.vars[0]] = both;
        out[c.vars[1]] = both;
        break;
    }
    case ConstraintKind::x_eq_c:
        out[c.vars[0]] = dom(d, c.vars[0]).intersect(FiniteDomain::singleton(c.constant));
        break;
    case ConstraintKind::x_neq_y: {
        const auto & dx = dom(d, c.vars[0]);
        const auto & dy = dom(d, c.vars[1]);
        out[c.vars[0]] = dy.is_singleton() ? dx.subtract(dy) : (dy.empty() ? FiniteDomain{} : dx);
        out[c.vars[1]] = dx.is_singleton() ? dy.subtract(dx) : (dx.empty() ? FiniteDomain{} : dy);
        break;
    }
    }
    return out;
}

auto is_false(const ConstraintDecl & c, const Domains & d) -> bool
{
    for (const auto & v : c.vars)
        if (dom(d, v).empty())
            return true;
    for (const auto & [v, fd] : filter(c, d))
        if (fd.empty())
            return true;
    return false;
}

auto is_solved(const ConstraintDecl & c, const Domains & d) -> bool
{
    if (is_false(c, d))
        return false;
    switch (c.kind) {
    case ConstraintKind::element: {
        const auto & di = dom(d, c.vars[0]);
        const auto & dv = dom(d, c.vars[1]);
        if (! dv.is_singleton() || ! di.subset_of(element_range(c)))
            return false;
        for (Value i : di.values())
            if (at(c, i) != dv.min())
                return false;
        return true;
    }
    case ConstraintKind::x_eq_y: {
        const auto & dx = dom(d, c.vars[0]);
        return dx.is_singleton() && dx == dom(d, c.vars[1]);
    }
    case ConstraintKind::x_eq_c: return dom(d, c.vars[0]) == FiniteDomain::singleton(c.constant);
    case ConstraintKind::x_neq_y: return dom(d, c.vars[0]).disjoint_from(dom(d, c.vars[1]));
    }
    return false;
}

auto to_string(const ConstraintDecl & c) -> string
{
    auto args = [&](const vector<string> & parts) {
        string s = "(";
        for (std::size_t i = 0; i < parts.size(); ++i)
            s += (i ? "," : "") + parts[i];
        return s + ")";
    };
    auto name = [&](std::size_t i) { return i < c.vars.size() ? c.vars[i].name : string("?"); };
    switch (c.kind) {
    case ConstraintKind::element: {
        string list = "[";
        for (std::size_t i = 0; i < c.list.size(); ++i)
            list += (i ? "," : "") + std::to_string(c.list[i]);
        list += "]";
        return string(c.index_base == 0 ? "element0" : "element") + args({name(0), list, name(1)});
    }
    case ConstraintKind::x_eq_y: return "x_eq_y" + args({name(0), name(1)});
    case ConstraintKind::x_eq_c: return "x_eq_c" + args({name(0), std::to_string(c.constant)});
    case ConstraintKind::x_neq_y: return "x_neq_y" + args({name(0), name(1)});
    }
    return "?";
}

}
