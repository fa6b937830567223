#include "generators.hpp"

#include <gentrace/constraints.hpp>
#include <gentrace/domain.hpp>

#include <doctest.h>

#include <algorithm>
#include <set>

using namespace gentrace;

namespace {

auto as_set(const FiniteDomain & d) -> std::set<Value>
{
    auto v = d.values();
    return {v.begin(), v.end()};
}

auto from_set(const std::set<Value> & s) -> FiniteDomain { return FiniteDomain::of(std::vector<Value>(s.begin(), s.end())); }

// Oracle: a value survives when some full tuple over the constraint's
// variables holds and uses it.
auto oracle_filter(const ConstraintDecl & c, const Domains & d) -> std::map<VarId, std::set<Value>>
{
    std::map<VarId, std::set<Value>> out;
    for (const auto & v : c.vars)
        out[v];
    std::vector<std::vector<Value>> doms;
    for (const auto & v : c.vars)
        doms.push_back(d.at(v).values());
    std::vector<std::size_t> at(doms.size(), 0);
    if (std::any_of(doms.begin(), doms.end(), [](const auto & x) { return x.empty(); }))
        return out;
    while (true) {
        std::map<VarId, Value> a;
        for (std::size_t i = 0; i < doms.size(); ++i)
            a[c.vars[i]] = doms[i][at[i]];
        if (holds(c, a))
            for (const auto & [v, x] : a)
                out[v].insert(x);
        std::size_t i = 0;
        while (i < at.size() && ++at[i] == doms[i].size())
            at[i++] = 0;
        if (i == at.size())
            break;
    }
    return out;
}

auto all_tuples_hold(const ConstraintDecl & c, const Domains & d) -> bool
{
    std::vector<std::vector<Value>> doms;
    for (const auto & v : c.vars)
        doms.push_back(d.at(v).values());
    std::vector<std::size_t> at(doms.size(), 0);
    while (true) {
        std::map<VarId, Value> a;
        for (std::size_t i = 0; i < doms.size(); ++i)
            a[c.vars[i]] = doms[i][at[i]];
        if (! holds(c, a))
            return false;
        std::size_t i = 0;
        while (i < at.size() && ++at[i] == doms[i].size())
            at[i++] = 0;
        if (i == at.size())
            return true;
    }
}

}

TEST_CASE("domain rendering")
{
    auto d = FiniteDomain::of({0, 1, 3, 4, 6}).unite(FiniteDomain::range(8, default_mx));
    CHECK(d.to_string() == "[0-1,3-4,6,8-mx]");
    CHECK(FiniteDomain::range(0, default_mx).to_string() == "[0-mx]");
    CHECK(FiniteDomain::of({5, 7}).to_string() == "[5,7]");
    CHECK(FiniteDomain{}.to_string() == "[]");
    CHECK(FiniteDomain::range(0, 20).to_string(20) == "[0-mx]");
}

TEST_CASE("domain normalisation")
{
    FiniteDomain d({{5, 6}, {0, 1}, {2, 3}, {9, 8}});
    CHECK(d.intervals() == std::vector<Interval>{{0, 3}, {5, 6}});
    CHECK(d.size() == 6);
    CHECK(FiniteDomain::singleton(4).is_singleton());
    CHECK(FiniteDomain::range(0, default_mx).size() == static_cast<std::uint64_t>(default_mx) + 1);
}

TEST_CASE("property: set operations agree with std::set")
{
    testgen::Rng rng(3);
    for (int k = 0; k < 2000; ++k) {
        auto a = testgen::small_domain(rng);
        auto b = testgen::small_domain(rng);
        auto sa = as_set(a), sb = as_set(b);
        std::set<Value> u, i, s;
        std::set_union(sa.begin(), sa.end(), sb.begin(), sb.end(), std::inserter(u, u.end()));
        std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(), std::inserter(i, i.end()));
        std::set_difference(sa.begin(), sa.end(), sb.begin(), sb.end(), std::inserter(s, s.end()));
        REQUIRE(a.unite(b) == from_set(u));
        REQUIRE(a.intersect(b) == from_set(i));
        REQUIRE(a.subtract(b) == from_set(s));
        REQUIRE(a.subset_of(b) == std::includes(sb.begin(), sb.end(), sa.begin(), sa.end()));
        REQUIRE(a.disjoint_from(b) == i.empty());
        REQUIRE(a.size() == sa.size());
        REQUIRE(a.min() == *sa.begin());
        REQUIRE(a.max() == *sa.rbegin());
        for (Value v = -1; v < 9; ++v)
            REQUIRE(a.contains(v) == sa.contains(v));
    }
}

TEST_CASE("constraint construction")
{
    CHECK_THROWS_AS(check_well_formed(make_eq(VarId{"A"}, VarId{"A"})), ConstraintError);
    CHECK_THROWS_AS(check_well_formed(make_element(VarId{"I"}, {}, VarId{"A"})), ConstraintError);
    CHECK_THROWS_AS(check_well_formed(make_element(VarId{"I"}, {1}, VarId{"A"}, 2)), ConstraintError);
    CHECK(to_string(make_element(VarId{"v1"}, {2, 5, 7}, VarId{"v2"})) == "element(v1,[2,5,7],v2)");
    CHECK(natural_compare("c2", "c10") == std::strong_ordering::less);
    CHECK(VarId{"v9"} < VarId{"v10"});
}

TEST_CASE("element filtering on the worked example")
{
    Domains d{{VarId{"I"}, FiniteDomain::range(0, default_mx)}, {VarId{"A"}, FiniteDomain::range(0, default_mx)}};
    auto one = filter(make_element(VarId{"I"}, {2, 5, 7}, VarId{"A"}), d);
    CHECK(one.at(VarId{"I"}) == FiniteDomain::range(1, 3));
    CHECK(one.at(VarId{"A"}) == FiniteDomain::of({2, 5, 7}));
    auto zero = filter(make_element(VarId{"I"}, {2, 5, 7}, VarId{"A"}, 0), d);
    CHECK(zero.at(VarId{"I"}) == FiniteDomain::range(0, 2));
}

TEST_CASE("property: filter, is_false and is_solved agree with tuple enumeration")
{
    testgen::Rng rng(5);
    std::vector<std::string> names{"A", "B", "C"};
    for (int k = 0; k < 3000; ++k) {
        auto c = testgen::random_decl(rng, names);
        Domains d;
        for (const auto & n : names)
            d[VarId{n}] = testgen::chance(rng, 0.1) ? FiniteDomain{} : testgen::small_domain(rng);
        auto want = oracle_filter(c, d);
        auto got = filter(c, d);
        INFO(to_string(c));
        bool none = false;
        for (const auto & [v, s] : want) {
            REQUIRE(got.at(v) == from_set(s));
            none = none || s.empty();
        }
        REQUIRE(is_false(c, d) == none);
        bool any_empty = std::any_of(c.vars.begin(), c.vars.end(), [&](const VarId & v) { return d.at(v).empty(); });
        REQUIRE(is_solved(c, d) == (! any_empty && all_tuples_hold(c, d)));
    }
}
