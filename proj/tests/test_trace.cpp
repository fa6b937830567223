#include "properties.hpp"

#include <doctest.h>

using namespace gentrace;
using testgen::IntSet;
using testgen::IntTrace;

namespace {

const IntTrace t3{0, {1, 2, 3}};

}

TEST_CASE("prefix")
{
    CHECK(prefix(t3, 0) == IntTrace{0, {}});
    CHECK(prefix(t3, 3) == t3);
    CHECK(prefix(t3, 2) == IntTrace{0, {1, 2}});
    CHECK_THROWS_AS((void)prefix(t3, 4), TraceError);
    CHECK(is_prefix_of(prefix(t3, 1), t3));
    CHECK_FALSE(is_prefix_of(IntTrace{1, {1}}, t3));
    CHECK_FALSE(is_prefix_of(IntTrace{0, {2}}, t3));
}

TEST_CASE("all_prefixes")
{
    CHECK(all_prefixes(IntSet{IntTrace{0, {1, 2}}}).size() == 3);
    CHECK(all_prefixes(IntSet{}).empty());
    IntTrace a{0, {1, 2, 3}};
    IntTrace b{0, {1, 5}};
    auto both = all_prefixes(IntSet{a, b});
    CHECK(both.size() == a.size() + b.size());
    CHECK(both == testgen::oracle_prefixes(IntSet{a, b}));
}

TEST_CASE("concat and append")
{
    Segment<int> e;
    Segment<int> s{{4, 5}};
    CHECK(concat(e, s) == s);
    CHECK(concat(s, e) == s);
    auto three = concat(Segment<int>{{1, 2}}, Segment<int>{{3}});
    CHECK(three.events == std::vector<int>{1, 2, 3});
    CHECK(three.size() == 3);
    CHECK(append(IntTrace{0, {1}}, s) == IntTrace{0, {1, 4, 5}});
}

TEST_CASE("lattice operations")
{
    auto top = all_prefixes(IntSet{t3});
    auto x = all_prefixes(IntSet{prefix(t3, 1)});
    CHECK(domain_meet(x, IntSet{}).empty());
    CHECK(domain_join(x, top) == top);
    CHECK(domain_meet(x, top) == x);

    IntSet open{IntTrace{0, {1, 2}}};
    CHECK_FALSE(is_prefix_closed(open));
    CHECK_THROWS_AS((void)domain_join(open, top), TraceError);
    CHECK_THROWS_AS((void)domain_meet(top, open), TraceError);
}

TEST_CASE("opaque traces reject mixed kinds")
{
    OpaqueTrace v{"s0", {TraceEvent{VirtualPayload{"post", "s1"}}}};
    OpaqueTrace a{"s0", {TraceEvent{ActualPayload{{"post", "c1"}}}}};
    CHECK(all_prefixes(std::set<OpaqueTrace>{v}).size() == 2);
    CHECK_THROWS_AS((void)all_prefixes(std::set<OpaqueTrace>{v, a}), TraceError);
    OpaqueTrace mixed{"s0", {v.events[0], a.events[0]}};
    CHECK_THROWS_AS((void)all_prefixes(std::set<OpaqueTrace>{mixed}), TraceError);
}

TEST_CASE("property: lattice laws over random prefix-closed domains")
{
    testgen::Rng rng(11);
    for (int k = 0; k < 500; ++k) {
        auto bad = testgen::lattice_case(rng);
        INFO("case " << k);
        CHECK_MESSAGE(bad.empty(), (bad.empty() ? "" : bad.front()));
    }
}
