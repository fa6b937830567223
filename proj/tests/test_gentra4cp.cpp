#include "properties.hpp"
#include "scripts.hpp"

#include <gentrace/text_format.hpp>

#include <doctest.h>

using namespace gentrace;
using namespace gentrace::testgen;

namespace {

auto fig8_prefix() -> Script
{
    Script s;
    s.var("v1", FiniteDomain::range(0, default_mx))
        .var("v2", FiniteDomain::range(0, default_mx))
        .con("c1", make_element(vid("v1"), {2, 5, 7}, vid("v2")))
        .on(EventType::post, "c1");
    return s;
}

auto section6() -> Problem
{
    Problem p;
    p.variables = {{"I", FiniteDomain::range(0, default_mx)}, {"A", FiniteDomain::range(0, default_mx)}};
    p.constraints = {{"c1", make_element(vid("I"), {2, 5, 7}, vid("A"))}};
    p.branches = {{make_eq(vid("A"), vid("I")), make_eqc(vid("A"), 2)}};
    return p;
}

auto first_index(const GenericActualTrace & t, EventType type) -> std::size_t
{
    for (std::size_t i = 0; i < t.size(); ++i)
        if (t.events[i].type == type)
            return i;
    return t.size();
}

}

TEST_CASE("newVariable adds to V and D")
{
    Script s;
    s.var("v1", FiniteDomain::range(0, default_mx));
    CHECK(s.state.solver.variables.contains(vid("v1")));
    CHECK(s.state.solver.domains.at(vid("v1")) == FiniteDomain::range(0, default_mx));
    CHECK(s.state.solver.initial_domains.at(vid("v1")) == FiniteDomain::range(0, default_mx));
    CHECK_THROWS_AS(s.var("v1", FiniteDomain::range(0, 1)), RuleViolation);
}

TEST_CASE("newConstraint adds to C and checks Var(c)")
{
    Script s;
    s.var("v1", FiniteDomain::range(0, 3)).con("c1", make_eqc(vid("v1"), 2));
    CHECK(s.state.solver.constraints.contains(cid("c1")));
    CHECK_THROWS_AS(s.con("c2", make_eqc(vid("v9"), 2)), RuleViolation);
}

TEST_CASE("reduce follows Fig 1 and extract gives the attribute record")
{
    auto s = fig8_prefix();
    auto before = s.state;
    s.reduce("c1", "v1", FiniteDomain::of({0}).unite(FiniteDomain::range(4, default_mx)));
    CHECK(s.state.solver.domains.at(vid("v1")) == FiniteDomain::range(1, 3));
    const auto & record = s.trace.events.back();
    CHECK(s.os.extract_local(before, EventType::reduce, s.state) == record);
    CHECK_FALSE(record.generated.empty());
    for (const auto & g : record.generated)
        CHECK(std::find(s.state.solver.pending.begin(), s.state.solver.pending.end(), g) != s.state.solver.pending.end());
    CHECK(s.state.solver.active.contains({cid("c1"), bottom_event()}));

    SUBCASE("strict mode retires the active pair")
    {
        SemanticsOptions strict;
        strict.strict_reduce = true;
        GenTra4CP os(strict);
        auto next = os.apply(before, record);
        CHECK(next.solver.domains.at(vid("v1")) == FiniteDomain::range(1, 3));
        CHECK_FALSE(next.solver.active.contains({cid("c1"), bottom_event()}));
    }
    SUBCASE("delta outside D(v) is rejected")
    {
        auto bad = s.make(EventType::reduce);
        bad.constraint = cid("c1");
        bad.variable = vid("v1");
        bad.domain = FiniteDomain::of({0});
        bad.event = bottom_event();
        CHECK_THROWS_AS((void)s.os.apply(s.state, bad), RuleViolation);
    }
}

TEST_CASE("restore unions a disjoint delta")
{
    auto s = fig8_prefix();
    s.reduce("c1", "v1", FiniteDomain::of({0}).unite(FiniteDomain::range(4, default_mx)));
    auto e = s.make(EventType::restore);
    e.variable = vid("v1");
    e.domain = FiniteDomain::of({0});
    s.push(e);
    CHECK(s.state.solver.domains.at(vid("v1")) == FiniteDomain::range(0, 3));
    auto again = s.make(EventType::restore);
    again.variable = vid("v1");
    again.domain = FiniteDomain::of({0});
    CHECK_THROWS_AS((void)s.os.apply(s.state, again), RuleViolation);
}

TEST_CASE("newChild, deactivate and awake records")
{
    Script s;
    s.var("v1", FiniteDomain::range(0, 3)).con("c1", make_eqc(vid("v1"), 2));
    auto before = s.state;
    s.node(EventType::new_child, 1);
    CHECK(s.os.extract_local(before, EventType::new_child, s.state).node == NodeId{1});
    CHECK(s.state.tree.current == 1);
    CHECK(s.state.tree.current_depth() == 1);
    CHECK(s.trace.events.back().depth == 0);

    s.on(EventType::post, "c1").on(EventType::suspend, "c1");
    CHECK(s.state.solver.sleeping.contains(cid("c1")));
    s.with_event(EventType::awake, "c1", bottom_event());
    CHECK(s.state.solver.active.contains({cid("c1"), bottom_event()}));
    CHECK_FALSE(s.state.solver.sleeping.contains(cid("c1")));

    before = s.state;
    s.on(EventType::deactivate, "c1");
    auto rec = s.os.extract_local(before, EventType::deactivate, s.state);
    CHECK(rec.type == EventType::deactivate);
    CHECK(rec.constraint == cid("c1"));
    CHECK(store(s.state.solver).empty());
}

TEST_CASE("post of a constraint already in the store fails")
{
    Script s;
    s.var("v1", FiniteDomain::range(0, 3)).con("c1", make_eqc(vid("v1"), 2)).on(EventType::post, "c1");
    CHECK_THROWS_AS(s.on(EventType::post, "c1"), RuleViolation);
}

TEST_CASE("chrono and depth are checked")
{
    Script s;
    auto e = s.make(EventType::new_variable);
    e.variable = vid("v1");
    e.domain = FiniteDomain::range(0, 1);
    auto wrong = e;
    wrong.chrono += 1;
    CHECK_THROWS_AS((void)s.os.apply(s.state, wrong), RuleViolation);
    wrong = e;
    wrong.depth = 3;
    CHECK_THROWS_AS((void)s.os.apply(s.state, wrong), RuleViolation);
}

TEST_CASE("jumpTo returns to the snapshot of a choice point")
{
    Script s;
    s.var("v1", FiniteDomain::range(0, 3)).node(EventType::new_child, 1);
    auto at_one = s.state.solver;
    s.con("c1", make_eqc(vid("v1"), 5)).on(EventType::post, "c1").with_event(EventType::reject, "c1", bottom_event());
    s.node(EventType::failure, 2);
    auto e = s.make(EventType::jump_to);
    e.node = 1;
    e.from_node = 2;
    s.push(e);
    CHECK(s.state.tree.current == 1);
    CHECK(s.state.solver == at_one);
    CHECK(s.state.solver.domains == s.state.tree.snapshot(1).domains);

    auto replay = validate(s.trace, palm_profile_validation());
    CHECK_FALSE(replay.replayed);
    CHECK(replay.failed_index == s.trace.size() - 1);
}

TEST_CASE("solved moves a constraint to E")
{
    Script s;
    s.var("v1", FiniteDomain::of({2})).con("c1", make_eqc(vid("v1"), 2)).on(EventType::post, "c1");
    s.on(EventType::solved, "c1").node(EventType::solution, 1);
    CHECK(s.state.solver.solved.contains(cid("c1")));
    CHECK(validate(s.trace).ok());
    CHECK_FALSE(validate(s.trace, palm_profile_validation()).replayed);
}

TEST_CASE("store partition")
{
    SolverState s;
    CHECK(store(s).empty());
    s.constraints.emplace(cid("c1"), make_eqc(vid("v1"), 1));
    s.constraints.emplace(cid("c4"), make_eqc(vid("v1"), 2));
    s.active.insert({cid("c1"), bottom_event()});
    s.sleeping.insert(cid("c4"));
    CHECK(store(s) == std::set<ConstraintId>{cid("c1"), cid("c4")});
    s.rejected.insert(cid("c4"));
    CHECK_THROWS_AS((void)store(s), StoreInvariantError);
}

TEST_CASE("extract and reconstruct of the empty trace")
{
    GenTra4CP os;
    GenericVirtualTrace vt{initial_state(), {}};
    CHECK(extract(os, vt) == GenericActualTrace{initial_state(), {}});
    CHECK(reconstruct(os, GenericActualTrace{initial_state(), {}}) == vt);
    CHECK(check_faithful(os, std::span<const GenericVirtualTrace>{}).entries.empty());
    CHECK(check_faithful(os, std::span<const GenericVirtualTrace>{}).ok());
}

TEST_CASE("validate")
{
    auto empty = validate(GenericActualTrace{initial_state(), {}});
    CHECK(empty.ok());
    CHECK(empty.events == 0);

    auto r = solve(section6());
    auto ok = validate(r.actual);
    CHECK(ok.ok());
    CHECK(ok.virtual_trace == r.virtual_trace);

    auto bad = r.actual;
    auto k = first_index(bad, EventType::reduce);
    REQUIRE(k < bad.size());
    auto & e = bad.events[k];
    auto pre = r.virtual_trace.events[k - 1].state.solver.domains.at(*e.variable);
    e.domain = e.domain->unite(FiniteDomain::singleton(pre.max() + 1));
    auto report = validate(bad);
    CHECK_FALSE(report.ok());
    CHECK(report.failed_index == k);
    CHECK(report.rule == "reduce");
}

TEST_CASE("guards")
{
    auto r = solve(section6());
    CHECK(r.actual.events.back().type == EventType::solution);
    CHECK(check_guards(r.virtual_trace).ok());
    CHECK(check_guards(r.virtual_trace, all_guards()).ok());

    // G2 at a failure that follows a reject, as in Fig 8 lines 17 and 18
    auto reject = first_index(r.actual, EventType::reject);
    REQUIRE(reject + 1 < r.actual.size());
    CHECK(r.actual.events[reject + 1].type == EventType::failure);
    CHECK_FALSE(r.virtual_trace.events[reject].state.solver.rejected.empty());
    for (const auto & v : check_guards(r.virtual_trace, all_guards()).violations)
        CHECK(v.guard != Guard::G2);

    // The published listing omits solver events and opens with a choice
    // point before any variable exists, so it does not replay.
    ParseOptions lenient;
    lenient.mode = ParseMode::lenient;
    auto fig8 = to_actual_trace(parse_trace(fixture("fig8_left.trace"), lenient));
    auto v = validate(fig8);
    CHECK_FALSE(v.replayed);
    CHECK(v.failed_index == 0);

    auto good = g3_script(false);
    CHECK(validate(good.trace).ok());
    auto bad = g3_script(true);
    auto report = validate(bad.trace);
    CHECK(report.replayed);
    REQUIRE(report.guards.violations.size() == 1);
    CHECK(report.guards.violations[0].guard == Guard::G3);
    CHECK(report.guards.violations[0].index == g3_injected_index);
    CHECK(bad.trace.events[g3_injected_index].type == EventType::reduce);
}

TEST_CASE("G4 and G5 apply only when requested")
{
    Script t;
    t.var("v1", FiniteDomain::range(0, 3))
        .var("v2", FiniteDomain::range(0, 3))
        .con("c1", make_eqc(vid("v1"), 2))
        .con("c2", make_neq(vid("v1"), vid("v2")))
        .on(EventType::post, "c1")
        .on(EventType::suspend, "c1")
        .on(EventType::post, "c2")
        .with_event(EventType::awake, "c1", bottom_event());
    CHECK(validate(t.trace).ok());
    ValidationOptions all;
    all.guards = all_guards();
    auto report = validate(t.trace, all);
    REQUIRE(report.guards.violations.size() == 1);
    CHECK(report.guards.violations[0].guard == Guard::G4);
    CHECK(report.guards.violations[0].index == 7);
}

TEST_CASE("audit records parameter access")
{
    auto options = SemanticsOptions{};
    options.audit = std::make_shared<AccessAudit>();
    auto s = fig8_prefix();
    GenTra4CP os(options);
    (void)reconstruct(os, s.trace);
    CHECK(options.audit->written.contains(Param::V));
    CHECK(options.audit->written.contains(Param::A));
    CHECK(options.audit->violations.empty());
}

TEST_CASE("property: random solver runs are faithful and valid")
{
    Rng rng(101);
    for (int k = 0; k < 40; ++k) {
        auto p = random_problem(rng);
        auto c = solver_case(p);
        INFO("case " << k);
        CHECK(c.faithful_or_valid.empty());
        CHECK(c.oracle.empty());
    }
}

TEST_CASE("property: five-event prefixes round-trip")
{
    Rng rng(17);
    GenTra4CP os;
    for (int k = 0; k < 40; ++k) {
        auto r = solve(random_problem(rng));
        auto vt = prefix(r.virtual_trace, std::min<std::size_t>(5, r.virtual_trace.size()));
        CHECK(reconstruct(os, extract(os, vt)) == vt);
    }
}
