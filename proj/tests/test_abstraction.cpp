#include "properties.hpp"
#include "scripts.hpp"

#include <gentrace/abstraction.hpp>

#include <doctest.h>

using namespace gentrace;
using namespace gentrace::testgen;

namespace {

auto section6() -> Problem
{
    Problem p;
    p.variables = {{"I", FiniteDomain::range(0, default_mx)}, {"A", FiniteDomain::range(0, default_mx)}};
    p.constraints = {{"c1", make_element(vid("I"), {2, 5, 7}, vid("A"))}};
    p.branches = {{make_eq(vid("A"), vid("I")), make_eqc(vid("A"), 2)}};
    return p;
}

auto generic_initial(const GenericActualTrace & t) -> bool { return GenTra4CP{}.is_initial(t.initial_state); }

auto palm_samples() -> const PalmSolveResult &
{
    static const auto r = palm_solve(zero_based(section6()));
    return r;
}

auto profile_os() -> GenTra4CP { return project(GenTra4CP{}, palm_profile_projection()); }

using GenericDerivation = Derivation<GenericActualTrace, GenericActualTrace>;

}

TEST_CASE("projection of signatures")
{
    auto sig = gentra4cp_signature();
    auto same = project(sig, identity_projection(sig));
    CHECK(same.signature.params == sig.params);
    CHECK(same.signature.actions == sig.actions);
    CHECK(same.waived.empty());

    auto profile = project(sig, palm_profile_projection());
    CHECK_FALSE(profile.signature.params.contains("E"));
    CHECK_FALSE(profile.signature.actions.contains("jumpTo"));
    CHECK_FALSE(profile.signature.actions.contains("solved"));
    for (const auto & f : profile.waived)
        CHECK(f.waived_by.has_value());

    auto broken = identity_projection(sig);
    broken.kept_params.erase("D");
    CHECK_THROWS_AS((void)project(sig, broken), InvalidProjection);
    auto findings = projection_findings(sig, broken);
    CHECK(std::any_of(findings.begin(), findings.end(),
        [](const ProjectionFinding & f) { return f.subject == "reduce" && f.param == "D" && ! f.waived_by; }));

    auto unknown = identity_projection(sig);
    unknown.kept_params.insert("Z");
    CHECK_THROWS_AS((void)project(sig, unknown), InvalidProjection);
}

TEST_CASE("projection of the semantics")
{
    auto sig = gentra4cp_signature();
    auto same = project(GenTra4CP{}, identity_projection(sig));
    auto r = solve(section6());
    CHECK(validate(r.actual, {same.options(), default_guards()}).ok());
    auto audit = audited_replay(same, r.actual);
    CHECK(audit.violations.empty());

    auto profile = profile_os();
    CHECK_FALSE(profile.options().track_solved);
    CHECK_FALSE(profile.options().actions.contains(EventType::jump_to));
    auto generic = palm_to_generic(palm_samples().actual);
    auto replay = audited_replay(profile, generic);
    CHECK(replay.violations.empty());
    CHECK_FALSE(replay.read.contains(Param::E));
    CHECK_FALSE(replay.written.contains(Param::E));
}

TEST_CASE("palm_to_generic")
{
    GenericEvent e;
    e.chrono = 6;
    e.type = EventType::reduce;
    e.constraint = cid("c0");
    e.variable = vid("v0");
    e.domain = FiniteDomain::range(3, default_mx);
    e.event = bottom_event();
    e.wake = WakeKind::max;
    e.explanation = std::vector<ConstraintId>{cid("c0")};
    auto g = palm_event_to_generic(e);
    CHECK_FALSE(g.explanation.has_value());
    CHECK_FALSE(g.wake.has_value());
    CHECK(g.domain == e.domain);
    CHECK(g.constraint == e.constraint);

    CHECK(palm_to_generic(std::vector<GenericEvent>{}).events.empty());

    auto jump = e;
    jump.type = EventType::jump_to;
    CHECK_THROWS_AS((void)palm_event_to_generic(jump, 4), MappingError);

    auto mapped = palm_to_generic(palm_samples().actual);
    auto v = validate(mapped, palm_profile_validation());
    CHECK(v.ok());
    CHECK(v.guards.violations.empty());
    CHECK(v.virtual_trace == palm_virtual_to_generic(palm_samples().virtual_trace));
}

TEST_CASE("simulation")
{
    const auto & r = palm_samples();
    std::vector<PalmVirtualTrace> samples{r.virtual_trace};
    auto os = profile_os();
    auto ok = check_simulable(PalmOS{}, os, annex_mapping(), std::span<const PalmVirtualTrace>(samples));
    CHECK(ok.ok());
    CHECK(ok.transitions == r.virtual_trace.size());

    auto swapped = annex_mapping();
    std::swap(swapped.h[EventType::suspend], swapped.h[EventType::awake]);
    auto bad = check_simulable(PalmOS{}, os, swapped, std::span<const PalmVirtualTrace>(samples));
    REQUIRE(bad.violations.size() == 1);
    auto first_suspend = static_cast<std::size_t>(std::find_if(r.actual.events.begin(), r.actual.events.end(),
                                                      [](const GenericEvent & e) {
                                                          return e.type == EventType::suspend || e.type == EventType::awake;
                                                      })
        - r.actual.events.begin());
    CHECK(r.actual.events[first_suspend].type == EventType::suspend);
    CHECK(bad.violations[0].index == first_suspend);

    auto not_onto = annex_mapping();
    not_onto.h.erase(EventType::post);
    CHECK_FALSE(check_simulable(PalmOS{}, os, not_onto, std::span<const PalmVirtualTrace>(samples)).structural_ok);

    // a semantics simulates itself under the identity mapping
    GenTra4CP generic;
    StateMapping<GenTraState, EventType, GenTraState, EventType> id{[](const GenTraState & s) { return s; }, {}, {}};
    for (auto t : all_event_types()) {
        id.h[t] = t;
        id.derived_actions.insert(t);
    }
    std::vector<GenericVirtualTrace> fd{solve(section6()).virtual_trace};
    CHECK(check_simulable(generic, generic, id, std::span<const GenericVirtualTrace>(fd)).ok());
}

TEST_CASE("derivation chains")
{
    Rng rng(41);
    std::vector<GenericActualTrace> fd{solve(section6()).actual};
    // the chain check maps every prefix, so keep the samples short
    while (fd.size() < 11) {
        auto t = solve(random_problem(rng)).actual;
        if (t.size() <= 1500)
            fd.push_back(std::move(t));
    }
    std::span<const GenericActualTrace> samples(fd);

    auto id = identity_derivation<GenericActualTrace>();
    auto r = check_derivation<GenericActualTrace, GenericActualTrace>(id, samples, generic_initial);
    CHECK(r.ok());
    CHECK(r.contiguous == fd.size());

    auto drop_schedule = eventwise_derivation<GenTraState, GenericEvent, GenTraState, GenericEvent>(
        "drop schedule", [](const GenTraState & s) { return s; },
        [](const GenericEvent & e) -> std::optional<GenericEvent> {
            if (e.type == EventType::schedule)
                return std::nullopt;
            return e;
        });
    auto erased = check_derivation<GenericActualTrace, GenericActualTrace>(drop_schedule, samples, generic_initial);
    CHECK(erased.ok());

    // every prefix from size 3 on gains a duplicate of its third event
    GenericDerivation skip{"skip two", [](const GenericActualTrace & t) -> std::optional<GenericActualTrace> {
                               auto out = t;
                               if (t.size() >= 3)
                                   out.events.insert(out.events.begin() + 2, t.events[2]);
                               return out;
                           }};
    auto broken = check_derivation<GenericActualTrace, GenericActualTrace>(skip, samples, generic_initial);
    CHECK(broken.violations.size() == fd.size());
    CHECK(broken.violations[0].prefix == 3);

    GenericDerivation partial{"partial", [](const GenericActualTrace & t) -> std::optional<GenericActualTrace> {
                                  if (t.size() == 4)
                                      return std::nullopt;
                                  return t;
                              }};
    auto undefined = check_derivation<GenericActualTrace, GenericActualTrace>(partial, samples, generic_initial);
    CHECK(undefined.violations[0].prefix == 4);
}

TEST_CASE("composition of derivations")
{
    const auto & r = palm_samples();
    std::vector<PalmActualTrace> pt{r.actual};
    auto d = palm_derivation();
    auto with_id = compose(identity_derivation<GenericActualTrace>(), d);
    for (std::size_t i = 0; i <= r.actual.size(); i += 7)
        CHECK(with_id.map(prefix(r.actual, i)) == d.map(prefix(r.actual, i)));

    auto drop_schedule = eventwise_derivation<GenTraState, GenericEvent, GenTraState, GenericEvent>(
        "drop schedule", [](const GenTraState & s) { return s; },
        [](const GenericEvent & e) -> std::optional<GenericEvent> {
            if (e.type == EventType::schedule)
                return std::nullopt;
            return e;
        });
    auto both = compose(drop_schedule, d);
    auto report = check_derivation<PalmActualTrace, GenericActualTrace>(both, pt, generic_initial);
    CHECK(report.ok());
    for (std::size_t i = 0; i <= r.actual.size(); ++i)
        CHECK(both.map(prefix(r.actual, i)).has_value());
}

TEST_CASE("compliance")
{
    auto fd = solve(section6()).actual;
    std::vector<PalmActualTrace> pt{palm_samples().actual};
    auto report = check_generic({fd_process("fd", {fd}),
        palm_process("palm", pt, palm_profile_projection(), all_guards())});
    CHECK(report.compliant());
    REQUIRE(report.processes.size() == 2);
    CHECK(report.processes[1].valid == 1);

    auto full = check_generic(
        {palm_process("palm-full", pt, identity_projection(gentra4cp_signature()), default_guards())});
    CHECK_FALSE(full.compliant());
    const auto & v = full.processes[0];
    auto has = [](const std::vector<std::string> & xs, const std::string & x) {
        return std::find(xs.begin(), xs.end(), x) != xs.end();
    };
    CHECK(has(v.uncovered_actions, "jumpTo"));
    CHECK(has(v.uncovered_actions, "solved"));
    CHECK(has(v.unchanged_params, "E"));

    auto text = format_report("compliance", full);
    CHECK(text.find("FAIL check compliance") != std::string::npos);
}

TEST_CASE("commutation")
{
    const auto & r = palm_samples();
    std::vector<PalmActualTrace> pt{r.actual};
    auto os = profile_os();
    std::function<GenericActualTrace(const PalmActualTrace &)> dw = [](const PalmActualTrace & t) {
        return palm_to_generic(t);
    };
    std::function<GenericVirtualTrace(const PalmVirtualTrace &)> dv = palm_virtual_to_generic;
    CHECK(commutation_check(PalmOS{}, os, dw, dv, std::span<const PalmActualTrace>(pt)).ok());

    std::size_t dropped = 0;
    while (r.actual.events[dropped].type != EventType::reduce)
        ++dropped;
    std::function<GenericActualTrace(const PalmActualTrace &)> lossy = [&](const PalmActualTrace & t) {
        auto g = palm_to_generic(t);
        g.events.erase(g.events.begin() + static_cast<long>(dropped));
        return g;
    };
    auto bad = commutation_check(PalmOS{}, os, lossy, dv, std::span<const PalmActualTrace>(pt));
    REQUIRE(bad.violations.size() == 1);
    CHECK(bad.violations[0].index == dropped);

    GenTra4CP generic;
    std::vector<GenericActualTrace> fd{solve(section6()).actual};
    std::function<GenericActualTrace(const GenericActualTrace &)> same = [](const GenericActualTrace & t) { return t; };
    std::function<GenericVirtualTrace(const GenericVirtualTrace &)> same_v = [](const GenericVirtualTrace & t) {
        return t;
    };
    CHECK(commutation_check(generic, generic, same, same_v, std::span<const GenericActualTrace>(fd)).ok());
}

TEST_CASE("report lines")
{
    auto bad = g3_script(true);
    auto text = format_report("validate", validate(bad.trace));
    CHECK(text.find("FAIL check validate") != std::string::npos);
    CHECK(text.find("index=7") != std::string::npos);
    auto good = format_report("validate", validate(g3_script(false).trace));
    CHECK(good.find("PASS check validate") != std::string::npos);
}
