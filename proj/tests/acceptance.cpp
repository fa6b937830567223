// Acceptance run: prints one PASS or FAIL line per criterion and exits
// non-zero when any criterion fails.

#include "properties.hpp"
#include "scripts.hpp"

#include <gentrace/abstraction.hpp>
#include <gentrace/text_format.hpp>

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

using namespace gentrace;
using namespace gentrace::testgen;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome
{
    bool pass = true;
    std::string detail;
};

int failures = 0;

auto seconds_since(Clock::time_point t0) -> double
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

auto run(int id, const std::string & title, const std::function<Outcome()> & body) -> void
{
    Outcome o;
    auto t0 = Clock::now();
    try {
        o = body();
    }
    catch (const std::exception & e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    char time[32];
    std::snprintf(time, sizeof time, "%.2fs", seconds_since(t0));
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << ": " << title << " [" << time << "]";
    if (! o.detail.empty())
        std::cout << " " << o.detail;
    std::cout << std::endl;
    failures += o.pass ? 0 : 1;
}

auto section6() -> Problem
{
    return parse_problem(fixture("example.problem"));
}

auto index_of(const GenericActualTrace & t, EventType type, std::size_t from = 0) -> std::size_t
{
    for (std::size_t i = from; i < t.size(); ++i)
        if (t.events[i].type == type)
            return i;
    return t.size();
}

// The same problems feed criteria 3 and 4.
auto random_problems(std::size_t n) -> std::vector<Problem>
{
    Rng rng(2024);
    std::vector<Problem> out;
    for (std::size_t i = 0; i < n; ++i)
        out.push_back(random_problem(rng));
    return out;
}

}

int main()
{
    run(1, "worked example has one solution equal to the oracle", [] {
        // I over the list positions, A over the list values, either branch
        std::vector<Assignment> oracle;
        const std::vector<Value> list{2, 5, 7};
        for (Value a : list)
            for (Value i = 1; i <= 3; ++i)
                if (list[static_cast<std::size_t>(i - 1)] == a && (a == i || a == 2))
                    oracle.push_back({{"A", a}, {"I", i}});
        auto t0 = Clock::now();
        auto r = solve(section6());
        double took = seconds_since(t0);
        std::ostringstream d;
        d << "solutions=" << r.solutions.size() << " oracle=" << oracle.size() << " solve=" << took << "s";
        return Outcome{r.solutions.size() == 1 && r.solutions == oracle && took < 1.0, d.str()};
    });

    run(2, "initial propagation removes [0,4-mx] from I and [0-1,3-4,6,8-mx] from A", [] {
        auto r = solve(section6());
        auto k = index_of(r.actual, EventType::reduce);
        if (k + 1 >= r.actual.size())
            return Outcome{false, "no reduce events"};
        const auto & a = r.actual.events[k];
        const auto & b = r.actual.events[k + 1];
        auto i_removed = FiniteDomain::of({0}).unite(FiniteDomain::range(4, default_mx));
        auto a_removed = FiniteDomain::of({0, 1, 3, 4, 6}).unite(FiniteDomain::range(8, default_mx));
        const auto & after = r.virtual_trace.events[k + 1].state.solver.domains;
        bool ok = b.type == EventType::reduce && a.variable == r.actual.events[0].variable && b.variable == r.actual.events[1].variable
            && *a.domain == i_removed && *b.domain == a_removed && after.at(*a.variable) == FiniteDomain::range(1, 3)
            && after.at(*b.variable) == FiniteDomain::of({2, 5, 7});
        return Outcome{ok, "I removed " + a.domain->to_string() + ", A removed " + b.domain->to_string()};
    });

    const auto problems = random_problems(120);
    std::vector<SolverCase> cases;

    run(3, "faithfulness and validation of 120 random solver runs", [&] {
        auto t0 = Clock::now();
        std::size_t bad = 0;
        std::size_t events = 0;
        std::string first;
        for (std::size_t i = 0; i < problems.size(); ++i) {
            cases.push_back(solver_case(problems[i]));
            events += cases.back().events;
            if (! cases.back().faithful_or_valid.empty()) {
                ++bad;
                if (first.empty())
                    first = " first: case " + std::to_string(i) + " " + cases.back().faithful_or_valid.front();
            }
        }
        double took = seconds_since(t0);
        std::ostringstream d;
        d << "runs=" << problems.size() << " events=" << events << " failing=" << bad << first;
        return Outcome{bad == 0 && problems.size() >= 100 && took < 30.0, d.str()};
    });

    run(4, "solution sets equal brute-force enumeration on the same problems", [&] {
        std::size_t bad = 0;
        std::size_t solutions = 0;
        std::string first;
        for (std::size_t i = 0; i < cases.size(); ++i)
            if (! cases[i].oracle.empty()) {
                ++bad;
                if (first.empty())
                    first = " first: case " + std::to_string(i) + " " + cases[i].oracle.front();
            }
        for (const auto & p : problems)
            solutions += brute_force_solutions(p).size();
        std::ostringstream d;
        d << "problems=" << cases.size() << " oracle solutions=" << solutions << " mismatches=" << bad << first;
        return Outcome{bad == 0 && cases.size() >= 100, d.str()};
    });

    run(5, "PaLM runs map onto the generic trace (profile, G1-G5) and simulate under the Annex mapping", [] {
        Rng rng(77);
        auto t0 = Clock::now();
        std::size_t runs = 60, bad = 0, events = 0;
        std::string first;
        for (std::size_t i = 0; i < runs; ++i) {
            auto c = palm_case(random_problem(rng));
            events += c.events;
            if (! c.bad.empty()) {
                ++bad;
                if (first.empty())
                    first = " first: run " + std::to_string(i) + " " + c.bad.front();
            }
        }
        double took = seconds_since(t0);
        std::ostringstream d;
        d << "runs=" << runs << " events=" << events << " failing=" << bad << first;
        return Outcome{bad == 0 && took < 30.0, d.str()};
    });

    run(6, "negative controls fail at the injected index", [] {
        std::ostringstream d;
        bool ok = true;
        GenTra4CP os;

        // (a) corrupted attribute
        auto r = solve(section6());
        auto k = index_of(r.actual, EventType::reduce, index_of(r.actual, EventType::jump_to));
        auto corrupted = r.actual;
        auto & e = corrupted.events[k];
        auto before = r.virtual_trace.events[k - 1].state.solver.domains.at(*e.variable);
        e.domain = e.domain->unite(FiniteDomain::singleton(before.max() + 1));
        std::vector<GenericActualTrace> as{corrupted};
        auto fa = check_faithful_actual(os, std::span<const GenericActualTrace>(as));
        bool a_ok = ! fa.ok() && fa.entries[0].divergence == k;
        auto vt = r.virtual_trace;
        vt.events[k].state.solver.domains[*e.variable] = before;
        std::vector<GenericVirtualTrace> vs{vt};
        auto fv = check_faithful(os, std::span<const GenericVirtualTrace>(vs));
        a_ok = a_ok && ! fv.ok() && fv.entries[0].divergence == k;
        d << "attribute: injected=" << k << " flagged=" << (fa.ok() ? -1L : static_cast<long>(*fa.entries[0].divergence))
          << "/" << (fv.ok() ? -1L : static_cast<long>(*fv.entries[0].divergence));
        ok = ok && a_ok;

        // (b) swapped h
        auto pr = palm_solve(zero_based(section6()));
        std::size_t first = 0;
        while (first < pr.actual.size() && pr.actual.events[first].type != EventType::suspend
            && pr.actual.events[first].type != EventType::awake)
            ++first;
        auto m = annex_mapping();
        std::swap(m.h[EventType::suspend], m.h[EventType::awake]);
        std::vector<PalmVirtualTrace> ps{pr.virtual_trace};
        auto sim = check_simulable(PalmOS{}, project(GenTra4CP{}, palm_profile_projection()), m,
            std::span<const PalmVirtualTrace>(ps));
        bool b_ok = sim.violations.size() == 1 && sim.violations[0].index == first;
        d << "; swapped h: first suspend=" << first
          << " flagged=" << (sim.violations.empty() ? -1L : static_cast<long>(sim.violations[0].index));
        ok = ok && b_ok;

        // (c) reduce under R != empty
        bool clean = validate(g3_script(false).trace).ok();
        auto g3 = validate(g3_script(true).trace);
        bool c_ok = clean && g3.replayed && g3.guards.violations.size() == 1
            && g3.guards.violations[0].guard == Guard::G3 && g3.guards.violations[0].index == g3_injected_index;
        d << "; G3: injected=" << g3_injected_index << " flagged="
          << (g3.guards.violations.empty() ? -1L : static_cast<long>(g3.guards.violations[0].index));
        ok = ok && c_ok;
        return Outcome{ok, d.str()};
    });

    run(7, "lattice laws, prefix closure and all_prefixes idempotence on 1200 random trace sets", [] {
        Rng rng(99);
        std::size_t bad = 0;
        std::string first;
        for (int i = 0; i < 1200; ++i) {
            auto broken = lattice_case(rng);
            if (! broken.empty()) {
                ++bad;
                if (first.empty())
                    first = " first: " + broken.front();
            }
        }
        return Outcome{bad == 0, "failing=" + std::to_string(bad) + first};
    });

    run(8, "Fig 8 fragments parse in lenient mode", [] {
        ParseOptions lenient;
        lenient.mode = ParseMode::lenient;
        auto left = parse_trace(fixture("fig8_left.trace"), lenient);
        auto right = parse_trace(fixture("fig8_right.trace"), lenient);
        std::vector<long> reduces;
        for (const auto & e : left.events)
            if (e.type == EventType::reduce)
                reduces.push_back(e.chrono);
        std::size_t n = left.events.size();
        bool ok = n == 18 && reduces == std::vector<long>{6, 7, 12, 13} && left.events[n - 2].type == EventType::reject
            && left.events[n - 1].type == EventType::failure && right.events.size() == 19;
        std::ostringstream d;
        d << "left events=" << n << " reduces at";
        for (auto c : reduces)
            d << " " << c;
        d << "; right events=" << right.events.size() << " base=" << right.chrono_base();
        return Outcome{ok, d.str()};
    });

    std::cout << (failures == 0 ? "all criteria pass" : std::to_string(failures) + " criteria fail") << std::endl;
    return failures == 0 ? 0 : 1;
}
