#pragma once

// Property checks shared by the unit tests and the acceptance binary. Each
// returns the list of broken properties for one generated case; an empty list
// means the case passed.

#include "generators.hpp"

#include <gentrace/abstraction.hpp>
#include <gentrace/fd_solver.hpp>
#include <gentrace/gentra4cp.hpp>
#include <gentrace/palm.hpp>
#include <gentrace/trace.hpp>

#include <algorithm>
#include <iterator>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace gentrace::testgen {

using IntSet = std::set<IntTrace>;

// Oracle: prefixes built by copying the first k events, no library calls.
inline auto oracle_prefixes(const IntSet & traces) -> IntSet
{
    IntSet out;
    for (const auto & t : traces)
        for (std::size_t k = 0; k <= t.events.size(); ++k)
            out.insert(IntTrace{t.initial_state, std::vector<int>(t.events.begin(), t.events.begin() + static_cast<long>(k))});
    return out;
}

inline auto oracle_closed(const IntSet & x) -> bool
{
    for (const auto & t : x)
        if (! t.events.empty()) {
            IntTrace shorter{t.initial_state, std::vector<int>(t.events.begin(), t.events.end() - 1)};
            if (! x.contains(shorter))
                return false;
        }
    return true;
}

inline auto oracle_union(const IntSet & a, const IntSet & b) -> IntSet
{
    IntSet out;
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::inserter(out, out.end()));
    return out;
}

inline auto oracle_intersection(const IntSet & a, const IntSet & b) -> IntSet
{
    IntSet out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::inserter(out, out.end()));
    return out;
}

// Lattice laws over three random prefix-closed domains.
inline auto lattice_case(Rng & rng) -> std::vector<std::string>
{
    std::vector<std::string> bad;
    auto check = [&](bool ok, const char * what) {
        if (! ok)
            bad.emplace_back(what);
    };
    auto raw = random_trace_set(rng);
    auto x = all_prefixes(raw);
    auto y = all_prefixes(random_trace_set(rng));
    auto z = all_prefixes(random_trace_set(rng));

    check(x == oracle_prefixes(raw), "all_prefixes equals oracle");
    check(all_prefixes(x) == x, "all_prefixes idempotent");
    check(is_prefix_closed(x) && oracle_closed(x), "all_prefixes is prefix-closed");

    auto jx = domain_join(x, y);
    auto mx = domain_meet(x, y);
    check(jx == oracle_union(x, y), "join is set union");
    check(mx == oracle_intersection(x, y), "meet is set intersection");
    check(oracle_closed(jx) && oracle_closed(mx), "join and meet preserve prefix closure");
    check(jx == domain_join(y, x) && mx == domain_meet(y, x), "commutativity");
    check(domain_join(domain_join(x, y), z) == domain_join(x, domain_join(y, z)), "join associativity");
    check(domain_meet(domain_meet(x, y), z) == domain_meet(x, domain_meet(y, z)), "meet associativity");
    check(domain_join(x, domain_meet(x, y)) == x, "absorption join/meet");
    check(domain_meet(x, domain_join(x, y)) == x, "absorption meet/join");
    check(domain_join(x, x) == x && domain_meet(x, x) == x, "idempotence");
    check(domain_meet(x, IntSet{}) == IntSet{} && domain_join(x, IntSet{}) == x, "bottom");
    check(is_subdomain(mx, x) && is_subdomain(x, jx), "order");
    if (is_subdomain(x, y))
        check(mx == x && jx == y, "x below y gives meet x and join y");
    auto top = domain_join(domain_join(x, y), z);
    check(domain_join(x, top) == top && domain_meet(x, top) == x, "top");
    return bad;
}

// fd_solver run: oracle equivalence, faithfulness, validation, strict reduce.
struct SolverCase
{
    std::vector<std::string> faithful_or_valid;  // criterion 3
    std::vector<std::string> oracle;             // criterion 4
    std::size_t events = 0;
};

inline auto solver_case(const Problem & p) -> SolverCase
{
    SolverCase out;
    auto expected = brute_force_solutions(p);
    auto r = solve(p);
    if (r.solutions != expected)
        out.oracle.push_back("solutions " + std::to_string(r.solutions.size()) + " vs oracle "
            + std::to_string(expected.size()));
    out.events = r.actual.size();

    GenTra4CP os;
    std::vector<GenericVirtualTrace> vs{r.virtual_trace};
    auto f = check_faithful(os, std::span<const GenericVirtualTrace>(vs));
    if (! f.ok())
        out.faithful_or_valid.push_back("reconstruct(extract(t)) differs at " + std::to_string(*f.entries[0].divergence));
    std::vector<GenericActualTrace> as{r.actual};
    if (! check_faithful_actual(os, std::span<const GenericActualTrace>(as)).ok())
        out.faithful_or_valid.push_back("extract(reconstruct(t)) differs");
    if (! (reconstruct(os, r.actual) == r.virtual_trace))
        out.faithful_or_valid.push_back("reconstructed trace differs from the emitted virtual trace");
    auto v = validate(r.actual);
    if (! v.ok())
        out.faithful_or_valid.push_back("validate: " + v.rule + " " + v.condition);

    SolveOptions strict;
    strict.strict_reduce = true;
    auto rs = solve(p, strict);
    ValidationOptions vo;
    vo.semantics.strict_reduce = true;
    if (rs.solutions != expected)
        out.oracle.push_back("strict-reduce solutions differ from oracle");
    if (! validate(rs.actual, vo).ok())
        out.faithful_or_valid.push_back("strict-reduce trace does not validate");
    return out;
}

// palm_sim run: solutions, profile validation with G1-G5, Annex simulation.
struct PalmCase
{
    std::vector<std::string> bad;
    std::size_t events = 0;
};

inline auto palm_case(const Problem & p) -> PalmCase
{
    PalmCase out;
    auto zp = zero_based(p);
    auto r = palm_solve(zp);
    out.events = r.actual.size();
    if (r.solutions != brute_force_solutions(zp))
        out.bad.push_back("palm solutions differ from oracle");
    auto v = validate(palm_to_generic(r.actual), palm_profile_validation());
    if (! v.ok())
        out.bad.push_back("profile validation: " + v.rule + " " + v.condition + ", guard violations "
            + std::to_string(v.guards.violations.size()));
    std::vector<PalmVirtualTrace> samples{r.virtual_trace};
    auto sim = check_simulable(PalmOS{}, project(GenTra4CP{}, palm_profile_projection()), annex_mapping(),
        std::span<const PalmVirtualTrace>(samples));
    if (! sim.ok())
        out.bad.push_back("simulation: " + (sim.violations.empty() ? std::string("structural")
                                                                    : sim.violations.front().message));
    return out;
}

}
