// gentrace: solve problems into traces, validate and replay traces, map PaLM
// traces onto the generic format and check compliance.
//
// Exit codes: 0 pass, 1 verdict fail, 2 usage or parse error.

#include <gentrace/abstraction.hpp>
#include <gentrace/fd_solver.hpp>
#include <gentrace/palm.hpp>
#include <gentrace/text_format.hpp>

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

using namespace gentrace;

namespace {

struct UsageError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

auto read_file(const std::string & path) -> std::string
{
    if (path == "-") {
        std::stringstream s;
        s << std::cin.rdbuf();
        return s.str();
    }
    std::ifstream in(path, std::ios::binary);
    if (! in)
        throw UsageError("cannot read " + path);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

auto write_output(const std::string & path, const std::string & text) -> void
{
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (! out)
        throw UsageError("cannot write " + path);
    out << text;
}

struct Common
{
    std::optional<Value> mx;
    bool lenient = false;
};

auto load_trace(const std::string & path, const Common & c, Dialect dialect = Dialect::generic) -> TraceDocument
{
    ParseOptions o;
    o.mode = c.lenient ? ParseMode::lenient : ParseMode::strict;
    o.dialect = dialect;
    o.mx = c.mx;
    auto doc = parse_trace(read_file(path), o);
    if (c.lenient)
        for (const auto & d : doc.deviations)
            std::cerr << path << ":" << d.line << ": " << d.kind << (d.detail.empty() ? "" : ": " + d.detail) << "\n";
    return doc;
}

auto palm_trace(const TraceDocument & doc) -> PalmActualTrace
{
    return {palm_initial_state(doc.chrono_base()), doc.events};
}

auto parse_guards(const std::string & text) -> GuardSet
{
    if (text == "all")
        return all_guards();
    if (text == "none")
        return {};
    if (text == "default")
        return default_guards();
    GuardSet out;
    std::stringstream s(text);
    std::string item;
    while (std::getline(s, item, ',')) {
        std::transform(item.begin(), item.end(), item.begin(), [](unsigned char ch) { return std::toupper(ch); });
        auto range = item.find("..");
        auto one = [&](const std::string & g) -> int {
            if (g.size() != 2 || g[0] != 'G' || g[1] < '1' || g[1] > '5')
                throw UsageError("unknown guard " + g);
            return g[1] - '1';
        };
        int lo, hi;
        if (range != std::string::npos) {
            lo = one(item.substr(0, range));
            hi = one(item.substr(range + 2));
        }
        else
            lo = hi = one(item);
        for (int g = lo; g <= hi; ++g)
            out.insert(static_cast<Guard>(g));
    }
    return out;
}

auto describe(const SolverState & s, Value mx) -> std::string
{
    std::ostringstream o;
    o << "D{";
    bool first = true;
    for (const auto & [v, d] : s.domains) {
        o << (first ? "" : " ") << v.name << "=" << d.to_string(mx);
        first = false;
    }
    o << "} A{";
    first = true;
    for (const auto & p : s.active) {
        o << (first ? "" : " ") << p.constraint.name << "/" << to_string(p.event);
        first = false;
    }
    auto ids = [&](const char * label, const std::set<ConstraintId> & cs) {
        o << "} " << label << "{";
        bool f = true;
        for (const auto & c : cs) {
            o << (f ? "" : " ") << c.name;
            f = false;
        }
    };
    ids("S_c", s.sleeping);
    ids("E", s.solved);
    ids("R", s.rejected);
    o << "} S_e{";
    first = true;
    for (const auto & a : s.pending) {
        o << (first ? "" : " ") << to_string(a);
        first = false;
    }
    o << "}";
    if (s.current_event)
        o << " a=" << to_string(*s.current_event);
    return o.str();
}

auto print_solutions(const std::vector<Assignment> & solutions) -> void
{
    std::cout << solutions.size() << (solutions.size() == 1 ? " solution\n" : " solutions\n");
    for (const auto & s : solutions) {
        std::cout << " ";
        for (const auto & [k, v] : s)
            std::cout << " " << k << "=" << v;
        std::cout << "\n";
    }
}

}

int main(int argc, char ** argv)
{
    CLI::App app{"Generic trace toolkit for finite-domain solvers"};
    app.require_subcommand(1);
    Common common;
    app.add_option("--mx", common.mx, "value of the domain upper sentinel mx");

    auto * solve_cmd = app.add_subcommand("solve", "solve a problem file and optionally write its trace");
    std::string problem_path, trace_out, solver = "fd";
    bool strict_reduce = false;
    solve_cmd->add_option("problem", problem_path, "problem file")->required();
    solve_cmd->add_option("--trace", trace_out, "write the trace to this file (- for stdout)");
    solve_cmd->add_flag("--strict-reduce", strict_reduce, "reduce retires the active pair");
    solve_cmd->add_option("--solver", solver, "fd or palm")->check(CLI::IsMember({"fd", "palm"}));

    auto * validate_cmd = app.add_subcommand("validate", "replay a trace under the generic semantics");
    std::string trace_path, profile = "generic", guards_text;
    bool validate_strict = false;
    validate_cmd->add_option("trace", trace_path, "trace file")->required();
    validate_cmd->add_option("--profile", profile, "generic or palm")->check(CLI::IsMember({"generic", "palm"}));
    validate_cmd->add_option("--guards", guards_text, "guards to check: G1,G3 | G1..G5 | all | none");
    validate_cmd->add_flag("--strict-reduce", validate_strict, "reduce retires the active pair");
    validate_cmd->add_flag("--lenient", common.lenient, "accept historical listing idioms");

    auto * reconstruct_cmd = app.add_subcommand("reconstruct", "print the virtual trace of an actual trace");
    std::string reconstruct_path;
    reconstruct_cmd->add_option("trace", reconstruct_path, "trace file")->required();
    reconstruct_cmd->add_flag("--lenient", common.lenient, "accept historical listing idioms");

    auto * map_cmd = app.add_subcommand("map-palm", "map a PaLM-dialect trace onto the generic format");
    std::string map_path, map_out;
    map_cmd->add_option("trace", map_path, "PaLM trace file")->required();
    map_cmd->add_option("-o,--output", map_out, "output file (default stdout)");
    map_cmd->add_flag("--lenient", common.lenient, "accept historical listing idioms");

    auto * comp_cmd = app.add_subcommand("check-compliance", "check PaLM traces against the generic trace");
    std::vector<std::string> comp_paths;
    std::string projection = "palm";
    comp_cmd->add_option("traces", comp_paths, "PaLM trace files")->required();
    comp_cmd->add_option("--projection", projection, "palm (profile subtrace) or full")
        ->check(CLI::IsMember({"palm", "full"}));
    comp_cmd->add_flag("--lenient", common.lenient, "accept historical listing idioms");

    auto * diff_cmd = app.add_subcommand("diff", "event-level structural diff of two traces");
    std::string diff_a, diff_b;
    diff_cmd->add_option("left", diff_a, "trace file")->required();
    diff_cmd->add_option("right", diff_b, "trace file")->required();
    diff_cmd->add_flag("--lenient", common.lenient, "accept historical listing idioms");

    try {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError & e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        const Value mx = common.mx.value_or(default_mx);

        if (*solve_cmd) {
            ProblemOptions po;
            po.mx = mx;
            auto problem = parse_problem(read_file(problem_path), po);
            std::vector<std::pair<std::string, std::string>> header{{"solver", solver}};
            if (common.mx)
                header.emplace_back("mx", std::to_string(*common.mx));
            if (solver == "palm") {
                auto r = palm_solve(zero_based(problem));
                print_solutions(r.solutions);
                std::cout << "events " << r.actual.size() << ", property checks " << r.checks << "\n";
                if (! trace_out.empty()) {
                    auto doc = make_document(r.actual.events, Dialect::palm, header);
                    doc.mx = mx;
                    write_output(trace_out, serialize_trace(doc));
                }
            }
            else {
                SolveOptions so;
                so.strict_reduce = strict_reduce;
                if (strict_reduce)
                    header.emplace_back("reduce", "strict");
                auto r = solve(problem, so);
                print_solutions(r.solutions);
                std::cout << "events " << r.actual.size() << "\n";
                if (! trace_out.empty()) {
                    auto doc = make_document(r.actual.events, Dialect::generic, header);
                    doc.mx = mx;
                    write_output(trace_out, serialize_trace(doc));
                }
            }
            return 0;
        }

        if (*validate_cmd) {
            auto doc = load_trace(trace_path, common);
            ValidationOptions vo = profile == "palm" ? palm_profile_validation() : ValidationOptions{};
            vo.semantics.strict_reduce = validate_strict || doc.header_value("reduce") == "strict";
            if (! guards_text.empty())
                vo.guards = parse_guards(guards_text);
            GenericActualTrace at;
            if (doc.dialect == Dialect::palm) {
                try {
                    at = palm_to_generic(palm_trace(doc));
                }
                catch (const MappingError & e) {
                    std::cout << "FAIL check validate index=" << e.index << " rule=mapping cond=\"" << e.what() << "\"\n";
                    return 1;
                }
            }
            else
                at = to_actual_trace(doc);
            auto r = validate(at, vo);
            std::cout << format_report("validate", r);
            return r.ok() ? 0 : 1;
        }

        if (*reconstruct_cmd) {
            auto doc = load_trace(reconstruct_path, common);
            try {
                if (doc.dialect == Dialect::palm) {
                    auto vt = reconstruct(PalmOS{}, palm_trace(doc));
                    for (std::size_t i = 0; i < vt.size(); ++i)
                        std::cout << i << " " << to_string(vt.events[i].action) << " node "
                                  << vt.events[i].state.tree.current << " "
                                  << describe(to_generic(vt.events[i].state.solver), mx) << "\n";
                }
                else {
                    SemanticsOptions so;
                    so.strict_reduce = doc.header_value("reduce") == "strict";
                    auto vt = reconstruct(GenTra4CP(so), to_actual_trace(doc));
                    for (std::size_t i = 0; i < vt.size(); ++i)
                        std::cout << i << " " << to_string(vt.events[i].action) << " node "
                                  << vt.events[i].state.tree.current << " " << describe(vt.events[i].state.solver, mx)
                                  << "\n";
                }
            }
            catch (const ReconstructionFailure & e) {
                std::cout << "FAIL check reconstruct index=" << e.index << " rule=replay cond=\"" << e.reason << "\"\n";
                return 1;
            }
            std::cout << "PASS check reconstruct events=" << doc.events.size() << "\n";
            return 0;
        }

        if (*map_cmd) {
            auto doc = load_trace(map_path, common, Dialect::palm);
            try {
                auto at = palm_to_generic(palm_trace(doc));
                auto out = make_document(at.events, Dialect::generic, {{"mapped-from", "palm"}});
                out.mx = doc.mx;
                write_output(map_out, serialize_trace(out));
            }
            catch (const MappingError & e) {
                std::cerr << "FAIL check map-palm index=" << e.index << " rule=mapping cond=\"" << e.what() << "\"\n";
                return 1;
            }
            return 0;
        }

        if (*comp_cmd) {
            std::vector<PalmActualTrace> traces;
            std::vector<PalmVirtualTrace> virtuals;
            bool ok = true;
            for (const auto & path : comp_paths) {
                auto doc = load_trace(path, common, Dialect::palm);
                traces.push_back(palm_trace(doc));
                try {
                    virtuals.push_back(reconstruct(PalmOS{}, traces.back()));
                }
                catch (const ReconstructionFailure & e) {
                    std::cout << "FAIL check palm-replay trace=" << path << " index=" << e.index
                              << " rule=replay cond=\"" << e.reason << "\"\n";
                    ok = false;
                }
            }
            auto proj = projection == "full" ? identity_projection(gentra4cp_signature()) : palm_profile_projection();
            auto guards = projection == "full" ? default_guards() : all_guards();
            auto report = check_generic({palm_process("palm", traces, proj, guards)});
            std::cout << format_report("compliance", report);
            ok = ok && report.compliant();
            if (projection == "palm") {
                auto target = project(GenTra4CP{}, proj);
                auto sim = check_simulable(PalmOS{}, target, annex_mapping(), std::span<const PalmVirtualTrace>(virtuals));
                std::cout << format_report("simulation", sim);
                std::function<GenericActualTrace(const PalmActualTrace &)> dw = [](const PalmActualTrace & t) {
                    return palm_to_generic(t);
                };
                std::function<GenericVirtualTrace(const PalmVirtualTrace &)> dv = palm_virtual_to_generic;
                auto com = commutation_check(PalmOS{}, target, dw, dv, std::span<const PalmActualTrace>(traces));
                std::cout << format_report("commutation", com);
                ok = ok && sim.ok() && com.ok();
            }
            return ok ? 0 : 1;
        }

        if (*diff_cmd) {
            auto a = load_trace(diff_a, common);
            auto b = load_trace(diff_b, common);
            // events compared without their chrono number
            auto key = [&](const GenericEvent & e, Value m) {
                auto s = format_event(e, m);
                return s.substr(s.find('['));
            };
            std::vector<std::string> x, y;
            for (const auto & e : a.events)
                x.push_back(key(e, a.mx));
            for (const auto & e : b.events)
                y.push_back(key(e, b.mx));
            const std::size_t n = x.size(), m = y.size();
            if (n * m > 50'000'000)
                throw UsageError("traces too long for a structural diff");
            std::vector<std::vector<std::uint32_t>> lcs(n + 1, std::vector<std::uint32_t>(m + 1, 0));
            for (std::size_t i = n; i-- > 0;)
                for (std::size_t j = m; j-- > 0;)
                    lcs[i][j] = x[i] == y[j] ? lcs[i + 1][j + 1] + 1 : std::max(lcs[i + 1][j], lcs[i][j + 1]);
            std::size_t i = 0, j = 0, changes = 0;
            while (i < n || j < m) {
                if (i < n && j < m && x[i] == y[j]) {
                    ++i;
                    ++j;
                }
                else if (j < m && (i == n || lcs[i][j + 1] >= lcs[i + 1][j])) {
                    std::cout << "+ " << format_event(b.events[j], b.mx) << "\n";
                    ++j;
                    ++changes;
                }
                else {
                    std::cout << "- " << format_event(a.events[i], a.mx) << "\n";
                    ++i;
                    ++changes;
                }
            }
            std::cout << (changes == 0 ? "identical" : std::to_string(changes) + " differing events") << " ("
                      << n << " vs " << m << " events)\n";
            return changes == 0 ? 0 : 1;
        }
    }
    catch (const ParseError & e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 2;
    }
    catch (const ConstraintError & e) {
        std::cerr << "problem error: " << e.what() << "\n";
        return 2;
    }
    catch (const UsageError & e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    catch (const LimitExceeded & e) {
        std::cerr << "limit: " << e.what() << "\n";
        return 1;
    }
    catch (const PalmCheckFailure & e) {
        std::cout << "FAIL check palm index=" << e.index << " rule=" << e.property << " cond=\"" << e.what() << "\"\n";
        return 1;
    }
    return 0;
}
