#include <gentrace/abstraction.hpp>

#include <sstream>

using std::map;
using std::optional;
using std::set;
using std::string;
using std::vector;

namespace gentrace {

namespace
{
    auto rule(set<string> uses, set<string> modifies) -> RuleAccess { return {std::move(uses), std::move(modifies)}; }

    auto action_names(const std::set<EventType> & ts) -> set<string>
    {
        set<string> out;
        for (auto t : ts)
            out.insert(string(to_string(t)));
        return out;
    }

    auto quoted(const string & s) -> string
    {
        std::ostringstream o;
        o << '"';
        for (char c : s)
            o << (c == '"' ? '\'' : c);
        o << '"';
        return o.str();
    }
}

// Tables mirror the accesses noted by the replay rules.
auto gentra4cp_signature() -> OsSignature
{
    OsSignature s;
    s.name = "GenTra4CP";
    for (auto p : {Param::N, Param::Sigma, Param::delta, Param::current, Param::V, Param::C, Param::D, Param::A,
             Param::E, Param::R, Param::S_c, Param::S_e})
        s.params.insert(string(to_string(p)));
    s.actions = action_names({all_event_types().begin(), all_event_types().end()});
    s.composite = {"Sigma"};
    const set<string> node_mod{"N", "Sigma", "delta", "current"};
    s.rules["newVariable"] = rule({"V"}, {"V", "D"});
    s.rules["newConstraint"] = rule({"C", "V"}, {"C"});
    s.rules["post"] = rule({"C", "A", "S_c", "E", "R"}, {"A"});
    s.rules["newChild"] = rule({"A", "R", "S_c", "S_e", "D", "C", "N", "current", "delta"}, node_mod);
    s.rules["solution"] = rule({"A", "S_c", "E", "R", "D", "C", "N", "current", "delta"}, node_mod);
    s.rules["failure"] = rule({"R", "N", "current", "delta"}, node_mod);
    s.rules["jumpTo"] = rule({"N", "Sigma", "current"}, {"current", "V", "C", "D", "A", "E", "R", "S_c", "S_e"});
    s.rules["deactivate"] = rule({"A", "S_c", "E", "R"}, {"A", "S_c", "E", "R"});
    s.rules["restore"] = rule({"V", "D", "S_e"}, {"D", "S_e"});
    s.rules["reduce"] = rule({"A", "C", "D", "S_e"}, {"D", "S_e", "A"});
    s.rules["suspend"] = rule({"A"}, {"A", "S_c"});
    s.rules["solved"] = rule({"A", "C", "D"}, {"A", "E"});
    s.rules["reject"] = rule({"A", "C", "D"}, {"A", "R"});
    s.rules["awake"] = rule({"S_c", "S_e", "C"}, {"A", "S_c"});
    s.rules["schedule"] = rule({"S_c", "S_e", "C"}, {"S_e"});
    return s;
}

auto palm_signature() -> OsSignature
{
    OsSignature s;
    s.name = "PaLM";
    s.params = {"N", "Sigma", "delta", "current", "V", "C", "D", "A", "R", "S_c", "Q_h", "Q_t", "Expl"};
    s.actions = action_names(palm_actions());
    s.composite = {"Sigma"};
    const set<string> node_mod{"N", "Sigma", "delta", "current"};
    s.rules["newVariable"] = rule({"V"}, {"V", "D"});
    s.rules["newConstraint"] = rule({"C", "V"}, {"C"});
    s.rules["post"] = rule({"C", "A", "S_c", "R"}, {"A"});
    s.rules["newChild"] = rule({"A", "R", "S_c", "Q_t", "D", "C", "N", "current", "delta"}, node_mod);
    s.rules["solution"] = rule({"A", "S_c", "R", "D", "C", "N", "current", "delta"}, node_mod);
    s.rules["failure"] = rule({"R", "N", "current", "delta"}, node_mod);
    s.rules["deactivate"] = rule({"A", "S_c", "R"}, {"A", "S_c", "R"});
    s.rules["restore"] = rule({"V", "D", "Expl", "A", "S_c", "R", "Q_t"}, {"D", "Expl", "Q_t"});
    s.rules["reduce"] = rule({"A", "R", "C", "D", "Q_t"}, {"D", "Expl", "Q_t"});
    s.rules["suspend"] = rule({"A"}, {"A", "S_c"});
    s.rules["reject"] = rule({"A", "D"}, {"A", "R"});
    s.rules["awake"] = rule({"A", "R", "S_c", "Q_h", "C"}, {"A", "S_c"});
    s.rules["schedule"] = rule({"A", "R", "S_c", "Q_t", "C"}, {"Q_t", "Q_h"});
    return s;
}

auto identity_projection(const OsSignature & sig) -> ParamProjection
{
    return {sig.params, sig.actions, {}};
}

auto palm_profile_projection() -> ParamProjection
{
    auto p = identity_projection(gentra4cp_signature());
    p.kept_params.erase("E");
    p.kept_actions.erase("jumpTo");
    p.kept_actions.erase("solved");
    p.waivers = {
        {"post", "E", "the store test in post reads E; with E dropped the store is A, S_c and R"},
        {"solution", "E", "sol(S) quantifies over the store, which reads E"},
        {"deactivate", "E", "deactivate clears c from E as well"},
        {"solved", "*", "dropped action; its effect on A is taken by suspend in the subtrace"},
        {"jumpTo", "*", "dropped action; the PaLM process never jumps"},
    };
    return p;
}

auto palm_without_explanations() -> ParamProjection
{
    auto p = identity_projection(palm_signature());
    p.kept_params.erase("Expl");
    p.waivers = {
        {"restore", "Expl", "the restored values are chosen by explanations; only Delta is observed"},
        {"reduce", "Expl", "reduce records its explanation"},
    };
    return p;
}

auto projection_findings(const OsSignature & sig, const ParamProjection & p) -> vector<ProjectionFinding>
{
    vector<ProjectionFinding> out;
    auto waiver = [&](const string & subject, const string & param) -> optional<string> {
        for (const auto & w : p.waivers)
            if (w.subject == subject && (w.param == param || w.param == "*"))
                return w.subject + "," + w.param;
        return std::nullopt;
    };
    auto add = [&](const string & subject, const string & param, string message) {
        out.push_back({subject, param, std::move(message), waiver(subject, param)});
    };
    for (const auto & q : p.kept_params)
        if (! sig.params.contains(q))
            out.push_back({q, q, "unknown parameter " + q, std::nullopt});
    for (const auto & r : p.kept_actions)
        if (! sig.actions.contains(r))
            out.push_back({r, r, "unknown action " + r, std::nullopt});

    // Dependencies over the kept actions only.
    for (const auto & q : p.kept_params) {
        if (sig.composite.contains(q))
            continue;
        for (const auto & r : p.kept_actions) {
            auto it = sig.rules.find(r);
            if (it == sig.rules.end() || ! it->second.modifies.contains(q))
                continue;
            for (const auto & u : it->second.uses)
                if (! p.kept_params.contains(u))
                    add(r, u, q + " depends on dropped " + u + " through " + r);
        }
    }
    for (const auto & r : p.kept_actions) {
        auto it = sig.rules.find(r);
        if (it == sig.rules.end())
            continue;
        for (const auto & u : it->second.uses)
            if (! p.kept_params.contains(u))
                add(r, u, r + " reads dropped " + u);
        for (const auto & m : it->second.modifies)
            if (! p.kept_params.contains(m))
                add(r, m, r + " writes dropped " + m);
    }
    for (const auto & [r, access] : sig.rules) {
        if (p.kept_actions.contains(r))
            continue;
        for (const auto & m : access.modifies)
            if (p.kept_params.contains(m))
                add(r, m, "dropped " + r + " writes kept " + m);
    }
    return out;
}

auto project(const OsSignature & sig, const ParamProjection & p) -> ProjectedSignature
{
    ProjectedSignature out;
    for (auto & f : projection_findings(sig, p)) {
        if (! f.waived_by)
            throw InvalidProjection("invalid projection of " + sig.name + ": " + f.message);
        out.waived.push_back(std::move(f));
    }
    out.signature.name = sig.name + "|proj";
    out.signature.params = p.kept_params;
    out.signature.actions = p.kept_actions;
    for (const auto & [r, access] : sig.rules) {
        if (! p.kept_actions.contains(r))
            continue;
        RuleAccess a;
        for (const auto & u : access.uses)
            if (p.kept_params.contains(u))
                a.uses.insert(u);
        for (const auto & m : access.modifies)
            if (p.kept_params.contains(m))
                a.modifies.insert(m);
        out.signature.rules[r] = std::move(a);
    }
    for (const auto & c : sig.composite)
        if (p.kept_params.contains(c))
            out.signature.composite.insert(c);
    return out;
}

auto project(const GenTra4CP & os, const ParamProjection & p) -> GenTra4CP
{
    (void)project(gentra4cp_signature(), p);
    auto o = os.options();
    std::set<EventType> actions;
    for (auto t : o.actions)
        if (p.kept_actions.contains(string(to_string(t))))
            actions.insert(t);
    o.actions = std::move(actions);
    o.track_solved = o.track_solved && p.kept_params.contains("E");
    o.audit = std::make_shared<AccessAudit>();
    for (const auto & name : gentra4cp_signature().params)
        if (! p.kept_params.contains(name))
            o.audit->forbidden.insert(*parse_param(name));
    return GenTra4CP(std::move(o));
}

auto audited_replay(const GenTra4CP & projected, const GenericActualTrace & at) -> AccessAudit
{
    auto o = projected.options();
    auto audit = std::make_shared<AccessAudit>();
    if (o.audit)
        audit->forbidden = o.audit->forbidden;
    o.audit = audit;
    auto r = validate(at, {o, {}});
    if (r.failed_index)
        audit->violations.push_back("replay failed at event " + std::to_string(*r.failed_index) + ": " + r.rule + ": "
            + r.condition);
    return *audit;
}

auto annex_mapping() -> StateMapping<PalmState, EventType, GenTraState, EventType>
{
    StateMapping<PalmState, EventType, GenTraState, EventType> m;
    m.d = [](const PalmState & s) { return to_generic(s); };
    for (auto t : palm_actions())
        m.h.emplace(t, t);
    m.derived_actions = palm_actions();
    return m;
}

auto palm_event_to_generic(const GenericEvent & e, std::size_t index) -> GenericEvent
{
    if (e.type == EventType::jump_to || e.type == EventType::solved)
        throw MappingError(index, string(to_string(e.type)) + " has no PaLM counterpart");
    GenericEvent g = e;
    g.name.reset();
    g.wake.reset();
    g.explanation.reset();
    return g;
}

auto palm_to_generic(const vector<GenericEvent> & events, long chrono_base) -> GenericActualTrace
{
    GenericActualTrace out{initial_state(chrono_base), {}};
    out.events.reserve(events.size());
    for (std::size_t i = 0; i < events.size(); ++i)
        out.events.push_back(palm_event_to_generic(events[i], i));
    return out;
}

auto palm_to_generic(const PalmActualTrace & at) -> GenericActualTrace
{
    auto out = palm_to_generic(at.events, at.initial_state.next_chrono);
    out.initial_state = to_generic(at.initial_state);
    return out;
}

auto palm_virtual_to_generic(const PalmVirtualTrace & vt) -> GenericVirtualTrace
{
    GenericVirtualTrace out{to_generic(vt.initial_state), {}};
    out.events.reserve(vt.size());
    for (const auto & step : vt.events)
        out.events.push_back({step.action, to_generic(step.state)});
    return out;
}

auto palm_derivation() -> Derivation<PalmActualTrace, GenericActualTrace>
{
    return {"palm-to-generic", [](const PalmActualTrace & t) -> optional<GenericActualTrace> {
                try {
                    return palm_to_generic(t);
                }
                catch (const MappingError &) {
                    return std::nullopt;
                }
            }};
}

auto param_changed(const GenTraState & a, const GenTraState & b, Param p) -> bool
{
    const auto & x = a.solver;
    const auto & y = b.solver;
    switch (p) {
    case Param::N: return a.tree.nodes() != b.tree.nodes();
    case Param::Sigma: return a.tree.snapshots() != b.tree.snapshots();
    case Param::delta: return a.tree.depths() != b.tree.depths();
    case Param::current: return a.tree.current != b.tree.current;
    case Param::V: return x.variables != y.variables;
    case Param::C: return x.constraints != y.constraints;
    case Param::D: return x.domains != y.domains;
    case Param::A: return x.active != y.active;
    case Param::E: return x.solved != y.solved;
    case Param::R: return x.rejected != y.rejected;
    case Param::S_c: return x.sleeping != y.sleeping;
    case Param::S_e: return x.pending != y.pending || x.current_event != y.current_event;
    }
    return false;
}

namespace
{
    auto generic_initial(const GenericActualTrace & t) -> bool { return GenTra4CP{}.is_initial(t.initial_state); }
}

auto fd_process(string name, vector<GenericActualTrace> traces) -> ComplianceProcess
{
    ComplianceProcess p;
    p.name = std::move(name);
    p.projection = identity_projection(gentra4cp_signature());
    p.run = [traces = std::move(traces)] {
        ProcessEvidence ev;
        ev.derived = traces;
        ev.chain = check_derivation<GenericActualTrace, GenericActualTrace>(
            identity_derivation<GenericActualTrace>(), traces, generic_initial);
        return ev;
    };
    return p;
}

auto palm_process(string name, vector<PalmActualTrace> traces, ParamProjection projection, GuardSet guards)
    -> ComplianceProcess
{
    ComplianceProcess p;
    p.name = std::move(name);
    p.projection = std::move(projection);
    p.guards = std::move(guards);
    p.run = [traces = std::move(traces)] {
        ProcessEvidence ev;
        auto D = palm_derivation();
        ev.chain = check_derivation<PalmActualTrace, GenericActualTrace>(D, traces, generic_initial);
        for (const auto & t : traces)
            if (auto g = D.map(t))
                ev.derived.push_back(std::move(*g));
        return ev;
    };
    return p;
}

auto check_generic(const vector<ComplianceProcess> & processes) -> ComplianceReport
{
    ComplianceReport report;
    for (const auto & proc : processes) {
        ProcessVerdict v;
        v.name = proc.name;
        auto evidence = proc.run();
        v.chain_ok = evidence.chain.ok();
        for (const auto & c : evidence.chain.violations)
            v.failures.push_back("chain trace=" + std::to_string(c.trace) + " index=" + std::to_string(c.prefix) + " "
                + c.message);
        optional<GenTra4CP> os;
        try {
            os = project(GenTra4CP{}, proc.projection);
            v.projection_ok = true;
        }
        catch (const InvalidProjection & e) {
            v.failures.push_back(e.what());
        }
        v.traces = evidence.derived.size();
        set<string> seen_actions;
        set<Param> changed;
        if (os) {
            for (std::size_t k = 0; k < evidence.derived.size(); ++k) {
                auto o = os->options();
                o.audit = std::make_shared<AccessAudit>();
                o.audit->forbidden = os->options().audit->forbidden;
                auto r = validate(evidence.derived[k], {o, proc.guards});
                v.guard_violations += r.guards.violations.size();
                if (r.replayed && o.audit->violations.empty())
                    ++v.valid;
                if (! r.replayed)
                    v.failures.push_back("trace=" + std::to_string(k) + " index=" + std::to_string(*r.failed_index)
                        + " rule=" + r.rule + " cond=" + quoted(r.condition));
                else if (! o.audit->violations.empty())
                    v.failures.push_back("trace=" + std::to_string(k) + " access " + o.audit->violations.front());
                else if (! r.guards.ok()) {
                    const auto & g = r.guards.violations.front();
                    v.failures.push_back("trace=" + std::to_string(k) + " index=" + std::to_string(g.index)
                        + " guard=" + string(to_string(g.guard)) + " cond=" + quoted(g.message));
                }
                const auto & vt = r.virtual_trace;
                const GenTraState * pre = &vt.initial_state;
                for (const auto & step : vt.events) {
                    seen_actions.insert(string(to_string(step.action)));
                    for (const auto & name : proc.projection.kept_params)
                        if (auto q = parse_param(name); q && param_changed(*pre, step.state, *q))
                            changed.insert(*q);
                    pre = &step.state;
                }
            }
        }
        for (const auto & a : proc.projection.kept_actions)
            if (! seen_actions.contains(a))
                v.uncovered_actions.push_back(a);
        for (const auto & name : proc.projection.kept_params)
            if (auto q = parse_param(name); ! q || ! changed.contains(*q))
                v.unchanged_params.push_back(name);
        report.processes.push_back(std::move(v));
    }
    return report;
}

auto format_report(const string & check, const ChainReport & r) -> string
{
    std::ostringstream o;
    o << "derivation chains: " << r.traces << " traces, " << r.contiguous << " contiguous, " << r.searched
      << " searched (bound " << r.search_bound << ")\n";
    if (r.ok())
        o << "PASS check " << check << " traces=" << r.traces << "\n";
    for (const auto & v : r.violations)
        o << "FAIL check " << check << " trace=" << v.trace << " index=" << v.prefix << " rule=chain cond="
          << quoted(v.message) << "\n";
    return o.str();
}

auto format_report(const string & check, const SimulationReport & r) -> string
{
    std::ostringstream o;
    o << "simulation: " << r.traces << " traces, " << r.transitions << " transitions\n";
    for (const auto & s : r.structural)
        o << "FAIL check " << check << " index=0 rule=structure cond=" << quoted(s) << "\n";
    for (const auto & v : r.violations)
        o << "FAIL check " << check << " trace=" << v.trace << " index=" << v.index << " rule=transition cond="
          << quoted(v.message) << "\n";
    if (r.ok())
        o << "PASS check " << check << " transitions=" << r.transitions << "\n";
    return o.str();
}

auto format_report(const string & check, const ComplianceReport & r) -> string
{
    std::ostringstream o;
    for (const auto & p : r.processes) {
        o << "process " << p.name << ": " << (p.compliant() ? "compliant" : "not compliant") << "\n";
        o << "  chain " << (p.chain_ok ? "ok" : "broken") << ", projection " << (p.projection_ok ? "ok" : "invalid")
          << ", valid " << p.valid << "/" << p.traces << ", guard violations " << p.guard_violations << "\n";
        if (! p.uncovered_actions.empty()) {
            o << "  actions never observed:";
            for (const auto & a : p.uncovered_actions)
                o << ' ' << a;
            o << "\n";
        }
        if (! p.unchanged_params.empty()) {
            o << "  parameters never changed:";
            for (const auto & a : p.unchanged_params)
                o << ' ' << a;
            o << "\n";
        }
        for (const auto & f : p.failures)
            o << "  " << f << "\n";
    }
    if (r.compliant())
        o << "PASS check " << check << " processes=" << r.processes.size() << "\n";
    else
        for (const auto & p : r.processes)
            if (! p.compliant())
                o << "FAIL check " << check << " process=" << p.name << " rule=compliance cond="
                  << quoted(p.failures.empty() ? "coverage" : p.failures.front()) << "\n";
    return o.str();
}

auto format_report(const string & check, const CommutationReport & r) -> string
{
    std::ostringstream o;
    o << "commutation: " << r.traces << " traces\n";
    for (const auto & v : r.violations)
        o << "FAIL check " << check << " trace=" << v.trace << " index=" << v.index << " rule=commute cond="
          << quoted(v.message) << "\n";
    if (r.ok())
        o << "PASS check " << check << " traces=" << r.traces << "\n";
    return o.str();
}

auto format_report(const string & check, const ValidationReport & r) -> string
{
    std::ostringstream o;
    o << "replayed " << (r.replayed ? r.events : r.failed_index.value_or(0)) << " of " << r.events << " events\n";
    if (! r.replayed)
        o << "FAIL check " << check << " index=" << r.failed_index.value_or(0) << " rule=" << r.rule
          << " cond=" << quoted(r.condition) << "\n";
    for (const auto & g : r.guards.violations)
        o << "FAIL check " << check << " index=" << g.index << " rule=" << to_string(g.guard)
          << " cond=" << quoted(g.message) << "\n";
    if (r.ok())
        o << "PASS check " << check << " events=" << r.events << "\n";
    return o.str();
}

}
