#include <gentrace/fd_solver.hpp>

#include <algorithm>
#include <functional>
#include <set>

using std::map;
using std::optional;
using std::set;
using std::string;
using std::vector;

namespace gentrace {

auto Problem::check() const -> void
{
    set<string> names;
    for (const auto & v : variables)
        if (! names.insert(v.name).second)
            throw ConstraintError("duplicate variable " + v.name);
    auto known = [&](const ConstraintDecl & d) {
        check_well_formed(d);
        for (const auto & v : d.vars)
            if (! names.contains(v.name))
                throw ConstraintError("undeclared variable " + v.name + " in " + to_string(d));
    };
    for (const auto & c : constraints)
        known(c.decl);
    for (const auto & b : branches) {
        if (b.empty())
            throw ConstraintError("disjunction without alternatives");
        for (const auto & d : b)
            known(d);
    }
    for (const auto & n : label_order)
        if (! names.contains(n))
            throw ConstraintError("undeclared variable " + n + " in label order");
}

auto brute_force_solutions(const Problem & p, std::uint64_t max_tuples) -> vector<Assignment>
{
    p.check();
    std::uint64_t tuples = 1;
    vector<vector<Value>> values;
    for (const auto & v : p.variables) {
        values.push_back(v.domain.values(max_tuples));
        tuples *= std::max<std::uint64_t>(values.back().size(), 1);
        if (tuples > max_tuples)
            throw std::length_error("search space too large for enumeration");
    }
    vector<Assignment> out;
    map<VarId, Value> a;
    std::function<void(std::size_t)> rec = [&](std::size_t i) {
        if (i == p.variables.size()) {
            for (const auto & c : p.constraints)
                if (! holds(c.decl, a))
                    return;
            for (const auto & b : p.branches)
                if (std::none_of(b.begin(), b.end(), [&](const ConstraintDecl & d) { return holds(d, a); }))
                    return;
            Assignment s;
            for (const auto & [v, x] : a)
                s[v.name] = x;
            out.push_back(std::move(s));
            return;
        }
        for (Value x : values[i]) {
            a[VarId{p.variables[i].name}] = x;
            rec(i + 1);
        }
        a.erase(VarId{p.variables[i].name});
    };
    rec(0);
    std::sort(out.begin(), out.end());
    return out;
}

namespace
{
    // Owns the replay state; every event goes through the generic semantics,
    // so a solver bug surfaces as a RuleViolation at the offending event.
    class Engine
    {
      public:
        Engine(const GenTraState & start, const SolveOptions & o) :
            os([&] {
                SemanticsOptions so;
                so.strict_reduce = o.strict_reduce;
                return so;
            }()),
            opts(o),
            state(start)
        {
            actual.initial_state = start;
            virtual_trace.initial_state = start;
        }

        GenTra4CP os;
        SolveOptions opts;
        GenTraState state;
        GenericActualTrace actual;
        GenericVirtualTrace virtual_trace;

        auto solver() const -> const SolverState & { return state.solver; }

        auto emit(GenericEvent e) -> void
        {
            if (actual.size() >= opts.max_events)
                throw LimitExceeded("event limit exceeded", actual);
            e.chrono = state.next_chrono;
            e.depth = state.tree.current_depth();
            auto [r, next] = os.reconstruct_local(state, e);
            state = std::move(next);
            actual.events.push_back(std::move(e));
            if (opts.keep_virtual)
                virtual_trace.events.push_back({r, state});
        }

        auto ev(EventType t) -> GenericEvent
        {
            GenericEvent e;
            e.type = t;
            return e;
        }

        auto with_c(EventType t, const ConstraintId & c) -> GenericEvent
        {
            auto e = ev(t);
            e.constraint = c;
            return e;
        }

        auto post(const ConstraintId & c) -> void { emit(with_c(EventType::post, c)); }

        // Filtering of the single active pair until it leaves A. Returns false
        // on rejection.
        auto run_active(ActivePair pair) -> bool
        {
            const auto decl = solver().constraints.at(pair.constraint);
            if (is_false(decl, solver().domains)) {
                auto e = with_c(EventType::reject, pair.constraint);
                e.event = pair.event;
                emit(std::move(e));
                return false;
            }
            auto filtered = filter(decl, solver().domains);
            for (const auto & v : decl.vars) {
                const auto before = solver().domains.at(v);
                const auto & after = filtered.at(v);
                if (after == before)
                    continue;
                if (opts.strict_reduce && ! solver().active.contains(pair)) {
                    post(pair.constraint);
                    pair.event = bottom_event();
                }
                auto e = with_c(EventType::reduce, pair.constraint);
                e.variable = v;
                e.domain = before.subtract(after);
                e.event = pair.event;
                for (auto & a : events_for_change(v, before, after))
                    if (std::find(solver().pending.begin(), solver().pending.end(), a) == solver().pending.end())
                        e.generated.push_back(a);
                emit(std::move(e));
            }
            if (opts.strict_reduce && ! solver().active.contains(pair)) {
                post(pair.constraint);
                pair.event = bottom_event();
            }
            emit(with_c(is_solved(decl, solver().domains) ? EventType::solved : EventType::suspend, pair.constraint));
            return true;
        }

        auto propagate() -> bool
        {
            for (;;) {
                if (! solver().rejected.empty())
                    return false;
                if (! solver().active.empty()) {
                    if (! run_active(*solver().active.begin()))
                        return false;
                    continue;
                }
                optional<SolverEvent> next;
                for (const auto & a : solver().pending)
                    if (acting_constraint(solver(), a)) {
                        next = a;
                        break;
                    }
                if (! next)
                    return true;
                vector<ConstraintId> woken;
                for (const auto & c : solver().sleeping)
                    if (awcond(solver(), c, *next))
                        woken.push_back(c);
                auto sched = ev(EventType::schedule);
                sched.event = *next;
                sched.constraint = woken.front();
                emit(std::move(sched));
                for (const auto & c : woken) {
                    if (! awcond(solver(), c, *next))
                        continue;
                    auto aw = with_c(EventType::awake, c);
                    aw.event = *next;
                    emit(std::move(aw));
                    if (! run_active({c, *next}))
                        return false;
                }
            }
        }
    };

    class Search
    {
      public:
        Search(const Problem & p, const SolveOptions & o) : problem(p), engine(initial_state(1), o) {}

        const Problem & problem;
        Engine engine;
        map<string, VarId> ids;
        map<VarId, string> names;
        vector<ConstraintId> declared;  // declaration order, across backtracking
        long next_constraint = 1;
        NodeId next_node = 1;
        vector<Assignment> solutions;

        auto translate(ConstraintDecl d) const -> ConstraintDecl
        {
            for (auto & v : d.vars)
                v = ids.at(v.name);
            return d;
        }

        auto declare(const ConstraintDecl & d) -> ConstraintId
        {
            ConstraintId c{"c" + std::to_string(next_constraint++)};
            auto e = engine.with_c(EventType::new_constraint, c);
            e.decl = translate(d);
            engine.emit(std::move(e));
            declared.push_back(c);
            return c;
        }

        auto node(EventType t) -> NodeId
        {
            if (static_cast<std::size_t>(next_node) > engine.opts.max_nodes)
                throw LimitExceeded("node limit exceeded", engine.actual);
            NodeId id = next_node++;
            auto e = engine.ev(t);
            e.node = id;
            engine.emit(std::move(e));
            return id;
        }

        auto record_solution() -> void
        {
            Assignment a;
            for (const auto & [v, d] : engine.solver().domains)
                a[names.at(v)] = d.min();
            if (std::find(solutions.begin(), solutions.end(), a) == solutions.end())
                solutions.push_back(std::move(a));
        }

        auto undo_to(NodeId n) -> void
        {
            const auto target = engine.state.tree.snapshot(n);
            auto keep = store(target);
            auto now = store(engine.solver());
            for (auto it = declared.rbegin(); it != declared.rend(); ++it)
                if (now.contains(*it) && ! keep.contains(*it))
                    engine.emit(engine.with_c(EventType::deactivate, *it));
            for (const auto & [v, d] : target.domains) {
                const auto & cur = engine.solver().domains.at(v);
                if (cur == d)
                    continue;
                auto e = engine.ev(EventType::restore);
                e.variable = v;
                e.domain = d.subtract(cur);
                engine.emit(std::move(e));
            }
            auto e = engine.ev(EventType::jump_to);
            e.node = n;
            e.from_node = engine.state.tree.current;
            engine.emit(std::move(e));
        }

        auto try_alternatives(const vector<ConstraintDecl> & alts, std::size_t next_branch) -> void
        {
            NodeId n = node(EventType::new_child);
            for (std::size_t i = 0; i < alts.size(); ++i) {
                if (i > 0)
                    undo_to(n);
                auto c = declare(alts[i]);
                engine.post(c);
                explore(next_branch);
            }
        }

        auto explore(std::size_t next_branch) -> void
        {
            if (! engine.propagate()) {
                node(EventType::failure);
                return;
            }
            const auto & s = engine.solver();
            if (next_branch < problem.branches.size()) {
                const auto & alts = problem.branches[next_branch];
                if (is_choice_point(s)) {
                    try_alternatives(alts, next_branch + 1);
                    return;
                }
                map<VarId, Value> fixed;
                for (const auto & [v, d] : s.domains)
                    fixed[v] = d.min();
                const ConstraintDecl * pick = &alts.front();
                for (const auto & a : alts)
                    if (holds(translate(a), fixed)) {
                        pick = &a;
                        break;
                    }
                engine.post(declare(*pick));
                explore(next_branch + 1);
                return;
            }
            for (const auto & v : label_sequence()) {
                const auto & d = s.domains.at(v);
                if (d.size() <= 1)
                    continue;
                vector<ConstraintDecl> alts;
                for (Value x : d.values())
                    alts.push_back(make_eqc(VarId{names.at(v)}, x));
                try_alternatives(alts, next_branch);
                return;
            }
            if (is_solution_state(s)) {
                node(EventType::solution);
                record_solution();
            }
            else
                node(EventType::failure);
        }

        auto label_sequence() const -> vector<VarId>
        {
            vector<VarId> out;
            for (const auto & n : problem.label_order)
                out.push_back(ids.at(n));
            for (const auto & v : problem.variables)
                if (std::find(out.begin(), out.end(), ids.at(v.name)) == out.end())
                    out.push_back(ids.at(v.name));
            return out;
        }

        auto run() -> void
        {
            long k = 1;
            for (const auto & v : problem.variables) {
                VarId id{"v" + std::to_string(k++)};
                ids.emplace(v.name, id);
                names.emplace(id, v.name);
                auto e = engine.ev(EventType::new_variable);
                e.variable = id;
                e.domain = v.domain;
                engine.emit(std::move(e));
            }
            for (const auto & c : problem.constraints) {
                engine.post(declare(c.decl));
                if (! engine.propagate()) {
                    node(EventType::failure);
                    return;
                }
            }
            explore(0);
        }
    };
}

auto solve(const Problem & p, const SolveOptions & options) -> SolveResult
{
    p.check();
    Search search(p, options);
    search.run();
    SolveResult r;
    r.solutions = std::move(search.solutions);
    std::sort(r.solutions.begin(), r.solutions.end());
    r.actual = std::move(search.engine.actual);
    r.virtual_trace = std::move(search.engine.virtual_trace);
    r.names = std::move(search.names);
    return r;
}

auto propagate(const GenTraState & s, const SolveOptions & options) -> PropagationResult
{
    Engine engine(s, options);
    bool ok = engine.propagate();
    return {engine.state, std::move(engine.actual.events), ok};
}

}
