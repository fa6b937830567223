#include <gentrace/palm.hpp>

#include <algorithm>
#include <memory>

using std::optional;
using std::set;
using std::string;
using std::vector;

namespace gentrace {

namespace
{
    auto in_queue(const vector<SolverEvent> & q, const SolverEvent & a) -> bool
    {
        return std::find(q.begin(), q.end(), a) != q.end();
    }

    auto sorted(const set<ConstraintId> & s) -> vector<ConstraintId>
    {
        return {s.begin(), s.end()};
    }

    auto mentions(const ConstraintDecl & c, const VarId & v) -> bool
    {
        return std::find(c.vars.begin(), c.vars.end(), v) != c.vars.end();
    }

    auto changed_variable(const PalmSolverState & s, const PalmSolverState & n) -> VarId
    {
        optional<VarId> found;
        for (const auto & [v, d] : n.domains)
            if (! s.domains.contains(v) || s.domains.at(v) != d) {
                if (found)
                    throw std::invalid_argument("more than one domain changed");
                found = v;
            }
        if (! found)
            throw std::invalid_argument("no domain changed");
        return *found;
    }

    // Union of the explanations of the values in delta.
    auto explanations_for(const PalmSolverState & s, const VarId & v, const FiniteDomain & delta) -> set<ConstraintId>
    {
        set<ConstraintId> out;
        for (const auto & e : s.explanations)
            if (e.var == v && ! e.values.disjoint_from(delta))
                out.insert(e.because.begin(), e.because.end());
        return out;
    }

    auto is_palm_choice_point(const PalmSolverState & s) -> bool
    {
        if (s.active || ! s.rejected.empty() || select_event(s))
            return false;
        return std::any_of(s.domains.begin(), s.domains.end(), [](const auto & kv) { return kv.second.size() > 1; });
    }

    auto is_palm_solution(const PalmSolverState & s) -> bool
    {
        if (! s.rejected.empty())
            return false;
        for (const auto & c : palm_store(s)) {
            const auto & decl = s.constraints.at(c);
            for (const auto & v : decl.vars)
                if (! s.domains.at(v).is_singleton())
                    return false;
            if (! is_solved(decl, s.domains))
                return false;
        }
        return true;
    }
}

auto palm_initial_state(long chrono_base) -> PalmState
{
    PalmState s;
    s.next_chrono = chrono_base;
    return s;
}

auto palm_store(const PalmSolverState & s) -> set<ConstraintId>
{
    set<ConstraintId> out = s.sleeping;
    out.insert(s.rejected.begin(), s.rejected.end());
    if (s.active)
        out.insert(s.active->constraint);
    return out;
}

auto explanation_of(const PalmSolverState & s, const VarId & v, Value d) -> optional<set<ConstraintId>>
{
    for (const auto & e : s.explanations)
        if (e.var == v && e.values.contains(d))
            return e.because;
    return std::nullopt;
}

auto restorable_values(const PalmSolverState & s, const VarId & v) -> FiniteDomain
{
    auto sigma = palm_store(s);
    FiniteDomain out;
    for (const auto & e : s.explanations)
        if (e.var == v && ! std::includes(sigma.begin(), sigma.end(), e.because.begin(), e.because.end()))
            out = out.unite(e.values);
    return out;
}

auto dependence(const PalmSolverState & s, const ConstraintId & c, const SolverEvent & a) -> bool
{
    auto it = s.constraints.find(c);
    if (it == s.constraints.end())
        return false;
    return a.kind == EventKind::bottom || (a.var && mentions(it->second, *a.var));
}

auto select_event(const PalmSolverState & s) -> optional<SolverEvent>
{
    for (const auto & a : s.queue)
        for (const auto & c : s.sleeping)
            if (dependence(s, c, a))
                return a;
    return std::nullopt;
}

auto to_generic(const PalmSolverState & s) -> SolverState
{
    SolverState g;
    g.variables = s.variables;
    g.constraints = s.constraints;
    g.domains = s.domains;
    g.initial_domains = s.initial_domains;
    if (s.active)
        g.active.insert(*s.active);
    g.rejected = s.rejected;
    g.sleeping = s.sleeping;
    g.pending = s.queue;
    g.current_event = s.head;
    return g;
}

auto to_generic(const PalmState & s) -> GenTraState
{
    // Node tables are shared along a trace; mapping each table once keeps the
    // mapped tables shared too, so state comparison stays cheap.
    struct Entry
    {
        std::weak_ptr<const TreeNodes<PalmSolverState>> source;
        Frozen<TreeNodes<SolverState>> mapped;
    };
    thread_local std::map<const TreeNodes<PalmSolverState> *, Entry> tables;
    thread_local std::map<const PalmSolverState *, std::pair<std::weak_ptr<const PalmSolverState>, Frozen<SolverState>>>
        snapshots;
    auto prune = [](auto & cache) {
        if (cache.size() < 4096)
            return;
        std::erase_if(cache, [](const auto & kv) {
            if constexpr (requires { kv.second.source; })
                return kv.second.source.expired();
            else
                return kv.second.first.expired();
        });
        if (cache.size() >= 4096)
            cache.clear();
    };
    prune(tables);
    prune(snapshots);

    GenTraState g;
    g.solver = to_generic(s.solver);
    g.next_chrono = s.next_chrono;
    g.tree.current = s.tree.current;
    const auto & ptr = s.tree.data.share();
    auto it = tables.find(ptr.get());
    if (it == tables.end() || it->second.source.lock() != ptr) {
        TreeNodes<SolverState> t;
        t.order = ptr->order;
        t.depth = ptr->depth;
        for (const auto & [n, snap] : ptr->snapshots) {
            const auto & sp = snap.share();
            auto si = snapshots.find(sp.get());
            if (si == snapshots.end() || si->second.first.lock() != sp)
                si = snapshots.insert_or_assign(sp.get(), std::pair{std::weak_ptr(sp), Frozen<SolverState>(to_generic(*sp))})
                         .first;
            t.snapshots.emplace(n, si->second.second);
        }
        it = tables.insert_or_assign(ptr.get(), Entry{ptr, Frozen<TreeNodes<SolverState>>(std::move(t))}).first;
    }
    g.tree.data = it->second.mapped;
    return g;
}

auto palm_actions() -> set<EventType>
{
    set<EventType> out(all_event_types().begin(), all_event_types().end());
    out.erase(EventType::jump_to);
    out.erase(EventType::solved);
    return out;
}

auto PalmOS::is_initial(const State & s) const -> bool
{
    return s == palm_initial_state(s.next_chrono);
}

auto PalmOS::is_actual(const Actual & a) const -> bool
{
    if (shape_error(a, Dialect::palm))
        return false;
    return a.type != EventType::reduce || a.explanation.has_value();
}

auto PalmOS::transition(const State & s, Action r, const State & next) const -> bool
{
    try {
        return extract_local(s, r, next).type == r;
    }
    catch (const std::exception &) {
        return false;
    }
}

auto PalmOS::extract_local(const State & s, Action r, const State & next) const -> Actual
{
    const auto & a = s.solver;
    const auto & b = next.solver;
    Actual e;
    e.chrono = s.next_chrono;
    e.depth = s.tree.current_depth();
    e.type = r;
    auto new_events = [&] {
        vector<SolverEvent> out;
        for (const auto & x : b.queue)
            if (! in_queue(a.queue, x))
                out.push_back(x);
        return out;
    };
    switch (r) {
    case EventType::new_variable: {
        for (const auto & v : b.variables)
            if (! a.variables.contains(v))
                e.variable = v;
        if (! e.variable)
            throw std::invalid_argument("no new variable");
        e.domain = b.domains.at(*e.variable);
        if (b.names.contains(*e.variable))
            e.name = b.names.at(*e.variable);
        break;
    }
    case EventType::new_constraint: {
        for (const auto & [c, d] : b.constraints)
            if (! a.constraints.contains(c)) {
                e.constraint = c;
                e.decl = d;
            }
        if (! e.constraint)
            throw std::invalid_argument("no new constraint");
        break;
    }
    case EventType::post:
    case EventType::awake:
        if (! b.active)
            throw std::invalid_argument("no active pair");
        e.constraint = b.active->constraint;
        if (r == EventType::awake)
            e.event = b.active->event;
        break;
    case EventType::new_child:
    case EventType::solution:
    case EventType::failure: e.node = next.tree.current; break;
    case EventType::deactivate: {
        auto before = palm_store(a), after = palm_store(b);
        for (const auto & c : before)
            if (! after.contains(c))
                e.constraint = c;
        if (! e.constraint)
            throw std::invalid_argument("no constraint left the store");
        break;
    }
    case EventType::restore: {
        auto v = changed_variable(a, b);
        e.variable = v;
        e.domain = b.domains.at(v).subtract(a.domains.at(v));
        e.generated = new_events();
        e.explanation = sorted(explanations_for(a, v, *e.domain));
        break;
    }
    case EventType::reduce: {
        auto v = changed_variable(a, b);
        if (! a.active)
            throw std::invalid_argument("no active pair");
        e.constraint = a.active->constraint;
        e.event = a.active->event;
        e.variable = v;
        e.domain = a.domains.at(v).subtract(b.domains.at(v));
        e.generated = new_events();
        e.wake = wake_kind_for_change(a.domains.at(v), b.domains.at(v));
        if (b.explanations.empty())
            throw std::invalid_argument("no explanation recorded");
        e.explanation = sorted(b.explanations.back().because);
        break;
    }
    case EventType::suspend:
    case EventType::reject:
        if (! a.active)
            throw std::invalid_argument("no active pair");
        e.constraint = a.active->constraint;
        if (r == EventType::reject) {
            e.event = a.active->event;
            e.wake = WakeKind::empty;
        }
        break;
    case EventType::schedule:
        if (! b.head)
            throw std::invalid_argument("no scheduled event");
        e.event = *b.head;
        for (const auto & c : a.sleeping)
            if (dependence(a, c, *b.head)) {
                e.constraint = c;
                break;
            }
        break;
    case EventType::jump_to:
    case EventType::solved: throw std::invalid_argument("not a PaLM action");
    }
    auto [r2, s2] = reconstruct_local(s, e);
    if (r2 != r || s2 != next)
        throw std::invalid_argument("state change is not the effect of a single " + string(to_string(r)));
    return e;
}

auto PalmOS::reconstruct_local(const State & s, const Actual & a) const -> std::pair<Action, State>
{
    const EventType t = a.type;
    auto fail = [t](const string & why) { throw RuleViolation(t, why); };
    auto require = [&](bool cond, const char * why) {
        if (! cond)
            fail(why);
    };
    require(palm_actions().contains(t), "event type outside the PaLM action set");
    if (auto err = shape_error(a, Dialect::palm))
        fail(*err);
    require(a.chrono == s.next_chrono, "chrono is not the next serial number");
    require(a.depth == s.tree.current_depth(), "depth differs from delta(current)");

    State n = s;
    n.next_chrono += 1;
    auto & S = n.solver;
    auto new_node = [&](NodeId id) {
        require(! n.tree.contains(id), "node already in N");
        n.tree.add_node(id, S);
    };
    auto enqueue = [&](const vector<SolverEvent> & events, const VarId & v) {
        for (const auto & ev : events) {
            require(ev.kind != EventKind::bottom && ev.var == v, "generated event not on v");
            require(! in_queue(S.queue, ev), "generated event already in Q_t");
            S.queue.push_back(ev);
        }
    };

    switch (t) {
    case EventType::new_variable:
        require(! S.variables.contains(*a.variable), "v already in V");
        S.variables.insert(*a.variable);
        S.domains[*a.variable] = *a.domain;
        S.initial_domains[*a.variable] = *a.domain;
        if (a.name)
            S.names[*a.variable] = *a.name;
        break;
    case EventType::new_constraint:
        require(! S.constraints.contains(*a.constraint), "c already in C");
        try {
            check_well_formed(*a.decl);
        }
        catch (const ConstraintError & e) {
            fail(e.what());
        }
        for (const auto & v : a.decl->vars)
            require(S.variables.contains(v), "Var(c) not within V");
        S.constraints.emplace(*a.constraint, *a.decl);
        break;
    case EventType::post:
        require(S.constraints.contains(*a.constraint), "c not in C");
        require(! palm_store(S).contains(*a.constraint), "c already in the store");
        require(! S.active, "A is not empty");
        S.active = ActivePair{*a.constraint, bottom_event()};
        break;
    case EventType::new_child:
        require(is_palm_choice_point(S), "ch-pt(S) does not hold");
        new_node(*a.node);
        break;
    case EventType::solution:
        require(is_palm_solution(S), "sol(S) does not hold");
        new_node(*a.node);
        break;
    case EventType::failure:
        require(! S.rejected.empty(), "R is empty");
        new_node(*a.node);
        break;
    case EventType::deactivate: {
        const auto & c = *a.constraint;
        require(palm_store(S).contains(c), "c not in the store");
        if (S.active && S.active->constraint == c)
            S.active.reset();
        S.sleeping.erase(c);
        S.rejected.erase(c);
        break;
    }
    case EventType::restore: {
        const auto & v = *a.variable;
        require(S.variables.contains(v), "v not in V");
        const auto & delta = *a.domain;
        require(! delta.empty(), "empty R_v");
        require(delta.subset_of(restorable_values(S, v)), "R_v holds a value whose explanation is within sigma");
        auto erased = explanations_for(S, v, delta);
        if (a.explanation)
            require(*a.explanation == sorted(erased), "explanation differs from the erased explanations");
        S.domains.at(v) = S.domains.at(v).unite(delta);
        for (auto & e : S.explanations)
            if (e.var == v)
                e.values = e.values.subtract(delta);
        std::erase_if(S.explanations, [](const ExplanationEntry & e) { return e.values.empty(); });
        enqueue(a.generated, v);
        break;
    }
    case EventType::reduce: {
        const auto & v = *a.variable;
        ActivePair pair{*a.constraint, *a.event};
        require(S.rejected.empty(), "R is not empty");
        require(S.active == pair, "A is not {(c,a)}");
        const auto & decl = S.constraints.at(pair.constraint);
        require(mentions(decl, v), "v not in Var(c)");
        const auto & delta = *a.domain;
        require(! delta.empty(), "empty Delta");
        const auto before = S.domains.at(v);
        require(delta.subset_of(before), "Delta not within D(v)");
        require(delta.disjoint_from(filter(decl, S.domains).at(v)), "Delta holds a consistent value");
        require(a.explanation.has_value(), "missing explanation");
        set<ConstraintId> because(a.explanation->begin(), a.explanation->end());
        auto sigma = palm_store(S);
        require(because.contains(pair.constraint), "explanation omits c");
        require(std::includes(sigma.begin(), sigma.end(), because.begin(), because.end()),
            "explanation not within sigma");
        const auto after = before.subtract(delta);
        if (a.wake)
            require(*a.wake == wake_kind_for_change(before, after), "wake kind does not match the change");
        S.domains.at(v) = after;
        S.explanations.push_back({v, delta, because});
        enqueue(a.generated, v);
        break;
    }
    case EventType::suspend:
        require(S.active && S.active->constraint == *a.constraint, "A is not {(c,a)}");
        S.sleeping.insert(*a.constraint);
        S.active.reset();
        break;
    case EventType::reject: {
        ActivePair pair{*a.constraint, *a.event};
        require(S.active == pair, "A is not {(c,a)}");
        const auto & decl = S.constraints.at(pair.constraint);
        require(std::any_of(decl.vars.begin(), decl.vars.end(), [&](const VarId & v) { return S.domains.at(v).empty(); }),
            "no variable of c has an empty domain");
        if (a.wake)
            require(*a.wake == WakeKind::empty, "reject wake kind is not empty");
        S.active.reset();
        S.rejected.insert(pair.constraint);
        break;
    }
    case EventType::awake: {
        const auto & c = *a.constraint;
        const auto & ev = *a.event;
        require(! S.active, "A is not empty");
        require(S.rejected.empty(), "R is not empty");
        require(S.sleeping.contains(c), "c not in S_c");
        require(ev.kind == EventKind::bottom || S.head == ev, "a is neither Q_h nor bottom");
        require(dependence(S, c, ev), "dependence(c,a) does not hold");
        S.sleeping.erase(c);
        S.active = ActivePair{c, ev};
        break;
    }
    case EventType::schedule: {
        const auto & ev = *a.event;
        require(! S.active, "A is not empty");
        require(S.rejected.empty(), "R is not empty");
        require(! S.sleeping.empty(), "S_c is empty");
        require(in_queue(S.queue, ev), "a not in Q_t");
        require(select_event(S) == ev, "select(a) does not hold");
        if (a.constraint)
            require(S.sleeping.contains(*a.constraint) && dependence(S, *a.constraint, ev)
                    && std::find_if(S.sleeping.begin(), S.sleeping.end(),
                           [&](const ConstraintId & c) { return dependence(S, c, ev); })
                        == S.sleeping.find(*a.constraint),
                "c is not the first sleeping constraint depending on a");
        S.queue.erase(std::find(S.queue.begin(), S.queue.end(), ev));
        S.head = ev;
        break;
    }
    case EventType::jump_to:
    case EventType::solved: fail("not a PaLM action");
    }
    return {t, std::move(n)};
}

auto zero_based(Problem p) -> Problem
{
    auto fix = [](ConstraintDecl & d) {
        if (d.kind == ConstraintKind::element)
            d.index_base = 0;
    };
    for (auto & c : p.constraints)
        fix(c.decl);
    for (auto & b : p.branches)
        for (auto & d : b)
            fix(d);
    return p;
}

namespace
{
    class PalmEngine
    {
      public:
        PalmEngine(const Problem & p, const PalmSolveOptions & o) : problem(p), opts(o)
        {
            actual.initial_state = state;
            virtual_trace.initial_state = state;
        }

        const Problem & problem;
        PalmSolveOptions opts;
        PalmOS os;
        PalmState state = palm_initial_state(0);
        PalmActualTrace actual;
        PalmVirtualTrace virtual_trace;
        std::size_t checks = 0;
        std::map<std::string, VarId> ids;
        vector<ConstraintId> declared;
        set<ConstraintId> decisions;
        long next_constraint = 0;
        NodeId next_node = 1;
        vector<Assignment> solutions;

        auto S() const -> const PalmSolverState & { return state.solver; }

        auto check(bool ok, const char * property, const string & why) -> void
        {
            ++checks;
            if (! ok)
                throw PalmCheckFailure(actual.size(), property, why);
        }

        auto limit_error(const string & what) -> LimitExceeded
        {
            GenericActualTrace partial{initial_state(0), actual.events};
            return LimitExceeded(what, std::move(partial));
        }

        auto emit(GenericEvent e) -> void
        {
            if (actual.size() >= opts.max_events)
                throw limit_error("event limit exceeded");
            e.chrono = state.next_chrono;
            e.depth = state.tree.current_depth();
            const auto & s = S();
            // Guards on the state the event is applied in.
            check(e.type != EventType::solution || s.rejected.empty(), "G1", "solution while R is not empty");
            check(e.type != EventType::failure || ! s.rejected.empty(), "G2", "failure while R is empty");
            check(e.type != EventType::reduce || s.rejected.empty(), "G3", "reduce while R is not empty");
            check(e.type != EventType::awake || (s.rejected.empty() && ! s.active), "G4", "awake while R or A is not empty");
            check(e.type != EventType::schedule || (s.rejected.empty() && ! s.active), "G5",
                "schedule while R or A is not empty");
            if (e.type == EventType::awake) {
                auto g = to_generic(s);
                check(dependence(s, *e.constraint, *e.event) == awcond(g, *e.constraint, *e.event), "P1",
                    "dependence and awcond disagree");
            }
            if (e.type == EventType::schedule) {
                auto g = to_generic(s);
                check(acting_constraint(g, *e.event).has_value(), "P2", "selected event wakes no constraint");
            }
            auto [r, next] = os.reconstruct_local(state, e);
            state = std::move(next);
            actual.events.push_back(std::move(e));
            if (opts.keep_virtual)
                virtual_trace.events.push_back({r, state});
            after_step();
        }

        auto after_step() -> void
        {
            const auto & s = S();
            for (const auto & c : palm_store(s)) {
                const auto & decl = s.constraints.at(c);
                bool some_empty = std::any_of(decl.vars.begin(), decl.vars.end(),
                    [&](const VarId & v) { return s.domains.at(v).empty(); });
                check(! some_empty || is_false(decl, s.domains), "P3", "empty domain without false(c,D)");
            }
            for (const auto & e : s.explanations)
                check(e.values.disjoint_from(s.domains.at(e.var)), "explanation soundness",
                    "explained value still in D(" + e.var.name + ")");
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

        auto run_active() -> bool
        {
            const auto pair = *S().active;
            const auto decl = S().constraints.at(pair.constraint);
            auto filtered = filter(decl, S().domains);
            for (const auto & v : decl.vars) {
                const auto before = S().domains.at(v);
                const auto & after = filtered.at(v);
                if (after == before)
                    continue;
                set<ConstraintId> because{pair.constraint};
                for (const auto & w : decl.vars)
                    if (w != v)
                        for (const auto & x : S().explanations)
                            if (x.var == w)
                                because.insert(x.because.begin(), x.because.end());
                auto e = with_c(EventType::reduce, pair.constraint);
                e.variable = v;
                e.domain = before.subtract(after);
                e.event = pair.event;
                e.wake = wake_kind_for_change(before, after);
                e.explanation = sorted(because);
                for (auto & a : events_for_change(v, before, after))
                    if (! in_queue(S().queue, a))
                        e.generated.push_back(a);
                emit(std::move(e));
                if (after.empty()) {
                    auto r = with_c(EventType::reject, pair.constraint);
                    r.event = pair.event;
                    r.wake = WakeKind::empty;
                    emit(std::move(r));
                    return false;
                }
            }
            emit(with_c(EventType::suspend, pair.constraint));
            return true;
        }

        auto propagate() -> bool
        {
            for (;;) {
                if (! S().rejected.empty())
                    return false;
                if (S().active) {
                    if (! run_active())
                        return false;
                    continue;
                }
                auto next = select_event(S());
                if (! next)
                    return true;
                vector<ConstraintId> woken;
                for (const auto & c : S().sleeping)
                    if (dependence(S(), c, *next))
                        woken.push_back(c);
                auto sched = ev(EventType::schedule);
                sched.event = *next;
                sched.constraint = woken.front();
                emit(std::move(sched));
                for (const auto & c : woken) {
                    auto aw = with_c(EventType::awake, c);
                    aw.event = *next;
                    emit(std::move(aw));
                    if (! run_active())
                        return false;
                }
            }
        }

        auto translate(ConstraintDecl d) const -> ConstraintDecl
        {
            for (auto & v : d.vars)
                v = ids.at(v.name);
            return d;
        }

        auto declare(const ConstraintDecl & d) -> ConstraintId
        {
            ConstraintId c{"c" + std::to_string(next_constraint++)};
            auto e = with_c(EventType::new_constraint, c);
            e.decl = translate(d);
            emit(std::move(e));
            declared.push_back(c);
            return c;
        }

        auto node(EventType t) -> NodeId
        {
            if (static_cast<std::size_t>(next_node) > opts.max_nodes)
                throw limit_error("node limit exceeded");
            NodeId id = next_node++;
            auto e = ev(t);
            e.node = id;
            emit(std::move(e));
            return id;
        }

        auto post_and_propagate(const ConstraintId & c) -> bool
        {
            emit(with_c(EventType::post, c));
            return propagate();
        }

        // Repair back to the store of choice node n: relax the constraints
        // added since n and the rejected ones, give back every value whose
        // explanation lost support, then re-post the relaxed constraints n knew.
        auto repair_to(NodeId n) -> void
        {
            const auto keep = palm_store(state.tree.snapshot(n));
            const auto now = palm_store(S());
            vector<ConstraintId> relaxed;
            for (auto it = declared.rbegin(); it != declared.rend(); ++it)
                if (now.contains(*it) && (! keep.contains(*it) || S().rejected.contains(*it))) {
                    emit(with_c(EventType::deactivate, *it));
                    if (keep.contains(*it))
                        relaxed.push_back(*it);
                }
            const auto variables = S().variables;
            for (const auto & v : variables) {
                auto values = restorable_values(S(), v);
                if (values.empty())
                    continue;
                auto e = ev(EventType::restore);
                e.variable = v;
                e.domain = values;
                e.explanation = sorted(explanations_for(S(), v, values));
                auto dom = solver_event(EventKind::dom, v);
                if (! in_queue(S().queue, dom))
                    e.generated.push_back(dom);
                emit(std::move(e));
            }
            std::reverse(relaxed.begin(), relaxed.end());
            for (const auto & c : relaxed)
                if (! post_and_propagate(c))
                    throw PalmCheckFailure(actual.size(), "repair", "re-posting " + c.name + " failed");
            if (! propagate())
                throw PalmCheckFailure(actual.size(), "repair", "store of the choice node is inconsistent");
        }

        auto try_alternatives(const vector<ConstraintDecl> & alts, std::size_t next_branch) -> void
        {
            NodeId n = node(EventType::new_child);
            for (std::size_t i = 0; i < alts.size(); ++i) {
                if (i > 0)
                    repair_to(n);
                auto c = declare(alts[i]);
                post_and_propagate(c);
                explore(next_branch);
            }
        }

        auto record_solution() -> void
        {
            Assignment a;
            for (const auto & [v, d] : S().domains)
                a[S().names.at(v)] = d.min();
            if (std::find(solutions.begin(), solutions.end(), a) == solutions.end())
                solutions.push_back(std::move(a));
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

        auto explore(std::size_t next_branch) -> void
        {
            if (! propagate()) {
                node(EventType::failure);
                return;
            }
            if (next_branch < problem.branches.size()) {
                const auto & alts = problem.branches[next_branch];
                if (is_palm_choice_point(S())) {
                    try_alternatives(alts, next_branch + 1);
                    return;
                }
                std::map<VarId, Value> fixed;
                for (const auto & [v, d] : S().domains)
                    fixed[v] = d.min();
                const ConstraintDecl * pick = &alts.front();
                for (const auto & a : alts)
                    if (holds(translate(a), fixed)) {
                        pick = &a;
                        break;
                    }
                post_and_propagate(declare(*pick));
                explore(next_branch + 1);
                return;
            }
            for (const auto & v : label_sequence()) {
                const auto d = S().domains.at(v);
                if (d.size() <= 1)
                    continue;
                vector<ConstraintDecl> alts;
                for (Value x : d.values())
                    alts.push_back(make_eqc(VarId{S().names.at(v)}, x));
                try_alternatives(alts, next_branch);
                return;
            }
            if (is_palm_solution(S())) {
                node(EventType::solution);
                record_solution();
            }
            else
                node(EventType::failure);
        }

        auto run() -> void
        {
            long k = 0;
            for (const auto & v : problem.variables) {
                VarId id{"v" + std::to_string(k++)};
                ids.emplace(v.name, id);
                auto e = ev(EventType::new_variable);
                e.variable = id;
                e.name = v.name;
                e.domain = v.domain;
                emit(std::move(e));
            }
            for (const auto & c : problem.constraints)
                if (! post_and_propagate(declare(c.decl))) {
                    node(EventType::failure);
                    return;
                }
            explore(0);
        }
    };
}

auto palm_solve(const Problem & p, const PalmSolveOptions & options) -> PalmSolveResult
{
    p.check();
    PalmEngine engine(p, options);
    engine.run();
    PalmSolveResult r;
    r.solutions = std::move(engine.solutions);
    std::sort(r.solutions.begin(), r.solutions.end());
    r.actual = std::move(engine.actual);
    r.virtual_trace = std::move(engine.virtual_trace);
    r.checks = engine.checks;
    return r;
}

}
