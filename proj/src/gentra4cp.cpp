#include <gentrace/gentra4cp.hpp>

#include <algorithm>

using std::optional;
using std::set;
using std::string;
using std::string_view;
using std::vector;

namespace gentrace {

namespace
{
    constexpr std::array<string_view, 15> type_names{"newVariable", "newConstraint", "post", "newChild", "jumpTo",
        "solution", "failure", "deactivate", "restore", "reduce", "suspend", "solved", "reject", "awake", "schedule"};

    constexpr std::array<string_view, 12> param_names{"N", "Sigma", "delta", "current", "V", "C", "D", "A", "E", "R",
        "S_c", "S_e"};

    auto contains(const vector<SolverEvent> & q, const SolverEvent & a) -> bool
    {
        return std::find(q.begin(), q.end(), a) != q.end();
    }

    auto constraints_of(const set<ActivePair> & a) -> set<ConstraintId>
    {
        set<ConstraintId> out;
        for (const auto & p : a)
            out.insert(p.constraint);
        return out;
    }

    auto decl_of(const SolverState & s, const ConstraintId & c) -> const ConstraintDecl &
    {
        auto it = s.constraints.find(c);
        if (it == s.constraints.end())
            throw StoreInvariantError("undeclared constraint " + c.name);
        return it->second;
    }

    auto mentions(const ConstraintDecl & c, const VarId & v) -> bool
    {
        return std::find(c.vars.begin(), c.vars.end(), v) != c.vars.end();
    }

    // The single variable whose domain differs between two states.
    auto changed_variable(const SolverState & s, const SolverState & n) -> VarId
    {
        optional<VarId> found;
        for (const auto & [v, d] : n.domains) {
            auto it = s.domains.find(v);
            if (it == s.domains.end() || it->second != d) {
                if (found)
                    throw std::invalid_argument("more than one domain changed");
                found = v;
            }
        }
        if (! found)
            throw std::invalid_argument("no domain changed");
        return *found;
    }

    auto new_events(const vector<SolverEvent> & before, const vector<SolverEvent> & after) -> vector<SolverEvent>
    {
        vector<SolverEvent> out;
        for (const auto & a : after)
            if (! contains(before, a))
                out.push_back(a);
        return out;
    }

    template <typename T>
    auto single(const set<T> & xs, const char * what) -> T
    {
        if (xs.size() != 1)
            throw std::invalid_argument(string("expected exactly one ") + what);
        return *xs.begin();
    }

    template <typename T>
    auto minus(const set<T> & a, const set<T> & b) -> set<T>
    {
        set<T> out;
        std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::inserter(out, out.end()));
        return out;
    }
}

auto bottom_event() -> SolverEvent
{
    return {};
}

auto solver_event(EventKind kind, VarId var) -> SolverEvent
{
    return SolverEvent{kind, std::move(var), std::nullopt};
}

auto to_string(EventKind k) -> string_view
{
    switch (k) {
    case EventKind::dom: return "dom";
    case EventKind::min: return "min";
    case EventKind::max: return "max";
    case EventKind::val: return "val";
    case EventKind::bottom: return "bot";
    }
    return "?";
}

auto to_string(const SolverEvent & e) -> string
{
    if (e.kind == EventKind::bottom || ! e.var)
        return "bot";
    string out = e.var->name + ":" + string(to_string(e.kind));
    if (e.origin)
        out += ":" + e.origin->name;
    return out;
}

auto parse_event_kind(string_view s) -> optional<EventKind>
{
    for (auto k : {EventKind::dom, EventKind::min, EventKind::max, EventKind::val, EventKind::bottom})
        if (to_string(k) == s)
            return k;
    if (s == "⊥" || s == "bottom")
        return EventKind::bottom;
    return std::nullopt;
}

auto parse_solver_event(string_view s) -> optional<SolverEvent>
{
    if (s == "bot" || s == "⊥" || s == "bottom")
        return bottom_event();
    auto colon = s.find(':');
    if (colon == string_view::npos || colon == 0)
        return std::nullopt;
    auto rest = s.substr(colon + 1);
    auto colon2 = rest.find(':');
    auto kind = parse_event_kind(rest.substr(0, colon2));
    if (! kind || *kind == EventKind::bottom)
        return std::nullopt;
    SolverEvent e{*kind, VarId{string(s.substr(0, colon))}, std::nullopt};
    if (colon2 != string_view::npos) {
        auto origin = rest.substr(colon2 + 1);
        if (origin.empty())
            return std::nullopt;
        e.origin = ConstraintId{string(origin)};
    }
    return e;
}

auto all_event_types() -> const std::array<EventType, 15> &
{
    static const std::array<EventType, 15> types{EventType::new_variable, EventType::new_constraint, EventType::post,
        EventType::new_child, EventType::jump_to, EventType::solution, EventType::failure, EventType::deactivate,
        EventType::restore, EventType::reduce, EventType::suspend, EventType::solved, EventType::reject,
        EventType::awake, EventType::schedule};
    return types;
}

auto to_string(EventType t) -> string_view
{
    return type_names.at(static_cast<std::size_t>(t));
}

auto parse_event_type(string_view s) -> optional<EventType>
{
    for (std::size_t i = 0; i < type_names.size(); ++i)
        if (type_names[i] == s)
            return static_cast<EventType>(i);
    return std::nullopt;
}

auto initial_state(long chrono_base) -> GenTraState
{
    GenTraState s;
    s.next_chrono = chrono_base;
    return s;
}

auto to_string(WakeKind k) -> string_view
{
    switch (k) {
    case WakeKind::min: return "min";
    case WakeKind::max: return "max";
    case WakeKind::empty: return "empty";
    case WakeKind::dom: return "dom";
    case WakeKind::val: return "val";
    }
    return "?";
}

auto parse_wake_kind(string_view s) -> optional<WakeKind>
{
    for (auto k : {WakeKind::min, WakeKind::max, WakeKind::empty, WakeKind::dom, WakeKind::val})
        if (to_string(k) == s)
            return k;
    return std::nullopt;
}

auto shape_error(const GenericEvent & e, Dialect dialect) -> optional<string>
{
    enum Need
    {
        no,
        opt,
        req
    };
    struct Shape
    {
        Need constraint = no, variable = no, domain = no, generated = no, event = no, decl = no, node = no,
             from_node = no, name = no, wake = no, explanation = no;
    };
    bool palm = dialect == Dialect::palm;
    Need palm_opt = palm ? opt : no;
    Shape sh;
    switch (e.type) {
    case EventType::new_variable:
        sh.variable = sh.domain = req;
        sh.name = palm_opt;
        break;
    case EventType::new_constraint: sh.constraint = sh.decl = req; break;
    case EventType::post:
    case EventType::deactivate:
    case EventType::suspend:
    case EventType::solved: sh.constraint = req; break;
    case EventType::restore:
        sh.variable = sh.domain = req;
        sh.generated = opt;
        sh.explanation = palm_opt;
        break;
    case EventType::new_child:
    case EventType::solution:
    case EventType::failure: sh.node = req; break;
    case EventType::jump_to: sh.node = sh.from_node = req; break;
    case EventType::reduce:
        sh.constraint = sh.variable = sh.domain = sh.event = req;
        sh.generated = opt;
        sh.wake = sh.explanation = palm_opt;
        break;
    case EventType::reject:
        sh.constraint = sh.event = req;
        sh.wake = palm_opt;
        break;
    case EventType::awake: sh.constraint = sh.event = req; break;
    case EventType::schedule:
        sh.event = req;
        sh.constraint = opt;
        break;
    }
    auto check = [&](bool present, Need need, const char * field) -> optional<string> {
        if (need == req && ! present)
            return string("missing ") + field;
        if (need == no && present)
            return string("unexpected ") + field;
        return std::nullopt;
    };
    for (auto r : {check(e.constraint.has_value(), sh.constraint, "constraint"),
             check(e.variable.has_value(), sh.variable, "variable"), check(e.domain.has_value(), sh.domain, "domain"),
             check(! e.generated.empty(), sh.generated, "generated events"),
             check(e.event.has_value(), sh.event, "solver event"), check(e.decl.has_value(), sh.decl, "declaration"),
             check(e.node.has_value(), sh.node, "node"), check(e.from_node.has_value(), sh.from_node, "source node"),
             check(e.name.has_value(), sh.name, "name"), check(e.wake.has_value(), sh.wake, "wake kind"),
             check(e.explanation.has_value(), sh.explanation, "explanation")})
        if (r)
            return string(to_string(e.type)) + ": " + *r;
    if (e.raw_decl && e.type != EventType::new_constraint)
        return string(to_string(e.type)) + ": unexpected declaration text";
    return std::nullopt;
}

auto to_string(Param p) -> string_view
{
    return param_names.at(static_cast<std::size_t>(p));
}

auto parse_param(string_view s) -> optional<Param>
{
    for (std::size_t i = 0; i < param_names.size(); ++i)
        if (param_names[i] == s)
            return static_cast<Param>(i);
    return std::nullopt;
}

auto to_string(Guard g) -> string_view
{
    switch (g) {
    case Guard::G1: return "G1";
    case Guard::G2: return "G2";
    case Guard::G3: return "G3";
    case Guard::G4: return "G4";
    case Guard::G5: return "G5";
    }
    return "?";
}

auto default_guards() -> GuardSet
{
    return {Guard::G1, Guard::G2, Guard::G3};
}

auto all_guards() -> GuardSet
{
    return {Guard::G1, Guard::G2, Guard::G3, Guard::G4, Guard::G5};
}

auto AccessAudit::note(Param p, bool write, EventType rule) -> void
{
    (write ? written : read).insert(p);
    if (forbidden.contains(p))
        violations.push_back(string(to_string(rule)) + (write ? " writes " : " reads ") + string(to_string(p)));
}

auto palm_profile_options() -> SemanticsOptions
{
    SemanticsOptions o;
    o.actions.erase(EventType::jump_to);
    o.actions.erase(EventType::solved);
    o.track_solved = false;
    return o;
}

RuleViolation::RuleViolation(EventType rule, string condition) :
    std::runtime_error(string(to_string(rule)) + ": " + condition),
    rule(rule),
    condition(std::move(condition))
{
}

auto store(const SolverState & s, bool include_solved) -> set<ConstraintId>
{
    set<ConstraintId> sigma;
    auto add = [&](const ConstraintId & c, const char * part) {
        if (! sigma.insert(c).second)
            throw StoreInvariantError("constraint " + c.name + " appears twice in the store (" + part + ")");
        if (! s.constraints.contains(c))
            throw StoreInvariantError("store holds undeclared constraint " + c.name);
    };
    for (const auto & c : constraints_of(s.active))
        add(c, "A");
    if (s.active.size() != constraints_of(s.active).size())
        throw StoreInvariantError("constraint active on two events");
    for (const auto & c : s.sleeping)
        add(c, "S_c");
    if (include_solved)
        for (const auto & c : s.solved)
            add(c, "E");
    for (const auto & c : s.rejected)
        add(c, "R");
    return sigma;
}

auto constraint_false(const SolverState & s, const ConstraintId & c) -> bool
{
    return is_false(decl_of(s, c), s.domains);
}

auto constraint_solved(const SolverState & s, const ConstraintId & c) -> bool
{
    return is_solved(decl_of(s, c), s.domains);
}

auto watches(const ConstraintDecl & c, const SolverEvent & a) -> bool
{
    return a.kind == EventKind::bottom || (a.var && mentions(c, *a.var));
}

auto awcond(const SolverState & s, const ConstraintId & c, const SolverEvent & a) -> bool
{
    return s.sleeping.contains(c) && watches(decl_of(s, c), a);
}

auto acting_constraint(const SolverState & s, const SolverEvent & a) -> optional<ConstraintId>
{
    for (const auto & c : s.sleeping)
        if (watches(decl_of(s, c), a))
            return c;
    return std::nullopt;
}

auto is_choice_point(const SolverState & s) -> bool
{
    if (! s.active.empty() || ! s.rejected.empty())
        return false;
    for (const auto & a : s.pending)
        if (acting_constraint(s, a))
            return false;
    for (const auto & [v, d] : s.domains)
        if (d.size() > 1)
            return true;
    return false;
}

auto is_solution_state(const SolverState & s, bool include_solved) -> bool
{
    if (! s.rejected.empty())
        return false;
    for (const auto & c : store(s, include_solved)) {
        const auto & decl = decl_of(s, c);
        for (const auto & v : decl.vars)
            if (! s.domains.at(v).is_singleton())
                return false;
        if (! is_solved(decl, s.domains))
            return false;
    }
    return true;
}

auto is_failure_state(const SolverState & s) -> bool
{
    return ! s.rejected.empty();
}

auto events_for_change(const VarId & v, const FiniteDomain & before, const FiniteDomain & after) -> vector<SolverEvent>
{
    if (after.empty())
        return {};
    vector<SolverEvent> out{solver_event(EventKind::dom, v)};
    if (before.empty() || before.min() != after.min())
        out.push_back(solver_event(EventKind::min, v));
    if (before.empty() || before.max() != after.max())
        out.push_back(solver_event(EventKind::max, v));
    if (after.is_singleton())
        out.push_back(solver_event(EventKind::val, v));
    return out;
}

auto wake_kind_for_change(const FiniteDomain & before, const FiniteDomain & after) -> WakeKind
{
    if (after.empty())
        return WakeKind::empty;
    if (after.is_singleton())
        return WakeKind::val;
    if (before.empty())
        return WakeKind::dom;
    bool min_moved = before.min() != after.min();
    bool max_moved = before.max() != after.max();
    if (min_moved && ! max_moved)
        return WakeKind::min;
    if (max_moved && ! min_moved)
        return WakeKind::max;
    return WakeKind::dom;
}

GenTra4CP::GenTra4CP(SemanticsOptions options) : _options(std::move(options)) {}

auto GenTra4CP::is_initial(const State & s) const -> bool
{
    return s == initial_state(s.next_chrono);
}

auto GenTra4CP::is_actual(const Actual & a) const -> bool
{
    return ! shape_error(a, Dialect::generic);
}

auto GenTra4CP::transition(const State & s, Action r, const State & next) const -> bool
{
    try {
        return extract_local(s, r, next).type == r;
    }
    catch (const std::exception &) {
        return false;
    }
}

auto GenTra4CP::extract_local(const State & s, Action r, const State & next) const -> Actual
{
    const auto & a = s.solver;
    const auto & b = next.solver;
    Actual e;
    e.chrono = s.next_chrono;
    e.depth = s.tree.current_depth();
    e.type = r;
    switch (r) {
    case EventType::new_variable: {
        auto v = single(minus(b.variables, a.variables), "new variable");
        e.variable = v;
        e.domain = b.domains.at(v);
        break;
    }
    case EventType::new_constraint: {
        set<ConstraintId> before, after;
        for (const auto & [c, d] : a.constraints)
            before.insert(c);
        for (const auto & [c, d] : b.constraints)
            after.insert(c);
        auto c = single(minus(after, before), "new constraint");
        e.constraint = c;
        e.decl = b.constraints.at(c);
        break;
    }
    case EventType::post: e.constraint = single(minus(b.active, a.active), "new active pair").constraint; break;
    case EventType::new_child:
    case EventType::solution:
    case EventType::failure: e.node = next.tree.current; break;
    case EventType::jump_to:
        e.node = next.tree.current;
        e.from_node = s.tree.current;
        break;
    case EventType::deactivate:
        e.constraint =
            single(minus(store(a, _options.track_solved), store(b, _options.track_solved)), "removed constraint");
        break;
    case EventType::restore: {
        auto v = changed_variable(a, b);
        e.variable = v;
        e.domain = b.domains.at(v).subtract(a.domains.at(v));
        e.generated = new_events(a.pending, b.pending);
        break;
    }
    case EventType::reduce: {
        auto v = changed_variable(a, b);
        e.variable = v;
        e.domain = a.domains.at(v).subtract(b.domains.at(v));
        e.generated = new_events(a.pending, b.pending);
        optional<ActivePair> pair;
        if (_options.strict_reduce)
            pair = single(minus(a.active, b.active), "retired active pair");
        else
            for (const auto & p : a.active)
                if (mentions(decl_of(a, p.constraint), v)) {
                    pair = p;
                    break;
                }
        if (! pair)
            throw std::invalid_argument("no active constraint over the reduced variable");
        e.constraint = pair->constraint;
        e.event = pair->event;
        break;
    }
    case EventType::suspend:
    case EventType::solved: e.constraint = single(minus(a.active, b.active), "retired active pair").constraint; break;
    case EventType::reject:
    case EventType::awake: {
        auto p = single(r == EventType::awake ? minus(b.active, a.active) : minus(a.active, b.active), "active pair");
        e.constraint = p.constraint;
        e.event = p.event;
        break;
    }
    case EventType::schedule: {
        if (! b.current_event)
            throw std::invalid_argument("no scheduled event");
        e.event = *b.current_event;
        e.constraint = acting_constraint(a, *b.current_event);
        break;
    }
    }
    auto [r2, s2] = reconstruct_local(s, e);
    if (r2 != r || s2 != next)
        throw std::invalid_argument("state change is not the effect of a single " + string(to_string(r)));
    return e;
}

auto GenTra4CP::reconstruct_local(const State & s, const Actual & a) const -> std::pair<Action, State>
{
    const EventType t = a.type;
    auto fail = [t](const string & why) { throw RuleViolation(t, why); };
    auto require = [&](bool cond, const char * why) {
        if (! cond)
            fail(why);
    };
    auto touch = [&](std::initializer_list<Param> ps, bool write) {
        if (_options.audit)
            for (auto p : ps)
                if (p != Param::E || _options.track_solved)
                    _options.audit->note(p, write, t);
    };

    require(_options.actions.contains(t), "event type outside the action set");
    if (auto err = shape_error(a, Dialect::generic))
        fail(*err);
    require(a.chrono == s.next_chrono, "chrono is not the next serial number");
    require(a.depth == s.tree.current_depth(), "depth differs from delta(current)");

    const bool with_e = _options.track_solved;
    State n = s;
    n.next_chrono += 1;
    auto & S = n.solver;
    auto sigma = [&] { return store(S, with_e); };

    auto new_node = [&](NodeId id) {
        touch({Param::N}, false);
        touch({Param::N, Param::Sigma, Param::delta, Param::current}, true);
        require(! n.tree.contains(id), "node already in N");
        n.tree.add_node(id, S);
    };

    switch (t) {
    case EventType::new_variable: {
        touch({Param::V}, false);
        touch({Param::V, Param::D}, true);
        require(! S.variables.contains(*a.variable), "v already in V");
        S.variables.insert(*a.variable);
        S.domains[*a.variable] = *a.domain;
        S.initial_domains[*a.variable] = *a.domain;
        break;
    }
    case EventType::new_constraint: {
        touch({Param::C, Param::V}, false);
        touch({Param::C}, true);
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
    }
    case EventType::post: {
        touch({Param::C, Param::A, Param::S_c, Param::E, Param::R}, false);
        touch({Param::A}, true);
        require(S.constraints.contains(*a.constraint), "c not in C");
        require(! sigma().contains(*a.constraint), "c already in the store");
        S.active.insert({*a.constraint, bottom_event()});
        break;
    }
    case EventType::new_child: {
        touch({Param::A, Param::R, Param::S_c, Param::S_e, Param::D, Param::C}, false);
        require(is_choice_point(S), "ch-pt(S) does not hold");
        new_node(*a.node);
        break;
    }
    case EventType::solution: {
        touch({Param::A, Param::S_c, Param::E, Param::R, Param::D, Param::C}, false);
        require(is_solution_state(S, with_e), "sol(S) does not hold");
        new_node(*a.node);
        break;
    }
    case EventType::failure: {
        touch({Param::R}, false);
        require(is_failure_state(S), "flr(S) does not hold");
        new_node(*a.node);
        break;
    }
    case EventType::jump_to: {
        touch({Param::N, Param::Sigma, Param::current}, false);
        touch({Param::current, Param::V, Param::C, Param::D, Param::A, Param::E, Param::R, Param::S_c, Param::S_e}, true);
        NodeId target = *a.node;
        require(*a.from_node == s.tree.current, "source node is not the current node");
        require(target != s.tree.current, "target is the current node");
        require(n.tree.contains(target), "target not in N");
        require(is_choice_point(n.tree.snapshot(target)), "ch-pt does not hold at the target");
        S = n.tree.snapshot(target);
        n.tree.current = target;
        break;
    }
    case EventType::deactivate: {
        touch({Param::A, Param::S_c, Param::E, Param::R}, false);
        const auto & c = *a.constraint;
        require(sigma().contains(c), "c not in the store");
        if (std::erase_if(S.active, [&](const ActivePair & p) { return p.constraint == c; }))
            touch({Param::A}, true);
        if (S.sleeping.erase(c))
            touch({Param::S_c}, true);
        if (with_e && S.solved.erase(c))
            touch({Param::E}, true);
        if (S.rejected.erase(c))
            touch({Param::R}, true);
        break;
    }
    case EventType::restore: {
        touch({Param::V, Param::D, Param::S_e}, false);
        touch({Param::D}, true);
        const auto & v = *a.variable;
        require(S.variables.contains(v), "v not in V");
        auto & d = S.domains.at(v);
        require(a.domain->disjoint_from(d), "Delta_v meets D(v)");
        require(a.domain->subset_of(S.initial_domains.at(v)), "Delta_v not within D_{v,i}");
        d = d.unite(*a.domain);
        if (! a.generated.empty())
            touch({Param::S_e}, true);
        for (const auto & ev : a.generated) {
            require(ev.kind != EventKind::bottom && ev.var == v, "generated event not on v");
            require(! contains(S.pending, ev), "generated event already pending");
            S.pending.push_back(ev);
        }
        break;
    }
    case EventType::reduce: {
        touch({Param::A, Param::C, Param::D, Param::S_e}, false);
        touch({Param::D}, true);
        ActivePair pair{*a.constraint, *a.event};
        const auto & v = *a.variable;
        require(S.active.contains(pair), "(c,a) not in A");
        require(mentions(decl_of(S, pair.constraint), v), "v not in Var(c)");
        auto & d = S.domains.at(v);
        require(! a.domain->empty(), "empty Delta");
        require(a.domain->subset_of(d), "Delta not within D(v)");
        d = d.subtract(*a.domain);
        if (! a.generated.empty())
            touch({Param::S_e}, true);
        for (const auto & ev : a.generated) {
            require(ev.kind != EventKind::bottom && ev.var == v, "generated event not on v");
            require(! contains(S.pending, ev), "generated event already pending");
            S.pending.push_back(ev);
        }
        if (_options.strict_reduce) {
            touch({Param::A}, true);
            S.active.erase(pair);
        }
        break;
    }
    case EventType::suspend:
    case EventType::solved: {
        touch({Param::A}, false);
        auto it = std::find_if(S.active.begin(), S.active.end(),
            [&](const ActivePair & p) { return p.constraint == *a.constraint; });
        require(it != S.active.end(), "c not active");
        if (t == EventType::solved) {
            touch({Param::C, Param::D}, false);
            touch({Param::A, Param::E}, true);
            require(constraint_solved(S, *a.constraint), "solved(c,D) does not hold");
            S.active.erase(it);
            S.solved.insert(*a.constraint);
        }
        else {
            touch({Param::A, Param::S_c}, true);
            S.active.erase(it);
            S.sleeping.insert(*a.constraint);
        }
        break;
    }
    case EventType::reject: {
        touch({Param::A, Param::C, Param::D}, false);
        touch({Param::A, Param::R}, true);
        ActivePair pair{*a.constraint, *a.event};
        require(S.active.contains(pair), "(c,a) not in A");
        require(constraint_false(S, pair.constraint), "false(c,D) does not hold");
        S.active.erase(pair);
        S.rejected.insert(pair.constraint);
        break;
    }
    case EventType::awake: {
        touch({Param::S_c, Param::S_e, Param::C}, false);
        touch({Param::A, Param::S_c}, true);
        const auto & c = *a.constraint;
        const auto & ev = *a.event;
        require(S.sleeping.contains(c), "c not in S_c");
        require(ev.kind == EventKind::bottom || S.current_event == ev, "a is neither the scheduled event nor bottom");
        require(awcond(S, c, ev), "awcond(c,a) does not hold");
        S.sleeping.erase(c);
        S.active.insert({c, ev});
        break;
    }
    case EventType::schedule: {
        touch({Param::S_c, Param::S_e, Param::C}, false);
        touch({Param::S_e}, true);
        const auto & ev = *a.event;
        auto it = std::find(S.pending.begin(), S.pending.end(), ev);
        require(it != S.pending.end(), "a not in S_e");
        auto acting = acting_constraint(S, ev);
        require(acting.has_value(), "no sleeping constraint acts on a");
        if (a.constraint)
            require(*a.constraint == *acting, "c is not the first sleeping constraint acting on a");
        S.pending.erase(it);
        S.current_event = ev;
        break;
    }
    }
    try {
        (void) store(S, with_e);
    }
    catch (const StoreInvariantError & e) {
        fail(e.what());
    }
    return {t, std::move(n)};
}

auto GenTra4CP::apply(const State & s, const Actual & a) const -> State
{
    return reconstruct_local(s, a).second;
}

auto check_guards(const GenericVirtualTrace & vt, const GuardSet & guards) -> GuardReport
{
    GuardReport report;
    const GenTraState * pre = &vt.initial_state;
    for (std::size_t i = 0; i < vt.size(); ++i) {
        const auto & s = pre->solver;
        auto r = vt.events[i].action;
        auto flag = [&](Guard g, bool ok, const char * msg) {
            if (guards.contains(g) && ! ok)
                report.violations.push_back({i, g, msg});
        };
        flag(Guard::G1, r != EventType::solution || s.rejected.empty(), "solution while R is not empty");
        flag(Guard::G2, r != EventType::failure || ! s.rejected.empty(), "failure while R is empty");
        flag(Guard::G3, r != EventType::reduce || s.rejected.empty(), "reduce while R is not empty");
        flag(Guard::G4, r != EventType::awake || (s.rejected.empty() && s.active.empty()),
            "awake while R or A is not empty");
        flag(Guard::G5, r != EventType::schedule || (s.rejected.empty() && s.active.empty()),
            "schedule while R or A is not empty");
        pre = &vt.events[i].state;
    }
    return report;
}

auto palm_profile_validation() -> ValidationOptions
{
    return {palm_profile_options(), all_guards()};
}

auto validate(const GenericActualTrace & at, const ValidationOptions & options) -> ValidationReport
{
    ValidationReport report;
    GenTra4CP os(options.semantics);
    report.events = at.size();
    report.virtual_trace.initial_state = at.initial_state;
    if (! os.is_initial(at.initial_state)) {
        report.failed_index = 0;
        report.rule = "initial";
        report.condition = "initial state not in S_0";
        return report;
    }
    const GenTraState * pre = &at.initial_state;
    for (std::size_t i = 0; i < at.size(); ++i) {
        try {
            auto [r, next] = os.reconstruct_local(*pre, at.events[i]);
            report.virtual_trace.events.push_back({r, std::move(next)});
        }
        catch (const RuleViolation & e) {
            report.failed_index = i;
            report.rule = to_string(e.rule);
            report.condition = e.condition;
            return report;
        }
        catch (const std::exception & e) {
            report.failed_index = i;
            report.rule = to_string(at.events[i].type);
            report.condition = e.what();
            return report;
        }
        pre = &report.virtual_trace.events.back().state;
    }
    report.replayed = true;
    report.guards = check_guards(report.virtual_trace, options.guards);
    return report;
}

}
