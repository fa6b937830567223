#include <gentrace/text_format.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <functional>
#include <map>
#include <set>

using std::map;
using std::optional;
using std::size_t;
using std::string;
using std::string_view;
using std::vector;

namespace gentrace {

auto TraceDocument::header_value(string_view key) const -> optional<string>
{
    for (const auto & [k, v] : header)
        if (k == key)
            return v;
    return std::nullopt;
}

namespace
{
    auto trim(string_view s) -> string_view
    {
        while (! s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
            s.remove_prefix(1);
        while (! s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
            s.remove_suffix(1);
        return s;
    }

    template <typename Int>
    auto to_int(string_view s) -> optional<Int>
    {
        Int v{};
        if (s.empty())
            return std::nullopt;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || p != s.data() + s.size())
            return std::nullopt;
        return v;
    }

    auto is_id(string_view s, char stem, bool allow_negative) -> bool
    {
        if (s.size() < 2 || s[0] != stem)
            return false;
        auto digits = s.substr(1);
        if (allow_negative && digits.front() == '-')
            digits.remove_prefix(1);
        return ! digits.empty()
            && std::all_of(digits.begin(), digits.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
    }

    // Splits at top-level commas.
    auto split_args(string_view s) -> optional<vector<string_view>>
    {
        vector<string_view> out;
        int depth = 0;
        size_t start = 0;
        for (size_t i = 0; i < s.size(); ++i) {
            char c = s[i];
            if (c == '(' || c == '[' || c == '{')
                ++depth;
            else if (c == ')' || c == ']' || c == '}') {
                if (--depth < 0)
                    return std::nullopt;
            }
            else if (c == ',' && depth == 0) {
                out.push_back(trim(s.substr(start, i - start)));
                start = i + 1;
            }
        }
        if (depth != 0)
            return std::nullopt;
        auto last = trim(s.substr(start));
        if (! last.empty() || ! out.empty())
            out.push_back(last);
        return out;
    }

    auto join_ids(const vector<ConstraintId> & ids) -> string
    {
        string s;
        for (size_t i = 0; i < ids.size(); ++i)
            s += (i ? "," : "") + ids[i].name;
        return s;
    }

    struct TermError
    {
        string why;
    };

    struct Term
    {
        ConstraintDecl decl;
        vector<string> notes;  // lenient idioms used
        bool used_names = false;
    };

    // Reads one constraint term. `resolve` maps an argument to a variable id
    // (nullopt if unknown) and reports whether a name was used.
    auto parse_term(string_view text, bool lenient,
        const std::function<optional<VarId>(string_view, bool &)> & resolve) -> Term
    {
        Term out;
        text = trim(text);
        auto open = text.find('(');
        if (open == string_view::npos || text.back() != ')')
            throw TermError{"constraint term expected"};
        string name(trim(text.substr(0, open)));
        auto inner = text.substr(open + 1, text.size() - open - 2);
        auto args = split_args(inner);
        if (! args)
            throw TermError{"unbalanced brackets in constraint term"};
        if (args->size() == 1 && args->front().size() >= 2 && args->front().front() == '['
            && args->front().back() == ']') {
            auto unwrapped = split_args(args->front().substr(1, args->front().size() - 2));
            if (unwrapped && unwrapped->size() > 1) {
                if (! lenient)
                    throw TermError{"list-wrapped arguments"};
                out.notes.push_back("list-wrapped arguments in " + name);
                args = unwrapped;
            }
        }
        static const map<string, string> aliases{{"fd_element", "element"}, {"eq", "x_eq_y"}, {"eqc", "x_eq_c"},
            {"neq", "x_neq_y"}, {"fd_element0", "element0"}};
        if (auto a = aliases.find(name); a != aliases.end()) {
            if (! lenient)
                throw TermError{"unknown constraint " + name};
            out.notes.push_back("alias " + name + " for " + a->second);
            name = a->second;
        }
        auto var = [&](string_view s) {
            bool by_name = false;
            auto v = resolve(trim(s), by_name);
            if (! v)
                throw TermError{"unknown variable " + string(trim(s))};
            if (by_name) {
                if (! lenient)
                    throw TermError{"variable referenced by name: " + string(trim(s))};
                out.used_names = true;
            }
            return *v;
        };
        auto integer = [&](string_view s) {
            auto v = to_int<Value>(trim(s));
            if (! v)
                throw TermError{"integer expected, got " + string(trim(s))};
            return *v;
        };
        auto arity = [&](size_t n) {
            if (args->size() != n)
                throw TermError{name + " takes " + std::to_string(n) + " arguments"};
        };
        auto & d = out.decl;
        if (name == "element" || name == "element0") {
            arity(3);
            auto list = trim((*args)[1]);
            if (list.size() < 2 || list.front() != '[' || list.back() != ']')
                throw TermError{"element list expected"};
            vector<Value> values;
            if (auto items = split_args(list.substr(1, list.size() - 2)))
                for (auto x : *items)
                    values.push_back(integer(x));
            d = make_element(var((*args)[0]), std::move(values), var((*args)[2]), name == "element0" ? 0 : 1);
        }
        else if (name == "x_eq_y") {
            arity(2);
            d = make_eq(var((*args)[0]), var((*args)[1]));
        }
        else if (name == "x_neq_y") {
            arity(2);
            d = make_neq(var((*args)[0]), var((*args)[1]));
        }
        else if (name == "x_eq_c") {
            arity(2);
            d = make_eqc(var((*args)[0]), integer((*args)[1]));
        }
        else
            throw TermError{"unknown constraint " + name};
        try {
            check_well_formed(d);
        }
        catch (const ConstraintError & e) {
            throw TermError{e.what()};
        }
        return out;
    }

    struct Token
    {
        string_view text;
        size_t column = 0;  // 1-based
    };

    auto tokenize(string_view s, size_t column0) -> optional<vector<Token>>
    {
        vector<Token> out;
        size_t i = 0;
        while (i < s.size()) {
            if (std::isspace(static_cast<unsigned char>(s[i]))) {
                ++i;
                continue;
            }
            size_t start = i;
            int depth = 0;
            while (i < s.size() && (depth > 0 || ! std::isspace(static_cast<unsigned char>(s[i])))) {
                char c = s[i];
                if (c == '(' || c == '[' || c == '{')
                    ++depth;
                else if (c == ')' || c == ']' || c == '}')
                    --depth;
                ++i;
            }
            if (depth != 0)
                return std::nullopt;
            out.push_back({s.substr(start, i - start), column0 + start});
        }
        return out;
    }

    struct LogicalLine
    {
        string text;
        size_t line = 0;
    };

    class TraceParser
    {
      public:
        TraceParser(const ParseOptions & o) : opts(o), lenient(o.mode == ParseMode::lenient) {}

        ParseOptions opts;
        bool lenient;
        TraceDocument doc;
        map<string, VarId> names;  // palm variable names, for name references

        [[noreturn]] auto error(size_t line, size_t column, const string & why) const -> void
        {
            throw ParseError(line, column, why);
        }

        auto deviate(size_t line, string kind, string detail) -> void
        {
            doc.deviations.push_back({line, std::move(kind), std::move(detail)});
        }

        auto run(string_view text) -> TraceDocument
        {
            vector<LogicalLine> lines;
            bool after_marker = false;
            bool events_started = false;
            size_t lineno = 0;
            size_t pos = 0;
            while (pos < text.size()) {
                auto nl = text.find('\n', pos);
                string_view raw = text.substr(pos, nl == string_view::npos ? string_view::npos : nl - pos);
                pos = nl == string_view::npos ? text.size() : nl + 1;
                ++lineno;
                if (! raw.empty() && raw.back() == '\r') {
                    if (! lenient)
                        error(lineno, raw.size(), "carriage return");
                    raw.remove_suffix(1);
                }
                auto t = trim(raw);
                if (t.empty()) {
                    if (! lenient)
                        error(lineno, 1, "blank line");
                    deviate(lineno, "blank line", "skipped");
                    continue;
                }
                if (after_marker) {
                    if (! lenient)
                        error(lineno, 1, "content after the truncation marker");
                    deviate(lineno, "after truncation", string(t));
                    continue;
                }
                if (t == "...") {
                    if (! lenient && raw != "...")
                        error(lineno, 1, "truncation marker must be written \"...\"");
                    doc.truncated = true;
                    after_marker = true;
                    continue;
                }
                if (t.front() == '#') {
                    header_line(lineno, raw, t, events_started);
                    continue;
                }
                if (std::isdigit(static_cast<unsigned char>(t.front()))) {
                    if (raw.front() != t.front()) {
                        if (! lenient)
                            error(lineno, 1, "leading whitespace");
                        deviate(lineno, "leading whitespace", "");
                    }
                    events_started = true;
                    lines.push_back({string(t), lineno});
                    continue;
                }
                if (! lenient)
                    error(lineno, 1, "event line must start with a chrono number");
                if (lines.empty())
                    error(lineno, 1, "continuation line without a preceding event");
                deviate(lineno, "continuation line", "joined to line " + std::to_string(lines.back().line));
                lines.back().text += " ";
                lines.back().text += t;
            }
            if (! lenient && ! text.empty() && text.back() != '\n')
                error(lineno, 1, "missing final newline");
            if (auto d = doc.header_value("dialect")) {
                if (*d == "palm")
                    doc.dialect = Dialect::palm;
                else if (*d == "generic")
                    doc.dialect = Dialect::generic;
                else
                    error(1, 1, "unknown dialect " + *d);
            }
            else
                doc.dialect = opts.dialect;
            doc.mx = default_mx;
            if (auto m = doc.header_value("mx")) {
                auto v = to_int<Value>(*m);
                if (! v || *v < 0)
                    error(1, 1, "bad mx value " + *m);
                doc.mx = *v;
            }
            if (opts.mx)
                doc.mx = *opts.mx;
            for (const auto & l : lines)
                event_line(l);
            std::stable_sort(doc.deviations.begin(), doc.deviations.end(),
                [](const Deviation & a, const Deviation & b) { return a.line < b.line; });
            return std::move(doc);
        }

        auto header_line(size_t lineno, string_view raw, string_view t, bool events_started) -> void
        {
            if (events_started) {
                if (! lenient)
                    error(lineno, 1, "header line after the first event");
                deviate(lineno, "late comment", string(t));
                return;
            }
            auto body = t.substr(1);
            auto colon = body.find(':');
            if (colon == string_view::npos) {
                if (! lenient)
                    error(lineno, 1, "header line must read \"# key: value\"");
                deviate(lineno, "comment", string(trim(body)));
                return;
            }
            string key(trim(body.substr(0, colon)));
            string value(trim(body.substr(colon + 1)));
            if (! lenient && raw != "# " + key + ": " + value)
                error(lineno, 1, "header line must read \"# key: value\"");
            doc.header.emplace_back(std::move(key), std::move(value));
        }

        auto event_line(const LogicalLine & l) -> void
        {
            string_view s = l.text;
            size_t i = 0;
            while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i])))
                ++i;
            auto chrono = to_int<long>(s.substr(0, i));
            if (! chrono)
                error(l.line, 1, "chrono number expected");
            size_t j = i;
            if (j >= s.size() || s[j] != '[')
                error(l.line, j + 1, "\"[\" expected after the chrono number");
            auto close = s.find(']', j);
            if (close == string_view::npos)
                error(l.line, j + 1, "unterminated depth");
            auto depth = to_int<int>(s.substr(j + 1, close - j - 1));
            if (! depth)
                error(l.line, j + 2, "depth number expected");
            size_t k = close + 1;
            size_t type_start = k;
            while (k < s.size() && std::isalpha(static_cast<unsigned char>(s[k])))
                ++k;
            string_view type_text = s.substr(type_start, k - type_start);
            GenericEvent e;
            e.chrono = *chrono;
            e.depth = *depth;
            auto type = parse_event_type(type_text);
            string_view rest = s.substr(k);
            if (! type && lenient && type_text == "choice") {
                auto after = trim(rest);
                if (after.starts_with("point")) {
                    type = EventType::new_child;
                    rest = s.substr(s.find("point", k) + 5);
                    deviate(l.line, "choice point", "read as newChild");
                }
            }
            if (! type)
                error(l.line, type_start + 1, "unknown event type \"" + string(type_text) + "\"");
            e.type = *type;
            if (! doc.events.empty() && e.chrono != doc.events.back().chrono + 1) {
                if (! lenient)
                    error(l.line, 1, "chrono does not follow the previous event");
                deviate(l.line, "chrono gap", std::to_string(doc.events.back().chrono) + " to " + std::to_string(e.chrono));
            }
            auto tokens = tokenize(rest, static_cast<size_t>(rest.data() - s.data()) + 1);
            if (! tokens)
                error(l.line, type_start + 1, "unbalanced brackets");
            attributes(l.line, e, *tokens);
            if (auto err = shape_error(e, doc.dialect)) {
                if (! lenient)
                    error(l.line, type_start + 1, *err);
                deviate(l.line, "shape", *err);
            }
            if (! lenient) {
                auto canonical = format_event(e, doc.mx);
                if (canonical != s) {
                    size_t m = 0;
                    while (m < canonical.size() && m < s.size() && canonical[m] == s[m])
                        ++m;
                    error(l.line, m + 1, "not in canonical form (expected \"" + canonical + "\")");
                }
            }
            if (e.type == EventType::new_variable && e.name && e.variable)
                names[*e.name] = *e.variable;
            doc.events.push_back(std::move(e));
        }

        auto attributes(size_t line, GenericEvent & e, const vector<Token> & tokens) -> void
        {
            const bool palm = doc.dialect == Dialect::palm;
            auto palm_extra = [&](const Token & t, const char * what) {
                if (! palm) {
                    if (! lenient)
                        error(line, t.column, string(what) + " outside the palm dialect");
                    deviate(line, "palm attribute", string(what) + " in the generic dialect");
                }
            };
            auto once = [&](bool present, const Token & t) {
                if (present)
                    error(line, t.column, "repeated attribute \"" + string(t.text) + "\"");
            };
            optional<Token> pending_var;  // schedule idiom "v2 dom"
            for (size_t n = 0; n < tokens.size(); ++n) {
                const auto & t = tokens[n];
                auto x = t.text;
                if (x.front() == '[') {
                    once(e.domain.has_value(), t);
                    try {
                        e.domain = parse_domain(x, doc.mx);
                    }
                    catch (const ParseError & pe) {
                        error(line, t.column + pe.column - 1, pe.reason);
                    }
                }
                else if (x.starts_with("node(") && x.back() == ')') {
                    auto id = to_int<NodeId>(x.substr(5, x.size() - 6));
                    if (! id)
                        error(line, t.column + 5, "node number expected");
                    if (! e.node)
                        e.node = *id;
                    else {
                        once(e.from_node.has_value(), t);
                        e.from_node = *id;
                    }
                }
                else if (x.starts_with("expl{") && x.back() == '}') {
                    once(e.explanation.has_value(), t);
                    palm_extra(t, "explanation");
                    vector<ConstraintId> ids;
                    if (auto items = split_args(x.substr(5, x.size() - 6)))
                        for (auto c : *items) {
                            if (! is_id(c, 'c', lenient))
                                error(line, t.column, "constraint id expected in explanation");
                            ids.push_back(ConstraintId{string(c)});
                        }
                    e.explanation = std::move(ids);
                }
                else if (x.front() == '{' && x.back() == '}') {
                    if (! e.generated.empty())
                        error(line, t.column, "repeated generated events");
                    auto items = split_args(x.substr(1, x.size() - 2));
                    if (! items || items->empty())
                        error(line, t.column, "generated event list must not be empty");
                    for (auto a : *items) {
                        auto ev = parse_solver_event(a);
                        if (! ev)
                            error(line, t.column, "solver event expected, got \"" + string(a) + "\"");
                        e.generated.push_back(*ev);
                    }
                }
                else if (x.front() == '(' && x.back() == ')') {
                    auto items = split_args(x.substr(1, x.size() - 2));
                    optional<SolverEvent> ev;
                    if (items && items->size() == 2)
                        if (auto k = parse_event_kind((*items)[1]); k && *k != EventKind::bottom)
                            ev = solver_event(*k, VarId{string((*items)[0])});
                    if (! ev || ! lenient)
                        error(line, t.column, "unexpected \"" + string(x) + "\"");
                    once(e.event.has_value(), t);
                    e.event = ev;
                    deviate(line, "parenthesized event", string(x));
                }
                else if (x.find('(') != string_view::npos) {
                    once(e.decl.has_value() || e.raw_decl.has_value(), t);
                    declaration(line, t, e);
                }
                else if (x == "bot" || x.find(':') != string_view::npos) {
                    auto ev = parse_solver_event(x);
                    if (! ev)
                        error(line, t.column, "bad solver event \"" + string(x) + "\"");
                    once(e.event.has_value(), t);
                    e.event = ev;
                }
                else if (auto w = parse_wake_kind(x)) {
                    if (e.type == EventType::schedule && pending_var && lenient) {
                        auto k = parse_event_kind(x);
                        if (! k || *k == EventKind::bottom)
                            error(line, t.column, "event kind expected");
                        once(e.event.has_value(), t);
                        e.event = solver_event(*k, VarId{string(pending_var->text)});
                        deviate(line, "schedule variable and kind", string(pending_var->text) + " " + string(x));
                        pending_var.reset();
                        continue;
                    }
                    once(e.wake.has_value(), t);
                    palm_extra(t, "wake kind");
                    e.wake = *w;
                }
                else if (is_id(x, 'v', true)) {
                    if (x[1] == '-') {
                        if (! lenient)
                            error(line, t.column, "negative variable id");
                        deviate(line, "negative variable id", string(x));
                    }
                    if (e.type == EventType::schedule && lenient && ! pending_var) {
                        pending_var = t;
                        continue;
                    }
                    if (e.variable && e.type == EventType::new_variable && ! e.name && palm)
                        e.name = string(x);
                    else {
                        once(e.variable.has_value(), t);
                        e.variable = VarId{string(x)};
                    }
                }
                else if (is_id(x, 'c', lenient)) {
                    once(e.constraint.has_value(), t);
                    e.constraint = ConstraintId{string(x)};
                }
                else if (e.type == EventType::new_variable && e.variable && ! e.name && ! e.domain) {
                    palm_extra(t, "variable name");
                    e.name = string(x);
                }
                else
                    error(line, t.column, "unexpected attribute \"" + string(x) + "\"");
            }
            if (pending_var)
                error(line, pending_var->column, "unexpected attribute \"" + string(pending_var->text) + "\"");
        }

        auto declaration(size_t line, const Token & t, GenericEvent & e) -> void
        {
            auto resolve = [&](string_view s, bool & by_name) -> optional<VarId> {
                if (is_id(s, 'v', lenient))
                    return VarId{string(s)};
                by_name = true;
                if (auto it = names.find(string(s)); it != names.end())
                    return it->second;
                return std::nullopt;
            };
            try {
                auto term = parse_term(t.text, lenient, resolve);
                for (auto & note : term.notes)
                    deviate(line, "constraint idiom", note);
                if (term.used_names) {
                    deviate(line, "name reference", string(t.text));
                    if (doc.dialect == Dialect::palm && term.decl.kind == ConstraintKind::element
                        && term.decl.index_base == 1) {
                        term.decl.index_base = 0;
                        deviate(line, "element index base", "read 0-based in the palm dialect");
                    }
                }
                e.decl = std::move(term.decl);
            }
            catch (const TermError & err) {
                if (! lenient)
                    error(line, t.column, err.why);
                deviate(line, "unparsed declaration", err.why);
                e.raw_decl = string(t.text);
            }
        }
    };

    auto render_events(const vector<SolverEvent> & events) -> string
    {
        string s = "{";
        for (size_t i = 0; i < events.size(); ++i)
            s += (i ? "," : "") + to_string(events[i]);
        return s + "}";
    }
}

auto parse_domain(string_view text, Value mx) -> FiniteDomain
{
    if (text.size() < 2 || text.front() != '[' || text.back() != ']')
        throw ParseError(1, 1, "domain must be bracketed");
    auto body = text.substr(1, text.size() - 2);
    vector<Interval> parts;
    if (body.empty())
        return FiniteDomain{};
    size_t pos = 0;
    while (pos <= body.size()) {
        auto comma = body.find(',', pos);
        auto part = body.substr(pos, comma == string_view::npos ? string_view::npos : comma - pos);
        auto column = pos + 2;
        auto value = [&](string_view s) -> Value {
            if (s == "mx")
                return mx;
            auto v = to_int<Value>(s);
            if (! v)
                throw ParseError(1, column, "integer expected in domain, got \"" + string(s) + "\"");
            return *v;
        };
        auto dash = part.find('-', 1);
        Value lo = value(dash == string_view::npos ? part : part.substr(0, dash));
        Value hi = dash == string_view::npos ? lo : value(part.substr(dash + 1));
        if (lo > hi)
            throw ParseError(1, column, "empty range in domain");
        if (hi > mx)
            throw ParseError(1, column, "value above mx in domain");
        parts.push_back({lo, hi});
        if (comma == string_view::npos)
            break;
        pos = comma + 1;
    }
    return FiniteDomain(std::move(parts));
}

auto format_event(const GenericEvent & e, Value mx) -> string
{
    string s = std::to_string(e.chrono) + "[" + std::to_string(e.depth) + "]" + string(to_string(e.type));
    auto add = [&](const string & a) { s += " " + a; };
    if (e.constraint)
        add(e.constraint->name);
    if (e.variable)
        add(e.variable->name);
    if (e.name)
        add(*e.name);
    if (e.domain)
        add(e.domain->to_string(mx));
    if (! e.generated.empty())
        add(render_events(e.generated));
    if (e.event)
        add(to_string(*e.event));
    if (e.decl)
        add(to_string(*e.decl));
    else if (e.raw_decl)
        add(*e.raw_decl);
    if (e.node)
        add("node(" + std::to_string(*e.node) + ")");
    if (e.from_node)
        add("node(" + std::to_string(*e.from_node) + ")");
    if (e.wake)
        add(string(to_string(*e.wake)));
    if (e.explanation)
        add("expl{" + join_ids(*e.explanation) + "}");
    return s;
}

auto parse_trace(string_view text, const ParseOptions & options) -> TraceDocument
{
    TraceParser p(options);
    return p.run(text);
}

auto serialize_trace(const TraceDocument & doc) -> string
{
    string out;
    for (const auto & [k, v] : doc.header)
        out += "# " + k + ": " + v + "\n";
    for (const auto & e : doc.events)
        out += format_event(e, doc.mx) + "\n";
    if (doc.truncated)
        out += "...\n";
    return out;
}

auto make_document(const vector<GenericEvent> & events, Dialect dialect, vector<std::pair<string, string>> header)
    -> TraceDocument
{
    TraceDocument doc;
    doc.header = std::move(header);
    if (dialect == Dialect::palm && ! doc.header_value("dialect"))
        doc.header.emplace_back("dialect", "palm");
    doc.events = events;
    doc.dialect = dialect;
    return doc;
}

auto to_actual_trace(const TraceDocument & doc) -> GenericActualTrace
{
    return {initial_state(doc.chrono_base()), doc.events};
}

auto parse_problem(string_view text, const ProblemOptions & options) -> Problem
{
    Problem p;
    std::set<string> declared;
    size_t lineno = 0;
    size_t pos = 0;
    auto resolve_in = [&](size_t line, size_t column) {
        return [&declared, line, column](string_view s, bool & by_name) -> optional<VarId> {
            by_name = false;
            if (! declared.contains(string(s)))
                throw ParseError(line, column, "undeclared variable " + string(s));
            return VarId{string(s)};
        };
    };
    auto term = [&](string_view t, size_t line, size_t column) -> ConstraintDecl {
        try {
            static const map<string, string> names{{"eq", "x_eq_y"}, {"eqc", "x_eq_c"}, {"neq", "x_neq_y"}};
            string s(trim(t));
            auto open = s.find('(');
            if (open != string::npos)
                if (auto it = names.find(s.substr(0, open)); it != names.end())
                    s = it->second + s.substr(open);
            return parse_term(s, false, resolve_in(line, column)).decl;
        }
        catch (const TermError & e) {
            throw ParseError(line, column, e.why);
        }
    };
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        string_view raw = text.substr(pos, nl == string_view::npos ? string_view::npos : nl - pos);
        pos = nl == string_view::npos ? text.size() : nl + 1;
        ++lineno;
        if (auto hash = raw.find('#'); hash != string_view::npos)
            raw = raw.substr(0, hash);
        auto line = trim(raw);
        if (line.empty())
            continue;
        size_t base = static_cast<size_t>(line.data() - raw.data()) + 1;
        auto sp = line.find_first_of(" \t");
        string_view keyword = line.substr(0, sp);
        string_view rest = sp == string_view::npos ? string_view{} : trim(line.substr(sp));
        size_t rest_col = base + static_cast<size_t>(rest.empty() ? line.size() : rest.data() - line.data());
        if (keyword == "var") {
            auto sp2 = rest.find_first_of(" \t");
            if (sp2 == string_view::npos)
                throw ParseError(lineno, rest_col, "expected \"var NAME DOMAIN\"");
            string name(rest.substr(0, sp2));
            auto dom = trim(rest.substr(sp2));
            if (name.empty() || ! (std::isalpha(static_cast<unsigned char>(name[0])) || name[0] == '_'))
                throw ParseError(lineno, rest_col, "variable name expected");
            if (! declared.insert(name).second)
                throw ParseError(lineno, rest_col, "duplicate variable " + name);
            FiniteDomain d;
            size_t dom_col = rest_col + static_cast<size_t>(dom.data() - rest.data());
            if (! dom.empty() && dom.front() == '[') {
                try {
                    d = parse_domain(dom, options.mx);
                }
                catch (const ParseError & e) {
                    throw ParseError(lineno, dom_col + e.column - 1, e.reason);
                }
            }
            else {
                auto dots = dom.find("..");
                auto bound = [&](string_view s) -> Value {
                    if (s == "mx")
                        return options.mx;
                    auto v = to_int<Value>(s);
                    if (! v)
                        throw ParseError(lineno, dom_col, "bound expected, got \"" + string(s) + "\"");
                    return *v;
                };
                if (dots == string_view::npos)
                    throw ParseError(lineno, dom_col, "domain \"lo..hi\" or \"[...]\" expected");
                Value lo = bound(trim(dom.substr(0, dots)));
                Value hi = bound(trim(dom.substr(dots + 2)));
                if (lo > hi || hi > options.mx || lo < 0)
                    throw ParseError(lineno, dom_col, "bad range");
                d = FiniteDomain::range(lo, hi);
            }
            p.variables.push_back({name, d});
        }
        else if (keyword == "con") {
            string label;
            auto t = rest;
            auto open = t.find('(');
            auto sp2 = t.find_first_of(" \t");
            if (sp2 != string_view::npos && (open == string_view::npos || sp2 < open)) {
                label = string(t.substr(0, sp2));
                t = trim(t.substr(sp2));
            }
            size_t col = rest_col + static_cast<size_t>(t.data() - rest.data());
            p.constraints.push_back({label.empty() ? "c" + std::to_string(p.constraints.size() + 1) : label,
                term(t, lineno, col)});
        }
        else if (keyword == "branch") {
            auto t = rest;
            if (! t.empty() && t.front() == '(' && t.back() == ')') {
                // outer parentheses group the alternatives unless they belong to a single term
                int depth = 0;
                bool wraps = true;
                for (size_t i = 0; i < t.size(); ++i) {
                    depth += t[i] == '(' ? 1 : t[i] == ')' ? -1 : 0;
                    if (depth == 0 && i + 1 < t.size()) {
                        wraps = false;
                        break;
                    }
                }
                if (wraps)
                    t = trim(t.substr(1, t.size() - 2));
            }
            vector<ConstraintDecl> alts;
            size_t start = 0;
            int depth = 0;
            for (size_t i = 0; i <= t.size(); ++i) {
                if (i < t.size() && (t[i] == '(' || t[i] == '['))
                    ++depth;
                else if (i < t.size() && (t[i] == ')' || t[i] == ']'))
                    --depth;
                else if (i == t.size() || (t[i] == '|' && depth == 0)) {
                    auto alt = trim(t.substr(start, i - start));
                    size_t col = rest_col + static_cast<size_t>(alt.data() - rest.data());
                    if (alt.empty())
                        throw ParseError(lineno, col, "empty alternative");
                    alts.push_back(term(alt, lineno, col));
                    start = i + 1;
                }
            }
            p.branches.push_back(std::move(alts));
        }
        else if (keyword == "label") {
            auto items = split_args(rest);
            if (! items || items->empty())
                throw ParseError(lineno, rest_col, "variable list expected");
            for (auto v : *items) {
                if (! declared.contains(string(v)))
                    throw ParseError(lineno, rest_col, "undeclared variable " + string(v));
                p.label_order.emplace_back(v);
            }
        }
        else
            throw ParseError(lineno, base, "unknown declaration \"" + string(keyword) + "\"");
    }
    p.check();
    return p;
}

}
