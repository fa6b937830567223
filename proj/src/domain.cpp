#include <gentrace/domain.hpp>

#include <algorithm>
#include <stdexcept>

using std::vector;

namespace gentrace {

FiniteDomain::FiniteDomain(vector<Interval> parts)
{
    std::erase_if(parts, [](const Interval & i) { return i.lo > i.hi; });
    std::sort(parts.begin(), parts.end());
    for (const auto & p : parts) {
        if (! _parts.empty() && p.lo <= _parts.back().hi + 1)
            _parts.back().hi = std::max(_parts.back().hi, p.hi);
        else
            _parts.push_back(p);
    }
}

auto FiniteDomain::range(Value lo, Value hi) -> FiniteDomain
{
    return FiniteDomain{{Interval{lo, hi}}};
}

auto FiniteDomain::singleton(Value v) -> FiniteDomain
{
    return range(v, v);
}

auto FiniteDomain::of(std::initializer_list<Value> values) -> FiniteDomain
{
    return of(vector<Value>(values));
}

auto FiniteDomain::of(const vector<Value> & values) -> FiniteDomain
{
    vector<Interval> parts;
    parts.reserve(values.size());
    for (auto v : values)
        parts.push_back({v, v});
    return FiniteDomain{std::move(parts)};
}

auto FiniteDomain::size() const -> std::uint64_t
{
    std::uint64_t n = 0;
    for (const auto & p : _parts)
        n += static_cast<std::uint64_t>(p.hi - p.lo) + 1;
    return n;
}

auto FiniteDomain::is_singleton() const -> bool
{
    return _parts.size() == 1 && _parts[0].lo == _parts[0].hi;
}

auto FiniteDomain::min() const -> Value
{
    if (_parts.empty())
        throw std::logic_error("min of empty domain");
    return _parts.front().lo;
}

auto FiniteDomain::max() const -> Value
{
    if (_parts.empty())
        throw std::logic_error("max of empty domain");
    return _parts.back().hi;
}

auto FiniteDomain::contains(Value v) const -> bool
{
    auto it = std::upper_bound(_parts.begin(), _parts.end(), v, [](Value x, const Interval & i) { return x < i.lo; });
    if (it == _parts.begin())
        return false;
    --it;
    return v <= it->hi;
}

auto FiniteDomain::unite(const FiniteDomain & other) const -> FiniteDomain
{
    vector<Interval> parts = _parts;
    parts.insert(parts.end(), other._parts.begin(), other._parts.end());
    return FiniteDomain{std::move(parts)};
}

auto FiniteDomain::intersect(const FiniteDomain & other) const -> FiniteDomain
{
    vector<Interval> out;
    std::size_t i = 0, j = 0;
    while (i < _parts.size() && j < other._parts.size()) {
        Value lo = std::max(_parts[i].lo, other._parts[j].lo);
        Value hi = std::min(_parts[i].hi, other._parts[j].hi);
        if (lo <= hi)
            out.push_back({lo, hi});
        if (_parts[i].hi < other._parts[j].hi)
            ++i;
        else
            ++j;
    }
    return FiniteDomain{std::move(out)};
}

auto FiniteDomain::subtract(const FiniteDomain & other) const -> FiniteDomain
{
    vector<Interval> out;
    std::size_t j = 0;
    for (auto part : _parts) {
        while (j < other._parts.size() && other._parts[j].hi < part.lo)
            ++j;
        std::size_t k = j;
        Value lo = part.lo;
        bool consumed = false;
        while (k < other._parts.size() && other._parts[k].lo <= part.hi) {
            if (other._parts[k].lo > lo)
                out.push_back({lo, other._parts[k].lo - 1});
            if (other._parts[k].hi >= part.hi) {
                consumed = true;
                break;
            }
            lo = other._parts[k].hi + 1;
            ++k;
        }
        if (! consumed)
            out.push_back({lo, part.hi});
    }
    return FiniteDomain{std::move(out)};
}

auto FiniteDomain::subset_of(const FiniteDomain & other) const -> bool
{
    return subtract(other).empty();
}

auto FiniteDomain::disjoint_from(const FiniteDomain & other) const -> bool
{
    return intersect(other).empty();
}

auto FiniteDomain::values(std::uint64_t limit) const -> vector<Value>
{
    if (size() > limit)
        throw std::length_error("domain " + to_string() + " too large to enumerate");
    vector<Value> out;
    for (const auto & p : _parts)
        for (Value v = p.lo; v <= p.hi; ++v)
            out.push_back(v);
    return out;
}

auto FiniteDomain::to_string(Value mx) const -> std::string
{
    std::string out = "[";
    for (std::size_t i = 0; i < _parts.size(); ++i) {
        if (i)
            out += ',';
        out += std::to_string(_parts[i].lo);
        if (_parts[i].hi != _parts[i].lo)
            out += '-' + (_parts[i].hi == mx ? std::string("mx") : std::to_string(_parts[i].hi));
    }
    return out + "]";
}

}
