#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <map>
#include <memory>
#include <utility>

namespace gentrace {

namespace detail
{
    // Recently proven-equal pairs of shared values. Holding both references
    // keeps the addresses unique while they sit in the memo, so a later
    // comparison of the same two instances is a lookup.
    template <typename T>
    auto shared_equal(const std::shared_ptr<T> & a, const std::shared_ptr<T> & b) -> bool
    {
        if (a == b)
            return true;
        if (! a || ! b)
            return false;
        thread_local std::array<std::pair<std::shared_ptr<T>, std::shared_ptr<T>>, 64> memo;
        thread_local std::size_t next = 0;
        for (const auto & [x, y] : memo)
            if ((x == a && y == b) || (x == b && y == a))
                return true;
        if (! (*a == *b))
            return false;
        memo[next++ % memo.size()] = {a, b};
        return true;
    }
}

// std::map with copy-on-write storage. States along a trace copy their
// parameters at every step; tables that rarely change share one instance.
template <typename K, typename V>
class CowMap
{
  public:
    using map_type = std::map<K, V>;
    using key_type = K;
    using mapped_type = V;
    using value_type = typename map_type::value_type;
    using const_iterator = typename map_type::const_iterator;
    using iterator = const_iterator;

    CowMap() = default;
    CowMap(std::initializer_list<value_type> init) : _p(std::make_shared<map_type>(init)) {}

    [[nodiscard]] auto get() const -> const map_type & { return _p ? *_p : empty_map(); }

    [[nodiscard]] auto begin() const -> const_iterator { return get().begin(); }
    [[nodiscard]] auto end() const -> const_iterator { return get().end(); }
    [[nodiscard]] auto size() const -> std::size_t { return get().size(); }
    [[nodiscard]] auto empty() const -> bool { return get().empty(); }
    [[nodiscard]] auto contains(const K & k) const -> bool { return get().contains(k); }
    [[nodiscard]] auto count(const K & k) const -> std::size_t { return get().count(k); }
    [[nodiscard]] auto find(const K & k) const -> const_iterator { return get().find(k); }
    [[nodiscard]] auto at(const K & k) const -> const V & { return get().at(k); }

    template <typename... Args>
    auto emplace(Args &&... args) -> bool
    {
        return mut().emplace(std::forward<Args>(args)...).second;
    }

    auto insert_or_assign(const K & k, V v) -> void { mut().insert_or_assign(k, std::move(v)); }
    auto erase(const K & k) -> std::size_t { return contains(k) ? mut().erase(k) : 0; }
    auto clear() -> void { _p.reset(); }

    auto operator==(const CowMap & o) const -> bool
    {
        if (! _p || ! o._p)
            return get() == o.get();
        return detail::shared_equal(_p, o._p);
    }
    auto operator<=>(const CowMap & o) const
    {
        using R = decltype(get() <=> o.get());
        return _p == o._p ? R{} : get() <=> o.get();
    }

  private:
    static auto empty_map() -> const map_type &
    {
        static const map_type e;
        return e;
    }

    auto mut() -> map_type &
    {
        if (! _p)
            _p = std::make_shared<map_type>();
        else if (_p.use_count() != 1)
            _p = std::make_shared<map_type>(*_p);
        return *_p;
    }

    std::shared_ptr<map_type> _p;
};

}
