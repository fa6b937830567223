#pragma once

#include <compare>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <string>
#include <vector>

namespace gentrace {

using Value = std::int64_t;

/// Printed as "mx"; the largest value any domain may contain.
inline constexpr Value default_mx = (Value{1} << 28) - 1;

struct Interval
{
    Value lo = 0;
    Value hi = 0;

    auto operator<=>(const Interval &) const = default;
    auto operator==(const Interval &) const -> bool = default;
};

// A finite set of integers kept as sorted, disjoint, non-adjacent closed
// intervals. The empty domain has no intervals.
class FiniteDomain
{
  public:
    FiniteDomain() = default;
    explicit FiniteDomain(std::vector<Interval> parts);

    static auto range(Value lo, Value hi) -> FiniteDomain;
    static auto singleton(Value v) -> FiniteDomain;
    static auto of(std::initializer_list<Value> values) -> FiniteDomain;
    static auto of(const std::vector<Value> & values) -> FiniteDomain;

    [[nodiscard]] auto intervals() const -> const std::vector<Interval> & { return _parts; }
    [[nodiscard]] auto empty() const -> bool { return _parts.empty(); }
    [[nodiscard]] auto size() const -> std::uint64_t;
    [[nodiscard]] auto is_singleton() const -> bool;
    [[nodiscard]] auto min() const -> Value;
    [[nodiscard]] auto max() const -> Value;
    [[nodiscard]] auto contains(Value v) const -> bool;

    [[nodiscard]] auto unite(const FiniteDomain & other) const -> FiniteDomain;
    [[nodiscard]] auto intersect(const FiniteDomain & other) const -> FiniteDomain;
    [[nodiscard]] auto subtract(const FiniteDomain & other) const -> FiniteDomain;
    [[nodiscard]] auto subset_of(const FiniteDomain & other) const -> bool;
    [[nodiscard]] auto disjoint_from(const FiniteDomain & other) const -> bool;

    /// Enumerated values; throws if the domain holds more than `limit` values.
    [[nodiscard]] auto values(std::uint64_t limit = 1u << 20) const -> std::vector<Value>;

    /// "[0-1,3-4,6,8-mx]"; the upper bound equal to mx prints as "mx".
    [[nodiscard]] auto to_string(Value mx = default_mx) const -> std::string;

    auto operator<=>(const FiniteDomain &) const = default;
    auto operator==(const FiniteDomain &) const -> bool = default;

  private:
    std::vector<Interval> _parts;
};

}
