#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

namespace mpcmm {

/// Every matrix entry is one opaque 64-bit word. The semiring decides what it means.
using Element = std::uint64_t;

enum class SemiringKind { integer, boolean, tropical, custom };

/// A commutative semiring (add, mul, zero) over 64-bit words.
///
/// Operations are plain function pointers so a spec can be copied freely and
/// shared between concurrently running processor handlers. The builtin kinds
/// are additionally recognised by the dense kernels, which then inline the
/// operations instead of calling through the pointers.
struct SemiringSpec {
  std::string_view name;
  SemiringKind kind = SemiringKind::custom;
  Element (*add)(Element, Element) = nullptr;
  Element (*mul)(Element, Element) = nullptr;
  Element zero = 0;
  Element one = 1;
};

namespace ops {

/// Wrapping 64-bit arithmetic.
struct Integer {
  static constexpr Element zero = 0;
  static constexpr Element one = 1;
  static constexpr Element add(Element a, Element b) { return a + b; }
  static constexpr Element mul(Element a, Element b) { return a * b; }
};

/// Any non-zero word reads as true; results are normalised to 0/1.
struct Boolean {
  static constexpr Element zero = 0;
  static constexpr Element one = 1;
  static constexpr Element add(Element a, Element b) { return (a | b) != 0 ? 1 : 0; }
  static constexpr Element mul(Element a, Element b) { return (a != 0 && b != 0) ? 1 : 0; }
};

/// (min, +) over unsigned words with the all-ones word standing in for +inf.
/// Finite sums saturate just below +inf.
struct Tropical {
  static constexpr Element infinity = std::numeric_limits<Element>::max();
  static constexpr Element zero = infinity;
  static constexpr Element one = 0;
  static constexpr Element add(Element a, Element b) { return a < b ? a : b; }
  static constexpr Element mul(Element a, Element b) {
    if (a == infinity || b == infinity) return infinity;
    const Element s = a + b;
    return (s < a || s == infinity) ? infinity - 1 : s;
  }
};

}  // namespace ops

const SemiringSpec& integer_semiring();
const SemiringSpec& boolean_semiring();
const SemiringSpec& tropical_semiring();

/// integer (+,x,0), boolean (or,and,false), tropical (min,+,+inf).
std::vector<SemiringSpec> builtin_semirings();

/// Looks up "int", "bool" or "tropical" (long names are accepted too).
/// Throws std::invalid_argument for anything else.
const SemiringSpec& semiring_by_name(std::string_view name);

/// Calls f with the inlinable ops struct for a builtin kind, or with a
/// runtime adapter for custom specs.
template <class F>
decltype(auto) with_ops(const SemiringSpec& s, F&& f);

namespace detail {
struct Runtime {
  const SemiringSpec* spec;
  Element add(Element a, Element b) const { return spec->add(a, b); }
  Element mul(Element a, Element b) const { return spec->mul(a, b); }
};
}  // namespace detail

template <class F>
decltype(auto) with_ops(const SemiringSpec& s, F&& f) {
  switch (s.kind) {
    case SemiringKind::integer:
      return f(ops::Integer{});
    case SemiringKind::boolean:
      return f(ops::Boolean{});
    case SemiringKind::tropical:
      return f(ops::Tropical{});
    case SemiringKind::custom:
      break;
  }
  return f(detail::Runtime{&s});
}

}  // namespace mpcmm
