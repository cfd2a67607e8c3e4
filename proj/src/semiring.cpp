#include "mpcmm/semiring.hpp"

#include <stdexcept>
#include <string>

namespace mpcmm {

namespace {

template <class Ops>
Element add_fn(Element a, Element b) {
  return Ops::add(a, b);
}

template <class Ops>
Element mul_fn(Element a, Element b) {
  return Ops::mul(a, b);
}

template <class Ops>
SemiringSpec make_spec(std::string_view name, SemiringKind kind) {
  return SemiringSpec{name, kind, &add_fn<Ops>, &mul_fn<Ops>, Ops::zero, Ops::one};
}

}  // namespace

const SemiringSpec& integer_semiring() {
  static const SemiringSpec s = make_spec<ops::Integer>("int", SemiringKind::integer);
  return s;
}

const SemiringSpec& boolean_semiring() {
  static const SemiringSpec s = make_spec<ops::Boolean>("bool", SemiringKind::boolean);
  return s;
}

const SemiringSpec& tropical_semiring() {
  static const SemiringSpec s = make_spec<ops::Tropical>("tropical", SemiringKind::tropical);
  return s;
}

std::vector<SemiringSpec> builtin_semirings() {
  return {integer_semiring(), boolean_semiring(), tropical_semiring()};
}

const SemiringSpec& semiring_by_name(std::string_view name) {
  if (name == "int" || name == "integer") return integer_semiring();
  if (name == "bool" || name == "boolean") return boolean_semiring();
  if (name == "tropical" || name == "min-plus") return tropical_semiring();
  throw std::invalid_argument("unknown semiring: " + std::string(name));
}

}  // namespace mpcmm
