#pragma once

// Witnesses for the step reduction relation: R (reflexivity), S (eliminate
// one step), (w;w) (transitivity) and C(p,w,w) (congruence under a choice at
// weight p). Checking a witness against a computation produces the reduct.

#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "probfpc/delay.hpp"

namespace probfpc {

struct RedWitness {
  enum class Kind { Refl, StepElim, Seq, ChoiceCong };

  Kind kind = Kind::Refl;
  std::optional<Prob> p;
  std::shared_ptr<const RedWitness> first;
  std::shared_ptr<const RedWitness> second;

  static RedWitness refl() { return {}; }
  static RedWitness step_elim() { return {Kind::StepElim, std::nullopt, nullptr, nullptr}; }
  static RedWitness seq(RedWitness a, RedWitness b) {
    return {Kind::Seq, std::nullopt, std::make_shared<RedWitness>(std::move(a)),
            std::make_shared<RedWitness>(std::move(b))};
  }
  static RedWitness choice(const Prob& p, RedWitness a, RedWitness b) {
    return {Kind::ChoiceCong, p, std::make_shared<RedWitness>(std::move(a)), std::make_shared<RedWitness>(std::move(b))};
  }

  [[nodiscard]] std::size_t size() const {
    std::size_t s = 1;
    if (first) s += first->size();
    if (second) s += second->size();
    return s;
  }
};

std::string print_witness(const RedWitness& w);
RedWitness parse_witness(std::string_view text);

class WitnessShapeError : public std::invalid_argument {
 public:
  WitnessShapeError(const std::string& path, const std::string& what)
      : std::invalid_argument("witness node " + path + ": " + what), path_(path) {}
  [[nodiscard]] const std::string& path() const { return path_; }

 private:
  std::string path_;
};

namespace detail {

template <class A>
Delay<A> check_witness_at(const RedWitness& w, const Delay<A>& nu, const std::string& path) {
  switch (w.kind) {
    case RedWitness::Kind::Refl:
      return nu;
    case RedWitness::Kind::StepElim: {
      auto t = nu.as_step();
      if (!t) throw WitnessShapeError(path, "S applied to a node that is not a single step");
      return t->force();
    }
    case RedWitness::Kind::Seq:
      return check_witness_at(*w.second, check_witness_at(*w.first, nu, path + ".1"), path + ".2");
    case RedWitness::Kind::ChoiceCong: {
      if (nu.node().size() < 2)
        throw WitnessShapeError(path, "C(" + w.p->str() + ",…) applied to a node without a choice");
      auto [left, right] = split_prefix(nu.node(), *w.p);
      auto l = check_witness_at(*w.first, Delay<A>(left), path + ".1");
      auto r = check_witness_at(*w.second, Delay<A>(right), path + ".2");
      return dchoice(*w.p, l, r);
    }
  }
  throw std::logic_error("unreachable witness kind");
}

}  // namespace detail

// The reduct ν' such that ν ⤳ ν' is derived by exactly w. A choice node is
// split along its canonical support order: the first p of the mass forms the
// left branch.
template <class A>
Delay<A> check_witness(const RedWitness& w, const Delay<A>& nu) {
  return detail::check_witness_at(w, nu, "root");
}

// A witness for ν ⤳ run(ν).
template <class A>
RedWitness run_witness(const Delay<A>& nu) {
  const auto& sup = nu.node().support();
  auto leaf = [](const auto& e) { return e.is_left() ? RedWitness::refl() : RedWitness::step_elim(); };
  if (sup.size() == 1) return leaf(sup.front().second);
  // Peel entries off the front: C(w0, C(w1, … )) with renormalised weights.
  RedWitness acc = leaf(sup.back().second);
  Rat tail_mass = sup.back().first;
  for (std::size_t i = sup.size() - 1; i-- > 0;) {
    tail_mass += sup[i].first;
    acc = RedWitness::choice(Prob(sup[i].first / tail_mass), leaf(sup[i].second), std::move(acc));
  }
  return acc;
}

// A witness for ν ⤳ runⁿ(ν).
template <class A>
RedWitness run_n_witness(const Delay<A>& nu, unsigned n) {
  RedWitness w = RedWitness::refl();
  Delay<A> cur = nu;
  for (unsigned i = 0; i < n; ++i) {
    auto wi = run_witness(cur);
    cur = check_witness(wi, cur);
    w = i == 0 ? wi : RedWitness::seq(std::move(w), std::move(wi));
  }
  return w;
}

}  // namespace probfpc
