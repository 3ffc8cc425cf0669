#include <doctest.h>

#include "probfpc/corpus.hpp"
#include "probfpc/opsem.hpp"
#include "probfpc/syntax.hpp"
#include "support.hpp"

using namespace probfpc;
using namespace probfpc::testing;

namespace {

Delay<Term> steps(unsigned k, Delay<Term> d) {
  for (unsigned i = 0; i < k; ++i) d = step(Thunk<Term>::ready(d));
  return d;
}

bool same_prefix(const Delay<Term>& a, const Delay<Term>& b, unsigned depth) {
  PrefixRenderer<Term> r([](const Term& v) { return pretty(v); });
  return r.render(a, depth) == r.render(b, depth);
}

// eval((Y φ) V) against step⁴(eval(φ (Y φ) V))
bool y_equation(const Ty& sigma, const Ty& tau, const Term& phi, const Term& v, unsigned depth) {
  auto ev = OpEvaluator::create();
  const Term y = y_comb(sigma, tau);
  const Term lhs = Term::app(Term::app(y, phi), v);
  const Term rhs = Term::app(Term::app(phi, Term::app(y, phi)), v);
  return same_prefix(ev->eval(lhs), steps(4, ev->eval(rhs)), depth);
}

}  // namespace

TEST_CASE("values evaluate to themselves") {
  auto ev = OpEvaluator::create();
  for (const Term& v : {Term::star(), Term::num(4), corpus("id_hes(1/2,Nat)"),
                        Term::pair(Term::num(1), Term::star())}) {
    CHECK(ev->eval(v).as_now() == v);
  }
}

TEST_CASE("choice evaluates to a convex combination") {
  auto ev = OpEvaluator::create();
  auto m = Term::suc(Term::num(1));
  auto n = Term::ifz(Term::num(0), Term::num(7), Term::num(8));
  auto c = ev->eval(Term::choice(Prob(1, 3), m, n));
  CHECK(same_prefix(c, dchoice(Prob(1, 3), ev->eval(m), ev->eval(n)), 4));
  CHECK(c.node().mass_of(Delay<Term>::Entry::left(Term::num(2))) == Rat(1, 3));
  CHECK(c.node().mass_of(Delay<Term>::Entry::left(Term::num(7))) == Rat(2, 3));
}

TEST_CASE("unfold of a fold takes one step") {
  const Ty l = lazy_list_type();
  const Term v = Term::inl(unfold_mu(l), Term::star());
  auto c = eval(Term::unfold(Term::fold(l, v)));
  const auto& d = c.delay;
  REQUIRE(d.as_step());
  CHECK(d.as_step()->force().as_now() == v);
}

TEST_CASE("application and let step once; arithmetic does not step") {
  auto ev = OpEvaluator::create();
  auto id = parse_term("fun (x : Nat) => x");
  auto a = ev->eval(Term::app(id, Term::num(3)));
  REQUIRE(a.as_step());
  CHECK(a.as_step()->force().as_now() == Term::num(3));
  auto l = ev->eval(parse_term("let x = 2 in suc x"));
  REQUIRE(l.as_step());
  CHECK(l.as_step()->force().as_now() == Term::num(3));
  CHECK(ev->eval(parse_term("pred (suc (suc 0))")).as_now() == Term::num(1));
  CHECK(ev->eval(parse_term("fst (snd (1, (2, 3)))")).as_now() == Term::num(2));
}

TEST_CASE("evaluation shares one thunk per term") {
  auto ev = OpEvaluator::create();
  const Term m = Term::app(corpus("id_hes(1/2,Nat)"), Term::num(0));
  CHECK(ev->thunk_of(m).id() == ev->thunk_of(m).id());
  CHECK(probterm_limit(ev->eval(m)) == UProb::one());
}

TEST_CASE("the fixpoint combinator unfolds in four steps") {
  const Ty n = Ty::nat();
  CHECK(y_equation(n, n, corpus("id_hes_helper(1/2,Nat)"), Term::num(0), 8));
  CHECK(y_equation(n, n, corpus("id_hes_helper(1/3,Nat)"), Term::num(2), 8));
  CHECK(y_equation(Ty::unit(), Ty::boolean(), corpus("fair_helper(1/3)"), Term::star(), 8));
  // Three or five steps do not match.
  auto ev = OpEvaluator::create();
  const Term phi = corpus("id_hes_helper(1/2,Nat)");
  const Term y = y_comb(n, n);
  auto lhs = ev->eval(Term::app(Term::app(y, phi), Term::num(0)));
  auto rhs = ev->eval(Term::app(Term::app(phi, Term::app(y, phi)), Term::num(0)));
  CHECK_FALSE(same_prefix(lhs, steps(3, rhs), 8));
  CHECK_FALSE(same_prefix(lhs, steps(5, rhs), 8));
}

TEST_CASE("geometric process as a term") {
  auto op = eval_probterm(corpus("geo(1/2)"), 32);
  auto direct = probterm_seq(geo(Prob(1, 2), 0), 32);
  CHECK(eqlim_upto(op, direct, 32, 32, pow2_neg(10)));
  // Three steps per round.
  for (unsigned n = 0; n <= 32; ++n) CHECK(op.at(n).value() == rounds_oracle(Rat(1, 2), rounds(n, 0, 3)));
}

TEST_CASE("fair coin from a biased coin") {
  // First value after 14 steps, one further round every 13 steps; a round
  // succeeds with 2p(1−p).
  for (const Prob& p : {Prob(1, 2), Prob(1, 3)}) {
    const Rat s = Rat(2) * p.value() * p.complement_value();
    auto c = eval(Term::app(corpus("fair_from(" + p.str() + ")"), Term::star()));
    Delay<Term> cur = c.delay;
    const Ty b = Ty::boolean();
    for (unsigned n = 0; n <= 32; ++n) {
      INFO("p = " << p.str() << ", n = " << n);
      auto vp = value_part_of_node(cur);
      CHECK(vp.mass.value() == rounds_oracle(s, rounds(n, 14, 13)));
      Rat t(0);
      Rat f(0);
      for (const auto& [w, v] : vp.values) (v == Term::inl(b, Term::star()) ? t : f) += w;
      CHECK(t == f);
      cur = run(cur);
    }
  }
}

TEST_CASE("hesitant identity reaches its argument") {
  auto s = eval_probterm(Term::app(corpus("id_hes(1/2,Nat)"), Term::num(3)), 24);
  for (unsigned n = 0; n <= 24; ++n) CHECK(s.at(n).value() == rounds_oracle(Rat(1, 2), rounds(n, 8, 6)));
  REQUIRE(s.limit);
  CHECK(*s.limit == UProb::one());
}

TEST_CASE("evaluation is deterministic") {
  for (const auto& [name, m] : unit_programs()) {
    INFO(name);
    auto a = eval_probterm(m, 16);
    auto b = eval_probterm(m, 16);
    CHECK(a.values == b.values);
    CHECK(a.limit == b.limit);
  }
}

TEST_CASE("ill-typed programs are rejected before evaluation") {
  CHECK_THROWS_AS(eval(Term::fst(Term::num(1))), TypeError);
}
