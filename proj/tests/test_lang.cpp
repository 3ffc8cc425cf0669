#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "probfpc/corpus.hpp"
#include "probfpc/lang.hpp"
#include "probfpc/opsem.hpp"
#include "probfpc/syntax.hpp"

using namespace probfpc;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Ty fn(Ty a, Ty b) { return Ty::fn(std::move(a), std::move(b)); }

Loc type_error_at(const std::string& src) {
  try {
    typecheck(parse_term(src, &prelude()));
  } catch (const TypeError& e) {
    return e.loc();
  }
  return {};
}

}  // namespace

TEST_CASE("typing axioms and errors") {
  CHECK(typecheck(Term::star()) == Ty::unit());
  CHECK(typecheck(Term::num(3)) == Ty::nat());
  CHECK_THROWS_AS(typecheck(Term::fst(Term::star())), TypeError);
  CHECK_THROWS_AS(typecheck(Term::var(0, "x")), TypeError);
  CHECK_THROWS_AS(typecheck(Term::app(Term::num(1), Term::num(2))), TypeError);
  CHECK_THROWS_AS(typecheck(Term::fold(Ty::mu(Ty::var(1)), Term::star())), TypeError);
  const Loc at = type_error_at("let x = 1 in\n  x 2");
  CHECK(at.line == 2);
  CHECK(at.col == 3);
}

TEST_CASE("typecheck is deterministic") {
  auto m = corpus("everysnd");
  CHECK(typecheck(m) == typecheck(m));
  CHECK(ty_str(typecheck(m)) == ty_str(typecheck(m)));
}

TEST_CASE("the fixpoint combinator") {
  const Ty n = Ty::nat();
  CHECK(typecheck(y_comb(n, n)) == fn(fn(fn(n, n), fn(n, n)), fn(n, n)));
  CHECK(is_value(y_comb(n, n)));
  const Ty u = Ty::unit();
  CHECK(typecheck(y_comb(u, Ty::boolean())) == fn(fn(fn(u, Ty::boolean()), fn(u, Ty::boolean())), fn(u, Ty::boolean())));
}

TEST_CASE("corpus types") {
  CHECK(typecheck(corpus("id_hes(1/2,Nat)")) == fn(Ty::nat(), Ty::nat()));
  CHECK(typecheck(corpus("fair_from(1/3)")) == fn(Ty::unit(), Ty::boolean()));
  const Ty lazy = lazy_list_type();
  CHECK(lazy == Ty::mu(Ty::sum(Ty::unit(), Ty::prod(Ty::nat(), fn(Ty::unit(), Ty::var(0))))));
  CHECK(typecheck(corpus("everysnd")) == fn(lazy, lazy));
  CHECK(typecheck(corpus("randw")) == fn(Ty::nat(), lazy));
  CHECK(typecheck(corpus("diverge")) == Ty::unit());
  CHECK(typecheck(corpus("geo")) == Ty::nat());
  CHECK_THROWS(corpus("no_such_program"));
  for (const auto& e : corpus_catalogue()) CHECK_NOTHROW(typecheck(corpus(e.name)));
}

TEST_CASE("substitution") {
  const Term v = Term::num(5);
  CHECK(subst(Term::var(0, "x"), v) == v);
  auto body = Term::lam("y", Ty::nat(), Term::var(1, "x"));
  CHECK(subst(body, v) == Term::lam("y", Ty::nat(), v));
  // A bound occurrence of the same name is untouched.
  auto shadow = Term::lam("x", Ty::nat(), Term::var(0, "x"));
  CHECK(subst(Term::app(shadow, Term::var(0, "x")), v) == Term::app(shadow, v));
  // Substituting a closed λ under a binder does not capture.
  auto id = Term::lam("y", Ty::nat(), Term::var(0, "y"));
  CHECK(subst(body, id) == Term::lam("y", Ty::nat(), id));
}

TEST_CASE("α-equivalence ignores binder names") {
  CHECK(parse_term("fun (x : Nat) => x") == parse_term("fun (y : Nat) => y"));
  CHECK_FALSE(parse_term("fun (x : Nat) => fun (y : Nat) => x") == parse_term("fun (x : Nat) => fun (y : Nat) => y"));
}

TEST_CASE("parsing") {
  auto c = parse_term("choice 1/2 true false", &prelude());
  const Ty b = Ty::boolean();
  CHECK(c == Term::choice(Prob(1, 2), Term::inl(b, Term::star()), Term::inr(b, Term::star())));
  CHECK(typecheck(c) == b);
  try {
    parse_term("choice 1 * *");
    FAIL("weight 1 accepted");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("outside (0,1)") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_term(""), ParseError);
  CHECK_THROWS_AS(parse_term("fun (x : Nat) =>"), ParseError);
  CHECK(parse_type("mu X. Unit + Nat * (Unit -> X)") == lazy_list_type());
}

TEST_CASE("pretty-printing round-trips every corpus source") {
  unsigned seen = 0;
  for (const auto& entry : std::filesystem::directory_iterator(PROBFPC_CORPUS_DIR)) {
    const auto src = slurp(entry.path());
    Term m;
    try {
      m = parse_program(src, &prelude()).main;
    } catch (const ParseError&) {
      continue;
    }
    INFO(entry.path().filename().string());
    CHECK(parse_term(pretty(m), &prelude()) == m);
    ++seen;
  }
  CHECK(seen >= 10);
  for (const auto& e : corpus_catalogue()) {
    INFO(e.name);
    const Term m = corpus(e.name);
    CHECK(parse_term(pretty(m), &prelude()) == m);
  }
}

TEST_CASE("values") {
  CHECK(is_value(Term::star()));
  CHECK(is_value(Term::pair(Term::num(1), Term::lam("x", Ty::nat(), Term::var(0, "x")))));
  CHECK(is_value(Term::fold(lazy_list_type(), Term::inl(unfold_mu(lazy_list_type()), Term::star()))));
  CHECK_FALSE(is_value(Term::suc(Term::num(1))));
  CHECK_FALSE(is_value(Term::choice(Prob(1, 2), Term::star(), Term::star())));
}

TEST_CASE("subject reduction on the corpus") {
  for (const auto& [name, m] : first_order_programs()) {
    INFO(name);
    auto c = eval(m);
    for (unsigned n = 0; n <= 16; n += 4)
      for (const auto& [w, v] : value_part(c.delay, n).values) {
        CHECK(is_value(v));
        CHECK(typecheck(v) == c.type);
      }
  }
}
