#pragma once

// The fixpoint combinator and the example programs: the geometric process,
// the hesitant identity, the fair coin from an unfair coin, lazy lists and the
// two random walks, plus the Unit and first-order harnesses used by the checks.

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "probfpc/lang.hpp"
#include "probfpc/syntax.hpp"

namespace probfpc {

// Y ≜ λf.λz. e_f (fold e_f) z with e_f ≜ λy. let y' = unfold y in f (λx. y' y x),
// at type ((σ→τ)→σ→τ)→σ→τ.
Term y_comb(const Ty& sigma, const Ty& tau);

// Definitions visible to every source file: Bool helpers and the lazy-list
// interface (LazyL, nil, head, tail, cons, eqbool).
const Program& prelude();
Ty lazy_list_type();

// Parses and typechecks `src` against the prelude.
Term corpus_source(std::string_view src);

// Named corpus terms: geo, geo(p), id_hes(p,σ), id_hes_helper(p,σ), fair_from(p),
// fair_helper(p), randw(n), randw2(n), everysnd, randw, randw2, nil, head,
// tail, cons, eqbool, diverge, coin(p).
Term corpus(std::string_view name);

struct CorpusEntry {
  std::string name;
  std::string description;
};
// Names accepted by corpus() that take no parameters, plus one instance of
// each parameterised family.
std::vector<CorpusEntry> corpus_catalogue();

// (λ_ : σ. ⋆) M for M : σ.
Term observe_unit(const Term& m);
// head (tail^k l)
Term head_after(const Term& list, unsigned k);
// case M of inl _ ⇒ ⋆ | inr _ ⇒ diverge, for M : Bool.
Term bool_harness(const Term& m);

// Closed programs of type Unit.
std::vector<std::pair<std::string, Term>> unit_programs();
// Closed programs whose type is built from Unit, Nat, ×, +.
std::vector<std::pair<std::string, Term>> first_order_programs();

}  // namespace probfpc
