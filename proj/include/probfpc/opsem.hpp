#pragma once

// Operational semantics: a closed well-typed term evaluates to a convex delay
// computation over syntactic values. Steps occur at case-branch entry, at
// function-body entry after application, at unfold of a fold, and at let
// (which is the β-redex (λx.N) M).
//
// Computations are hash-consed: every deferred computation is the evaluation
// of some closed term, and one term gets one thunk. This makes the thunk graph
// of a looping program finite, which is what analyze_limit needs.

#include <memory>
#include <mutex>
#include <unordered_map>

#include "probfpc/delay.hpp"
#include "probfpc/lang.hpp"

namespace probfpc {

class OpEvaluator : public std::enable_shared_from_this<OpEvaluator> {
 public:
  static std::shared_ptr<OpEvaluator> create() { return std::shared_ptr<OpEvaluator>(new OpEvaluator()); }
  ~OpEvaluator();
  OpEvaluator(const OpEvaluator&) = delete;
  OpEvaluator& operator=(const OpEvaluator&) = delete;

  // M must be closed and well typed.
  Delay<Term> eval(const Term& m);
  // The shared thunk standing for eval(m).
  Thunk<Term> thunk_of(const Term& m);
  [[nodiscard]] std::size_t table_size() const;

 private:
  OpEvaluator() = default;

  Delay<Term> frame(const Term& t, std::size_t hole);

  mutable std::mutex mu_;
  std::unordered_map<Term, Thunk<Term>, TermHash> table_;
  std::unordered_map<std::uint64_t, Term> term_of_;
};

class EvalDefect : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct OpComp {
  Delay<Term> delay;
  Ty type;
  // Keeps the thunks of `delay` alive.
  std::shared_ptr<OpEvaluator> owner;
};

// Typechecks M in the empty context, then evaluates it.
OpComp eval(const Term& m);

// probterm(0..n) of eval(M), with the exact limit when the thunk graph is finite.
TermSeq eval_probterm(const Term& m, unsigned n);

}  // namespace probfpc
