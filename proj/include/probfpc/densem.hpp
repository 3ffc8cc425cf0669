#pragma once

// Denotational semantics over semantic values. Standard mode steps only at
// unfold; step-faithful mode also steps where the operational semantics
// does (application, case-branch entry, let), so that the two can be compared
// structurally.
//
// Semantic values are interned per evaluator: a closure is its λ-term and its
// environment, and structurally equal values are the same object. Deferred
// computations are hash-consed on the same principle as in opsem.

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "probfpc/delay.hpp"
#include "probfpc/lang.hpp"

namespace probfpc {

enum class SemKind { Nat, Unit, Pair, Inl, Inr, Fun, Fold };

struct SemNode;

class SemVal {
 public:
  SemVal() = default;
  explicit SemVal(std::shared_ptr<const SemNode> n) : n_(std::move(n)) {}

  [[nodiscard]] explicit operator bool() const { return n_ != nullptr; }
  [[nodiscard]] const SemNode& node() const { return *n_; }
  [[nodiscard]] SemKind kind() const;
  [[nodiscard]] std::uint64_t id() const;
  // No closures and no folds inside.
  [[nodiscard]] bool ground() const;
  [[nodiscard]] std::uint64_t nat() const;
  [[nodiscard]] const SemVal& kid(std::size_t i) const;

 private:
  std::shared_ptr<const SemNode> n_;
};

struct SemNode {
  SemKind kind;
  std::uint64_t n = 0;
  std::vector<SemVal> kids;  // Pair: 2; Inl, Inr, Fold: 1
  Term lam;                  // Fun: the λ-abstraction itself
  std::vector<SemVal> env;   // Fun: captured environment, back() is index 0
  std::uint64_t id = 0;
  bool ground = false;
};

class NonGroundError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Structural equality of ground values.
bool ground_eq(const SemVal& v, const SemVal& w);
std::strong_ordering ground_compare(const SemVal& v, const SemVal& w);
// "3", "⋆", "(v, w)", "inl v", "inr v", "<fun#id>", "fold v".
std::string sem_str(const SemVal& v);

template <>
struct Keying<SemVal> {
  static bool keyed(const SemVal& v) { return v.ground(); }
  static std::strong_ordering compare(const SemVal& a, const SemVal& b) { return ground_compare(a, b); }
  static std::optional<std::uint64_t> identity(const SemVal& v) { return v.id(); }
};

template <>
struct Render<SemVal> {
  static std::string str(const SemVal& v) { return sem_str(v); }
};

enum class StepMode { Standard, StepFaithful };

using Env = std::vector<SemVal>;

class DenEvaluator : public std::enable_shared_from_this<DenEvaluator> {
 public:
  static std::shared_ptr<DenEvaluator> create(StepMode mode) {
    return std::shared_ptr<DenEvaluator>(new DenEvaluator(mode));
  }
  ~DenEvaluator();
  DenEvaluator(const DenEvaluator&) = delete;
  DenEvaluator& operator=(const DenEvaluator&) = delete;

  [[nodiscard]] StepMode mode() const { return mode_; }

  // ⟦M⟧ρ; M must typecheck in the context of ρ.
  Delay<SemVal> interp(const Term& m, const Env& rho);
  // ⟦V⟧ᵛρ for a syntactic value V.
  SemVal val_interp(const Term& v, const Env& rho = {});
  // f(v) for a closure f.
  Delay<SemVal> apply(const SemVal& f, const SemVal& v);

  SemVal nat(std::uint64_t n);
  SemVal unit();
  SemVal pair(const SemVal& a, const SemVal& b);
  SemVal inl(const SemVal& a);
  SemVal inr(const SemVal& a);
  SemVal fold(const SemVal& a);
  SemVal fun(const Term& lam, const Env& env);

  [[nodiscard]] std::size_t table_size() const;

 private:
  explicit DenEvaluator(StepMode mode) : mode_(mode) {}

  struct Frame;
  using Key = std::vector<std::uint64_t>;

  std::uint64_t term_id(const Term& t);
  SemVal intern(SemNode node, Key key);
  Thunk<SemVal> shared_thunk(const Key& key, std::function<Delay<SemVal>()> producer);
  Delay<SemVal> bind_frame(const Delay<SemVal>& d, std::shared_ptr<const Frame> f);
  Delay<SemVal> resume(const Frame& f, const SemVal& v);
  Delay<SemVal> enter(const Key& key, const Term& body, Env env);

  StepMode mode_;
  mutable std::recursive_mutex mu_;
  std::map<Key, SemVal> values_;
  std::unordered_map<Term, std::uint64_t, TermHash> terms_;
  std::map<Key, Thunk<SemVal>> thunks_;
};

struct DenComp {
  Delay<SemVal> delay;
  Ty type;
  std::shared_ptr<DenEvaluator> owner;
};

// Typechecks a closed M, then interprets it in the empty environment.
DenComp interp(const Term& m, StepMode mode);

TermSeq den_probterm(const Term& m, unsigned n, StepMode mode);

// Maps val_interp over the leaves of eval(M) and compares the result with
// the step-faithful interpretation, both unfolded to `depth` levels of steps.
// M's type must be built from Unit, Nat, ×, +.
bool soundness_check(const Term& m, unsigned depth);

}  // namespace probfpc
