#pragma once

// ProbFPC syntax: closed types with iso-recursive μ, and terms in de Bruijn
// form that keep the surface binder names only as printing hints.

#include <compare>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "probfpc/dist.hpp"
#include "probfpc/rational.hpp"

namespace probfpc {

struct Loc {
  unsigned line = 0;
  unsigned col = 0;
  [[nodiscard]] bool known() const { return line != 0; }
  [[nodiscard]] std::string str() const { return std::to_string(line) + ":" + std::to_string(col); }
};

// ---------------------------------------------------------------------------
// Types

enum class TyKind { Unit, Nat, Prod, Sum, Fn, Mu, Var };

struct TyNode;

class Ty {
 public:
  Ty() = default;
  explicit Ty(std::shared_ptr<const TyNode> n) : n_(std::move(n)) {}

  static Ty unit();
  static Ty nat();
  static Ty prod(Ty a, Ty b);
  static Ty sum(Ty a, Ty b);
  static Ty fn(Ty a, Ty b);
  // μX.body, where X is de Bruijn index 0 inside body.
  static Ty mu(Ty body, std::string hint = "X");
  static Ty var(unsigned index, std::string hint = "X");
  static Ty boolean() { return sum(unit(), unit()); }

  [[nodiscard]] explicit operator bool() const { return n_ != nullptr; }
  [[nodiscard]] const TyNode& node() const { return *n_; }
  [[nodiscard]] TyKind kind() const;
  [[nodiscard]] const Ty& a() const;
  [[nodiscard]] const Ty& b() const;
  [[nodiscard]] std::size_t hash() const;

  friend bool operator==(const Ty& x, const Ty& y);
  friend std::strong_ordering operator<=>(const Ty& x, const Ty& y);

 private:
  std::shared_ptr<const TyNode> n_;
};

struct TyNode {
  TyKind kind;
  Ty a;
  Ty b;
  unsigned index = 0;
  std::string hint;
  std::size_t hash = 0;
};

// No free type variables.
bool ty_closed(const Ty& t);
// τ[μX.τ/X] for t = μX.τ.
Ty unfold_mu(const Ty& t);
// Built from Unit, Nat, ×, + only.
bool ty_ground(const Ty& t);
// Display form: Unit, Nat, →, ×, +, μX. …; every compound child is parenthesised.
std::string ty_str(const Ty& t);

// ---------------------------------------------------------------------------
// Terms

enum class TermKind {
  Var,
  Star,
  Num,
  Suc,
  Pred,
  Ifz,
  Pair,
  Fst,
  Snd,
  Inl,
  Inr,
  Case,
  Lam,
  App,
  Fold,
  Unfold,
  Choice,
  Let
};

struct TermNode;

class Term {
 public:
  Term() = default;
  explicit Term(std::shared_ptr<const TermNode> n) : n_(std::move(n)) {}

  static Term var(unsigned index, std::string hint, Loc loc = {});
  static Term star(Loc loc = {});
  static Term num(std::uint64_t n, Loc loc = {});
  static Term suc(Term m, Loc loc = {});
  static Term pred(Term m, Loc loc = {});
  static Term ifz(Term l, Term m, Term n, Loc loc = {});
  static Term pair(Term m, Term n, Loc loc = {});
  static Term fst(Term m, Loc loc = {});
  static Term snd(Term m, Loc loc = {});
  // `sum` is the full sum type σ+τ of the injection.
  static Term inl(Ty sum, Term m, Loc loc = {});
  static Term inr(Ty sum, Term m, Loc loc = {});
  // case L of inl x ⇒ M | inr y ⇒ N; M and N bind index 0. The scrutinee
  // annotation is optional and checked when present.
  static Term kase(Term l, std::string x, Term m, std::string y, Term n, Ty scrutinee = {}, Loc loc = {});
  static Term lam(std::string x, Ty param, Term body, Loc loc = {});
  static Term app(Term m, Term n, Loc loc = {});
  static Term fold(Ty mu, Term m, Loc loc = {});
  static Term unfold(Term m, Loc loc = {});
  static Term choice(Prob p, Term m, Term n, Loc loc = {});
  // let x = M in N behaves exactly as (λx.N) M, including its step.
  static Term let(std::string x, Term m, Term n, Loc loc = {});

  [[nodiscard]] explicit operator bool() const { return n_ != nullptr; }
  [[nodiscard]] const TermNode& node() const { return *n_; }
  [[nodiscard]] TermKind kind() const;
  [[nodiscard]] const Term& kid(std::size_t i) const;
  [[nodiscard]] std::size_t hash() const;
  [[nodiscard]] Loc loc() const;
  [[nodiscard]] const TermNode* ptr() const { return n_.get(); }

  // Structural equality on the de Bruijn form (α-equivalence).
  friend bool operator==(const Term& x, const Term& y);
  // Total structural order on the de Bruijn form.
  friend std::strong_ordering operator<=>(const Term& x, const Term& y);

 private:
  std::shared_ptr<const TermNode> n_;
};

struct TermNode {
  TermKind kind;
  std::vector<Term> kids;
  Ty ty;
  std::optional<Prob> p;
  std::uint64_t n = 0;
  std::string hint;
  std::string hint2;
  Loc loc;
  std::size_t hash = 0;
  // Every free de Bruijn index is below this bound.
  unsigned free_bound = 0;
};

// The value grammar: ⋆, numerals, λ, fold V, (V, W), inl V, inr V.
bool is_value(const Term& t);
bool is_closed(const Term& t);
// M[V/x] where x is de Bruijn index 0 of M and V is closed. Free indices
// above 0 are lowered by one.
Term subst(const Term& m, const Term& v);
std::size_t term_size(const Term& t);

class TypeError : public std::runtime_error {
 public:
  TypeError(Loc loc, const std::string& msg)
      : std::runtime_error(loc.known() ? loc.str() + ": " + msg : msg), loc_(loc) {}
  [[nodiscard]] Loc loc() const { return loc_; }

 private:
  Loc loc_;
};

// Typing context: ctx.back() is the innermost binder (index 0).
using TyCtx = std::vector<Ty>;

Ty typecheck(const TyCtx& ctx, const Term& m);
inline Ty typecheck(const Term& m) { return typecheck(TyCtx{}, m); }

template <>
struct Keying<Term> {
  static bool keyed(const Term&) { return true; }
  static std::strong_ordering compare(const Term& a, const Term& b) { return a <=> b; }
  static std::optional<std::uint64_t> identity(const Term&) { return std::nullopt; }
};

std::string pretty(const Term& t);

template <>
struct Render<Term> {
  static std::string str(const Term& t) { return pretty(t); }
};

struct TermHash {
  std::size_t operator()(const Term& t) const { return t.hash(); }
};

}  // namespace probfpc
