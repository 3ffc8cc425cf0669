#include "probfpc/lang.hpp"

#include <algorithm>
#include <functional>

namespace probfpc {

namespace {

std::size_t mix(std::size_t h, std::size_t v) {
  return h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
}

Ty make_ty(TyKind k, Ty a, Ty b, unsigned index, std::string hint) {
  auto n = std::make_shared<TyNode>();
  n->kind = k;
  n->a = std::move(a);
  n->b = std::move(b);
  n->index = index;
  n->hint = std::move(hint);
  std::size_t h = mix(0x51ed, static_cast<std::size_t>(k));
  if (n->a) h = mix(h, n->a.hash());
  if (n->b) h = mix(h, n->b.hash());
  if (k == TyKind::Var) h = mix(h, index);
  n->hash = h;
  return Ty(std::move(n));
}

}  // namespace

Ty Ty::unit() { return make_ty(TyKind::Unit, {}, {}, 0, ""); }
Ty Ty::nat() { return make_ty(TyKind::Nat, {}, {}, 0, ""); }
Ty Ty::prod(Ty a, Ty b) { return make_ty(TyKind::Prod, std::move(a), std::move(b), 0, ""); }
Ty Ty::sum(Ty a, Ty b) { return make_ty(TyKind::Sum, std::move(a), std::move(b), 0, ""); }
Ty Ty::fn(Ty a, Ty b) { return make_ty(TyKind::Fn, std::move(a), std::move(b), 0, ""); }
Ty Ty::mu(Ty body, std::string hint) { return make_ty(TyKind::Mu, std::move(body), {}, 0, std::move(hint)); }
Ty Ty::var(unsigned index, std::string hint) { return make_ty(TyKind::Var, {}, {}, index, std::move(hint)); }

TyKind Ty::kind() const { return n_->kind; }
const Ty& Ty::a() const { return n_->a; }
const Ty& Ty::b() const { return n_->b; }
std::size_t Ty::hash() const { return n_ ? n_->hash : 0; }

bool operator==(const Ty& x, const Ty& y) { return (x <=> y) == 0; }

std::strong_ordering operator<=>(const Ty& x, const Ty& y) {
  if (x.n_ == y.n_) return std::strong_ordering::equal;
  if (!x.n_ || !y.n_) return x.n_ ? std::strong_ordering::greater : std::strong_ordering::less;
  if (auto c = x.kind() <=> y.kind(); c != 0) return c;
  if (x.kind() == TyKind::Var) return x.n_->index <=> y.n_->index;
  if (auto c = x.a() <=> y.a(); c != 0) return c;
  return x.b() <=> y.b();
}

namespace {

bool closed_at(const Ty& t, unsigned depth) {
  switch (t.kind()) {
    case TyKind::Unit:
    case TyKind::Nat:
      return true;
    case TyKind::Var:
      return t.node().index < depth;
    case TyKind::Mu:
      return closed_at(t.a(), depth + 1);
    default:
      return closed_at(t.a(), depth) && closed_at(t.b(), depth);
  }
}

Ty subst_ty(const Ty& t, const Ty& repl, unsigned depth) {
  switch (t.kind()) {
    case TyKind::Unit:
    case TyKind::Nat:
      return t;
    case TyKind::Var: {
      const unsigned i = t.node().index;
      if (i == depth) return repl;
      if (i > depth) return Ty::var(i - 1, t.node().hint);
      return t;
    }
    case TyKind::Mu:
      return Ty::mu(subst_ty(t.a(), repl, depth + 1), t.node().hint);
    case TyKind::Prod:
      return Ty::prod(subst_ty(t.a(), repl, depth), subst_ty(t.b(), repl, depth));
    case TyKind::Sum:
      return Ty::sum(subst_ty(t.a(), repl, depth), subst_ty(t.b(), repl, depth));
    case TyKind::Fn:
      return Ty::fn(subst_ty(t.a(), repl, depth), subst_ty(t.b(), repl, depth));
  }
  return t;
}

std::string ty_str_in(const Ty& t, std::vector<std::string>& names) {
  auto child = [&](const Ty& c) {
    const bool atomic = c.kind() == TyKind::Unit || c.kind() == TyKind::Nat || c.kind() == TyKind::Var;
    auto s = ty_str_in(c, names);
    return atomic ? s : "(" + s + ")";
  };
  switch (t.kind()) {
    case TyKind::Unit:
      return "Unit";
    case TyKind::Nat:
      return "Nat";
    case TyKind::Var: {
      const unsigned i = t.node().index;
      if (i < names.size()) return names[names.size() - 1 - i];
      return "?" + std::to_string(i);
    }
    case TyKind::Prod:
      return child(t.a()) + " × " + child(t.b());
    case TyKind::Sum:
      return child(t.a()) + "+" + child(t.b());
    case TyKind::Fn:
      return child(t.a()) + " → " + child(t.b());
    case TyKind::Mu: {
      std::string name = t.node().hint.empty() ? "X" : t.node().hint;
      while (std::find(names.begin(), names.end(), name) != names.end()) name += "'";
      names.push_back(name);
      auto body = ty_str_in(t.a(), names);
      names.pop_back();
      return "μ" + name + ". " + body;
    }
  }
  return "?";
}

}  // namespace

bool ty_closed(const Ty& t) { return closed_at(t, 0); }

Ty unfold_mu(const Ty& t) {
  if (t.kind() != TyKind::Mu) throw std::invalid_argument("unfold_mu of a non-recursive type");
  return subst_ty(t.a(), t, 0);
}

bool ty_ground(const Ty& t) {
  switch (t.kind()) {
    case TyKind::Unit:
    case TyKind::Nat:
      return true;
    case TyKind::Prod:
    case TyKind::Sum:
      return ty_ground(t.a()) && ty_ground(t.b());
    default:
      return false;
  }
}

std::string ty_str(const Ty& t) {
  std::vector<std::string> names;
  return ty_str_in(t, names);
}

// ---------------------------------------------------------------------------

namespace {

Term make_term(TermKind k, std::vector<Term> kids, Ty ty, std::optional<Prob> p, std::uint64_t n, std::string hint,
               std::string hint2, Loc loc) {
  auto node = std::make_shared<TermNode>();
  node->kind = k;
  node->kids = std::move(kids);
  node->ty = std::move(ty);
  node->p = std::move(p);
  node->n = n;
  node->hint = std::move(hint);
  node->hint2 = std::move(hint2);
  node->loc = loc;
  std::size_t h = mix(0x7e57, static_cast<std::size_t>(k));
  for (const auto& c : node->kids) h = mix(h, c.hash());
  if (node->ty && k != TermKind::Case) h = mix(h, node->ty.hash());
  if (node->p) h = mix(h, node->p->value().hash());
  h = mix(h, static_cast<std::size_t>(node->n));
  node->hash = h;

  unsigned fb = 0;
  auto under = [](unsigned b) { return b == 0 ? 0U : b - 1; };
  switch (k) {
    case TermKind::Var:
      fb = static_cast<unsigned>(n) + 1;
      break;
    case TermKind::Case:
      fb = std::max({node->kids[0].node().free_bound, under(node->kids[1].node().free_bound),
                     under(node->kids[2].node().free_bound)});
      break;
    case TermKind::Lam:
      fb = under(node->kids[0].node().free_bound);
      break;
    case TermKind::Let:
      fb = std::max(node->kids[0].node().free_bound, under(node->kids[1].node().free_bound));
      break;
    default:
      for (const auto& c : node->kids) fb = std::max(fb, c.node().free_bound);
  }
  node->free_bound = fb;
  return Term(std::move(node));
}

}  // namespace

Term Term::var(unsigned index, std::string hint, Loc loc) {
  return make_term(TermKind::Var, {}, {}, std::nullopt, index, std::move(hint), "", loc);
}
Term Term::star(Loc loc) { return make_term(TermKind::Star, {}, {}, std::nullopt, 0, "", "", loc); }
Term Term::num(std::uint64_t n, Loc loc) { return make_term(TermKind::Num, {}, {}, std::nullopt, n, "", "", loc); }
Term Term::suc(Term m, Loc loc) { return make_term(TermKind::Suc, {std::move(m)}, {}, std::nullopt, 0, "", "", loc); }
Term Term::pred(Term m, Loc loc) {
  return make_term(TermKind::Pred, {std::move(m)}, {}, std::nullopt, 0, "", "", loc);
}
Term Term::ifz(Term l, Term m, Term n, Loc loc) {
  return make_term(TermKind::Ifz, {std::move(l), std::move(m), std::move(n)}, {}, std::nullopt, 0, "", "", loc);
}
Term Term::pair(Term m, Term n, Loc loc) {
  return make_term(TermKind::Pair, {std::move(m), std::move(n)}, {}, std::nullopt, 0, "", "", loc);
}
Term Term::fst(Term m, Loc loc) { return make_term(TermKind::Fst, {std::move(m)}, {}, std::nullopt, 0, "", "", loc); }
Term Term::snd(Term m, Loc loc) { return make_term(TermKind::Snd, {std::move(m)}, {}, std::nullopt, 0, "", "", loc); }
Term Term::inl(Ty sum, Term m, Loc loc) {
  return make_term(TermKind::Inl, {std::move(m)}, std::move(sum), std::nullopt, 0, "", "", loc);
}
Term Term::inr(Ty sum, Term m, Loc loc) {
  return make_term(TermKind::Inr, {std::move(m)}, std::move(sum), std::nullopt, 0, "", "", loc);
}
Term Term::kase(Term l, std::string x, Term m, std::string y, Term n, Ty scrutinee, Loc loc) {
  return make_term(TermKind::Case, {std::move(l), std::move(m), std::move(n)}, std::move(scrutinee), std::nullopt, 0,
                   std::move(x), std::move(y), loc);
}
Term Term::lam(std::string x, Ty param, Term body, Loc loc) {
  return make_term(TermKind::Lam, {std::move(body)}, std::move(param), std::nullopt, 0, std::move(x), "", loc);
}
Term Term::app(Term m, Term n, Loc loc) {
  return make_term(TermKind::App, {std::move(m), std::move(n)}, {}, std::nullopt, 0, "", "", loc);
}
Term Term::fold(Ty mu, Term m, Loc loc) {
  return make_term(TermKind::Fold, {std::move(m)}, std::move(mu), std::nullopt, 0, "", "", loc);
}
Term Term::unfold(Term m, Loc loc) {
  return make_term(TermKind::Unfold, {std::move(m)}, {}, std::nullopt, 0, "", "", loc);
}
Term Term::choice(Prob p, Term m, Term n, Loc loc) {
  return make_term(TermKind::Choice, {std::move(m), std::move(n)}, {}, std::move(p), 0, "", "", loc);
}
Term Term::let(std::string x, Term m, Term n, Loc loc) {
  return make_term(TermKind::Let, {std::move(m), std::move(n)}, {}, std::nullopt, 0, std::move(x), "", loc);
}

TermKind Term::kind() const { return n_->kind; }
const Term& Term::kid(std::size_t i) const { return n_->kids.at(i); }
std::size_t Term::hash() const { return n_ ? n_->hash : 0; }
Loc Term::loc() const { return n_->loc; }

bool operator==(const Term& x, const Term& y) {
  if (x.n_ == y.n_) return true;
  if (!x.n_ || !y.n_ || x.hash() != y.hash()) return false;
  return (x <=> y) == 0;
}

std::strong_ordering operator<=>(const Term& x, const Term& y) {
  if (x.n_ == y.n_) return std::strong_ordering::equal;
  if (!x.n_ || !y.n_) return x.n_ ? std::strong_ordering::greater : std::strong_ordering::less;
  const auto& a = *x.n_;
  const auto& b = *y.n_;
  if (auto c = a.kind <=> b.kind; c != 0) return c;
  if (auto c = a.n <=> b.n; c != 0) return c;
  if (a.p.has_value() != b.p.has_value()) return a.p ? std::strong_ordering::greater : std::strong_ordering::less;
  if (a.p) {
    if (auto c = a.p->value() <=> b.p->value(); c != 0) return c;
  }
  // Case annotations are optional and do not change meaning.
  if (a.kind != TermKind::Case) {
    if (auto c = a.ty <=> b.ty; c != 0) return c;
  }
  if (auto c = a.kids.size() <=> b.kids.size(); c != 0) return c;
  for (std::size_t i = 0; i < a.kids.size(); ++i)
    if (auto c = a.kids[i] <=> b.kids[i]; c != 0) return c;
  return std::strong_ordering::equal;
}

bool is_value(const Term& t) {
  switch (t.kind()) {
    case TermKind::Star:
    case TermKind::Num:
    case TermKind::Lam:
      return true;
    case TermKind::Fold:
    case TermKind::Inl:
    case TermKind::Inr:
      return is_value(t.kid(0));
    case TermKind::Pair:
      return is_value(t.kid(0)) && is_value(t.kid(1));
    default:
      return false;
  }
}

bool is_closed(const Term& t) { return t.node().free_bound == 0; }

namespace {

Term subst_at(const Term& t, const Term& v, unsigned depth) {
  if (t.node().free_bound <= depth) return t;
  const auto& n = t.node();
  auto k = [&](std::size_t i, unsigned d) { return subst_at(n.kids[i], v, d); };
  switch (n.kind) {
    case TermKind::Var: {
      const auto i = static_cast<unsigned>(n.n);
      if (i == depth) return v;
      if (i > depth) return Term::var(i - 1, n.hint, n.loc);
      return t;
    }
    case TermKind::Star:
    case TermKind::Num:
      return t;
    case TermKind::Suc:
      return Term::suc(k(0, depth), n.loc);
    case TermKind::Pred:
      return Term::pred(k(0, depth), n.loc);
    case TermKind::Ifz:
      return Term::ifz(k(0, depth), k(1, depth), k(2, depth), n.loc);
    case TermKind::Pair:
      return Term::pair(k(0, depth), k(1, depth), n.loc);
    case TermKind::Fst:
      return Term::fst(k(0, depth), n.loc);
    case TermKind::Snd:
      return Term::snd(k(0, depth), n.loc);
    case TermKind::Inl:
      return Term::inl(n.ty, k(0, depth), n.loc);
    case TermKind::Inr:
      return Term::inr(n.ty, k(0, depth), n.loc);
    case TermKind::Case:
      return Term::kase(k(0, depth), n.hint, k(1, depth + 1), n.hint2, k(2, depth + 1), n.ty, n.loc);
    case TermKind::Lam:
      return Term::lam(n.hint, n.ty, k(0, depth + 1), n.loc);
    case TermKind::App:
      return Term::app(k(0, depth), k(1, depth), n.loc);
    case TermKind::Fold:
      return Term::fold(n.ty, k(0, depth), n.loc);
    case TermKind::Unfold:
      return Term::unfold(k(0, depth), n.loc);
    case TermKind::Choice:
      return Term::choice(*n.p, k(0, depth), k(1, depth), n.loc);
    case TermKind::Let:
      return Term::let(n.hint, k(0, depth), k(1, depth + 1), n.loc);
  }
  return t;
}

}  // namespace

Term subst(const Term& m, const Term& v) {
  if (!is_closed(v)) throw std::invalid_argument("subst: substituted value is not closed");
  return subst_at(m, v, 0);
}

std::size_t term_size(const Term& t) {
  std::size_t s = 1;
  for (const auto& c : t.node().kids) s += term_size(c);
  return s;
}

// ---------------------------------------------------------------------------

namespace {

[[noreturn]] void type_error(const Term& t, const std::string& msg) { throw TypeError(t.loc(), msg); }

void expect_ty(const Term& t, const Ty& got, const Ty& want, const std::string& what) {
  if (got != want) type_error(t, what + ": expected " + ty_str(want) + ", found " + ty_str(got));
}

void check_annotation(const Term& t, const Ty& ty) {
  if (!ty_closed(ty)) type_error(t, "type annotation " + ty_str(ty) + " is not closed");
}

Ty check(TyCtx& ctx, const Term& t) {
  const auto& n = t.node();
  switch (n.kind) {
    case TermKind::Var: {
      if (n.n >= ctx.size()) type_error(t, "unbound variable " + (n.hint.empty() ? "#" + std::to_string(n.n) : n.hint));
      return ctx[ctx.size() - 1 - n.n];
    }
    case TermKind::Star:
      return Ty::unit();
    case TermKind::Num:
      return Ty::nat();
    case TermKind::Suc:
    case TermKind::Pred:
      expect_ty(n.kids[0], check(ctx, n.kids[0]), Ty::nat(), n.kind == TermKind::Suc ? "argument of suc" : "argument of pred");
      return Ty::nat();
    case TermKind::Ifz: {
      expect_ty(n.kids[0], check(ctx, n.kids[0]), Ty::nat(), "ifz scrutinee");
      auto a = check(ctx, n.kids[1]);
      auto b = check(ctx, n.kids[2]);
      expect_ty(n.kids[2], b, a, "ifz branches disagree");
      return a;
    }
    case TermKind::Pair:
      return Ty::prod(check(ctx, n.kids[0]), check(ctx, n.kids[1]));
    case TermKind::Fst:
    case TermKind::Snd: {
      auto a = check(ctx, n.kids[0]);
      if (a.kind() != TyKind::Prod)
        type_error(t, std::string(n.kind == TermKind::Fst ? "fst" : "snd") + " of a non-product of type " + ty_str(a));
      return n.kind == TermKind::Fst ? a.a() : a.b();
    }
    case TermKind::Inl:
    case TermKind::Inr: {
      check_annotation(t, n.ty);
      if (n.ty.kind() != TyKind::Sum) type_error(t, "injection annotated with non-sum type " + ty_str(n.ty));
      auto a = check(ctx, n.kids[0]);
      expect_ty(n.kids[0], a, n.kind == TermKind::Inl ? n.ty.a() : n.ty.b(), "injected term");
      return n.ty;
    }
    case TermKind::Case: {
      auto s = check(ctx, n.kids[0]);
      if (s.kind() != TyKind::Sum) type_error(t, "case on a non-sum of type " + ty_str(s));
      if (n.ty) expect_ty(n.kids[0], s, n.ty, "case scrutinee");
      ctx.push_back(s.a());
      auto a = check(ctx, n.kids[1]);
      ctx.back() = s.b();
      Ty b;
      try {
        b = check(ctx, n.kids[2]);
      } catch (...) {
        ctx.pop_back();
        throw;
      }
      ctx.pop_back();
      expect_ty(n.kids[2], b, a, "case branches disagree");
      return a;
    }
    case TermKind::Lam: {
      check_annotation(t, n.ty);
      ctx.push_back(n.ty);
      Ty body;
      try {
        body = check(ctx, n.kids[0]);
      } catch (...) {
        ctx.pop_back();
        throw;
      }
      ctx.pop_back();
      return Ty::fn(n.ty, body);
    }
    case TermKind::App: {
      auto f = check(ctx, n.kids[0]);
      if (f.kind() != TyKind::Fn) type_error(t, "application of a non-function of type " + ty_str(f));
      expect_ty(n.kids[1], check(ctx, n.kids[1]), f.a(), "function argument");
      return f.b();
    }
    case TermKind::Fold: {
      check_annotation(t, n.ty);
      if (n.ty.kind() != TyKind::Mu) type_error(t, "fold annotated with non-recursive type " + ty_str(n.ty));
      expect_ty(n.kids[0], check(ctx, n.kids[0]), unfold_mu(n.ty), "folded term");
      return n.ty;
    }
    case TermKind::Unfold: {
      auto a = check(ctx, n.kids[0]);
      if (a.kind() != TyKind::Mu) type_error(t, "unfold of a non-recursive type " + ty_str(a));
      return unfold_mu(a);
    }
    case TermKind::Choice: {
      if (!n.p || !Prob::valid(n.p->value())) type_error(t, "choice weight outside (0,1)");
      auto a = check(ctx, n.kids[0]);
      expect_ty(n.kids[1], check(ctx, n.kids[1]), a, "choice branches disagree");
      return a;
    }
    case TermKind::Let: {
      auto a = check(ctx, n.kids[0]);
      ctx.push_back(a);
      Ty b;
      try {
        b = check(ctx, n.kids[1]);
      } catch (...) {
        ctx.pop_back();
        throw;
      }
      ctx.pop_back();
      return b;
    }
  }
  type_error(t, "unknown term constructor");
}

}  // namespace

Ty typecheck(const TyCtx& ctx, const Term& m) {
  for (const auto& c : ctx)
    if (!ty_closed(c)) throw TypeError({}, "context type " + ty_str(c) + " is not closed");
  TyCtx work = ctx;
  return check(work, m);
}

}  // namespace probfpc
