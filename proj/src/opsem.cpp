#include "probfpc/opsem.hpp"

namespace probfpc {

namespace {

// t with its kid `hole` replaced by v; binders and annotations are kept.
Term with_kid(const Term& t, std::size_t hole, const Term& v) {
  const auto& n = t.node();
  auto k = [&](std::size_t i) { return i == hole ? v : n.kids[i]; };
  switch (n.kind) {
    case TermKind::Suc:
      return Term::suc(k(0), n.loc);
    case TermKind::Pred:
      return Term::pred(k(0), n.loc);
    case TermKind::Fst:
      return Term::fst(k(0), n.loc);
    case TermKind::Snd:
      return Term::snd(k(0), n.loc);
    case TermKind::Inl:
      return Term::inl(n.ty, k(0), n.loc);
    case TermKind::Inr:
      return Term::inr(n.ty, k(0), n.loc);
    case TermKind::Fold:
      return Term::fold(n.ty, k(0), n.loc);
    case TermKind::Unfold:
      return Term::unfold(k(0), n.loc);
    case TermKind::Ifz:
      return Term::ifz(k(0), k(1), k(2), n.loc);
    case TermKind::Pair:
      return Term::pair(k(0), k(1), n.loc);
    case TermKind::App:
      return Term::app(k(0), k(1), n.loc);
    case TermKind::Case:
      return Term::kase(k(0), n.hint, k(1), n.hint2, k(2), n.ty, n.loc);
    case TermKind::Let:
      return Term::let(n.hint, k(0), k(1), n.loc);
    default:
      throw EvalDefect("with_kid: " + pretty(t) + " has no evaluation position");
  }
}

[[noreturn]] void defect(const Term& t, const std::string& what) {
  throw EvalDefect("evaluation reached an ill-typed configuration (" + what + "): " + pretty(t));
}

}  // namespace

OpEvaluator::~OpEvaluator() {
  for (auto& [t, th] : table_) th.release();
}

std::size_t OpEvaluator::table_size() const {
  std::lock_guard lock(mu_);
  return table_.size();
}

Thunk<Term> OpEvaluator::thunk_of(const Term& m) {
  std::lock_guard lock(mu_);
  if (auto it = table_.find(m); it != table_.end()) return it->second;
  OpEvaluator* self = this;
  Thunk<Term> th([self, m]() { return self->eval(m); });
  table_.emplace(m, th);
  term_of_.emplace(th.id(), m);
  return th;
}

// eval(C[M]) = eval(M) >>= λV. eval(C[V]), where C puts its hole at kid `hole`.
Delay<Term> OpEvaluator::frame(const Term& t, std::size_t hole) {
  Kont<Term, Term> k;
  k.apply = [this, t, hole](const Term& v) { return eval(with_kid(t, hole, v)); };
  k.lift = [this, t, hole](const Thunk<Term>& th) {
    Term inner;
    {
      std::lock_guard lock(mu_);
      inner = term_of_.at(th.id());
    }
    return thunk_of(with_kid(t, hole, inner));
  };
  return delay_bind(eval(t.kid(hole)), k);
}

Delay<Term> OpEvaluator::eval(const Term& t) {
  if (is_value(t)) return now(t);
  const auto& n = t.node();
  switch (n.kind) {
    case TermKind::Var:
      defect(t, "free variable");
    case TermKind::Suc:
    case TermKind::Pred: {
      if (!is_value(n.kids[0])) return frame(t, 0);
      if (n.kids[0].kind() != TermKind::Num) defect(t, "arithmetic on a non-numeral");
      const auto v = n.kids[0].node().n;
      if (n.kind == TermKind::Suc) return now(Term::num(v + 1));
      return now(Term::num(v == 0 ? 0 : v - 1));
    }
    case TermKind::Fst:
    case TermKind::Snd: {
      if (!is_value(n.kids[0])) return frame(t, 0);
      if (n.kids[0].kind() != TermKind::Pair) defect(t, "projection of a non-pair");
      return now(n.kids[0].kid(n.kind == TermKind::Fst ? 0 : 1));
    }
    case TermKind::Inl:
    case TermKind::Inr:
    case TermKind::Fold:
    case TermKind::Pair:
      return frame(t, is_value(n.kids[0]) ? 1 : 0);
    case TermKind::Unfold: {
      if (!is_value(n.kids[0])) return frame(t, 0);
      if (n.kids[0].kind() != TermKind::Fold) defect(t, "unfold of a non-fold");
      return step(thunk_of(n.kids[0].kid(0)));
    }
    case TermKind::Ifz: {
      if (!is_value(n.kids[0])) return frame(t, 0);
      if (n.kids[0].kind() != TermKind::Num) defect(t, "ifz on a non-numeral");
      return eval(n.kids[0].node().n == 0 ? n.kids[1] : n.kids[2]);
    }
    case TermKind::App: {
      if (!is_value(n.kids[0])) return frame(t, 0);
      if (!is_value(n.kids[1])) return frame(t, 1);
      if (n.kids[0].kind() != TermKind::Lam) defect(t, "application of a non-function");
      return step(thunk_of(subst(n.kids[0].kid(0), n.kids[1])));
    }
    case TermKind::Case: {
      if (!is_value(n.kids[0])) return frame(t, 0);
      const auto& s = n.kids[0];
      if (s.kind() == TermKind::Inl) return step(thunk_of(subst(n.kids[1], s.kid(0))));
      if (s.kind() == TermKind::Inr) return step(thunk_of(subst(n.kids[2], s.kid(0))));
      defect(t, "case on a non-injection");
    }
    case TermKind::Let: {
      if (!is_value(n.kids[0])) return frame(t, 0);
      return step(thunk_of(subst(n.kids[1], n.kids[0])));
    }
    case TermKind::Choice:
      return dchoice(*n.p, eval(n.kids[0]), eval(n.kids[1]));
    default:
      defect(t, "unexpected term former");
  }
}

OpComp eval(const Term& m) {
  auto ty = typecheck(m);
  auto ev = OpEvaluator::create();
  auto d = ev->eval(m);
  return OpComp{std::move(d), std::move(ty), std::move(ev)};
}

TermSeq eval_probterm(const Term& m, unsigned n) {
  auto c = eval(m);
  return with_limit(probterm_seq(c.delay, n), c.delay);
}

}  // namespace probfpc
