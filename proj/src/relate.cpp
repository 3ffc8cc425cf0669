#include "probfpc/relate.hpp"

#include <deque>

namespace probfpc {

FlowResult bipartite_max_flow(const std::vector<Rat>& left, const std::vector<Rat>& right,
                              const std::vector<std::vector<bool>>& adj) {
  const std::size_t nl = left.size();
  const std::size_t nr = right.size();
  const std::size_t n = nl + nr + 2;
  const std::size_t src = nl + nr;
  const std::size_t sink = src + 1;
  // Middle edges get capacity min(left, right), which never binds a max flow.
  std::vector<std::vector<Rat>> cap(n, std::vector<Rat>(n));
  for (std::size_t i = 0; i < nl; ++i) cap[src][i] = left[i];
  for (std::size_t j = 0; j < nr; ++j) cap[nl + j][sink] = right[j];
  for (std::size_t i = 0; i < nl; ++i)
    for (std::size_t j = 0; j < nr; ++j)
      if (adj[i][j]) cap[i][nl + j] = min(left[i], right[j]);
  const auto original = cap;

  Rat total(0);
  for (;;) {
    std::vector<std::size_t> parent(n, SIZE_MAX);
    parent[src] = src;
    std::deque<std::size_t> queue{src};
    while (!queue.empty() && parent[sink] == SIZE_MAX) {
      const std::size_t u = queue.front();
      queue.pop_front();
      for (std::size_t v = 0; v < n; ++v) {
        if (parent[v] != SIZE_MAX || cap[u][v].sign() <= 0) continue;
        parent[v] = u;
        queue.push_back(v);
      }
    }
    if (parent[sink] == SIZE_MAX) break;
    Rat bottleneck = cap[parent[sink]][sink];
    for (std::size_t v = sink; v != src; v = parent[v]) bottleneck = min(bottleneck, cap[parent[v]][v]);
    for (std::size_t v = sink; v != src; v = parent[v]) {
      cap[parent[v]][v] -= bottleneck;
      cap[v][parent[v]] += bottleneck;
    }
    total += bottleneck;
  }

  FlowResult out{total, std::vector<std::vector<Rat>>(nl, std::vector<Rat>(nr))};
  for (std::size_t i = 0; i < nl; ++i)
    for (std::size_t j = 0; j < nr; ++j) {
      if (!adj[i][j]) continue;
      const Rat f = original[i][nl + j] - cap[i][nl + j];
      if (f.sign() > 0) out.flow[i][j] = f;
    }
  return out;
}

std::vector<Term> ProbeSet::at(const Ty& t) const {
  switch (t.kind()) {
    case TyKind::Unit:
      return {Term::star()};
    case TyKind::Nat: {
      std::vector<Term> out;
      for (auto n : nats) out.push_back(Term::num(n));
      return out;
    }
    case TyKind::Prod: {
      std::vector<Term> out;
      for (const auto& a : at(t.a()))
        for (const auto& b : at(t.b())) out.push_back(Term::pair(a, b));
      return out;
    }
    case TyKind::Sum: {
      std::vector<Term> out;
      for (const auto& a : at(t.a())) out.push_back(Term::inl(t, a));
      for (const auto& b : at(t.b())) out.push_back(Term::inr(t, b));
      return out;
    }
    default:
      return {};
  }
}

LogRel::LogRel(LogrelConfig cfg)
    : cfg_(std::move(cfg)), den_(DenEvaluator::create(StepMode::Standard)), op_(OpEvaluator::create()) {}

namespace {

LiftTrace logrel_trace(const std::string& note, unsigned fuel) {
  LiftTrace t;
  t.kind = "logrel";
  t.fuel = fuel;
  t.note = note;
  return t;
}

}  // namespace

LiftVerdict LogRel::val(const Ty& sigma, const SemVal& v, const Term& big_v, unsigned fuel) {
  auto mismatch = [&](const std::string& what) {
    return LiftVerdict::unknown("values unrelated at " + ty_str(sigma) + ": " + what,
                                logrel_trace(sem_str(v) + " vs " + pretty(big_v), fuel));
  };
  auto ok = [&]() { return LiftVerdict{true, "", logrel_trace(sem_str(v) + " ~ " + pretty(big_v), fuel)}; };
  switch (sigma.kind()) {
    case TyKind::Unit:
      if (v.kind() != SemKind::Unit || big_v.kind() != TermKind::Star) return mismatch("not ⋆");
      return ok();
    case TyKind::Nat:
      if (v.kind() != SemKind::Nat || big_v.kind() != TermKind::Num) return mismatch("not numerals");
      if (v.nat() != big_v.node().n) return mismatch("different numerals");
      return ok();
    case TyKind::Prod: {
      if (v.kind() != SemKind::Pair || big_v.kind() != TermKind::Pair) return mismatch("not pairs");
      auto a = val(sigma.a(), v.kid(0), big_v.kid(0), fuel);
      if (!a.holds) return a;
      auto b = val(sigma.b(), v.kid(1), big_v.kid(1), fuel);
      if (!b.holds) return b;
      auto t = logrel_trace("pair", fuel);
      t.children = {a.trace, b.trace};
      return LiftVerdict{true, "", std::move(t)};
    }
    case TyKind::Sum: {
      const bool vl = v.kind() == SemKind::Inl;
      const bool bl = big_v.kind() == TermKind::Inl;
      if (vl != bl) return mismatch("different injections");
      return val(vl ? sigma.a() : sigma.b(), v.kid(0), big_v.kid(0), fuel);
    }
    case TyKind::Fn:
      return fun(sigma, v, big_v, fuel);
    case TyKind::Mu: {
      if (v.kind() != SemKind::Fold || big_v.kind() != TermKind::Fold) return mismatch("not folds");
      if (fuel == 0) {
        LiftTrace t;
        t.kind = "truncated";
        t.note = "fuel exhausted under fold";
        return LiftVerdict{true, "", std::move(t)};
      }
      return val(unfold_mu(sigma), v.kid(0), big_v.kid(0), fuel - 1);
    }
    default:
      return mismatch("open type");
  }
}

LiftVerdict LogRel::fun(const Ty& sigma, const SemVal& v, const Term& big_v, unsigned fuel) {
  if (v.kind() != SemKind::Fun || big_v.kind() != TermKind::Lam)
    return LiftVerdict::unknown("values unrelated at " + ty_str(sigma) + ": not functions");
  auto probes = cfg_.probes.at(sigma.a());
  if (probes.empty())
    return LiftVerdict::unknown("no probes at argument type " + ty_str(sigma.a()) + "; function case not checked",
                                logrel_trace("no probes", fuel));
  auto t = logrel_trace("function at " + ty_str(sigma), fuel);
  LiftConfig lc = cfg_.lift;
  lc.fuel = fuel;
  const Ty result = sigma.b();
  RelV<SemVal, Term> r = [this, result, fuel](const SemVal& a, const Term& b) { return val(result, a, b, fuel); };
  for (const auto& w_term : probes) {
    const SemVal w = den_->val_interp(w_term);
    auto arg = val(sigma.a(), w, w_term, fuel);
    if (!arg.holds) return arg;
    auto res = lift_check(den_->apply(v, w), op_->eval(subst(big_v.kid(0), w_term)), r, lc);
    res.trace.note = "probe " + pretty(w_term) + (res.trace.note.empty() ? "" : "; " + res.trace.note);
    t.children.push_back(res.trace);
    if (!res.holds) return LiftVerdict::unknown("probe " + pretty(w_term) + ": " + res.reason, std::move(t));
  }
  return LiftVerdict{true, "", std::move(t)};
}

LiftVerdict LogRel::expr(const Ty& sigma, const Term& a, const Term& b) {
  const unsigned fuel = cfg_.lift.fuel;
  RelV<SemVal, Term> r = [this, sigma, fuel](const SemVal& x, const Term& y) { return val(sigma, x, y, fuel); };
  return lift_check(den_->interp(a, {}), op_->eval(b), r, cfg_.lift);
}

LiftVerdict logrel_val(const Ty& sigma, const SemVal& v, const Term& big_v, LogRel& ctx) {
  return ctx.val(sigma, v, big_v, ctx.fuel());
}

LiftVerdict refine(const Term& a, const Term& b, const LogrelConfig& cfg) {
  const Ty ta = typecheck(a);
  const Ty tb = typecheck(b);
  if (!(ta == tb)) throw std::invalid_argument("refine: types differ: " + ty_str(ta) + " vs " + ty_str(tb));
  LogRel ctx(cfg);
  return ctx.expr(ta, a, b);
}

bool refine_probterm(const Term& m, const Term& n, unsigned n_depth, unsigned m_depth, const Rat& eps) {
  for (const auto* t : {&m, &n})
    if (!(typecheck(*t) == Ty::unit()))
      throw std::invalid_argument("refine_probterm: expected a program of type Unit, found " + ty_str(typecheck(*t)));
  return leqlim_upto(eval_probterm(m, n_depth), eval_probterm(n, m_depth), n_depth, m_depth, eps);
}

}  // namespace probfpc
