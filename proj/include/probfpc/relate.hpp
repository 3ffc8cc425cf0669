#pragma once

// Couplings by exact max-flow, the fuel-bounded relational lifting of a
// relation on values to delayed distributions, the type-indexed logical
// relation between semantic and syntactic values, and refinement drivers.
//
// Every check is a semidecision: Holds carries a replayable trace, Unknown is
// never a refutation. Fuel 0 accepts the remaining obligation, which is the
// finite reading of "later".

#include <deque>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "probfpc/delay.hpp"
#include "probfpc/densem.hpp"
#include "probfpc/dist.hpp"
#include "probfpc/lang.hpp"
#include "probfpc/opsem.hpp"

namespace probfpc {

template <class A, class B>
using Rel = std::function<bool(const A&, const B&)>;

struct LiftConfig {
  unsigned fuel = 6;
  unsigned horizon = 64;
  Rat eps = Rat(1, 1024);
  // Accept a value coupling against the exact limit of the right-hand side
  // when its thunk graph is finite.
  bool use_limit = true;
  std::size_t state_budget = 4000;
};

struct LiftTrace {
  // value | step | choice | truncated | logrel
  std::string kind;
  std::optional<Rat> p;
  std::optional<unsigned> m;
  bool via_limit = false;
  std::vector<std::string> coupling;
  Rat slack;
  unsigned fuel = 0;
  std::string note;
  std::vector<LiftTrace> children;
};

struct LiftVerdict {
  bool holds = false;
  // For Unknown: which budget failed first (fuel, horizon, eps) and why.
  std::string reason;
  LiftTrace trace;

  static LiftVerdict unknown(std::string reason, LiftTrace t = {}) { return {false, std::move(reason), std::move(t)}; }
};

// A relation that explains itself; `holds` is the membership test.
template <class A, class B>
using RelV = std::function<LiftVerdict(const A&, const B&)>;

// Maximum flow on the bipartite graph source → left[i] → right[j] → sink with
// capacities left[i], right[j] and unbounded middle edges where adj[i][j].
struct FlowResult {
  Rat value;
  std::vector<std::vector<Rat>> flow;  // flow[i][j] on the middle edges
};

FlowResult bipartite_max_flow(const std::vector<Rat>& left, const std::vector<Rat>& right,
                              const std::vector<std::vector<bool>>& adj);

template <class A, class B>
struct Coupling {
  struct Pair {
    A a;
    B b;
    Rat w;
  };
  std::vector<Pair> pairs;
  Rat flow;
  Rat left_mass;
  // Matched mass per entry of the right list.
  std::vector<Rat> right_used;

  [[nodiscard]] Rat slack() const { return left_mass - flow; }
  [[nodiscard]] std::vector<std::string> rendered() const {
    std::vector<std::string> out;
    for (const auto& p : pairs) out.push_back(Render<A>::str(p.a) + " ~ " + Render<B>::str(p.b) + " : " + p.w.str());
    return out;
  }
};

// A coupling of maximal matched mass between μ and the sub-distribution ν.
template <class A, class B>
Coupling<A, B> best_coupling(const WeightedList<A>& mu, const WeightedList<B>& nu, const Rel<A, B>& r) {
  std::vector<Rat> left;
  std::vector<Rat> right;
  for (const auto& e : mu) left.push_back(e.first);
  for (const auto& e : nu) right.push_back(e.first);
  std::vector<std::vector<bool>> adj(mu.size(), std::vector<bool>(nu.size(), false));
  for (std::size_t i = 0; i < mu.size(); ++i)
    for (std::size_t j = 0; j < nu.size(); ++j) adj[i][j] = r(mu[i].second, nu[j].second);
  auto fr = bipartite_max_flow(left, right, adj);
  Coupling<A, B> c;
  c.flow = fr.value;
  c.left_mass = total_mass(mu);
  c.right_used.assign(nu.size(), Rat(0));
  for (std::size_t i = 0; i < mu.size(); ++i)
    for (std::size_t j = 0; j < nu.size(); ++j) {
      if (fr.flow[i][j].is_zero()) continue;
      c.pairs.push_back({mu[i].second, nu[j].second, fr.flow[i][j]});
      c.right_used[j] += fr.flow[i][j];
    }
  return c;
}

// Some iff the matched mass reaches mass(μ) − ε.
template <class A, class B>
std::optional<Coupling<A, B>> max_coupling(const WeightedList<A>& mu, const WeightedList<B>& nu, const Rel<A, B>& r,
                                           const Rat& eps) {
  auto c = best_coupling(mu, nu, r);
  if (c.flow >= c.left_mass - eps) return c;
  return std::nullopt;
}

template <class A, class B>
std::optional<Coupling<A, B>> max_coupling(const Dist<A>& mu, const WeightedList<B>& nu, const Rel<A, B>& r,
                                           const Rat& eps) {
  return max_coupling(mu.support(), nu, r, eps);
}

// ---------------------------------------------------------------------------
// Relational lifting

namespace detail {

// A computation that never terminates: one thunk that steps to itself.
template <class B>
Thunk<B> divergent_thunk() {
  static Thunk<B> t([]() { return step(divergent_thunk<B>()); });
  return t;
}

template <class A, class B>
class LiftRun {
 public:
  LiftRun(RelV<A, B> r, LiftConfig cfg) : rv_(std::move(r)), cfg_(std::move(cfg)) {
    r_ = [this](const A& a, const B& b) { return related(a, b).holds; };
  }

  LiftVerdict check(const Delay<A>& d, const Delay<B>& e, unsigned fuel) {
    using D = SumDecomp<A, Thunk<A>>;
    auto parts = decompose_sum(d.node());
    if (auto* lo = std::get_if<typename D::LeftOnly>(&parts.parts)) return values(lo->left.support(), e, fuel);
    if (auto* ro = std::get_if<typename D::RightOnly>(&parts.parts)) {
      if (fuel == 0) return truncated();
      auto child = check(zeta(ro->right).force(), e, fuel - 1);
      LiftTrace t{"step", {}, {}, false, {}, Rat(0), fuel, "", {child.trace}};
      return LiftVerdict{child.holds, child.reason, std::move(t)};
    }
    const auto& mx = std::get<typename D::Mixed>(parts.parts);
    return mixed(mx.left, mx.p, mx.right, e, fuel);
  }

 private:
  using EntryB = typename Delay<B>::Entry;

  LiftVerdict truncated() const {
    LiftTrace t;
    t.kind = "truncated";
    t.note = "fuel exhausted; remaining obligation accepted";
    return LiftVerdict{true, "", std::move(t)};
  }

  std::optional<LimitPart<B>> limit_of(const Delay<B>& e) const {
    if (!cfg_.use_limit) return std::nullopt;
    return analyze_limit(e, cfg_.state_budget);
  }

  // Clause 1: e ⇝≈ ν' and μ couples with ν'.
  LiftVerdict values(const WeightedList<A>& mu, const Delay<B>& e, unsigned fuel) {
    Delay<B> cur = e;
    std::optional<std::pair<unsigned, Coupling<A, B>>> approx;
    Rat best_mass(0);
    Rat best_flow(0);
    for (unsigned m = 0;; ++m) {
      auto vp = value_part_of_node(cur);
      auto c = best_coupling(mu, vp.values, r_);
      best_mass = max(best_mass, vp.mass.value());
      best_flow = max(best_flow, c.flow);
      if (c.flow == c.left_mass) return hold_value(c, m, false, fuel);
      if (!approx && c.flow >= c.left_mass - cfg_.eps) approx.emplace(m, c);
      if (m == cfg_.horizon || vp.mass.value().is_one()) break;
      cur = run(cur);
    }
    if (auto lp = limit_of(e)) {
      auto c = best_coupling(mu, lp->values, r_);
      if (c.flow == c.left_mass) return hold_value(c, std::nullopt, true, fuel);
      best_mass = max(best_mass, lp->mass.value());
      best_flow = max(best_flow, c.flow);
    }
    if (approx) return hold_value(approx->second, approx->first, false, fuel);
    LiftTrace t;
    t.kind = "value";
    t.fuel = fuel;
    if (best_mass + cfg_.eps < total_mass(mu)) {
      t.note = "right value mass " + best_mass.str() + " within horizon " + std::to_string(cfg_.horizon);
      return LiftVerdict::unknown("horizon: value mass " + best_mass.str() + " of the right side after " +
                                      std::to_string(cfg_.horizon) + " runs is short of " + total_mass(mu).str() +
                                      " − ε",
                                  std::move(t));
    }
    t.note = "matched mass " + best_flow.str();
    return LiftVerdict::unknown("eps: coupling infeasible at ε = " + cfg_.eps.str() + " (matched mass " +
                                    best_flow.str() + " of " + total_mass(mu).str() + ")",
                                std::move(t));
  }

  LiftVerdict hold_value(const Coupling<A, B>& c, std::optional<unsigned> m, bool via_limit, unsigned fuel) {
    LiftTrace t;
    t.kind = "value";
    t.m = m;
    t.via_limit = via_limit;
    t.coupling = c.rendered();
    t.slack = c.slack();
    t.fuel = fuel;
    t.children = pair_traces(c);
    return LiftVerdict{true, "", std::move(t)};
  }

  // Splits the node `cur` as choice(p, ν1, ν2): ν1 takes the mass `used` on the
  // value entries (index-aligned with `vals`) topped up with other entries until
  // it reaches p.
  static std::pair<Delay<B>, Delay<B>> split_node(const typename Delay<B>::Node& node, const WeightedList<B>& vals,
                                                  const std::vector<Rat>& used, const Prob& p) {
    WeightedList<EntryB> rest;
    for (const auto& e : node.support()) rest.push_back(e);
    WeightedList<EntryB> first;
    Rat need = p.value();
    for (std::size_t j = 0; j < vals.size(); ++j) {
      if (used[j].is_zero()) continue;
      Rat take = used[j];
      for (auto& [w, e] : rest) {
        if (take.is_zero()) break;
        if (!e.is_left() || !same_value(e.left_value(), vals[j].second)) continue;
        const Rat t = min(w, take);
        first.emplace_back(t, e);
        w -= t;
        take -= t;
        need -= t;
      }
    }
    // Filler: deferred entries first, then unmatched values.
    for (int pass = 0; pass < 2 && need.sign() > 0; ++pass) {
      for (auto& [w, e] : rest) {
        if (need.is_zero()) break;
        if (w.is_zero() || e.is_left() != (pass == 1)) continue;
        const Rat t = min(w, need);
        first.emplace_back(t, e);
        w -= t;
        need -= t;
      }
    }
    return {Delay<B>(Dist<EntryB>::normalized(std::move(first))), Delay<B>(Dist<EntryB>::normalized(std::move(rest)))};
  }

  static bool same_value(const B& x, const B& y) {
    if (keyed_equal(x, y)) return true;
    auto ix = Keying<B>::identity(x);
    auto iy = Keying<B>::identity(y);
    return ix && iy && *ix == *iy;
  }

  static WeightedList<A> scaled(const Dist<A>& mu, const Rat& k) {
    WeightedList<A> out;
    for (const auto& [w, a] : mu.support()) out.emplace_back(w * k, a);
    return out;
  }

  // Clause 3: d = choice(p, μ1, μ2) with μ1 values and μ2 deferred; e must
  // reduce to choice(p, ν1, ν2) with μ1 R̄ ν1 and μ2 R̄ ν2.
  LiftVerdict mixed(const Dist<A>& mu1, const Prob& p, const Dist<Thunk<A>>& mu2, const Delay<B>& e, unsigned fuel) {
    const auto target = scaled(mu1, p.value());
    Delay<B> cur = e;
    std::optional<std::tuple<unsigned, Delay<B>, Coupling<A, B>>> chosen;
    std::optional<std::tuple<unsigned, Delay<B>, Coupling<A, B>>> approx;
    for (unsigned m = 0;; ++m) {
      auto vp = value_part_of_node(cur);
      auto c = best_coupling(target, vp.values, r_);
      if (c.flow == p.value()) {
        chosen.emplace(m, cur, c);
        break;
      }
      if (!approx && c.flow >= p.value() - cfg_.eps) approx.emplace(m, cur, c);
      if (m == cfg_.horizon || vp.mass.value().is_one()) break;
      cur = run(cur);
    }
    std::optional<std::pair<Delay<B>, Delay<B>>> split;
    LiftTrace t;
    t.kind = "choice";
    t.p = p.value();
    t.fuel = fuel;
    if (chosen) {
      auto& [m, node, c] = *chosen;
      t.m = m;
      t.coupling = c.rendered();
      split = split_node(node.node(), value_part_of_node(node).values, c.right_used, p);
    } else if (auto lp = limit_of(e); lp && best_coupling(target, lp->values, r_).flow == p.value()) {
      auto c = best_coupling(target, lp->values, r_);
      t.via_limit = true;
      t.coupling = c.rendered();
      WeightedList<EntryB> lim;
      for (const auto& [w, b] : lp->values) lim.emplace_back(w, EntryB::left(b));
      const Rat lost = Rat(1) - lp->mass.value();
      if (lost.sign() > 0) lim.emplace_back(lost, EntryB::right(divergent_thunk<B>()));
      split = split_node(Dist<EntryB>::from_weights(std::move(lim)), lp->values, c.right_used, p);
    } else if (approx) {
      auto& [m, node, c] = *approx;
      t.m = m;
      t.coupling = c.rendered();
      t.slack = p.value() - c.flow;
      split = split_node(node.node(), value_part_of_node(node).values, c.right_used, p);
    } else {
      t.note = "no run^m with m ≤ " + std::to_string(cfg_.horizon) + " splits the right side at p = " + p.str();
      return LiftVerdict::unknown("horizon: right side cannot be split at p = " + p.str(), std::move(t));
    }
    auto left = check(Delay<A>(dist_map(mu1, [](const A& a) { return Delay<A>::Entry::left(a); })), split->first,
                      fuel);
    auto right = check(Delay<A>(dist_map(mu2, [](const Thunk<A>& th) { return Delay<A>::Entry::right(th); })),
                       split->second, fuel);
    t.children = {left.trace, right.trace};
    if (!left.holds) return LiftVerdict::unknown(left.reason, std::move(t));
    if (!right.holds) return LiftVerdict::unknown(right.reason, std::move(t));
    return LiftVerdict{true, "", std::move(t)};
  }

  // Memoised per (left, right) pair; keyed pairs by structure, others by identity.
  const LiftVerdict& related(const A& a, const B& b) {
    for (auto& [x, y, v] : memo_)
      if (same_left(x, a) && same_value(y, b)) return v;
    memo_.emplace_back(a, b, rv_(a, b));
    return std::get<2>(memo_.back());
  }

  static bool same_left(const A& x, const A& y) {
    if (keyed_equal(x, y)) return true;
    auto ix = Keying<A>::identity(x);
    auto iy = Keying<A>::identity(y);
    return ix && iy && *ix == *iy;
  }

  std::vector<LiftTrace> pair_traces(const Coupling<A, B>& c) {
    std::vector<LiftTrace> out;
    for (const auto& p : c.pairs) {
      const auto& v = related(p.a, p.b);
      if (!v.trace.kind.empty()) out.push_back(v.trace);
    }
    return out;
  }

  RelV<A, B> rv_;
  Rel<A, B> r_;
  LiftConfig cfg_;
  std::deque<std::tuple<A, B, LiftVerdict>> memo_;
};

}  // namespace detail

// d R̄ e up to the budgets in cfg.
template <class A, class B>
LiftVerdict lift_check(const Delay<A>& d, const Delay<B>& e, const RelV<A, B>& r, const LiftConfig& cfg) {
  detail::LiftRun<A, B> run(r, cfg);
  return run.check(d, e, cfg.fuel);
}

template <class A, class B>
LiftVerdict lift_check(const Delay<A>& d, const Delay<B>& e, const Rel<A, B>& r, const LiftConfig& cfg) {
  RelV<A, B> rv = [r](const A& a, const B& b) {
    return r(a, b) ? LiftVerdict{true, "", {}} : LiftVerdict::unknown("unrelated values");
  };
  return lift_check(d, e, rv, cfg);
}

// ---------------------------------------------------------------------------
// Logical relation and refinement

// Closed values used to instantiate function arguments, per argument type:
// ⋆ at Unit, the given numerals at Nat, products and sums built from those.
// Function and recursive types have no probes.
struct ProbeSet {
  std::vector<std::uint64_t> nats{0, 1, 2, 3};
  [[nodiscard]] std::vector<Term> at(const Ty& t) const;
};

struct LogrelConfig {
  LiftConfig lift;
  ProbeSet probes;
};

class LogRel {
 public:
  explicit LogRel(LogrelConfig cfg);

  // v ~σ V with `fuel` unfoldings of recursive types left.
  LiftVerdict val(const Ty& sigma, const SemVal& v, const Term& big_v, unsigned fuel);
  // ⟦A⟧ (standard) lifted against eval(B), at type σ.
  LiftVerdict expr(const Ty& sigma, const Term& a, const Term& b);

  [[nodiscard]] unsigned fuel() const { return cfg_.lift.fuel; }
  [[nodiscard]] const std::shared_ptr<DenEvaluator>& den() const { return den_; }
  [[nodiscard]] const std::shared_ptr<OpEvaluator>& op() const { return op_; }

 private:
  LiftVerdict fun(const Ty& sigma, const SemVal& v, const Term& big_v, unsigned fuel);

  LogrelConfig cfg_;
  std::shared_ptr<DenEvaluator> den_;
  std::shared_ptr<OpEvaluator> op_;
};

// v ~σ V at the configured fuel; v must come from ctx.den().
LiftVerdict logrel_val(const Ty& sigma, const SemVal& v, const Term& big_v, LogRel& ctx);

// A refines B: both closed of one type; ⟦A⟧ R̄ eval(B) at that type.
LiftVerdict refine(const Term& a, const Term& b, const LogrelConfig& cfg);

// leqlim_upto(probterm_seq(eval M), probterm_seq(eval N)) for closed Unit terms.
bool refine_probterm(const Term& m, const Term& n, unsigned n_depth, unsigned m_depth, const Rat& eps);

}  // namespace probfpc
