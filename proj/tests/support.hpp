#pragma once

// Generators, closed-form oracles and the randomised property suites shared by
// the unit tests and the acceptance binary.

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "probfpc/delay.hpp"
#include "probfpc/dist.hpp"
#include "probfpc/rational.hpp"
#include "probfpc/relate.hpp"
#include "probfpc/witness.hpp"

namespace probfpc::testing {

constexpr std::uint64_t kSeed = 20240917;

using Rng = std::mt19937_64;

inline std::size_t pick(Rng& rng, std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); }

inline Prob random_prob(Rng& rng) {
  static const Prob ps[] = {Prob(1, 4), Prob(1, 3), Prob(1, 2), Prob(2, 3)};
  return ps[pick(rng, 4)];
}

// Weights with denominators up to `den`.
inline Rat random_weight(Rng& rng, long den) {
  const long d = static_cast<long>(1 + pick(rng, static_cast<std::size_t>(den)));
  const long n = static_cast<long>(1 + pick(rng, static_cast<std::size_t>(d)));
  return Rat(n, d);
}

inline Dist<int> random_dist(Rng& rng, int alphabet = 4, std::size_t max_support = 3) {
  const std::size_t k = 1 + pick(rng, max_support);
  Dist<int> d = dirac(static_cast<int>(pick(rng, alphabet)));
  for (std::size_t i = 1; i < k; ++i) d = choice(random_prob(rng), dirac(static_cast<int>(pick(rng, alphabet))), d);
  return d;
}

// Finite delay trees: depth ≤ 5, branching ≤ 3, four leaf values, weights
// from {1/4, 1/3, 1/2, 2/3}.
inline Delay<int> random_delay(Rng& rng, unsigned depth = 5) {
  const std::size_t k = 1 + pick(rng, 3);
  auto entry = [&]() -> Delay<int> {
    if (depth == 0 || pick(rng, 2) == 0) return now<int>(static_cast<int>(pick(rng, 4)));
    return step(Thunk<int>::ready(random_delay(rng, depth - 1)));
  };
  Delay<int> d = entry();
  for (std::size_t i = 1; i < k; ++i) d = dchoice(random_prob(rng), entry(), d);
  return d;
}

// d with extra steps inserted in front of randomly chosen entries.
inline Delay<int> pad_steps(Rng& rng, const Delay<int>& d) {
  using E = Delay<int>::Entry;
  WeightedList<E> out;
  for (const auto& [w, e] : d.node().support()) {
    Delay<int> inner = e.is_left() ? now<int>(e.left_value())
                                   : step(Thunk<int>::ready(pad_steps(rng, e.right_value().force())));
    if (pick(rng, 2) == 0) inner = step(Thunk<int>::ready(inner));
    if (inner.node().size() == 1) {
      out.emplace_back(w, inner.node().support().front().second);
    } else {
      out.emplace_back(w, E::right(Thunk<int>::ready(inner)));
    }
  }
  return Delay<int>(Dist<E>::from_weights(std::move(out)));
}

// A random witness that applies to ν.
inline RedWitness random_witness(Rng& rng, const Delay<int>& nu, unsigned depth = 4) {
  if (depth == 0 || pick(rng, 4) == 0) return RedWitness::refl();
  if (auto t = nu.as_step()) {
    auto w = RedWitness::step_elim();
    if (pick(rng, 2) == 0) return w;
    return RedWitness::seq(w, random_witness(rng, t->force(), depth - 1));
  }
  if (nu.node().size() < 2) return RedWitness::refl();
  const Prob p(nu.node().support().front().first);
  auto [l, r] = split_prefix(nu.node(), p);
  return RedWitness::choice(p, random_witness(rng, Delay<int>(l), depth - 1),
                            random_witness(rng, Delay<int>(r), depth - 1));
}

// ---------------------------------------------------------------------------
// Closed-form oracles

// 1 − (1−p)^(n+1)
inline Rat geo_oracle(const Prob& p, unsigned n) { return Rat(1) - pow(p.complement_value(), n + 1); }

// Rounds completed after n runs for a loop whose first value appears after
// `first` steps and which repeats every `period` steps.
inline unsigned rounds(unsigned n, unsigned first, unsigned period) { return n < first ? 0 : 1 + (n - first) / period; }

// 1 − (1−s)^k: mass after k independent rounds each succeeding with s.
inline Rat rounds_oracle(const Rat& s, unsigned k) { return Rat(1) - pow(Rat(1) - s, k); }

// Maximum matched mass by the min-cut formula: min over S ⊆ left of
// μ(left ∖ S) + ν(N(S)). Exponential in |left|; for small instances only.
inline Rat min_cut_oracle(const std::vector<Rat>& left, const std::vector<Rat>& right,
                          const std::vector<std::vector<bool>>& adj) {
  Rat best(-1);
  for (std::size_t mask = 0; mask < (std::size_t{1} << left.size()); ++mask) {
    Rat cut(0);
    std::vector<bool> nb(right.size(), false);
    for (std::size_t i = 0; i < left.size(); ++i) {
      if (mask & (std::size_t{1} << i)) {
        for (std::size_t j = 0; j < right.size(); ++j)
          if (adj[i][j]) nb[j] = true;
      } else {
        cut += left[i];
      }
    }
    for (std::size_t j = 0; j < right.size(); ++j)
      if (nb[j]) cut += right[j];
    if (best.sign() < 0 || cut < best) best = cut;
  }
  return best;
}

// ---------------------------------------------------------------------------
// Property suites

struct SuiteResult {
  std::string name;
  unsigned cases = 0;
  unsigned failures = 0;
  std::string first_failure;

  void fail(const std::string& what) {
    if (failures++ == 0) first_failure = what;
  }
  [[nodiscard]] bool ok() const { return failures == 0 && cases > 0; }
};

inline Dist<int> random_kernel_value(Rng& rng, std::vector<Dist<int>>& table, int a) {
  while (table.size() <= static_cast<std::size_t>(a)) table.push_back(random_dist(rng));
  return table[static_cast<std::size_t>(a)];
}

inline SuiteResult convex_and_monad_laws(unsigned n, std::uint64_t seed = kSeed) {
  SuiteResult r{"convex-algebra and monad laws"};
  Rng rng(seed);
  for (unsigned i = 0; i < n; ++i, ++r.cases) {
    const auto mu = random_dist(rng);
    const auto nu = random_dist(rng);
    const auto rho = random_dist(rng);
    const Prob p = random_prob(rng);
    const Prob q = random_prob(rng);
    if (!dist_eq(choice(p, mu, mu), mu)) r.fail("idempotency at case " + std::to_string(i));
    if (!dist_eq(choice(p, mu, nu), choice(complement(p), nu, mu))) r.fail("commutativity at case " + std::to_string(i));
    const Prob pq(p.value() * q.value());
    if (!dist_eq(choice(p, choice(q, mu, nu), rho), choice(pq, mu, choice(assoc_coeff(q, p), nu, rho))))
      r.fail("associativity at case " + std::to_string(i));
    std::vector<Dist<int>> tf;
    std::vector<Dist<int>> tg;
    auto f = [&](const int& a) { return random_kernel_value(rng, tf, a); };
    auto g = [&](const int& a) { return random_kernel_value(rng, tg, a); };
    for (int a = 0; a < 4; ++a) {
      f(a);
      g(a);
    }
    const int a = static_cast<int>(pick(rng, 4));
    if (!dist_eq(dist_bind(dirac(a), f), f(a))) r.fail("left unit at case " + std::to_string(i));
    if (!dist_eq(dist_bind(mu, [](const int& x) { return dirac(x); }), mu)) r.fail("right unit at case " + std::to_string(i));
    auto lhs = dist_bind(dist_bind(mu, f), g);
    auto rhs = dist_bind(mu, [&](const int& x) { return dist_bind(f(x), g); });
    if (!dist_eq(lhs, rhs)) r.fail("bind associativity at case " + std::to_string(i));
    auto h1 = [](const int& x) { return (x * 3 + 1) % 5; };
    auto h2 = [](const int& x) { return x / 2; };
    if (!dist_eq(dist_map(mu, [&](const int& x) { return h2(h1(x)); }), dist_map(dist_map(mu, h1), h2)))
      r.fail("functoriality at case " + std::to_string(i));
    if (!dist_eq(dist_bind(choice(p, mu, nu), f), choice(p, dist_bind(mu, f), dist_bind(nu, f))))
      r.fail("bind is a convex homomorphism at case " + std::to_string(i));
  }
  return r;
}

inline SuiteResult probterm_monotonicity(unsigned n, std::uint64_t seed = kSeed + 1) {
  SuiteResult r{"probterm and reduction monotonicity"};
  Rng rng(seed);
  for (unsigned i = 0; i < n; ++i, ++r.cases) {
    const auto d = random_delay(rng);
    auto s = probterm_seq(d, 16);
    for (unsigned k = 0; k < 16; ++k)
      if (s.at(k) > s.at(k + 1)) r.fail("probterm decreases at case " + std::to_string(i));
    const auto w = random_witness(rng, d);
    const auto reduct = check_witness(w, d);
    for (unsigned k = 0; k <= 8; ++k)
      if (probterm(k, d) > probterm(k, reduct))
        r.fail("reduction lowers probterm at case " + std::to_string(i) + " witness " + print_witness(w));
  }
  return r;
}

inline SuiteResult confluence_rejoin(unsigned n, std::uint64_t seed = kSeed + 2) {
  SuiteResult r{"confluence rejoin at depth 8"};
  Rng rng(seed);
  auto values_of = [](const Delay<int>& d) { return value_part(d, 8); };
  for (unsigned i = 0; i < n; ++i, ++r.cases) {
    const auto d = random_delay(rng);
    const auto a = check_witness(random_witness(rng, d), d);
    const auto b = check_witness(random_witness(rng, d), d);
    auto va = values_of(a);
    auto vb = values_of(b);
    if (!va.mass.value().is_one() || !vb.mass.value().is_one()) {
      r.fail("run⁸ left steps behind at case " + std::to_string(i));
      continue;
    }
    if (!dist_eq(Dist<int>::from_weights(va.values), Dist<int>::from_weights(vb.values)))
      r.fail("reducts do not rejoin at case " + std::to_string(i));
  }
  return r;
}

inline SuiteResult coupling_oracle(unsigned n, std::uint64_t seed = kSeed + 3) {
  SuiteResult r{"coupling agrees with the min-cut oracle"};
  Rng rng(seed);
  for (unsigned i = 0; i < n; ++i, ++r.cases) {
    const std::size_t nl = 1 + pick(rng, 3);
    const std::size_t nr = 1 + pick(rng, 3);
    // μ: a distribution with denominators ≤ 6; ν: a sub-distribution.
    std::vector<Rat> left(nl);
    std::vector<Rat> right(nr);
    Rat rest(1);
    for (std::size_t k = 0; k + 1 < nl; ++k) {
      left[k] = min(rest, random_weight(rng, 6)) * Rat(1, 2);
      rest -= left[k];
    }
    left[nl - 1] = rest;
    Rat budget(1);
    for (std::size_t k = 0; k < nr; ++k) {
      right[k] = min(budget, random_weight(rng, 6));
      budget -= right[k];
    }
    std::vector<std::vector<bool>> adj(nl, std::vector<bool>(nr));
    for (auto& row : adj)
      for (std::size_t j = 0; j < nr; ++j) row[j] = pick(rng, 2) == 0;
    WeightedList<int> mu;
    WeightedList<int> nu;
    for (std::size_t k = 0; k < nl; ++k) mu.emplace_back(left[k], static_cast<int>(k));
    for (std::size_t k = 0; k < nr; ++k)
      if (right[k].sign() > 0) nu.emplace_back(right[k], static_cast<int>(k));
    Rel<int, int> rel = [&](const int& a, const int& b) { return static_cast<bool>(adj[a][b]); };
    auto c = best_coupling(mu, nu, rel);
    const Rat expect = min_cut_oracle(left, right, adj);
    if (c.flow != expect) r.fail("case " + std::to_string(i) + ": flow " + c.flow.str() + " vs " + expect.str());
    // The witness itself: edges in R, marginals within μ and ν, total = flow.
    std::vector<Rat> lm(nl);
    std::vector<Rat> rm(nr);
    Rat total(0);
    for (const auto& pr : c.pairs) {
      if (!adj[pr.a][pr.b]) r.fail("coupling uses a pair outside R at case " + std::to_string(i));
      lm[pr.a] += pr.w;
      rm[pr.b] += pr.w;
      total += pr.w;
    }
    for (std::size_t k = 0; k < nl; ++k)
      if (lm[k] > left[k]) r.fail("left marginal exceeded at case " + std::to_string(i));
    for (std::size_t k = 0; k < nr; ++k)
      if (rm[k] > right[k]) r.fail("right marginal exceeded at case " + std::to_string(i));
    if (total != c.flow) r.fail("coupling mass differs from flow at case " + std::to_string(i));
  }
  return r;
}

// lift_check of d against e where e is d with steps inserted.
inline LiftConfig desk_lift(unsigned fuel) {
  LiftConfig c;
  c.fuel = fuel;
  c.horizon = 16;
  c.eps = Rat(0);
  c.use_limit = false;
  return c;
}

inline SuiteResult bind_lemma(unsigned n, std::uint64_t seed = kSeed + 4) {
  SuiteResult r{"bind lemma instances"};
  Rng rng(seed);
  Rel<int, int> parity = [](const int& a, const int& b) { return a % 2 == b % 2; };
  Rel<int, int> eq = [](const int& a, const int& b) { return a == b; };
  for (unsigned i = 0; i < n; ++i, ++r.cases) {
    const auto mu = random_dist(rng);
    // ν moves every value within its parity class, so μ and ν couple under R.
    const auto nu = dist_map(mu, [](const int& a) { return (a + 2) % 4; });
    const Delay<int> dm(dist_map(mu, [](const int& a) { return Delay<int>::Entry::left(a); }));
    const Delay<int> dn(dist_map(nu, [](const int& a) { return Delay<int>::Entry::left(a); }));
    const Delay<int> f_even = random_delay(rng, 3);
    const Delay<int> f_odd = random_delay(rng, 3);
    const Delay<int> g_even = pad_steps(rng, f_even);
    const Delay<int> g_odd = pad_steps(rng, f_odd);
    const auto cfg = desk_lift(3);
    const bool premise = lift_check(dm, dn, parity, cfg).holds && lift_check(f_even, g_even, eq, cfg).holds &&
                         lift_check(f_odd, g_odd, eq, cfg).holds;
    if (!premise) {
      r.fail("premise failed at case " + std::to_string(i));
      continue;
    }
    auto lhs = delay_bind(dm, [&](const int& a) { return a % 2 == 0 ? f_even : f_odd; });
    auto rhs = delay_bind(dn, [&](const int& b) { return b % 2 == 0 ? g_even : g_odd; });
    auto v = lift_check(lhs, rhs, eq, cfg);
    if (!v.holds) r.fail("bind conclusion Unknown at case " + std::to_string(i) + ": " + v.reason);
  }
  return r;
}

inline SuiteResult choice_lemma(unsigned n, std::uint64_t seed = kSeed + 5) {
  SuiteResult r{"choice lemma instances"};
  Rng rng(seed);
  Rel<int, int> eq = [](const int& a, const int& b) { return a == b; };
  for (unsigned i = 0; i < n; ++i, ++r.cases) {
    const auto d1 = random_delay(rng, 3);
    const auto d2 = random_delay(rng, 3);
    const auto e1 = pad_steps(rng, d1);
    const auto e2 = pad_steps(rng, d2);
    const Prob p = random_prob(rng);
    const auto cfg = desk_lift(4);
    if (!lift_check(d1, e1, eq, cfg).holds || !lift_check(d2, e2, eq, cfg).holds) {
      r.fail("premise failed at case " + std::to_string(i));
      continue;
    }
    auto v = lift_check(dchoice(p, d1, d2), dchoice(p, e1, e2), eq, cfg);
    if (!v.holds) r.fail("choice conclusion Unknown at case " + std::to_string(i) + ": " + v.reason);
  }
  return r;
}

}  // namespace probfpc::testing
