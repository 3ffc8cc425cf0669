// One line per acceptance criterion: verdict, measured time against its
// budget, and the pinned tolerance. Exits non-zero when any criterion fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>

#include "probfpc/corpus.hpp"
#include "probfpc/densem.hpp"
#include "probfpc/opsem.hpp"
#include "probfpc/relate.hpp"
#include "support.hpp"

using namespace probfpc;
using namespace probfpc::testing;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      detail = what;
    }
  }
};

unsigned failed = 0;

void criterion(int id, const std::string& title, const std::string& tolerance, double budget,
               const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o.ok = false;
    o.detail = std::string("exception: ") + e.what();
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = secs < budget;
  const bool pass = o.ok && in_time;
  if (!pass) ++failed;
  std::ostringstream line;
  line << (pass ? "PASS" : "FAIL") << "  " << id << ". " << title << " [" << tolerance << "; " << secs << " s of "
       << budget << " s]";
  if (!in_time) line << " over time budget";
  if (!o.detail.empty()) line << ": " << o.detail;
  std::printf("%s\n", line.str().c_str());
  std::fflush(stdout);
}

Delay<Term> steps(unsigned k, Delay<Term> d) {
  for (unsigned i = 0; i < k; ++i) d = step(Thunk<Term>::ready(d));
  return d;
}

template <class T>
Dist<T> three_point_lhs(const Prob& p, T a, T b, T c) {
  return choice(p, choice(p, dirac(a), dirac(b)), choice(p, dirac(c), dirac(a)));
}

template <class T>
Dist<T> three_point_rhs(const Prob& p, T a, T b, T c) {
  const Prob two_pq(Rat(2) * p.value() * p.complement_value());
  return choice(two_pq, choice(Prob(1, 2), dirac(b), dirac(c)), dirac(a));
}

LogrelConfig logrel(unsigned fuel, unsigned horizon, Rat eps) {
  LogrelConfig c;
  c.lift.fuel = fuel;
  c.lift.horizon = horizon;
  c.lift.eps = std::move(eps);
  return c;
}

}  // namespace

int main() {
  std::printf("acceptance, seed %llu\n", static_cast<unsigned long long>(kSeed));

  criterion(1, "geometric process", "exact", 1.0, [] {
    Outcome o;
    for (const Prob& p : {Prob(1, 3), Prob(1, 2), Prob(2, 3)}) {
      const Rat two_p_minus_sq = Rat(2) * p.value() - p.value() * p.value();
      o.require(probterm(1, geo(p, 0)).value() == two_p_minus_sq, "probterm(1) ≠ 2p − p² at p = " + p.str());
      auto s = probterm_seq(geo(p, 0), 10);
      for (unsigned n = 0; n <= 10; ++n)
        o.require(s.at(n).value() == geo_oracle(p, n),
                  "probterm(" + std::to_string(n) + ") ≠ 1 − (1−p)^(n+1) at p = " + p.str());
    }
    return o;
  });

  criterion(2, "three-point convex identity", "exact", 1.0, [] {
    Outcome o;
    const Prob half(1, 2);
    auto lhs = three_point_lhs(half, 0, 1, 2);
    auto rhs = three_point_rhs(half, 0, 1, 2);
    const auto expected = Dist<int>::from_weights({{Rat(1, 2), 0}, {Rat(1, 4), 1}, {Rat(1, 4), 2}});
    o.require(dist_eq(lhs, rhs) && dist_eq(lhs, expected), "Fin(3) instance: " + lhs.str() + " vs " + rhs.str());
    Rng rng(kSeed);
    for (int i = 0; i < 200; ++i) {
      const std::string names[] = {"a", "b", "c", "d", "e"};
      const std::string h[] = {names[pick(rng, 5)], names[pick(rng, 5)], names[pick(rng, 5)]};
      auto carrier = [&](const int& k) { return h[k]; };
      const Prob p = random_prob(rng);
      auto l = three_point_lhs(p, 0, 1, 2);
      auto r = three_point_rhs(p, 0, 1, 2);
      o.require(dist_eq(l, r), "Fin(3) instance at p = " + p.str());
      o.require(dist_eq(dist_map(l, carrier), dist_map(r, carrier)), "mapped instance at case " + std::to_string(i));
      o.require(dist_eq(dist_map(l, carrier), three_point_lhs(p, h[0], h[1], h[2])),
                "functoriality at case " + std::to_string(i));
    }
    return o;
  });

  criterion(3, "sum decomposition round-trips on 500 distributions", "exact", 5.0, [] {
    Outcome o;
    using E = Either<int, int>;
    using D = SumDecomp<int, int>;
    Rng rng(kSeed + 3);
    for (int i = 0; i < 500; ++i) {
      Dist<E> mu = dirac(pick(rng, 2) ? E::left(static_cast<int>(pick(rng, 3))) : E::right(static_cast<int>(pick(rng, 3))));
      const std::size_t k = pick(rng, 4);
      for (std::size_t j = 0; j < k; ++j) {
        auto e = pick(rng, 2) ? E::left(static_cast<int>(pick(rng, 3))) : E::right(static_cast<int>(pick(rng, 3)));
        mu = choice(random_prob(rng), dirac(e), mu);
      }
      auto d = decompose_sum(mu);
      o.require(dist_eq(recompose(d), mu), "recompose ∘ decompose at case " + std::to_string(i));
      auto d2 = decompose_sum(recompose(d));
      bool same = d.parts.index() == d2.parts.index();
      if (same) {
        if (auto* a = std::get_if<D::LeftOnly>(&d.parts)) same = dist_eq(a->left, std::get<D::LeftOnly>(d2.parts).left);
        if (auto* a = std::get_if<D::RightOnly>(&d.parts)) same = dist_eq(a->right, std::get<D::RightOnly>(d2.parts).right);
        if (auto* a = std::get_if<D::Mixed>(&d.parts)) {
          const auto& b = std::get<D::Mixed>(d2.parts);
          same = dist_eq(a->left, b.left) && a->p == b.p && dist_eq(a->right, b.right);
        }
      }
      o.require(same, "decompose ∘ recompose at case " + std::to_string(i));
    }
    return o;
  });

  criterion(4, "fixpoint combinator takes four steps", "exact prefix equality, depth 8", 1.0, [] {
    Outcome o;
    struct Case {
      std::string phi;
      Ty sigma;
      Ty tau;
      Term v;
    };
    const Case cases[] = {{"id_hes_helper(1/2,Nat)", Ty::nat(), Ty::nat(), Term::num(0)},
                          {"fair_helper(1/3)", Ty::unit(), Ty::boolean(), Term::star()}};
    for (const auto& c : cases) {
      auto ev = OpEvaluator::create();
      const Term phi = corpus(c.phi);
      const Term y = y_comb(c.sigma, c.tau);
      auto lhs = ev->eval(Term::app(Term::app(y, phi), c.v));
      auto rhs = steps(4, ev->eval(Term::app(Term::app(phi, Term::app(y, phi)), c.v)));
      PrefixRenderer<Term> r([](const Term& t) { return pretty(t); });
      o.require(r.render(lhs, 8) == r.render(rhs, 8), "φ = " + c.phi);
    }
    return o;
  });

  criterion(5, "soundness of the step-faithful semantics", "exact structural equality, K = 12", 10.0, [] {
    Outcome o;
    unsigned n = 0;
    for (const auto& [name, m] : first_order_programs()) {
      o.require(soundness_check(m, 12), name);
      ++n;
    }
    if (o.ok) o.detail = std::to_string(n) + " programs";
    return o;
  });

  criterion(6, "operational and denotational termination agree", "N = M = 64, ε = 2⁻¹⁰", 30.0, [] {
    Outcome o;
    unsigned n = 0;
    for (const auto& [name, m] : unit_programs()) {
      auto a = eval_probterm(m, 64);
      auto b = den_probterm(m, 64, StepMode::Standard);
      o.require(eqlim_upto(a, b, 64, 64, pow2_neg(10)), name);
      ++n;
    }
    if (o.ok) o.detail = std::to_string(n) + " programs";
    return o;
  });

  criterion(7, "fair coin from a biased coin", "(a) exact, depth ≤ 48; (b) |mass(48) − 1| ≤ 2⁻¹⁰", 10.0, [] {
    Outcome o;
    std::ostringstream info;
    for (const Prob& p : {Prob(1, 3), Prob(1, 4)}) {
      auto c = eval(Term::app(corpus("fair_from(" + p.str() + ")"), Term::star()));
      const Ty b = Ty::boolean();
      const Term t = Term::inl(b, Term::star());
      const Rat s = Rat(2) * p.value() * p.complement_value();
      Delay<Term> cur = c.delay;
      Rat mass48;
      for (unsigned n = 0; n <= 48; ++n) {
        auto vp = value_part_of_node(cur);
        Rat tm(0);
        Rat fm(0);
        for (const auto& [w, v] : vp.values) (v == t ? tm : fm) += w;
        o.require(tm == fm, "(a) asymmetric at p = " + p.str() + ", depth " + std::to_string(n));
        o.require(vp.mass.value() == rounds_oracle(s, rounds(n, 14, 13)),
                  "mass differs from the round oracle at p = " + p.str() + ", depth " + std::to_string(n));
        if (n == 48) mass48 = vp.mass.value();
        if (n < 48) cur = run(cur);
      }
      const unsigned k = rounds(48, 14, 13);
      info << "p = " << p.str() << ": mass(48) = " << mass48 << " ≈ " << mass48.to_double() << " = 1 − (1−"
           << s << ")^" << k << " (" << k << " rounds of 13 steps after the first 14); ";
      o.require(Rat(1) - mass48 <= pow2_neg(10), "");
    }
    std::string d = info.str();
    d.resize(d.size() - 2);
    if (!o.ok && o.detail.empty()) o.detail = "(b) " + d;
    else if (!o.ok) o.detail += "; " + d;
    else o.detail = d;
    return o;
  });

  criterion(8, "hesitant identity refines the identity both ways", "fuel 6, horizon 16, ε = 2⁻⁸, probes 0..3", 10.0, [] {
    Outcome o;
    const auto cfg = logrel(6, 16, pow2_neg(8));
    const Term idh = corpus("id_hes(1/2,Nat)");
    const Term id = corpus_source("fun (x : Nat) => x");
    auto fwd = refine(idh, id, cfg);
    auto bwd = refine(id, idh, cfg);
    o.require(fwd.holds, "id_hes ≤ id: " + fwd.reason);
    o.require(bwd.holds, "id ≤ id_hes: " + bwd.reason);
    for (std::uint64_t k = 0; k <= 3; ++k) {
      const Term m = Term::app(idh, Term::num(k));
      auto op = eval_probterm(m, 24);
      auto den = den_probterm(m, 16, StepMode::Standard);
      for (unsigned n = 0; n <= 24; ++n)
        o.require(op.at(n).value() == rounds_oracle(Rat(1, 2), rounds(n, 8, 6)), "operational mass bound");
      for (unsigned n = 0; n <= 16; ++n)
        o.require(den.at(n).value() == rounds_oracle(Rat(1, 2), n), "denotational mass bound");
    }
    return o;
  });

  criterion(9, "random walks", "fuel 4; contexts k ≤ 3 at N = M = 64, ε = 2⁻⁸", 60.0, [] {
    Outcome o;
    const auto cfg = logrel(4, 64, pow2_neg(8));
    for (unsigned n : {1U, 2U}) {
      const std::string ns = std::to_string(2 * n);
      const Term es = corpus("everysnd_randw(" + ns + ")");
      const Term r2 = corpus("randw2(" + ns + ")");
      for (unsigned k = 0; k <= 3; ++k) {
        const std::string at = "n = " + std::to_string(n) + ", k = " + std::to_string(k);
        const Term a = head_after(es, k);
        const Term b = head_after(r2, k);
        auto fwd = refine(a, b, cfg);
        auto bwd = refine(b, a, cfg);
        o.require(fwd.holds, "lifting everysnd ≤ randw2 at " + at + ": " + fwd.reason);
        o.require(bwd.holds, "lifting randw2 ≤ everysnd at " + at + ": " + bwd.reason);
        auto sa = eval_probterm(observe_unit(a), 64);
        auto sb = eval_probterm(observe_unit(b), 64);
        o.require(eqlim_upto(sa, sb, 64, 64, pow2_neg(8)), "contexts at " + at);
      }
    }
    return o;
  });

  criterion(10, "property suites", "≥ 200 cases each, fixed seed", 60.0, [] {
    Outcome o;
    std::ostringstream info;
    for (const auto& r : {convex_and_monad_laws(300), probterm_monotonicity(250), confluence_rejoin(250),
                          coupling_oracle(400), bind_lemma(200), choice_lemma(200)}) {
      o.require(r.ok() && r.cases >= 200, r.name + ": " + r.first_failure);
      info << r.name << " " << r.cases << "; ";
    }
    if (o.ok) {
      o.detail = info.str();
      o.detail.resize(o.detail.size() - 2);
    }
    return o;
  });

  std::printf("%u of 10 criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
