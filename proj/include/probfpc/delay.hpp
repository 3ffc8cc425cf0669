#pragma once

// The convex delay monad: a computation is a finite distribution over
// "a value now" and "a deferred computation". Deferred computations are
// memoised thunks, which realise both the guarded and the clock-quantified
// (coinductive) readings: the artifact can only ever observe finitely many
// unfoldings, and forcing is exactly one unfolding.

#include <algorithm>
#include <atomic>
#include <concepts>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "probfpc/dist.hpp"
#include "probfpc/rational.hpp"

namespace probfpc {

using Nat = std::uint64_t;

template <class A>
class Delay;

namespace detail {

inline std::uint64_t next_thunk_id() {
  static std::atomic<std::uint64_t> counter{1};
  return counter.fetch_add(1, std::memory_order_relaxed);
}

template <class A>
struct ThunkCell {
  explicit ThunkCell(std::function<Delay<A>()> p) : id(next_thunk_id()), producer(std::move(p)) {}

  const std::uint64_t id;
  std::recursive_mutex mu;
  std::function<Delay<A>()> producer;
  std::unique_ptr<Delay<A>> value;
  bool in_progress = false;
  bool released = false;
};

}  // namespace detail

class CyclicForceError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// A deferred computation. Forcing is memoised and idempotent.
template <class A>
class Thunk {
 public:
  explicit Thunk(std::function<Delay<A>()> producer)
      : cell_(std::make_shared<detail::ThunkCell<A>>(std::move(producer))) {}

  // A thunk whose content is already known.
  static Thunk ready(Delay<A> d);

  Delay<A> force() const;
  [[nodiscard]] std::uint64_t id() const { return cell_->id; }
  [[nodiscard]] bool forced() const {
    std::lock_guard lock(cell_->mu);
    return cell_->value != nullptr;
  }
  // Drops the memoised content and the producer, breaking reference cycles
  // between thunks. Forcing a released thunk throws.
  void release() const {
    std::unique_ptr<Delay<A>> old;
    std::function<Delay<A>()> old_producer;
    {
      std::lock_guard lock(cell_->mu);
      old = std::move(cell_->value);
      old_producer = std::move(cell_->producer);
      cell_->released = true;
    }
  }

 private:
  std::shared_ptr<detail::ThunkCell<A>> cell_;
};

template <class A>
struct Keying<Thunk<A>> {
  static bool keyed(const Thunk<A>&) { return false; }
  static std::strong_ordering compare(const Thunk<A>&, const Thunk<A>&) { return std::strong_ordering::equal; }
  static std::optional<std::uint64_t> identity(const Thunk<A>& t) { return t.id(); }
};

template <class A>
struct Render<Thunk<A>> {
  static std::string str(const Thunk<A>& t) { return "▷#" + std::to_string(t.id()); }
};

template <class A>
class Delay {
 public:
  using value_type = A;
  using Entry = Either<A, Thunk<A>>;
  using Node = Dist<Entry>;

  explicit Delay(Node n) : node_(std::move(n)) {}

  [[nodiscard]] const Node& node() const { return node_; }

  // A node that is a single deferred computation.
  [[nodiscard]] std::optional<Thunk<A>> as_step() const {
    if (node_.size() == 1 && node_.support().front().second.is_right())
      return node_.support().front().second.right_value();
    return std::nullopt;
  }
  [[nodiscard]] std::optional<A> as_now() const {
    if (node_.size() == 1 && node_.support().front().second.is_left())
      return node_.support().front().second.left_value();
    return std::nullopt;
  }

 private:
  Node node_;
};

template <class A>
Thunk<A> Thunk<A>::ready(Delay<A> d) {
  Thunk t([]() -> Delay<A> { throw std::logic_error("ready thunk has no producer"); });
  t.cell_->value = std::make_unique<Delay<A>>(std::move(d));
  return t;
}

template <class A>
Delay<A> Thunk<A>::force() const {
  std::lock_guard lock(cell_->mu);
  if (cell_->value) return *cell_->value;
  if (cell_->released) throw std::logic_error("thunk forced after its owner released it");
  if (cell_->in_progress) throw CyclicForceError("thunk forced while it was being forced");
  cell_->in_progress = true;
  try {
    auto d = cell_->producer();
    cell_->value = std::make_unique<Delay<A>>(std::move(d));
  } catch (...) {
    cell_->in_progress = false;
    throw;
  }
  cell_->in_progress = false;
  cell_->producer = nullptr;
  return *cell_->value;
}

// ---------------------------------------------------------------------------
// Convex delay algebra structure

template <class A>
Delay<A> now(A a) {
  return Delay<A>(dirac(Delay<A>::Entry::left(std::move(a))));
}

template <class A>
Delay<A> step(Thunk<A> t) {
  return Delay<A>(dirac(Delay<A>::Entry::right(std::move(t))));
}

template <class A, class F>
Delay<A> step_lazy(F&& f) {
  return step(Thunk<A>(std::function<Delay<A>()>(std::forward<F>(f))));
}

template <class A>
Delay<A> dchoice(const Prob& p, const Delay<A>& d, const Delay<A>& e) {
  return Delay<A>(choice(p, d.node(), e.node()));
}

// A continuation for delay_bind. `lift`, when present, supplies the thunk that
// stands for bind(force t, apply); evaluators that hash-cons computations use
// it so that equal computations share one thunk.
template <class A, class B>
struct Kont {
  std::function<Delay<B>(const A&)> apply;
  std::function<Thunk<B>(const Thunk<A>&)> lift;
};

template <class A, class B>
Delay<B> delay_bind(const Delay<A>& d, const Kont<A, B>& k) {
  using InE = typename Delay<A>::Entry;
  using OutE = typename Delay<B>::Entry;
  return Delay<B>(dist_bind(d.node(), [&](const InE& e) -> Dist<OutE> {
    if (e.is_left()) return k.apply(e.left_value()).node();
    const Thunk<A>& t = e.right_value();
    if (k.lift) return dirac(OutE::right(k.lift(t)));
    Kont<A, B> kc = k;
    return dirac(OutE::right(Thunk<B>([t, kc]() { return delay_bind(t.force(), kc); })));
  }));
}

template <class A, class F>
  requires std::invocable<F, const A&>
auto delay_bind(const Delay<A>& d, F&& f) {
  using B = typename std::remove_cvref_t<std::invoke_result_t<F, const A&>>::value_type;
  return delay_bind(d, Kont<A, B>{std::function<Delay<B>(const A&)>(std::forward<F>(f)), {}});
}

template <class A, class F>
auto delay_map(const Delay<A>& d, F&& f) {
  using B = std::remove_cvref_t<std::invoke_result_t<F, const A&>>;
  std::function<B(const A&)> g = std::forward<F>(f);
  return delay_bind(d, Kont<A, B>{[g](const A& a) { return now<B>(g(a)); }, {}});
}

// ζ: a distribution over deferred computations becomes one deferred
// computation. zeta(δ t) = t, and a proper mixture is deferred as a whole.
template <class A>
Thunk<A> zeta(const Dist<Thunk<A>>& m) {
  if (m.size() == 1) return m.support().front().second;
  return Thunk<A>([m]() {
    return Delay<A>(dist_bind(m, [](const Thunk<A>& t) { return t.force().node(); }));
  });
}

// ---------------------------------------------------------------------------
// Running and termination probabilities

// Eliminates one level of steps in every branch.
template <class A>
Delay<A> run(const Delay<A>& d) {
  using E = typename Delay<A>::Entry;
  return Delay<A>(dist_bind(d.node(), [](const E& e) -> Dist<E> {
    if (e.is_left()) return dirac(e);
    return e.right_value().force().node();
  }));
}

template <class A>
Delay<A> run_n(Delay<A> d, unsigned n) {
  for (unsigned i = 0; i < n; ++i) d = run(d);
  return d;
}

// Probability of immediate termination.
template <class A>
UProb probterm0(const Delay<A>& d) {
  return prob_of(d.node(), [](const auto& e) { return e.is_left(); });
}

template <class A>
UProb probterm(unsigned n, const Delay<A>& d) {
  return probterm0(run_n(d, n));
}

// probterm(0..N); `limit`, when known, is the exact supremum of the sequence.
struct TermSeq {
  std::vector<UProb> values;
  std::optional<UProb> limit;

  [[nodiscard]] unsigned horizon() const { return values.empty() ? 0 : static_cast<unsigned>(values.size() - 1); }
  [[nodiscard]] const UProb& at(unsigned n) const { return values.at(n); }
};

template <class A>
TermSeq probterm_seq(const Delay<A>& d, unsigned horizon) {
  TermSeq s;
  s.values.reserve(horizon + 1);
  Delay<A> cur = d;
  for (unsigned n = 0;; ++n) {
    s.values.push_back(probterm0(cur));
    if (n == horizon) break;
    cur = run(cur);
  }
  return s;
}

// The terminated fraction of run^n(d): total mass and the (unnormalised)
// weighted values.
template <class A>
struct ValuePart {
  UProb mass;
  WeightedList<A> values;
};

template <class A>
ValuePart<A> value_part_of_node(const Delay<A>& d) {
  WeightedList<A> vals;
  for (const auto& [w, e] : d.node().support())
    if (e.is_left()) vals.emplace_back(w, e.left_value());
  auto canon = canonicalize(std::move(vals));
  return ValuePart<A>{UProb(total_mass(canon)), std::move(canon)};
}

template <class A>
ValuePart<A> value_part(const Delay<A>& d, unsigned n) {
  return value_part_of_node(run_n(d, n));
}

// geo(p, n) = choice(p, now n, step(geo(p, n+1)))
inline Delay<Nat> geo(const Prob& p, Nat n) {
  return dchoice(p, now<Nat>(n), step_lazy<Nat>([p, n]() { return geo(p, n + 1); }));
}

// ---------------------------------------------------------------------------
// Exact limits over finite state graphs
//
// When the thunks reachable from a computation form a finite graph (thunk
// identity is the state), the limit of its value distribution is the
// absorption distribution of a finite Markov chain and can be computed
// exactly. This succeeds for evaluators that hash-cons computations; for
// computations that keep generating fresh thunks the exploration budget runs
// out and no limit is reported.

template <class A>
struct LimitPart {
  UProb mass;
  WeightedList<A> values;
  std::size_t states = 0;
};

namespace detail {

// Solves x = b + q x over the rationals for one strongly connected block.
// Every state in the block reaches absorption, so (I - q) is non-singular.
inline std::vector<std::vector<Rat>> solve_block(std::vector<std::vector<Rat>> q, std::vector<std::vector<Rat>> b) {
  const std::size_t n = q.size();
  const std::size_t cols = n == 0 ? 0 : b.front().size();
  std::vector<std::vector<Rat>> m(n, std::vector<Rat>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m[i][j] = (i == j ? Rat(1) : Rat(0)) - q[i][j];
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    while (piv < n && m[piv][c].is_zero()) ++piv;
    if (piv == n) throw std::logic_error("singular absorption system");
    std::swap(m[piv], m[c]);
    std::swap(b[piv], b[c]);
    const Rat inv = Rat(1) / m[c][c];
    for (std::size_t j = c; j < n; ++j) m[c][j] *= inv;
    for (std::size_t j = 0; j < cols; ++j) b[c][j] *= inv;
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c || m[r][c].is_zero()) continue;
      const Rat f = m[r][c];
      for (std::size_t j = c; j < n; ++j) m[r][j] -= f * m[c][j];
      for (std::size_t j = 0; j < cols; ++j) b[r][j] -= f * b[c][j];
    }
  }
  return b;
}

// Tarjan's algorithm; components come out in reverse topological order.
inline std::vector<std::vector<std::size_t>> strongly_connected(const std::vector<std::vector<std::size_t>>& succ) {
  const std::size_t n = succ.size();
  std::vector<std::size_t> index(n, SIZE_MAX), low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  std::vector<std::vector<std::size_t>> out;
  std::size_t counter = 0;
  struct Frame {
    std::size_t v;
    std::size_t next;
  };
  for (std::size_t root = 0; root < n; ++root) {
    if (index[root] != SIZE_MAX) continue;
    std::vector<Frame> work{{root, 0}};
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!work.empty()) {
      auto& f = work.back();
      if (f.next < succ[f.v].size()) {
        const std::size_t w = succ[f.v][f.next++];
        if (index[w] == SIZE_MAX) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = true;
          work.push_back({w, 0});
        } else if (on_stack[w]) {
          low[f.v] = std::min(low[f.v], index[w]);
        }
        continue;
      }
      const std::size_t v = f.v;
      work.pop_back();
      if (!work.empty()) low[work.back().v] = std::min(low[work.back().v], low[v]);
      if (low[v] == index[v]) {
        std::vector<std::size_t> comp;
        std::size_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          comp.push_back(w);
        } while (w != v);
        out.push_back(std::move(comp));
      }
    }
  }
  return out;
}

}  // namespace detail

template <class A>
std::optional<LimitPart<A>> analyze_limit(const Delay<A>& d, std::size_t state_budget = 20000) {
  using Node = typename Delay<A>::Node;
  std::vector<Thunk<A>> states;
  std::vector<Node> nodes;
  std::unordered_map<std::uint64_t, std::size_t> index;
  std::vector<A> value_keys;

  auto value_col = [&](const A& v) -> std::optional<std::size_t> {
    if (!Keying<A>::keyed(v)) return std::nullopt;
    auto it = std::lower_bound(value_keys.begin(), value_keys.end(), v,
                               [](const A& x, const A& y) { return Keying<A>::compare(x, y) < 0; });
    if (it != value_keys.end() && Keying<A>::compare(*it, v) == 0) return static_cast<std::size_t>(it - value_keys.begin());
    return std::nullopt;
  };
  std::vector<A> pending_values;
  auto visit_node = [&](const Node& node) -> bool {
    for (const auto& [w, e] : node.support()) {
      if (e.is_left()) {
        if (!Keying<A>::keyed(e.left_value())) return false;
        pending_values.push_back(e.left_value());
      } else if (!index.contains(e.right_value().id())) {
        index.emplace(e.right_value().id(), states.size());
        states.push_back(e.right_value());
      }
    }
    return true;
  };

  if (!visit_node(d.node())) return std::nullopt;
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (states.size() > state_budget) return std::nullopt;
    nodes.push_back(states[i].force().node());
    if (!visit_node(nodes.back())) return std::nullopt;
  }
  if (states.size() > state_budget) return std::nullopt;

  for (auto& v : pending_values) {
    auto it = std::lower_bound(value_keys.begin(), value_keys.end(), v,
                               [](const A& x, const A& y) { return Keying<A>::compare(x, y) < 0; });
    if (it == value_keys.end() || Keying<A>::compare(*it, v) != 0) value_keys.insert(it, v);
  }
  pending_values.clear();

  const std::size_t n = states.size();
  const std::size_t k = value_keys.size();
  std::vector<std::vector<std::size_t>> succ(n);
  for (std::size_t i = 0; i < n; ++i)
    for (const auto& [w, e] : nodes[i].support())
      if (e.is_right()) succ[i].push_back(index.at(e.right_value().id()));

  std::vector<std::vector<Rat>> x(n);
  std::vector<bool> solved(n, false);
  std::vector<std::size_t> comp_of(n, SIZE_MAX);
  auto comps = detail::strongly_connected(succ);
  for (std::size_t c = 0; c < comps.size(); ++c) {
    const auto& comp = comps[c];
    for (std::size_t r = 0; r < comp.size(); ++r) comp_of[comp[r]] = r;
    std::vector<std::vector<Rat>> q(comp.size(), std::vector<Rat>(comp.size()));
    std::vector<std::vector<Rat>> b(comp.size(), std::vector<Rat>(k));
    bool reaches_value = false;
    for (std::size_t r = 0; r < comp.size(); ++r) {
      for (const auto& [w, e] : nodes[comp[r]].support()) {
        if (e.is_left()) {
          b[r][*value_col(e.left_value())] += w;
          reaches_value = true;
        } else {
          const std::size_t j = index.at(e.right_value().id());
          if (solved[j]) {
            for (std::size_t col = 0; col < k; ++col) b[r][col] += w * x[j][col];
            reaches_value = reaches_value || std::any_of(x[j].begin(), x[j].end(), [](const Rat& v) { return !v.is_zero(); });
          } else {
            q[r][comp_of[j]] += w;
          }
        }
      }
    }
    std::vector<std::vector<Rat>> sol;
    if (reaches_value) {
      sol = detail::solve_block(std::move(q), std::move(b));
    } else {
      sol.assign(comp.size(), std::vector<Rat>(k));
    }
    for (std::size_t r = 0; r < comp.size(); ++r) {
      x[comp[r]] = std::move(sol[r]);
      solved[comp[r]] = true;
      comp_of[comp[r]] = SIZE_MAX;
    }
  }

  std::vector<Rat> root(k);
  for (const auto& [w, e] : d.node().support()) {
    if (e.is_left()) {
      root[*value_col(e.left_value())] += w;
    } else {
      const auto& xs = x[index.at(e.right_value().id())];
      for (std::size_t c = 0; c < k; ++c) root[c] += w * xs[c];
    }
  }
  WeightedList<A> vals;
  for (std::size_t c = 0; c < k; ++c)
    if (!root[c].is_zero()) vals.emplace_back(root[c], value_keys[c]);
  auto canon = canonicalize(std::move(vals));
  return LimitPart<A>{UProb(total_mass(canon)), std::move(canon), n};
}

template <class A>
std::optional<UProb> probterm_limit(const Delay<A>& d, std::size_t state_budget = 20000) {
  if (auto lp = analyze_limit(d, state_budget)) return lp->mass;
  return std::nullopt;
}

template <class A>
TermSeq with_limit(TermSeq s, const Delay<A>& d, std::size_t state_budget = 20000) {
  s.limit = probterm_limit(d, state_budget);
  return s;
}

// ---------------------------------------------------------------------------
// Limit comparison of monotone sequences

// ∀ n ≤ N ∃ m ≤ M: f(n) ≤ g(m) + ε. When g carries an exact limit, an m
// beyond the horizon is also accepted: f(n) < lim g + ε guarantees one exists.
inline bool leqlim_upto(const TermSeq& f, const TermSeq& g, unsigned n_max, unsigned m_max, const Rat& eps) {
  if (f.values.size() <= n_max || g.values.size() <= m_max)
    throw std::invalid_argument("leqlim_upto: sequence shorter than requested horizon");
  Rat best_g(0);
  for (unsigned m = 0; m <= m_max; ++m) best_g = max(best_g, g.at(m).value());
  for (unsigned n = 0; n <= n_max; ++n) {
    const Rat& fv = f.at(n).value();
    if (fv <= best_g + eps) continue;
    if (g.limit && fv < g.limit->value() + eps) continue;
    return false;
  }
  return true;
}

inline bool eqlim_upto(const TermSeq& f, const TermSeq& g, unsigned n_max, unsigned m_max, const Rat& eps) {
  return leqlim_upto(f, g, n_max, m_max, eps) && leqlim_upto(g, f, m_max, n_max, eps);
}

// Pointwise convex combination of two sequences of equal length.
inline TermSeq convex_seq(const Prob& p, const TermSeq& f, const TermSeq& g) {
  if (f.values.size() != g.values.size()) throw std::invalid_argument("convex_seq: length mismatch");
  TermSeq out;
  for (std::size_t i = 0; i < f.values.size(); ++i) out.values.push_back(convex_combine(p, f.values[i], g.values[i]));
  if (f.limit && g.limit) out.limit = convex_combine(p, *f.limit, *g.limit);
  return out;
}

// ---------------------------------------------------------------------------
// Approximate step reduction

// Least m ≤ horizon such that the values of run^m(ν) cover `target` up to a
// total shortfall of ε (matched greedily by key). nullopt does not refute ν ⇝≈ target.
template <class A>
std::optional<unsigned> embed_approx(const Delay<A>& nu, const WeightedList<A>& target, unsigned horizon,
                                     const Rat& eps) {
  if (total_mass(target) > Rat(1)) throw std::invalid_argument("embed_approx: target mass exceeds 1");
  Delay<A> cur = nu;
  for (unsigned m = 0;; ++m) {
    auto vp = value_part_of_node(cur);
    Rat shortfall(0);
    for (const auto& [w, a] : target) {
      Rat have(0);
      for (const auto& [w2, b] : vp.values)
        if (keyed_equal(a, b)) have += w2;
      if (have < w) shortfall += w - have;
    }
    if (shortfall <= eps) return m;
    if (m == horizon) return std::nullopt;
    cur = run(cur);
  }
}

// ---------------------------------------------------------------------------
// Structural comparison of finite prefixes

// Interns canonical node renderings so that shared subtrees are written once.
// Renderers that share one table produce comparable strings.
using PrefixTable = std::shared_ptr<std::unordered_map<std::string, std::uint64_t>>;

inline PrefixTable make_prefix_table() { return std::make_shared<std::unordered_map<std::string, std::uint64_t>>(); }

// Canonical rendering of d unfolded to `depth` levels of thunks: every node is
// a merged, sorted weighted multiset of leaves and (interned) sub-renderings;
// thunks past the depth become "…". Two computations have equal renderings iff
// their depth-bounded unfoldings are equal as iterated distributions.
template <class A>
class PrefixRenderer {
 public:
  explicit PrefixRenderer(std::function<std::string(const A&)> leaf, PrefixTable table = make_prefix_table())
      : leaf_(std::move(leaf)), table_(std::move(table)) {}

  std::string render(const Delay<A>& d, unsigned depth) { return render_node(d.node(), depth); }

 private:
  std::string render_node(const typename Delay<A>::Node& node, unsigned depth) {
    WeightedList<std::string> items;
    for (const auto& [w, e] : node.support()) {
      if (e.is_left()) {
        items.emplace_back(w, "v:" + leaf_(e.left_value()));
      } else if (depth == 0) {
        items.emplace_back(w, "▷…");
      } else {
        items.emplace_back(w, "▷#" + std::to_string(render_thunk(e.right_value(), depth - 1)));
      }
    }
    auto canon = canonicalize(std::move(items));
    std::string s = "{";
    for (std::size_t i = 0; i < canon.size(); ++i) {
      if (i) s += ",";
      s += canon[i].first.str() + "*" + canon[i].second;
    }
    return s + "}";
  }

  std::uint64_t render_thunk(const Thunk<A>& t, unsigned depth) {
    auto key = std::make_pair(t.id(), depth);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    auto s = render_node(t.force().node(), depth);
    auto it = table_->emplace(std::move(s), table_->size()).first;
    memo_.emplace(key, it->second);
    return it->second;
  }

  struct PairHash {
    std::size_t operator()(const std::pair<std::uint64_t, unsigned>& k) const {
      return std::hash<std::uint64_t>{}(k.first * 131 + k.second);
    }
  };

  std::function<std::string(const A&)> leaf_;
  PrefixTable table_;
  std::unordered_map<std::pair<std::uint64_t, unsigned>, std::uint64_t, PairHash> memo_;
};

template <class A>
bool prefix_equal(const Delay<A>& d, const Delay<A>& e, unsigned depth,
                  std::function<std::string(const A&)> leaf = [](const A& a) { return Render<A>::str(a); }) {
  PrefixRenderer<A> r(leaf);
  return r.render(d, depth) == r.render(e, depth);
}

}  // namespace probfpc
