#pragma once

// Finite distributions as the free convex algebra, stored in the classical
// weighted-support form.
//
// Elements that carry a canonical key (see Keying) are merged and sorted, so
// equality of distributions over keyed carriers is equality of canonical
// forms. Elements without a key (closures, thunks) are kept as a formal list
// in insertion order; two unkeyed entries are merged only when they are the
// very same object (Keying::identity), which is an instance of idempotency.

#include <algorithm>
#include <compare>
#include <concepts>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "probfpc/rational.hpp"

namespace probfpc {

// Customisation point describing how elements of a carrier are compared.
template <class T, class Enable = void>
struct Keying {
  static bool keyed(const T&) { return false; }
  static std::strong_ordering compare(const T&, const T&) { return std::strong_ordering::equal; }
  static std::optional<std::uint64_t> identity(const T&) { return std::nullopt; }
};

template <class T>
struct Keying<T, std::enable_if_t<std::is_arithmetic_v<T>>> {
  static bool keyed(const T&) { return true; }
  static std::strong_ordering compare(const T& a, const T& b) {
    return a < b ? std::strong_ordering::less
                 : (b < a ? std::strong_ordering::greater : std::strong_ordering::equal);
  }
  static std::optional<std::uint64_t> identity(const T&) { return std::nullopt; }
};

template <>
struct Keying<std::string> {
  static bool keyed(const std::string&) { return true; }
  static std::strong_ordering compare(const std::string& a, const std::string& b) { return a <=> b; }
  static std::optional<std::uint64_t> identity(const std::string&) { return std::nullopt; }
};

template <class A, class B>
struct Keying<std::pair<A, B>> {
  static bool keyed(const std::pair<A, B>& p) {
    return Keying<A>::keyed(p.first) && Keying<B>::keyed(p.second);
  }
  static std::strong_ordering compare(const std::pair<A, B>& x, const std::pair<A, B>& y) {
    if (auto c = Keying<A>::compare(x.first, y.first); c != 0) return c;
    return Keying<B>::compare(x.second, y.second);
  }
  static std::optional<std::uint64_t> identity(const std::pair<A, B>&) { return std::nullopt; }
};

template <class T>
bool keyed_equal(const T& a, const T& b) {
  return Keying<T>::keyed(a) && Keying<T>::keyed(b) && Keying<T>::compare(a, b) == 0;
}

// Human-readable rendering used for traces, tables and JSON.
template <class T, class Enable = void>
struct Render {
  static std::string str(const T&) { return "<opaque>"; }
};

template <class T>
struct Render<T, std::enable_if_t<std::is_arithmetic_v<T>>> {
  static std::string str(const T& v) {
    std::ostringstream os;
    os << v;
    return os.str();
  }
};

template <>
struct Render<std::string> {
  static std::string str(const std::string& v) { return v; }
};

template <class A, class B>
struct Render<std::pair<A, B>> {
  static std::string str(const std::pair<A, B>& p) {
    return "(" + Render<A>::str(p.first) + ", " + Render<B>::str(p.second) + ")";
  }
};

// Disjoint union that stays unambiguous when L and R are the same type.
template <class L, class R>
class Either {
 public:
  static Either left(L v) { return Either(std::in_place_index<0>, std::move(v)); }
  static Either right(R v) { return Either(std::in_place_index<1>, std::move(v)); }

  [[nodiscard]] bool is_left() const { return v_.index() == 0; }
  [[nodiscard]] bool is_right() const { return v_.index() == 1; }
  [[nodiscard]] const L& left_value() const { return std::get<0>(v_); }
  [[nodiscard]] const R& right_value() const { return std::get<1>(v_); }

 private:
  template <std::size_t I, class V>
  Either(std::in_place_index_t<I> tag, V&& v) : v_(tag, std::forward<V>(v)) {}
  std::variant<L, R> v_;
};

template <class L, class R>
struct Keying<Either<L, R>> {
  static bool keyed(const Either<L, R>& e) {
    return e.is_left() ? Keying<L>::keyed(e.left_value()) : Keying<R>::keyed(e.right_value());
  }
  static std::strong_ordering compare(const Either<L, R>& a, const Either<L, R>& b) {
    if (a.is_left() != b.is_left()) return a.is_left() ? std::strong_ordering::less : std::strong_ordering::greater;
    return a.is_left() ? Keying<L>::compare(a.left_value(), b.left_value())
                       : Keying<R>::compare(a.right_value(), b.right_value());
  }
  static std::optional<std::uint64_t> identity(const Either<L, R>& e) {
    auto id = e.is_left() ? Keying<L>::identity(e.left_value()) : Keying<R>::identity(e.right_value());
    if (!id) return std::nullopt;
    return (*id << 1U) | (e.is_left() ? 0U : 1U);
  }
};

template <class L, class R>
struct Render<Either<L, R>> {
  static std::string str(const Either<L, R>& e) {
    return e.is_left() ? "inl " + Render<L>::str(e.left_value()) : "inr " + Render<R>::str(e.right_value());
  }
};

template <class T>
using WeightedList = std::vector<std::pair<Rat, T>>;

// Canonical form of a weighted list: keyed entries merged and sorted, then
// unkeyed entries in insertion order with identical objects merged. Weights
// that are zero are dropped.
template <class T>
WeightedList<T> canonicalize(WeightedList<T> entries) {
  using K = Keying<T>;
  WeightedList<T> keyed;
  WeightedList<T> unkeyed;
  std::unordered_map<std::uint64_t, std::size_t> seen;
  for (auto& e : entries) {
    if (e.first.is_zero()) continue;
    if (e.first.sign() < 0) throw std::logic_error("negative weight in distribution");
    if (K::keyed(e.second)) {
      keyed.push_back(std::move(e));
    } else if (auto id = K::identity(e.second)) {
      if (auto it = seen.find(*id); it != seen.end()) {
        unkeyed[it->second].first += e.first;
      } else {
        seen.emplace(*id, unkeyed.size());
        unkeyed.push_back(std::move(e));
      }
    } else {
      unkeyed.push_back(std::move(e));
    }
  }
  std::stable_sort(keyed.begin(), keyed.end(),
                   [](const auto& a, const auto& b) { return K::compare(a.second, b.second) < 0; });
  WeightedList<T> out;
  out.reserve(keyed.size() + unkeyed.size());
  for (auto& e : keyed) {
    if (!out.empty() && K::compare(out.back().second, e.second) == 0) {
      out.back().first += e.first;
    } else {
      out.push_back(std::move(e));
    }
  }
  for (auto& e : unkeyed) out.push_back(std::move(e));
  return out;
}

template <class T>
Rat total_mass(const WeightedList<T>& entries) {
  Rat s(0);
  for (const auto& e : entries) s += e.first;
  return s;
}

// Thrown when an equality-sensitive operation meets an unkeyed carrier.
class UnkeyedCarrierError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

template <class T>
class Dist {
 public:
  using value_type = T;
  using Entry = std::pair<Rat, T>;

  // Validates positivity and normalisation, then canonicalises.
  static Dist from_weights(WeightedList<T> entries) {
    auto canon = canonicalize(std::move(entries));
    if (canon.empty()) throw std::invalid_argument("distribution with empty support");
    if (!total_mass(canon).is_one())
      throw std::invalid_argument("distribution weights sum to " + total_mass(canon).str() + ", not 1");
    return Dist(std::move(canon));
  }

  // Rescales a non-empty sub-distribution to total mass 1.
  static Dist normalized(WeightedList<T> entries) {
    auto canon = canonicalize(std::move(entries));
    if (canon.empty()) throw std::invalid_argument("cannot normalise an empty sub-distribution");
    const Rat m = total_mass(canon);
    for (auto& e : canon) e.first = e.first / m;
    return Dist(std::move(canon));
  }

  [[nodiscard]] const WeightedList<T>& support() const { return *entries_; }
  [[nodiscard]] std::size_t size() const { return entries_->size(); }

  [[nodiscard]] bool all_keyed() const {
    for (const auto& e : *entries_)
      if (!Keying<T>::keyed(e.second)) return false;
    return true;
  }

  // Weight of a keyed element (0 when absent).
  [[nodiscard]] Rat mass_of(const T& x) const {
    Rat m(0);
    for (const auto& e : *entries_)
      if (keyed_equal(e.second, x)) m += e.first;
    return m;
  }

  [[nodiscard]] std::string str() const {
    std::string s = "{";
    bool first = true;
    for (const auto& [w, v] : *entries_) {
      if (!first) s += ", ";
      first = false;
      s += Render<T>::str(v) + " ↦ " + w.str();
    }
    return s + "}";
  }

 private:
  explicit Dist(WeightedList<T> canon)
      : entries_(std::make_shared<const WeightedList<T>>(std::move(canon))) {}

  template <class U>
  friend Dist<U> dirac(U a);

  std::shared_ptr<const WeightedList<T>> entries_;
};

template <class T>
Dist<T> dirac(T a) {
  WeightedList<T> e;
  e.emplace_back(Rat(1), std::move(a));
  return Dist<T>(std::move(e));
}

// p·μ + (1-p)·ν
template <class T>
Dist<T> choice(const Prob& p, const Dist<T>& mu, const Dist<T>& nu) {
  WeightedList<T> out;
  out.reserve(mu.size() + nu.size());
  const Rat q = p.complement_value();
  for (const auto& [w, v] : mu.support()) out.emplace_back(p.value() * w, v);
  for (const auto& [w, v] : nu.support()) out.emplace_back(q * w, v);
  return Dist<T>::from_weights(std::move(out));
}

// Kleisli extension: the unique convex-algebra homomorphism extending f.
template <class T, class F>
auto dist_bind(const Dist<T>& mu, F&& f) {
  using V = typename std::remove_cvref_t<std::invoke_result_t<F, const T&>>::value_type;
  WeightedList<V> out;
  for (const auto& [w, a] : mu.support()) {
    const Dist<V> fa = f(a);
    for (const auto& [w2, b] : fa.support()) out.emplace_back(w * w2, b);
  }
  return Dist<V>::from_weights(std::move(out));
}

template <class T, class F>
auto dist_map(const Dist<T>& mu, F&& f) {
  using V = std::remove_cvref_t<std::invoke_result_t<F, const T&>>;
  WeightedList<V> out;
  out.reserve(mu.size());
  for (const auto& [w, a] : mu.support()) out.emplace_back(w, f(a));
  return Dist<V>::from_weights(std::move(out));
}

template <class T, class Pred>
UProb prob_of(const Dist<T>& mu, Pred&& pred) {
  Rat s(0);
  for (const auto& [w, a] : mu.support())
    if (pred(a)) s += w;
  return UProb(s);
}

// Equality of canonical forms; only defined when both carriers are keyed.
template <class T>
bool dist_eq(const Dist<T>& mu, const Dist<T>& nu) {
  if (!mu.all_keyed() || !nu.all_keyed())
    throw UnkeyedCarrierError("dist_eq requires a keyed carrier");
  if (mu.size() != nu.size()) return false;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const auto& a = mu.support()[i];
    const auto& b = nu.support()[i];
    if (a.first != b.first || Keying<T>::compare(a.second, b.second) != 0) return false;
  }
  return true;
}

// Splits μ as choice(p, μ1, μ2) by walking the support in order: μ1 takes the
// first p of the mass (the boundary entry is shared between both sides).
template <class T>
std::pair<Dist<T>, Dist<T>> split_prefix(const Dist<T>& mu, const Prob& p) {
  WeightedList<T> first;
  WeightedList<T> second;
  Rat remaining = p.value();
  for (const auto& [w, v] : mu.support()) {
    if (remaining.is_zero()) {
      second.emplace_back(w, v);
    } else if (w <= remaining) {
      first.emplace_back(w, v);
      remaining -= w;
    } else {
      first.emplace_back(remaining, v);
      second.emplace_back(w - remaining, v);
      remaining = Rat(0);
    }
  }
  return {Dist<T>::normalized(std::move(first)), Dist<T>::normalized(std::move(second))};
}

// The three summands of Dist(A) + Dist(B) + Dist(A)×(0,1)×Dist(B).
template <class A, class B>
struct SumDecomp {
  struct LeftOnly {
    Dist<A> left;
  };
  struct RightOnly {
    Dist<B> right;
  };
  struct Mixed {
    Dist<A> left;
    Prob p;  // total mass on the left component
    Dist<B> right;
  };
  std::variant<LeftOnly, RightOnly, Mixed> parts;
};

template <class A, class B>
SumDecomp<A, B> decompose_sum(const Dist<Either<A, B>>& mu) {
  WeightedList<A> ls;
  WeightedList<B> rs;
  Rat left_mass(0);
  for (const auto& [w, e] : mu.support()) {
    if (e.is_left()) {
      ls.emplace_back(w, e.left_value());
      left_mass += w;
    } else {
      rs.emplace_back(w, e.right_value());
    }
  }
  using D = SumDecomp<A, B>;
  if (rs.empty()) return D{typename D::LeftOnly{Dist<A>::from_weights(std::move(ls))}};
  if (ls.empty()) return D{typename D::RightOnly{Dist<B>::from_weights(std::move(rs))}};
  return D{typename D::Mixed{Dist<A>::normalized(std::move(ls)), Prob(left_mass),
                             Dist<B>::normalized(std::move(rs))}};
}

template <class A, class B>
Dist<Either<A, B>> recompose(const SumDecomp<A, B>& d) {
  using E = Either<A, B>;
  auto inl = [](const A& a) { return E::left(a); };
  auto inr = [](const B& b) { return E::right(b); };
  return std::visit(
      [&](const auto& part) -> Dist<E> {
        using P = std::decay_t<decltype(part)>;
        if constexpr (std::is_same_v<P, typename SumDecomp<A, B>::LeftOnly>) {
          return dist_map(part.left, inl);
        } else if constexpr (std::is_same_v<P, typename SumDecomp<A, B>::RightOnly>) {
          return dist_map(part.right, inr);
        } else {
          return choice(part.p, dist_map(part.left, inl), dist_map(part.right, inr));
        }
      },
      d.parts);
}

}  // namespace probfpc
