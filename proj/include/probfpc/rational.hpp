#pragma once

// Exact rational arithmetic and the two probability subtypes used everywhere:
// Prob (open interval (0,1)) and UProb (closed interval [0,1]).

#include <compare>
#include <cstdint>
#include <functional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>

#include <gmpxx.h>

namespace probfpc {

class Rat {
 public:
  Rat() = default;
  Rat(long n) : q_(n) {}  // NOLINT(google-explicit-constructor)
  Rat(long num, long den);
  explicit Rat(const mpq_class& q) : q_(q) { q_.canonicalize(); }

  // Accepts "p/q", integers, and decimal literals ("0.25" is exactly 1/4).
  static Rat parse(std::string_view text);

  [[nodiscard]] const mpq_class& raw() const { return q_; }
  [[nodiscard]] std::string num_str() const { return q_.get_num().get_str(); }
  [[nodiscard]] std::string den_str() const { return q_.get_den().get_str(); }
  // "num/den", or just "num" when the denominator is 1.
  [[nodiscard]] std::string str() const { return q_.get_str(); }
  [[nodiscard]] double to_double() const { return q_.get_d(); }
  [[nodiscard]] int sign() const { return sgn(q_); }
  [[nodiscard]] bool is_zero() const { return sign() == 0; }
  [[nodiscard]] bool is_one() const { return q_ == 1; }
  [[nodiscard]] std::size_t hash() const;

  friend Rat operator+(const Rat& a, const Rat& b) { return Rat(mpq_class(a.q_ + b.q_)); }
  friend Rat operator-(const Rat& a, const Rat& b) { return Rat(mpq_class(a.q_ - b.q_)); }
  friend Rat operator*(const Rat& a, const Rat& b) { return Rat(mpq_class(a.q_ * b.q_)); }
  friend Rat operator/(const Rat& a, const Rat& b);
  Rat operator-() const { return Rat(mpq_class(-q_)); }
  Rat& operator+=(const Rat& o) { q_ += o.q_; return *this; }
  Rat& operator-=(const Rat& o) { q_ -= o.q_; return *this; }
  Rat& operator*=(const Rat& o) { q_ *= o.q_; return *this; }

  friend bool operator==(const Rat& a, const Rat& b) { return a.q_ == b.q_; }
  friend std::strong_ordering operator<=>(const Rat& a, const Rat& b) {
    int c = cmp(a.q_, b.q_);
    return c < 0 ? std::strong_ordering::less
                 : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
  }

  friend std::ostream& operator<<(std::ostream& os, const Rat& r) { return os << r.str(); }

 private:
  mpq_class q_{0};
};

Rat pow(const Rat& base, unsigned exp);
Rat min(const Rat& a, const Rat& b);
Rat max(const Rat& a, const Rat& b);
// 2^-k
Rat pow2_neg(unsigned k);

// A probability strictly between 0 and 1.
class Prob {
 public:
  explicit Prob(Rat v);
  Prob(long num, long den) : Prob(Rat(num, den)) {}
  static Prob parse(std::string_view text) { return Prob(Rat::parse(text)); }
  static bool valid(const Rat& v) { return v.sign() > 0 && v < Rat(1); }

  [[nodiscard]] const Rat& value() const { return v_; }
  [[nodiscard]] Rat complement_value() const { return Rat(1) - v_; }
  [[nodiscard]] std::string str() const { return v_.str(); }

  friend bool operator==(const Prob&, const Prob&) = default;
  friend auto operator<=>(const Prob& a, const Prob& b) { return a.v_ <=> b.v_; }

 private:
  Rat v_;
};

// A probability in [0,1].
class UProb {
 public:
  UProb() = default;
  explicit UProb(Rat v);
  UProb(const Prob& p) : v_(p.value()) {}  // NOLINT(google-explicit-constructor)
  static UProb zero() { return UProb(); }
  static UProb one() { return UProb(Rat(1)); }
  static bool valid(const Rat& v) { return v.sign() >= 0 && v <= Rat(1); }

  [[nodiscard]] const Rat& value() const { return v_; }
  [[nodiscard]] std::string str() const { return v_.str(); }

  friend bool operator==(const UProb&, const UProb&) = default;
  friend auto operator<=>(const UProb& a, const UProb& b) { return a.v_ <=> b.v_; }

 private:
  Rat v_{0};
};

// 1 - p
Prob complement(const Prob& p);
// (q - pq) / (1 - pq): the inner weight in the convex-algebra associativity law.
Prob assoc_coeff(const Prob& p, const Prob& q);
// p*x + (1-p)*y
UProb convex_combine(const Prob& p, const UProb& x, const UProb& y);

std::ostream& operator<<(std::ostream& os, const Prob& p);
std::ostream& operator<<(std::ostream& os, const UProb& p);

}  // namespace probfpc

template <>
struct std::hash<probfpc::Rat> {
  std::size_t operator()(const probfpc::Rat& r) const { return r.hash(); }
};
