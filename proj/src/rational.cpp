#include "probfpc/rational.hpp"

#include <cctype>

namespace probfpc {

Rat::Rat(long num, long den) {
  if (den == 0) throw std::domain_error("rational with zero denominator");
  q_ = mpq_class(num, den);
  q_.canonicalize();
}

Rat operator/(const Rat& a, const Rat& b) {
  if (b.is_zero()) throw std::domain_error("division of rational by zero");
  return Rat(mpq_class(a.q_ / b.q_));
}

namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  return true;
}

mpz_class parse_int(std::string_view s) {
  return mpz_class(std::string(s), 10);
}

}  // namespace

Rat Rat::parse(std::string_view text) {
  std::string_view s = text;
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  bool negative = false;
  if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }
  auto bad = [&] { return std::invalid_argument("malformed rational literal '" + std::string(text) + "'"); };
  mpq_class q;
  if (auto slash = s.find('/'); slash != std::string_view::npos) {
    auto n = s.substr(0, slash);
    auto d = s.substr(slash + 1);
    if (!all_digits(n) || !all_digits(d)) throw bad();
    mpz_class den = parse_int(d);
    if (den == 0) throw std::domain_error("rational literal with zero denominator");
    q = mpq_class(parse_int(n), den);
  } else if (auto dot = s.find('.'); dot != std::string_view::npos) {
    auto ip = s.substr(0, dot);
    auto fp = s.substr(dot + 1);
    if (ip.empty() && fp.empty()) throw bad();
    if ((!ip.empty() && !all_digits(ip)) || (!fp.empty() && !all_digits(fp))) throw bad();
    mpz_class scale = 1;
    for (std::size_t i = 0; i < fp.size(); ++i) scale *= 10;
    mpz_class whole = ip.empty() ? mpz_class(0) : parse_int(ip);
    mpz_class frac = fp.empty() ? mpz_class(0) : parse_int(fp);
    q = mpq_class(whole * scale + frac, scale);
  } else {
    if (!all_digits(s)) throw bad();
    q = mpq_class(parse_int(s));
  }
  q.canonicalize();
  if (negative) q = -q;
  return Rat(q);
}

std::size_t Rat::hash() const {
  // Both parts are canonical, so hashing the decimal form is consistent with ==.
  return std::hash<std::string>{}(q_.get_str());
}

Rat pow(const Rat& base, unsigned exp) {
  Rat acc(1);
  for (unsigned i = 0; i < exp; ++i) acc *= base;
  return acc;
}

Rat min(const Rat& a, const Rat& b) { return a <= b ? a : b; }
Rat max(const Rat& a, const Rat& b) { return a >= b ? a : b; }

Rat pow2_neg(unsigned k) {
  mpz_class den = 1;
  den <<= k;
  return Rat(mpq_class(mpz_class(1), den));
}

Prob::Prob(Rat v) : v_(std::move(v)) {
  if (!valid(v_)) throw std::domain_error("probability " + v_.str() + " outside the open interval (0,1)");
}

UProb::UProb(Rat v) : v_(std::move(v)) {
  if (!valid(v_)) throw std::domain_error("probability " + v_.str() + " outside the closed interval [0,1]");
}

Prob complement(const Prob& p) { return Prob(p.complement_value()); }

Prob assoc_coeff(const Prob& p, const Prob& q) {
  const Rat pq = p.value() * q.value();
  return Prob((q.value() - pq) / (Rat(1) - pq));
}

UProb convex_combine(const Prob& p, const UProb& x, const UProb& y) {
  return UProb(p.value() * x.value() + p.complement_value() * y.value());
}

std::ostream& operator<<(std::ostream& os, const Prob& p) { return os << p.value(); }
std::ostream& operator<<(std::ostream& os, const UProb& p) { return os << p.value(); }

}  // namespace probfpc
