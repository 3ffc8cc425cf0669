#include "probfpc/witness.hpp"

#include <cctype>

namespace probfpc {

std::string print_witness(const RedWitness& w) {
  switch (w.kind) {
    case RedWitness::Kind::Refl:
      return "R";
    case RedWitness::Kind::StepElim:
      return "S";
    case RedWitness::Kind::Seq:
      return "(" + print_witness(*w.first) + ";" + print_witness(*w.second) + ")";
    case RedWitness::Kind::ChoiceCong:
      return "C(" + w.p->str() + "," + print_witness(*w.first) + "," + print_witness(*w.second) + ")";
  }
  return "?";
}

namespace {

class WitnessParser {
 public:
  explicit WitnessParser(std::string_view s) : s_(s) {}

  RedWitness parse_all() {
    auto w = parse();
    skip_ws();
    if (pos_ != s_.size()) fail("trailing input");
    return w;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw std::invalid_argument("witness syntax error at offset " + std::to_string(pos_) + ": " + what);
  }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  void expect(char c) {
    skip_ws();
    if (pos_ >= s_.size() || s_[pos_] != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  RedWitness parse() {
    skip_ws();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    const char c = s_[pos_];
    if (c == 'R') {
      ++pos_;
      return RedWitness::refl();
    }
    if (c == 'S') {
      ++pos_;
      return RedWitness::step_elim();
    }
    if (c == '(') {
      ++pos_;
      auto a = parse();
      expect(';');
      auto b = parse();
      expect(')');
      return RedWitness::seq(std::move(a), std::move(b));
    }
    if (c == 'C') {
      ++pos_;
      expect('(');
      skip_ws();
      const std::size_t start = pos_;
      while (pos_ < s_.size() && s_[pos_] != ',') ++pos_;
      auto p = Prob::parse(s_.substr(start, pos_ - start));
      expect(',');
      auto a = parse();
      expect(',');
      auto b = parse();
      expect(')');
      return RedWitness::choice(p, std::move(a), std::move(b));
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace

RedWitness parse_witness(std::string_view text) { return WitnessParser(text).parse_all(); }

}  // namespace probfpc
