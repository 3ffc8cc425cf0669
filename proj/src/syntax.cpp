#include "probfpc/syntax.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <set>
#include <vector>

#include "probfpc/corpus.hpp"

namespace probfpc {

namespace {

enum class Tok {
  Ident,
  Number,
  LParen,
  RParen,
  LBrack,
  RBrack,
  Comma,
  Semi,
  Colon,
  Equals,
  FatArrow,
  Arrow,
  Star,
  Times,
  Plus,
  Dot,
  Bar,
  Mu,
  Lambda,
  End
};

struct Token {
  Tok kind;
  std::string text;
  Loc loc;
};

const std::set<std::string, std::less<>> kKeywords = {
    "fun", "let", "in",   "case", "of",     "inl",  "inr",   "ifz",  "if",   "then", "else", "suc",  "pred",
    "fst", "snd", "fold", "unfold", "choice", "true", "false", "type", "def", "mu",   "Unit", "Nat",  "Bool", "Y"};

class Lexer {
 public:
  explicit Lexer(std::string_view s) : s_(s) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip();
      Loc at{line_, col_};
      if (pos_ >= s_.size()) {
        out.push_back({Tok::End, "", at});
        return out;
      }
      out.push_back(next(at));
    }
  }

 private:
  void advance(std::size_t n = 1) {
    for (std::size_t i = 0; i < n && pos_ < s_.size(); ++i) {
      const auto c = static_cast<unsigned char>(s_[pos_++]);
      if (c == '\n') {
        ++line_;
        col_ = 1;
      } else if ((c & 0xC0U) != 0x80U) {
        ++col_;
      }
    }
  }

  bool starts(std::string_view p) const { return s_.substr(pos_, p.size()) == p; }

  void skip() {
    for (;;) {
      while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) advance();
      if (starts("--")) {
        while (pos_ < s_.size() && s_[pos_] != '\n') advance();
        continue;
      }
      return;
    }
  }

  static bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
  static bool ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
  }
  bool digit_at(std::size_t i) const {
    return i < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i]));
  }

  Token next(Loc at) {
    struct Sym {
      std::string_view text;
      Tok kind;
    };
    static const Sym syms[] = {{"=>", Tok::FatArrow}, {"⇒", Tok::FatArrow}, {"->", Tok::Arrow}, {"→", Tok::Arrow},
                               {"×", Tok::Times},     {"μ", Tok::Mu},       {"λ", Tok::Lambda}, {"⋆", Tok::Star},
                               {"(", Tok::LParen},    {")", Tok::RParen},   {"[", Tok::LBrack}, {"]", Tok::RBrack},
                               {",", Tok::Comma},     {";", Tok::Semi},     {":", Tok::Colon},  {"=", Tok::Equals},
                               {"*", Tok::Star},      {"+", Tok::Plus},     {".", Tok::Dot},    {"|", Tok::Bar}};
    const char c = s_[pos_];
    if (ident_start(c)) {
      const std::size_t start = pos_;
      while (pos_ < s_.size() && ident_char(s_[pos_])) advance();
      return {Tok::Ident, std::string(s_.substr(start, pos_ - start)), at};
    }
    if (digit_at(pos_)) {
      const std::size_t start = pos_;
      while (digit_at(pos_)) advance();
      if (pos_ < s_.size() && (s_[pos_] == '/' || s_[pos_] == '.') && digit_at(pos_ + 1)) {
        advance();
        while (digit_at(pos_)) advance();
      }
      return {Tok::Number, std::string(s_.substr(start, pos_ - start)), at};
    }
    for (const auto& sym : syms) {
      if (starts(sym.text)) {
        advance(sym.text.size());
        return {sym.kind, std::string(sym.text), at};
      }
    }
    throw ParseError(at, "unexpected character '" + std::string(1, c) + "'");
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  unsigned line_ = 1;
  unsigned col_ = 1;
};

struct ScopeEntry {
  std::string name;
  // 0: the bound variable itself; 1: fst of it; 2: snd of it.
  int proj = 0;
  unsigned level = 0;
};

class Parser {
 public:
  Parser(std::string_view text, const Program* prelude) : toks_(Lexer(text).run()) {
    if (prelude) {
      prog_.types = prelude->types;
      prog_.defs = prelude->defs;
    }
  }

  Program program() {
    for (;;) {
      if (is_ident("type")) {
        const Loc at = take().loc;
        auto name = expect_ident("type name");
        if (kKeywords.contains(name)) throw ParseError(at, "'" + name + "' cannot name a type");
        expect(Tok::Equals, "'='");
        prog_.types[name] = type();
        expect(Tok::Semi, "';'");
      } else if (is_ident("def")) {
        const Loc at = take().loc;
        auto name = expect_ident("definition name");
        if (kKeywords.contains(name)) throw ParseError(at, "'" + name + "' cannot name a definition");
        expect(Tok::Equals, "'='");
        prog_.defs[name] = term();
        expect(Tok::Semi, "';'");
      } else {
        break;
      }
    }
    if (peek().kind == Tok::End) throw ParseError(peek().loc, "expected a term, found end of input");
    prog_.main = term();
    expect_end();
    return std::move(prog_);
  }

  Term lone_term() {
    if (peek().kind == Tok::End) throw ParseError(peek().loc, "expected a term, found end of input");
    auto t = term();
    expect_end();
    return t;
  }

  Ty lone_type() {
    auto t = type();
    expect_end();
    return t;
  }

 private:
  // -- tokens ---------------------------------------------------------------

  const Token& peek(std::size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  const Token& take() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
  bool is(Tok k) const { return peek().kind == k; }
  bool is_ident(std::string_view w) const { return peek().kind == Tok::Ident && peek().text == w; }

  static std::string describe(const Token& t) {
    if (t.kind == Tok::End) return "end of input";
    return "'" + t.text + "'";
  }

  const Token& expect(Tok k, const std::string& what) {
    if (!is(k)) throw ParseError(peek().loc, "expected " + what + ", found " + describe(peek()));
    return take();
  }
  void expect_word(std::string_view w) {
    if (!is_ident(w)) throw ParseError(peek().loc, "expected '" + std::string(w) + "', found " + describe(peek()));
    take();
  }
  std::string expect_ident(const std::string& what) {
    if (!is(Tok::Ident)) throw ParseError(peek().loc, "expected " + what + ", found " + describe(peek()));
    return take().text;
  }
  void expect_end() {
    if (!is(Tok::End)) throw ParseError(peek().loc, "unexpected " + describe(peek()) + " after the end of the term");
  }

  // -- types ----------------------------------------------------------------

  Ty type() {
    auto a = sum_type();
    if (is(Tok::Arrow)) {
      take();
      return Ty::fn(a, type());
    }
    return a;
  }

  Ty sum_type() {
    auto a = prod_type();
    while (is(Tok::Plus)) {
      take();
      a = Ty::sum(a, prod_type());
    }
    return a;
  }

  Ty prod_type() {
    auto a = atom_type();
    while (is(Tok::Star) || is(Tok::Times)) {
      take();
      a = Ty::prod(a, atom_type());
    }
    return a;
  }

  Ty atom_type() {
    const Token& t = peek();
    if (t.kind == Tok::LParen) {
      take();
      auto ty = type();
      expect(Tok::RParen, "')'");
      return ty;
    }
    if (t.kind == Tok::Number && t.text == "1") {
      take();
      return Ty::unit();
    }
    if (t.kind == Tok::Mu || (t.kind == Tok::Ident && t.text == "mu")) {
      take();
      const Loc at = peek().loc;
      auto name = expect_ident("type variable");
      if (kKeywords.contains(name)) throw ParseError(at, "'" + name + "' cannot be a type variable");
      expect(Tok::Dot, "'.'");
      tyvars_.push_back(name);
      Ty body;
      try {
        body = type();
      } catch (...) {
        tyvars_.pop_back();
        throw;
      }
      tyvars_.pop_back();
      return Ty::mu(body, name);
    }
    if (t.kind == Tok::Ident) {
      take();
      if (t.text == "Unit") return Ty::unit();
      if (t.text == "Nat") return Ty::nat();
      if (t.text == "Bool") return Ty::boolean();
      for (std::size_t i = tyvars_.size(); i-- > 0;)
        if (tyvars_[i] == t.text) return Ty::var(static_cast<unsigned>(tyvars_.size() - 1 - i), t.text);
      if (auto it = prog_.types.find(t.text); it != prog_.types.end()) return it->second;
      throw ParseError(t.loc, "unknown type '" + t.text + "'");
    }
    throw ParseError(t.loc, "expected a type, found " + describe(t));
  }

  Ty annotation() {
    expect(Tok::LBrack, "'[' and a type annotation");
    auto ty = type();
    expect(Tok::RBrack, "']'");
    return ty;
  }

  // -- terms ----------------------------------------------------------------

  unsigned depth() const { return depth_; }

  void bind(const std::string& name) {
    scope_.push_back({name, 0, depth_});
    ++depth_;
  }
  void bind_pair(const std::string& a, const std::string& b) {
    scope_.push_back({"", 0, depth_});
    scope_.push_back({a, 1, depth_});
    scope_.push_back({b, 2, depth_});
    ++depth_;
  }
  void unbind(std::size_t entries) {
    scope_.resize(scope_.size() - entries);
    --depth_;
  }

  template <class F>
  Term under(std::size_t entries, F&& f) {
    try {
      auto t = f();
      unbind(entries);
      return t;
    } catch (...) {
      unbind(entries);
      throw;
    }
  }

  std::string binder_name() {
    const Loc at = peek().loc;
    auto name = expect_ident("a variable name");
    if (kKeywords.contains(name)) throw ParseError(at, "'" + name + "' is a keyword");
    return name;
  }

  Term term() {
    const Token& t = peek();
    if (t.kind == Tok::Lambda || (t.kind == Tok::Ident && t.text == "fun")) return fun_term();
    if (t.kind == Tok::Ident) {
      if (t.text == "let") return let_term();
      if (t.text == "case") return case_term();
      if (t.text == "ifz") return ifz_term();
      if (t.text == "if") return if_term();
    }
    return app_term();
  }

  Term fun_term() {
    const Loc at = take().loc;
    struct Binder {
      std::string name;
      Ty ty;
      Loc loc;
    };
    std::vector<Binder> bs;
    while (is(Tok::LParen)) {
      const Loc bl = take().loc;
      auto name = binder_name();
      expect(Tok::Colon, "':'");
      auto ty = type();
      expect(Tok::RParen, "')'");
      bs.push_back({name, ty, bl});
    }
    if (bs.empty()) throw ParseError(peek().loc, "expected a binder '(x : T)' after 'fun'");
    expect(Tok::FatArrow, "'=>'");
    for (const auto& b : bs) bind(b.name);
    Term body;
    try {
      body = term();
    } catch (...) {
      for (std::size_t i = 0; i < bs.size(); ++i) unbind(1);
      throw;
    }
    for (std::size_t i = bs.size(); i-- > 0;) {
      unbind(1);
      body = Term::lam(bs[i].name, bs[i].ty, body, i == 0 ? at : bs[i].loc);
    }
    return body;
  }

  Term let_term() {
    const Loc at = take().loc;
    auto name = binder_name();
    expect(Tok::Equals, "'='");
    auto m = term();
    expect_word("in");
    bind(name);
    auto n = under(1, [&] { return term(); });
    return Term::let(name, m, n, at);
  }

  struct Pattern {
    std::string a;
    std::string b;
    bool pair = false;
  };

  Pattern pattern() {
    if (is(Tok::LParen)) {
      take();
      Pattern p;
      p.pair = true;
      p.a = binder_name();
      expect(Tok::Comma, "','");
      p.b = binder_name();
      expect(Tok::RParen, "')'");
      return p;
    }
    return {binder_name(), "", false};
  }

  Term branch(const Pattern& p) {
    if (p.pair) {
      bind_pair(p.a, p.b);
      return under(3, [&] { return term(); });
    }
    bind(p.a);
    return under(1, [&] { return term(); });
  }

  static std::string pattern_hint(const Pattern& p) { return p.pair ? p.a + "_" + p.b : p.a; }

  Term case_term() {
    const Loc at = take().loc;
    Ty ann;
    if (is(Tok::LBrack)) ann = annotation();
    auto l = term();
    expect_word("of");
    if (is(Tok::Bar)) take();
    expect_word("inl");
    auto pl = pattern();
    expect(Tok::FatArrow, "'=>'");
    auto m = branch(pl);
    expect(Tok::Bar, "'|'");
    expect_word("inr");
    auto pr = pattern();
    expect(Tok::FatArrow, "'=>'");
    auto n = branch(pr);
    return Term::kase(l, pattern_hint(pl), m, pattern_hint(pr), n, ann, at);
  }

  Term ifz_term() {
    const Loc at = take().loc;
    auto l = term();
    expect_word("then");
    auto m = term();
    expect_word("else");
    auto n = term();
    return Term::ifz(l, m, n, at);
  }

  Term if_term() {
    const Loc at = take().loc;
    auto l = term();
    expect_word("then");
    auto m = with_dummy([&] { return term(); });
    expect_word("else");
    auto n = with_dummy([&] { return term(); });
    return Term::kase(l, "_", m, "_", n, Ty::boolean(), at);
  }

  template <class F>
  Term with_dummy(F&& f) {
    bind("_");
    return under(1, std::forward<F>(f));
  }

  bool starts_operand() const {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::Star:
      case Tok::Number:
      case Tok::LParen:
        return true;
      case Tok::Ident:
        return !(t.text == "in" || t.text == "of" || t.text == "then" || t.text == "else" || t.text == "fun" ||
                 t.text == "let" || t.text == "case" || t.text == "ifz" || t.text == "if" || t.text == "type" ||
                 t.text == "def");
      default:
        return false;
    }
  }

  Term app_term() {
    if (!starts_operand()) throw ParseError(peek().loc, "expected a term, found " + describe(peek()));
    const Loc at = peek().loc;
    auto f = operand();
    while (starts_operand()) f = Term::app(f, operand(), at);
    return f;
  }

  Prob probability() {
    const Token& t = peek();
    if (t.kind != Tok::Number) throw ParseError(t.loc, "expected a choice weight, found " + describe(t));
    take();
    Rat r = Rat::parse(t.text);
    if (!Prob::valid(r)) throw ParseError(t.loc, "choice weight " + r.str() + " outside (0,1)");
    return Prob(r);
  }

  Term operand() {
    const Token& t = peek();
    if (t.kind == Tok::Ident) {
      const std::string& w = t.text;
      if (w == "suc" || w == "pred" || w == "fst" || w == "snd" || w == "unfold") {
        const Loc at = take().loc;
        auto m = operand();
        if (w == "suc") return Term::suc(m, at);
        if (w == "pred") return Term::pred(m, at);
        if (w == "fst") return Term::fst(m, at);
        if (w == "snd") return Term::snd(m, at);
        return Term::unfold(m, at);
      }
      if (w == "inl" || w == "inr" || w == "fold") {
        const Loc at = take().loc;
        auto ty = annotation();
        auto m = operand();
        if (w == "inl") return Term::inl(ty, m, at);
        if (w == "inr") return Term::inr(ty, m, at);
        return Term::fold(ty, m, at);
      }
      if (w == "choice") {
        const Loc at = take().loc;
        auto p = probability();
        auto m = operand();
        auto n = operand();
        return Term::choice(p, m, n, at);
      }
    }
    return atom();
  }

  Term atom() {
    const Token t = peek();
    switch (t.kind) {
      case Tok::Star:
        take();
        return Term::star(t.loc);
      case Tok::Number: {
        take();
        if (!std::all_of(t.text.begin(), t.text.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
          throw ParseError(t.loc, "numeral expected, found '" + t.text + "'");
        if (t.text.size() > 18) throw ParseError(t.loc, "numeral too large");
        return Term::num(std::stoull(t.text), t.loc);
      }
      case Tok::LParen: {
        take();
        auto m = term();
        if (is(Tok::Comma)) {
          take();
          auto n = term();
          expect(Tok::RParen, "')'");
          return Term::pair(m, n, t.loc);
        }
        expect(Tok::RParen, "')'");
        return m;
      }
      case Tok::Ident: {
        take();
        if (t.text == "true") return Term::inl(Ty::boolean(), Term::star(t.loc), t.loc);
        if (t.text == "false") return Term::inr(Ty::boolean(), Term::star(t.loc), t.loc);
        if (t.text == "Y") {
          expect(Tok::LBrack, "'['");
          auto s = type();
          expect(Tok::Comma, "','");
          auto u = type();
          expect(Tok::RBrack, "']'");
          return y_comb(s, u);
        }
        if (kKeywords.contains(t.text)) throw ParseError(t.loc, "unexpected keyword '" + t.text + "'");
        return resolve(t);
      }
      default:
        throw ParseError(t.loc, "expected a term, found " + describe(t));
    }
  }

  Term resolve(const Token& t) {
    for (std::size_t i = scope_.size(); i-- > 0;) {
      const auto& e = scope_[i];
      if (e.name != t.text || e.name == "_") continue;
      const unsigned index = depth_ - 1 - e.level;
      std::string hint = e.name;
      if (e.proj == 0) return Term::var(index, hint, t.loc);
      // Projection aliases name the components of the bound pair.
      auto q = Term::var(index, "", t.loc);
      return e.proj == 1 ? Term::fst(q, t.loc) : Term::snd(q, t.loc);
    }
    if (auto it = prog_.defs.find(t.text); it != prog_.defs.end()) {
      if (!is_closed(it->second)) throw ParseError(t.loc, "definition '" + t.text + "' is not closed");
      return it->second;
    }
    throw ParseError(t.loc, "unbound variable '" + t.text + "'");
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  Program prog_;
  std::vector<std::string> tyvars_;
  std::vector<ScopeEntry> scope_;
  unsigned depth_ = 0;
};

// -- pretty printing --------------------------------------------------------

bool occurs(const Term& t, unsigned index) {
  const auto& n = t.node();
  if (n.free_bound <= index) return false;
  switch (n.kind) {
    case TermKind::Var:
      return n.n == index;
    case TermKind::Case:
      return occurs(n.kids[0], index) || occurs(n.kids[1], index + 1) || occurs(n.kids[2], index + 1);
    case TermKind::Lam:
      return occurs(n.kids[0], index + 1);
    case TermKind::Let:
      return occurs(n.kids[0], index) || occurs(n.kids[1], index + 1);
    default:
      return std::any_of(n.kids.begin(), n.kids.end(), [&](const Term& k) { return occurs(k, index); });
  }
}

bool is_bool_literal(const Term& t, TermKind k) {
  return t.kind() == k && t.node().ty == Ty::boolean() && t.kid(0).kind() == TermKind::Star;
}

class Printer {
 public:
  std::string print(const Term& t) { return term(t); }

 private:
  static bool binder_level(const Term& t) {
    switch (t.kind()) {
      case TermKind::Lam:
      case TermKind::Let:
      case TermKind::Case:
      case TermKind::Ifz:
        return true;
      default:
        return false;
    }
  }

  static bool atomic(const Term& t) {
    switch (t.kind()) {
      case TermKind::Var:
      case TermKind::Star:
      case TermKind::Num:
      case TermKind::Pair:
        return true;
      case TermKind::Inl:
        return is_bool_literal(t, TermKind::Inl);
      case TermKind::Inr:
        return is_bool_literal(t, TermKind::Inr);
      default:
        return false;
    }
  }

  std::string fresh(const std::string& hint) {
    std::string base;
    for (char c : hint)
      if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'') base += c;
    if (base.empty() || !(std::isalpha(static_cast<unsigned char>(base[0])) || base[0] == '_') || base == "_")
      base = "x";
    std::string name = base;
    for (unsigned i = 1; kKeywords.contains(name) || std::find(names_.begin(), names_.end(), name) != names_.end();
         ++i)
      name = base + std::to_string(i);
    return name;
  }

  // Prints the body with a new binder in scope; returns {binder name, body}.
  std::pair<std::string, std::string> binder(const std::string& hint, const Term& body, bool nonfinal) {
    std::string name = occurs(body, 0) ? fresh(hint) : "_";
    names_.push_back(name);
    auto s = nonfinal ? wrap_binder(body) : term(body);
    names_.pop_back();
    return {name, s};
  }

  std::string wrap_binder(const Term& t) { return binder_level(t) ? "(" + term(t) + ")" : term(t); }
  std::string arg(const Term& t) { return atomic(t) ? term(t) : "(" + term(t) + ")"; }

  std::string term(const Term& t) {
    const auto& n = t.node();
    switch (n.kind) {
      case TermKind::Var:
        if (n.n < names_.size()) return names_[names_.size() - 1 - n.n];
        return "#" + std::to_string(n.n);
      case TermKind::Star:
        return "*";
      case TermKind::Num:
        return std::to_string(n.n);
      case TermKind::Suc:
        return "suc " + arg(n.kids[0]);
      case TermKind::Pred:
        return "pred " + arg(n.kids[0]);
      case TermKind::Fst:
        return "fst " + arg(n.kids[0]);
      case TermKind::Snd:
        return "snd " + arg(n.kids[0]);
      case TermKind::Unfold:
        return "unfold " + arg(n.kids[0]);
      case TermKind::Pair:
        return "(" + term(n.kids[0]) + ", " + term(n.kids[1]) + ")";
      case TermKind::Inl:
        if (is_bool_literal(t, TermKind::Inl)) return "true";
        return "inl[" + ty_str(n.ty) + "] " + arg(n.kids[0]);
      case TermKind::Inr:
        if (is_bool_literal(t, TermKind::Inr)) return "false";
        return "inr[" + ty_str(n.ty) + "] " + arg(n.kids[0]);
      case TermKind::Fold:
        return "fold[" + ty_str(n.ty) + "] " + arg(n.kids[0]);
      case TermKind::Choice:
        return "choice " + n.p->str() + " " + arg(n.kids[0]) + " " + arg(n.kids[1]);
      case TermKind::App: {
        const auto& f = n.kids[0];
        auto fs = f.kind() == TermKind::App || atomic(f) ? term(f) : "(" + term(f) + ")";
        return fs + " " + arg(n.kids[1]);
      }
      case TermKind::Ifz:
        return "ifz " + wrap_binder(n.kids[0]) + " then " + wrap_binder(n.kids[1]) + " else " + term(n.kids[2]);
      case TermKind::Lam: {
        auto [x, body] = binder(n.hint, n.kids[0], false);
        return "fun (" + x + " : " + ty_str(n.ty) + ") => " + body;
      }
      case TermKind::Let: {
        auto m = wrap_binder(n.kids[0]);
        auto [x, body] = binder(n.hint, n.kids[1], false);
        return "let " + x + " = " + m + " in " + body;
      }
      case TermKind::Case: {
        std::string s = "case";
        if (n.ty) s += "[" + ty_str(n.ty) + "]";
        s += " " + wrap_binder(n.kids[0]) + " of inl ";
        auto [x, m] = binder(n.hint, n.kids[1], true);
        s += x + " => " + m + " | inr ";
        auto [y, b] = binder(n.hint2, n.kids[2], false);
        return s + y + " => " + b;
      }
    }
    return "?";
  }

  std::vector<std::string> names_;
};

}  // namespace

Program parse_program(std::string_view text, const Program* prelude) { return Parser(text, prelude).program(); }

Term parse_term(std::string_view text, const Program* prelude) { return Parser(text, prelude).lone_term(); }

Ty parse_type(std::string_view text, const Program* prelude) { return Parser(text, prelude).lone_type(); }

std::string pretty(const Term& t) { return Printer().print(t); }

}  // namespace probfpc
