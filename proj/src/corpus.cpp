#include "probfpc/corpus.hpp"

#include <cctype>
#include <stdexcept>

namespace probfpc {

Term y_comb(const Ty& sigma, const Ty& tau) {
  const Ty st = Ty::fn(sigma, tau);
  const Ty rty = Ty::mu(Ty::fn(Ty::var(0, "X"), st), "X");
  // e_f, where f is the variable `fidx` binders outside e_f.
  auto e = [&](unsigned fidx) {
    auto inner = Term::lam("x", sigma, Term::app(Term::app(Term::var(1, "y'"), Term::var(2, "y")), Term::var(0, "x")));
    auto body = Term::app(Term::var(fidx + 2, "f"), inner);
    return Term::lam("y", rty, Term::let("y'", Term::unfold(Term::var(0, "y")), body));
  };
  auto self = Term::app(Term::app(e(1), Term::fold(rty, e(1))), Term::var(0, "z"));
  return Term::lam("f", Ty::fn(st, st), Term::lam("z", sigma, self));
}

namespace {

constexpr std::string_view kPrelude = R"(
type LazyL = mu X. Unit + Nat * (Unit -> X);
type LazyB = Unit + Nat * (Unit -> LazyL);
def nil = fold[LazyL] (inl[LazyB] *);
def head = fun (l : LazyL) => case unfold l of inl x => inr[Nat + Unit] * | inr (n, f) => inl[Nat + Unit] n;
def tail = fun (l : LazyL) => case unfold l of inl x => nil | inr (n, f) => f *;
def cons = fun (n : Nat) (f : Unit -> LazyL) => fold[LazyL] (inr[LazyB] (n, f));
def eqbool = fun (a : Bool) (b : Bool) => if a then (if b then true else false) else (if b then false else true);
def diverge = Y[Unit, Unit] (fun (f : Unit -> Unit) => f) *;
*
)";

Program load_prelude() { return parse_program(kPrelude); }

std::string geo_src(const Prob& p) {
  const auto q = p.str();
  return "type D = mu X. X -> Nat -> Nat;\n"
         "def w = fold[D] (fun (y : D) (n : Nat) => choice " + q + " n (unfold y y (suc n)));\n"
         "choice " + q + " 0 (unfold w w 1)";
}

std::string id_hes_helper_src(const Prob& p) {
  return "fun (f : S -> S) (x : S) => choice " + p.str() + " x (f x)";
}

std::string fair_helper_src(const Prob& p) {
  const auto q = p.str();
  return "fun (g : Unit -> Bool) (z : Unit) =>\n"
         "  let x = choice " + q + " true false in\n"
         "  let y = choice " + q + " true false in\n"
         "  if eqbool x y then g z else x";
}

constexpr std::string_view kEverySndHelper =
    "fun (g : LazyL -> LazyL) (l : LazyL) =>"
    " case unfold l of inl x => nil | inr (n, f) => cons n (fun (y : Unit) => g (tail (f *)))";

constexpr std::string_view kRandwHelper =
    "fun (g : Nat -> LazyL) (n : Nat) =>"
    " cons n (fun (y : Unit) => ifz n then nil else choice 1/2 (g (pred n)) (g (suc n)))";

constexpr std::string_view kRandw2Helper =
    "fun (g : Nat -> LazyL) (n : Nat) =>"
    " cons n (fun (y : Unit) => ifz n then nil else"
    " choice 1/2 (g n) (choice 1/2 (g (pred (pred n))) (g (suc (suc n)))))";

Term with_type(std::string_view src, const Ty& s) {
  Program pre = prelude();
  pre.types["S"] = s;
  auto t = parse_program(src, &pre).main;
  typecheck(t);
  return t;
}

struct Call {
  std::string head;
  std::vector<std::string> args;
};

Call parse_call(std::string_view name) {
  Call c;
  auto open = name.find('(');
  if (open == std::string_view::npos) {
    c.head = std::string(name);
    return c;
  }
  if (name.back() != ')') throw std::invalid_argument("malformed corpus name '" + std::string(name) + "'");
  c.head = std::string(name.substr(0, open));
  auto inner = name.substr(open + 1, name.size() - open - 2);
  // Arguments are split at top-level commas so that types may contain parentheses.
  int level = 0;
  std::string cur;
  for (char ch : inner) {
    if (ch == '(') ++level;
    if (ch == ')') --level;
    if (ch == ',' && level == 0) {
      c.args.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  c.args.push_back(cur);
  for (auto& a : c.args) {
    while (!a.empty() && std::isspace(static_cast<unsigned char>(a.front()))) a.erase(a.begin());
    while (!a.empty() && std::isspace(static_cast<unsigned char>(a.back()))) a.pop_back();
  }
  return c;
}

Prob prob_arg(const Call& c, std::size_t i, const char* fallback) {
  return Prob::parse(i < c.args.size() ? c.args[i] : fallback);
}

unsigned nat_arg(const Call& c, std::size_t i) {
  if (i >= c.args.size()) throw std::invalid_argument(c.head + " expects a numeral argument");
  return static_cast<unsigned>(std::stoul(c.args[i]));
}

Term app_num(const Term& f, unsigned n) { return Term::app(f, Term::num(n)); }

}  // namespace

const Program& prelude() {
  static const Program p = load_prelude();
  return p;
}

Ty lazy_list_type() { return prelude().types.at("LazyL"); }

Term corpus_source(std::string_view src) {
  auto t = parse_program(src, &prelude()).main;
  typecheck(t);
  return t;
}

Term corpus(std::string_view name) {
  const Call c = parse_call(name);
  const auto& h = c.head;
  if (h == "geo") return corpus_source(geo_src(prob_arg(c, 0, "1/2")));
  if (h == "id_hes" || h == "id_hes_helper") {
    const Prob p = prob_arg(c, 0, "1/2");
    const Ty s = c.args.size() > 1 ? parse_type(c.args[1], &prelude()) : Ty::nat();
    const auto helper = "(" + id_hes_helper_src(p) + ")";
    if (h == "id_hes_helper") return with_type(helper, s);
    return with_type("fun (z : S) => Y[S, S] " + helper + " z", s);
  }
  if (h == "fair_helper") return corpus_source(fair_helper_src(prob_arg(c, 0, "1/3")));
  if (h == "fair_from") return corpus_source("Y[Unit, Bool] (" + fair_helper_src(prob_arg(c, 0, "1/3")) + ")");
  if (h == "coin") return corpus_source("choice " + prob_arg(c, 0, "1/2").str() + " true false");
  if (h == "everysnd_helper") return corpus_source(kEverySndHelper);
  if (h == "randw_helper") return corpus_source(kRandwHelper);
  if (h == "randw2_helper") return corpus_source(kRandw2Helper);
  if (h == "everysnd") return corpus_source("Y[LazyL, LazyL] (" + std::string(kEverySndHelper) + ")");
  if (h == "randw" || h == "randw2") {
    auto f = corpus_source("Y[Nat, LazyL] (" + std::string(h == "randw" ? kRandwHelper : kRandw2Helper) + ")");
    if (c.args.empty()) return f;
    return app_num(f, nat_arg(c, 0));
  }
  if (h == "everysnd_randw") return Term::app(corpus("everysnd"), corpus("randw(" + std::to_string(nat_arg(c, 0)) + ")"));
  if (h == "nil" || h == "head" || h == "tail" || h == "cons" || h == "eqbool" || h == "diverge")
    return prelude().defs.at(h);
  throw std::invalid_argument("unknown corpus term '" + std::string(name) + "'");
}

std::vector<CorpusEntry> corpus_catalogue() {
  return {
      {"geo(1/2)", "geometric process: choice p 0 (choice p 1 …), one step per round"},
      {"id_hes(1/2,Nat)", "hesitant identity: returns its argument with probability p, else retries"},
      {"fair_from(1/3)", "fair coin from a 1/3-biased coin: toss twice, retry on equal results"},
      {"coin(1/2)", "the literal fair coin"},
      {"everysnd", "every second element of a lazy list"},
      {"randw(2)", "random walk from 2, stopping at 0"},
      {"randw2(2)", "double-speed random walk from 2"},
      {"everysnd_randw(2)", "everysnd applied to randw(2)"},
      {"nil", "empty lazy list"},
      {"head", "head of a lazy list, inr * when empty"},
      {"tail", "tail of a lazy list"},
      {"cons", "lazy cons"},
      {"eqbool", "equality on Bool"},
      {"diverge", "Y of the identity functional applied to *"},
  };
}

Term observe_unit(const Term& m) { return Term::app(Term::lam("_", typecheck(m), Term::star()), m); }

Term head_after(const Term& list, unsigned k) {
  Term l = list;
  for (unsigned i = 0; i < k; ++i) l = Term::app(prelude().defs.at("tail"), l);
  return Term::app(prelude().defs.at("head"), l);
}

Term bool_harness(const Term& m) {
  return Term::kase(m, "_", Term::star(), "_", prelude().defs.at("diverge"), Ty::boolean());
}

std::vector<std::pair<std::string, Term>> unit_programs() {
  std::vector<std::pair<std::string, Term>> out;
  out.emplace_back("unit", Term::star());
  out.emplace_back("diverge", corpus("diverge"));
  out.emplace_back("coin_harness", bool_harness(corpus("coin(1/2)")));
  for (const char* p : {"1/3", "1/4"})
    out.emplace_back(std::string("fair_harness(") + p + ")",
                     bool_harness(Term::app(corpus(std::string("fair_from(") + p + ")"), Term::star())));
  out.emplace_back("geo_harness", observe_unit(corpus("geo(1/2)")));
  out.emplace_back("id_hes_harness", observe_unit(app_num(corpus("id_hes(1/2,Nat)"), 3)));
  for (unsigned n : {1U, 2U}) {
    for (unsigned k = 0; k <= 3; ++k) {
      const auto ks = std::to_string(k);
      const auto ns = std::to_string(2 * n);
      out.emplace_back("randw_ctx(" + ns + "," + ks + ")", observe_unit(head_after(corpus("everysnd_randw(" + ns + ")"), k)));
      out.emplace_back("randw2_ctx(" + ns + "," + ks + ")", observe_unit(head_after(corpus("randw2(" + ns + ")"), k)));
    }
  }
  return out;
}

std::vector<std::pair<std::string, Term>> first_order_programs() {
  std::vector<std::pair<std::string, Term>> out;
  auto add = [&](const std::string& name, std::string_view src) { out.emplace_back(name, corpus_source(src)); };
  add("unit", "*");
  add("ground_choice", "choice 1/3 (0, *) (choice 1/2 (1, *) (2, *))");
  add("ifz_chain",
      "let n = choice 1/2 0 (choice 1/3 1 2) in"
      " ifz n then inl[Nat + Unit] 7 else ifz pred n then inr[Nat + Unit] * else inl[Nat + Unit] (suc n)");
  add("countdown",
      "Y[Nat, Nat] (fun (f : Nat -> Nat) (n : Nat) => ifz n then 0 else choice 1/2 (f (pred n)) (suc (f (pred n)))) 3");
  add("fold_unfold",
      "type N = mu X. Nat + X;\n"
      "def two = fold[N] (inr[Nat + N] (fold[N] (inl[Nat + N] 2)));\n"
      "case unfold two of inl n => n | inr r => case unfold r of inl m => suc m | inr s => 0");
  add("unary_loop",
      "type N = mu X. Unit + X;\n"
      "def count = Y[N, Nat] (fun (c : N -> Nat) (u : N) => case unfold u of inl z => 0 | inr v => suc (c v));\n"
      "def gen = Y[Unit, N] (fun (g : Unit -> N) (z : Unit) =>"
      " choice 1/2 (fold[N] (inl[Unit + N] *)) (fold[N] (inr[Unit + N] (g z))));\n"
      "count (gen *)");
  out.emplace_back("geo", corpus("geo(1/2)"));
  out.emplace_back("fair_from(1/3)", Term::app(corpus("fair_from(1/3)"), Term::star()));
  out.emplace_back("id_hes_3", app_num(corpus("id_hes(1/2,Nat)"), 3));
  out.emplace_back("head_randw", head_after(corpus("randw(2)"), 1));
  out.emplace_back("head_everysnd", head_after(corpus("everysnd_randw(2)"), 1));
  return out;
}

}  // namespace probfpc
