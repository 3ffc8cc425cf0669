#include "probfpc/densem.hpp"

#include <atomic>

#include "probfpc/opsem.hpp"

namespace probfpc {

namespace {

std::uint64_t next_sem_id() {
  static std::atomic<std::uint64_t> counter{1};
  return counter.fetch_add(1, std::memory_order_relaxed);
}

enum Tag : std::uint64_t {
  kSuc = 1,
  kPred,
  kFst,
  kSnd,
  kInl,
  kInr,
  kFold,
  kUnfold,
  kIfz,
  kPairL,
  kPairR,
  kAppL,
  kAppR,
  kCase,
  kLet,
  kLift,
  kApply,
  kEnterCase,
  kEnterLet,
  kUnfoldStep
};

}  // namespace

SemKind SemVal::kind() const { return n_->kind; }
std::uint64_t SemVal::id() const { return n_->id; }
bool SemVal::ground() const { return n_->ground; }
std::uint64_t SemVal::nat() const {
  if (n_->kind != SemKind::Nat) throw std::logic_error("SemVal::nat on a non-natural");
  return n_->n;
}
const SemVal& SemVal::kid(std::size_t i) const { return n_->kids.at(i); }

std::strong_ordering ground_compare(const SemVal& v, const SemVal& w) {
  if (!v.ground() || !w.ground()) throw NonGroundError("ground comparison of a closure or fold value");
  if (v.id() == w.id()) return std::strong_ordering::equal;
  if (auto c = v.kind() <=> w.kind(); c != 0) return c;
  if (auto c = v.node().n <=> w.node().n; c != 0) return c;
  for (std::size_t i = 0; i < v.node().kids.size(); ++i)
    if (auto c = ground_compare(v.kid(i), w.kid(i)); c != 0) return c;
  return std::strong_ordering::equal;
}

bool ground_eq(const SemVal& v, const SemVal& w) { return ground_compare(v, w) == 0; }

std::string sem_str(const SemVal& v) {
  switch (v.kind()) {
    case SemKind::Nat:
      return std::to_string(v.nat());
    case SemKind::Unit:
      return "⋆";
    case SemKind::Pair:
      return "(" + sem_str(v.kid(0)) + ", " + sem_str(v.kid(1)) + ")";
    case SemKind::Inl:
      return "inl " + sem_str(v.kid(0));
    case SemKind::Inr:
      return "inr " + sem_str(v.kid(0));
    case SemKind::Fun:
      return "<fun#" + std::to_string(v.id()) + ">";
    case SemKind::Fold:
      return "fold " + sem_str(v.kid(0));
  }
  return "?";
}

// ---------------------------------------------------------------------------

struct DenEvaluator::Frame {
  Tag tag;
  Term term;
  Env env;
  SemVal val;
  Key key;
};

DenEvaluator::~DenEvaluator() {
  for (auto& [k, th] : thunks_) th.release();
}

std::size_t DenEvaluator::table_size() const {
  std::lock_guard lock(mu_);
  return thunks_.size();
}

std::uint64_t DenEvaluator::term_id(const Term& t) {
  std::lock_guard lock(mu_);
  auto [it, fresh] = terms_.emplace(t, terms_.size() + 1);
  return it->second;
}

SemVal DenEvaluator::intern(SemNode node, Key key) {
  std::lock_guard lock(mu_);
  if (auto it = values_.find(key); it != values_.end()) return it->second;
  node.id = next_sem_id();
  SemVal v(std::make_shared<const SemNode>(std::move(node)));
  values_.emplace(std::move(key), v);
  return v;
}

SemVal DenEvaluator::nat(std::uint64_t n) {
  SemNode s{SemKind::Nat, n, {}, {}, {}, 0, true};
  return intern(std::move(s), {0, n});
}

SemVal DenEvaluator::unit() { return intern(SemNode{SemKind::Unit, 0, {}, {}, {}, 0, true}, {1}); }

SemVal DenEvaluator::pair(const SemVal& a, const SemVal& b) {
  return intern(SemNode{SemKind::Pair, 0, {a, b}, {}, {}, 0, a.ground() && b.ground()}, {2, a.id(), b.id()});
}

SemVal DenEvaluator::inl(const SemVal& a) {
  return intern(SemNode{SemKind::Inl, 0, {a}, {}, {}, 0, a.ground()}, {3, a.id()});
}

SemVal DenEvaluator::inr(const SemVal& a) {
  return intern(SemNode{SemKind::Inr, 0, {a}, {}, {}, 0, a.ground()}, {4, a.id()});
}

SemVal DenEvaluator::fold(const SemVal& a) {
  return intern(SemNode{SemKind::Fold, 0, {a}, {}, {}, 0, false}, {6, a.id()});
}

SemVal DenEvaluator::fun(const Term& lam, const Env& env) {
  Key key{5, term_id(lam)};
  for (const auto& v : env) key.push_back(v.id());
  return intern(SemNode{SemKind::Fun, 0, {}, lam, env, 0, false}, std::move(key));
}

Thunk<SemVal> DenEvaluator::shared_thunk(const Key& key, std::function<Delay<SemVal>()> producer) {
  std::lock_guard lock(mu_);
  if (auto it = thunks_.find(key); it != thunks_.end()) return it->second;
  Thunk<SemVal> th(std::move(producer));
  thunks_.emplace(key, th);
  return th;
}

Delay<SemVal> DenEvaluator::bind_frame(const Delay<SemVal>& d, std::shared_ptr<const Frame> f) {
  Kont<SemVal, SemVal> k;
  k.apply = [this, f](const SemVal& v) { return resume(*f, v); };
  k.lift = [this, f](const Thunk<SemVal>& t) {
    Key key{kLift, t.id()};
    key.insert(key.end(), f->key.begin(), f->key.end());
    return shared_thunk(key, [this, t, f]() { return bind_frame(t.force(), f); });
  };
  return delay_bind(d, k);
}

namespace {

std::vector<std::uint64_t> env_ids(const Env& env) {
  std::vector<std::uint64_t> ids;
  ids.reserve(env.size());
  for (const auto& v : env) ids.push_back(v.id());
  return ids;
}

}  // namespace

Delay<SemVal> DenEvaluator::enter(const Key& key, const Term& body, Env env) {
  return step(shared_thunk(key, [this, body, env = std::move(env)]() { return interp(body, env); }));
}

Delay<SemVal> DenEvaluator::apply(const SemVal& f, const SemVal& v) {
  if (f.kind() != SemKind::Fun) throw EvalDefect("application of a non-closure " + sem_str(f));
  Env env = f.node().env;
  env.push_back(v);
  const Term& body = f.node().lam.kid(0);
  if (mode_ == StepMode::Standard) return interp(body, env);
  return enter({kApply, f.id(), v.id()}, body, std::move(env));
}

Delay<SemVal> DenEvaluator::resume(const Frame& f, const SemVal& v) {
  switch (f.tag) {
    case kSuc:
      return now(nat(v.nat() + 1));
    case kPred:
      return now(nat(v.nat() == 0 ? 0 : v.nat() - 1));
    case kFst:
      return now(v.kid(0));
    case kSnd:
      return now(v.kid(1));
    case kInl:
      return now(inl(v));
    case kInr:
      return now(inr(v));
    case kFold:
      return now(fold(v));
    case kUnfold: {
      if (v.kind() != SemKind::Fold) throw EvalDefect("unfold of a non-fold " + sem_str(v));
      SemVal inner = v.kid(0);
      return step(shared_thunk({kUnfoldStep, v.id()}, [inner]() { return now(inner); }));
    }
    case kIfz:
      return interp(f.term.kid(v.nat() == 0 ? 1 : 2), f.env);
    case kPairL: {
      auto next = std::make_shared<Frame>(Frame{kPairR, {}, {}, v, {kPairR, v.id()}});
      return bind_frame(interp(f.term.kid(1), f.env), next);
    }
    case kPairR:
      return now(pair(f.val, v));
    case kAppL: {
      auto next = std::make_shared<Frame>(Frame{kAppR, {}, {}, v, {kAppR, v.id()}});
      return bind_frame(interp(f.term.kid(1), f.env), next);
    }
    case kAppR:
      return apply(f.val, v);
    case kCase: {
      const bool left = v.kind() == SemKind::Inl;
      if (!left && v.kind() != SemKind::Inr) throw EvalDefect("case on a non-injection " + sem_str(v));
      Env env = f.env;
      env.push_back(v.kid(0));
      const Term& branch = f.term.kid(left ? 1 : 2);
      if (mode_ == StepMode::Standard) return interp(branch, env);
      Key key{kEnterCase, term_id(branch)};
      for (auto id : env_ids(env)) key.push_back(id);
      return enter(key, branch, std::move(env));
    }
    case kLet: {
      Env env = f.env;
      env.push_back(v);
      const Term& body = f.term.kid(1);
      if (mode_ == StepMode::Standard) return interp(body, env);
      Key key{kEnterLet, term_id(body)};
      for (auto id : env_ids(env)) key.push_back(id);
      return enter(key, body, std::move(env));
    }
    default:
      throw EvalDefect("unknown continuation frame");
  }
}

Delay<SemVal> DenEvaluator::interp(const Term& m, const Env& rho) {
  const auto& n = m.node();
  auto simple = [&](Tag tag) {
    return bind_frame(interp(n.kids[0], rho), std::make_shared<Frame>(Frame{tag, {}, {}, {}, {tag}}));
  };
  auto with_env = [&](Tag tag) {
    Key key{tag, term_id(m)};
    for (auto id : env_ids(rho)) key.push_back(id);
    return bind_frame(interp(n.kids[0], rho), std::make_shared<Frame>(Frame{tag, m, rho, {}, std::move(key)}));
  };
  switch (n.kind) {
    case TermKind::Var:
      if (n.n >= rho.size()) throw EvalDefect("unbound variable in interpretation: " + pretty(m));
      return now(rho[rho.size() - 1 - n.n]);
    case TermKind::Star:
      return now(unit());
    case TermKind::Num:
      return now(nat(n.n));
    case TermKind::Lam:
      return now(fun(m, rho));
    case TermKind::Suc:
      return simple(kSuc);
    case TermKind::Pred:
      return simple(kPred);
    case TermKind::Fst:
      return simple(kFst);
    case TermKind::Snd:
      return simple(kSnd);
    case TermKind::Inl:
      return simple(kInl);
    case TermKind::Inr:
      return simple(kInr);
    case TermKind::Fold:
      return simple(kFold);
    case TermKind::Unfold:
      return simple(kUnfold);
    case TermKind::Ifz:
      return with_env(kIfz);
    case TermKind::Pair:
      return with_env(kPairL);
    case TermKind::App:
      return with_env(kAppL);
    case TermKind::Case:
      return with_env(kCase);
    case TermKind::Let:
      return with_env(kLet);
    case TermKind::Choice:
      return dchoice(*n.p, interp(n.kids[0], rho), interp(n.kids[1], rho));
  }
  throw EvalDefect("unknown term former");
}

SemVal DenEvaluator::val_interp(const Term& v, const Env& rho) {
  const auto& n = v.node();
  switch (n.kind) {
    case TermKind::Var:
      if (n.n >= rho.size()) throw EvalDefect("unbound variable in value: " + pretty(v));
      return rho[rho.size() - 1 - n.n];
    case TermKind::Star:
      return unit();
    case TermKind::Num:
      return nat(n.n);
    case TermKind::Lam:
      return fun(v, rho);
    case TermKind::Pair:
      return pair(val_interp(n.kids[0], rho), val_interp(n.kids[1], rho));
    case TermKind::Inl:
      return inl(val_interp(n.kids[0], rho));
    case TermKind::Inr:
      return inr(val_interp(n.kids[0], rho));
    case TermKind::Fold:
      return fold(val_interp(n.kids[0], rho));
    default:
      throw std::invalid_argument("val_interp of a non-value: " + pretty(v));
  }
}

DenComp interp(const Term& m, StepMode mode) {
  auto ty = typecheck(m);
  auto ev = DenEvaluator::create(mode);
  auto d = ev->interp(m, {});
  return DenComp{std::move(d), std::move(ty), std::move(ev)};
}

TermSeq den_probterm(const Term& m, unsigned n, StepMode mode) {
  auto c = interp(m, mode);
  return with_limit(probterm_seq(c.delay, n), c.delay);
}

bool soundness_check(const Term& m, unsigned depth) {
  auto ty = typecheck(m);
  if (!ty_ground(ty)) throw NonGroundError("soundness_check needs a type built from Unit, Nat, ×, +; found " + ty_str(ty));
  auto op = OpEvaluator::create();
  auto den = DenEvaluator::create(StepMode::StepFaithful);
  auto table = make_prefix_table();
  PrefixRenderer<Term> left([&](const Term& v) { return sem_str(den->val_interp(v)); }, table);
  PrefixRenderer<SemVal> right([](const SemVal& v) { return sem_str(v); }, table);
  return left.render(op->eval(m), depth) == right.render(den->interp(m, {}), depth);
}

}  // namespace probfpc
