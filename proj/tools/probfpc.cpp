#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "probfpc/corpus.hpp"
#include "probfpc/densem.hpp"
#include "probfpc/json_io.hpp"
#include "probfpc/opsem.hpp"
#include "probfpc/relate.hpp"
#include "probfpc/syntax.hpp"

using namespace probfpc;

namespace {

constexpr int kOk = 0;
constexpr int kError = 1;
constexpr int kUnknown = 2;

struct RunConfig {
  unsigned depth = 64;
  unsigned horizon = 64;
  unsigned fuel = 6;
  std::string eps = "1/1024";
  std::string mode = "op";
  std::string left_mode;
  std::string right_mode;
  std::string format = "table";
  std::string probes = "0,1,2,3";
  bool approx = false;
  bool both = false;
  std::optional<std::uint64_t> seed;
};

class UserError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Term load(const std::string& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw UserError(file + ": cannot read file");
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  auto located = [&](Loc loc, const char* what) {
    return UserError(loc.known() ? file + ":" + what : file + ": " + what);
  };
  try {
    auto t = parse_program(text, &prelude()).main;
    typecheck(t);
    return t;
  } catch (const ParseError& e) {
    throw located(e.loc(), e.what());
  } catch (const TypeError& e) {
    throw located(e.loc(), e.what());
  }
}

Rat parse_eps(const std::string& s) {
  Rat r = Rat::parse(s);
  if (r.sign() < 0) throw UserError("--eps must be non-negative");
  return r;
}

TermSeq sequence(const Term& m, const std::string& mode, unsigned depth) {
  if (mode == "op") return eval_probterm(m, depth);
  if (mode == "den") return den_probterm(m, depth, StepMode::Standard);
  if (mode == "den-steps") return den_probterm(m, depth, StepMode::StepFaithful);
  throw UserError("unknown mode '" + mode + "' (expected op, den or den-steps)");
}

void seed_field(nlohmann::ordered_json& j, const RunConfig& cfg) {
  j["seed"] = cfg.seed ? nlohmann::ordered_json(*cfg.seed) : nlohmann::ordered_json(nullptr);
}

void print_table(const TermSeq& s, bool approx) {
  std::cout << "n\tprobterm";
  if (approx) std::cout << "\tapprox";
  std::cout << "\n";
  for (std::size_t n = 0; n < s.values.size(); ++n) {
    std::cout << n << "\t" << s.values[n].str();
    if (approx) std::cout << "\t" << approx_str(s.values[n].value());
    std::cout << "\n";
  }
  std::cout << "limit\t" << (s.limit ? s.limit->str() : "unknown");
  if (approx && s.limit) std::cout << "\t" << approx_str(s.limit->value());
  std::cout << "\n";
}

int cmd_check(const std::string& file) {
  auto t = load(file);
  std::cout << ty_str(typecheck(t)) << "\n";
  return kOk;
}

int show_probterm(const Term& m, const RunConfig& cfg, const std::string& label) {
  auto s = sequence(m, cfg.mode, cfg.depth);
  if (cfg.format == "json") {
    nlohmann::ordered_json j;
    j["program"] = label;
    j["type"] = ty_str(typecheck(m));
    j["mode"] = cfg.mode;
    const auto seq = termseq_json(s, cfg.approx);
    for (const auto& [k, v] : seq.items()) j[k] = v;
    seed_field(j, cfg);
    std::cout << j.dump(2) << "\n";
  } else {
    print_table(s, cfg.approx);
  }
  return kOk;
}

void require_unit(const Term& m, const std::string& file) {
  const Ty t = typecheck(m);
  if (!(t == Ty::unit())) throw UserError(file + ": expected a program of type Unit, found " + ty_str(t));
}

int cmd_compare(const std::string& fa, const std::string& fb, const RunConfig& cfg) {
  auto a = load(fa);
  auto b = load(fb);
  require_unit(a, fa);
  require_unit(b, fb);
  const auto lm = cfg.left_mode.empty() ? cfg.mode : cfg.left_mode;
  const auto rm = cfg.right_mode.empty() ? cfg.mode : cfg.right_mode;
  const Rat eps = parse_eps(cfg.eps);
  auto sa = sequence(a, lm, cfg.depth);
  auto sb = sequence(b, rm, cfg.depth);
  const bool le = leqlim_upto(sa, sb, cfg.depth, cfg.depth, eps);
  const bool ge = leqlim_upto(sb, sa, cfg.depth, cfg.depth, eps);
  const bool pass = le && ge;
  if (cfg.format == "json") {
    nlohmann::ordered_json j;
    j["left"] = {{"file", fa}, {"mode", lm}};
    j["right"] = {{"file", fb}, {"mode", rm}};
    j["depth"] = cfg.depth;
    j["eps"] = eps.str();
    j["left_le_right"] = le;
    j["right_le_left"] = ge;
    j["verdict"] = pass ? "pass" : "inconclusive";
    j["left_probterm"] = termseq_json(sa, cfg.approx);
    j["right_probterm"] = termseq_json(sb, cfg.approx);
    seed_field(j, cfg);
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << "left  (" << lm << "): probterm(" << cfg.depth << ") = " << sa.values.back().str()
              << ", limit " << (sa.limit ? sa.limit->str() : "unknown") << "\n";
    std::cout << "right (" << rm << "): probterm(" << cfg.depth << ") = " << sb.values.back().str()
              << ", limit " << (sb.limit ? sb.limit->str() : "unknown") << "\n";
    std::cout << "left ≲ right: " << (le ? "yes" : "not shown") << "\n";
    std::cout << "right ≲ left: " << (ge ? "yes" : "not shown") << "\n";
    std::cout << (pass ? "pass" : "inconclusive") << "\n";
  }
  return pass ? kOk : kUnknown;
}

ProbeSet parse_probes(const std::string& s) {
  ProbeSet p;
  p.nats.clear();
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      std::size_t used = 0;
      p.nats.push_back(std::stoull(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UserError("--probes expects comma-separated numerals, got '" + item + "'");
    }
  }
  return p;
}

int cmd_refine(const std::string& fa, const std::string& fb, const RunConfig& cfg) {
  auto a = load(fa);
  auto b = load(fb);
  LogrelConfig lc;
  lc.lift.fuel = cfg.fuel;
  lc.lift.horizon = cfg.horizon;
  lc.lift.eps = parse_eps(cfg.eps);
  lc.probes = parse_probes(cfg.probes);
  if (!(typecheck(a) == typecheck(b)))
    throw UserError("programs have different types: " + ty_str(typecheck(a)) + " and " + ty_str(typecheck(b)));
  std::vector<std::pair<std::string, LiftVerdict>> runs;
  runs.emplace_back(fa + " ≤ " + fb, refine(a, b, lc));
  if (cfg.both) runs.emplace_back(fb + " ≤ " + fa, refine(b, a, lc));
  bool all = true;
  for (const auto& r : runs) all = all && r.second.holds;
  if (cfg.format == "json") {
    nlohmann::ordered_json j;
    j["type"] = ty_str(typecheck(a));
    j["fuel"] = cfg.fuel;
    j["horizon"] = cfg.horizon;
    j["eps"] = lc.lift.eps.str();
    auto arr = nlohmann::ordered_json::array();
    for (const auto& [name, v] : runs) {
      auto vj = verdict_json(v);
      nlohmann::ordered_json item;
      item["direction"] = name;
      for (auto& [k, x] : vj.items()) item[k] = x;
      arr.push_back(item);
    }
    j["checks"] = arr;
    seed_field(j, cfg);
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << "type " << ty_str(typecheck(a)) << ", fuel " << cfg.fuel << ", horizon " << cfg.horizon << ", ε "
              << lc.lift.eps.str() << " per level\n";
    for (const auto& [name, v] : runs) {
      std::cout << name << ": " << (v.holds ? "Holds" : "Unknown (" + v.reason + ")") << "\n";
      std::cout << trace_text(v.trace, 1);
    }
  }
  return all ? kOk : kUnknown;
}

int cmd_examples_list() {
  for (const auto& e : corpus_catalogue()) std::cout << e.name << "\t" << e.description << "\n";
  return kOk;
}

int cmd_examples_run(const std::string& name, const RunConfig& cfg) {
  Term t;
  try {
    t = corpus(name);
  } catch (const std::invalid_argument& e) {
    throw UserError(e.what());
  }
  if (cfg.format != "json") std::cout << name << " : " << ty_str(typecheck(t)) << "\n";
  return show_probterm(t, cfg, name);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"probfpc: semantics workbench for probabilistic FPC"};
  app.require_subcommand(1);
  app.fallthrough();
  RunConfig cfg;
  std::uint64_t seed = 0;
  auto* seed_opt = app.add_option("--seed", seed, "Seed for randomised checks (also PROBFPC_SEED)");

  auto add_format = [&](CLI::App* c) {
    c->add_option("--format", cfg.format, "Output format")->check(CLI::IsMember({"table", "json"}));
  };
  auto add_mode = [&](CLI::App* c) {
    c->add_option("--mode", cfg.mode, "Semantics: op, den or den-steps")
        ->check(CLI::IsMember({"op", "den", "den-steps"}));
  };

  std::string file_a;
  std::string file_b;
  std::string example;

  auto* check = app.add_subcommand("check", "Typecheck a source file and print its type");
  check->add_option("file", file_a)->required();

  auto* probterm = app.add_subcommand("probterm", "Table of termination probabilities");
  probterm->add_option("file", file_a)->required();
  probterm->add_option("--depth", cfg.depth, "Largest n");
  probterm->add_flag("--approx", cfg.approx, "Also print 6-decimal renderings");
  add_mode(probterm);
  add_format(probterm);

  auto* compare = app.add_subcommand("compare", "Limit comparison of two Unit programs");
  compare->add_option("left", file_a)->required();
  compare->add_option("right", file_b)->required();
  compare->add_option("--depth", cfg.depth, "Horizon N = M");
  compare->add_option("--eps", cfg.eps, "Slack ε (exact rational)");
  compare->add_option("--left-mode", cfg.left_mode, "Semantics of the left program")
      ->check(CLI::IsMember({"op", "den", "den-steps"}));
  compare->add_option("--right-mode", cfg.right_mode, "Semantics of the right program")
      ->check(CLI::IsMember({"op", "den", "den-steps"}));
  compare->add_flag("--approx", cfg.approx, "Also print 6-decimal renderings");
  add_mode(compare);
  add_format(compare);

  auto* refine_cmd = app.add_subcommand("refine", "Check ⟦left⟧ against eval(right) in the logical relation");
  refine_cmd->add_option("left", file_a)->required();
  refine_cmd->add_option("right", file_b)->required();
  refine_cmd->add_option("--fuel", cfg.fuel, "Lifting depth");
  refine_cmd->add_option("--horizon", cfg.horizon, "Runs explored per ⇝≈ search");
  refine_cmd->add_option("--eps", cfg.eps, "Slack ε per level (exact rational)");
  refine_cmd->add_option("--probes", cfg.probes, "Numerals used as Nat probes, comma-separated");
  refine_cmd->add_flag("--both", cfg.both, "Also check the converse");
  add_format(refine_cmd);

  auto* examples = app.add_subcommand("examples", "Built-in example programs");
  examples->require_subcommand(1);
  examples->add_subcommand("list", "List example names");
  auto* run_ex = examples->add_subcommand("run", "Termination table of an example");
  run_ex->add_option("name", example)->required();
  run_ex->add_option("--depth", cfg.depth, "Largest n");
  run_ex->add_flag("--approx", cfg.approx, "Also print 6-decimal renderings");
  add_mode(run_ex);
  add_format(run_ex);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kError;
  }

  if (*seed_opt) {
    cfg.seed = seed;
  } else if (const char* env = std::getenv("PROBFPC_SEED")) {
    try {
      cfg.seed = std::stoull(env);
    } catch (const std::exception&) {
      std::cerr << "error: PROBFPC_SEED is not a numeral\n";
      return kError;
    }
  }

  try {
    if (*check) return cmd_check(file_a);
    if (*probterm) return show_probterm(load(file_a), cfg, file_a);
    if (*compare) return cmd_compare(file_a, file_b, cfg);
    if (*refine_cmd) return cmd_refine(file_a, file_b, cfg);
    if (examples->got_subcommand("list")) return cmd_examples_list();
    if (*run_ex) return cmd_examples_run(example, cfg);
  } catch (const UserError& e) {
    std::cerr << e.what() << "\n";
    return kError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kError;
  }
  return kError;
}
