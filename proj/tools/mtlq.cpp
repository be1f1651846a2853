// Command-line front end: answer, rewrite, eval, check, gen.
#include <fstream>
#include <iostream>
#include <sstream>

#include <omp.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "mtl/automata.hpp"
#include "mtl/canonical.hpp"
#include "mtl/eval.hpp"
#include "mtl/fostructure.hpp"
#include "mtl/generate.hpp"
#include "mtl/oracle.hpp"
#include "mtl/query_text.hpp"
#include "mtl/reductions.hpp"
#include "mtl/rewriters.hpp"
#include "mtl/textio.hpp"

using namespace mtl;
using json = nlohmann::json;

namespace {

enum Exit { Ok = 0, Mismatch = 1, InputError = 2, EngineMismatch = 3, OverBudget = 4 };

struct InputFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputFailure("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw InputFailure("cannot write " + path);
  out << text;
}

std::vector<std::string> times(const DataInstance& d, const TimestampSet& ts) {
  std::vector<std::string> out;
  for (int t : ts) out.push_back(d.time(t).str());
  return out;
}

void print_answers(const DataInstance& d, const TimestampSet& ts, bool as_json) {
  if (as_json) {
    std::cout << json{{"answers", times(d, ts)}}.dump() << "\n";
    return;
  }
  for (const auto& s : times(d, ts)) std::cout << s << "\n";
}

TimestampSet evaluate(const logic::ExtQuery& q, const DataInstance& d, bool expand) {
  FOStructure s = encode(d);
  logic::EvalOptions o;
  o.allow_plus = q.lang == logic::Language::FOPlus;
  o.expand_builtins = expand;
  logic::Evaluator ev(s, o);
  return ev.answers(q);
}

logic::ExtQuery expand_query(logic::ExtQuery q) {
  if (auto* f = std::get_if<logic::Formula>(&q.payload)) *f = expand_builtins(*f);
  if (auto* r = std::get_if<logic::RprQuery>(&q.payload)) {
    for (auto& d : r->defs) d.body = expand_builtins(d.body);
    r->main = expand_builtins(r->main);
  }
  if (auto* dl = std::get_if<logic::DatalogQuery>(&q.payload))
    for (auto& rule : dl->rules) rule.side = expand_builtins(rule.side);
  return q;
}

Fragment parse_fragment(const std::string& name) {
  auto f = fragment_from_string(name);
  if (!f) throw InputFailure("unknown fragment " + name);
  return *f;
}

TimestampSet certain(const Program& p, const std::string& atom, const DataInstance& d, std::uint64_t budget) {
  if (is_horn(p)) return certain_answers_horn(p, atom, d);
  OracleOptions o;
  o.budget = budget;
  return certain_answers_bruteforce(p, atom, d, o);
}

struct TrialResult {
  enum { Agree, Disagree, Skipped } status = Agree;
  std::string report;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Certain answers and rewritings for temporal ontology-mediated queries"};
  app.require_subcommand(1);
  std::string program_file, data_file, query_file, atom, engine = "auto", fragment, format = "text";
  std::string kind = "program", program_out, data_out;
  int trials = 100;
  std::uint64_t seed = 1, budget = std::uint64_t(1) << 24;
  bool expand = false, corrupt = false, show_automaton = false;

  auto add_format = [&](CLI::App* c) {
    c->add_option("--format", format, "text or json")->check(CLI::IsMember({"text", "json"}));
  };

  auto* answer = app.add_subcommand("answer", "certain answers of (program, atom) over data");
  answer->add_option("--program", program_file)->required();
  answer->add_option("--data", data_file)->required();
  answer->add_option("--atom", atom)->required();
  answer->add_option("--engine", engine, "auto, closure, oracle or automaton")
      ->check(CLI::IsMember({"auto", "closure", "oracle", "automaton"}));
  answer->add_option("--budget", budget, "oracle search nodes");
  add_format(answer);

  auto* rewrite_cmd = app.add_subcommand("rewrite", "emit the rewriting of (program, atom)");
  rewrite_cmd->add_option("--program", program_file)->required();
  rewrite_cmd->add_option("--atom", atom);
  rewrite_cmd->add_option("--fragment", fragment);
  rewrite_cmd->add_flag("--expand-builtins", expand, "replace built-ins by FO(<) expansions");
  rewrite_cmd->add_flag("--automaton", show_automaton, "print the normal form and its metric automaton");
  add_format(rewrite_cmd);

  auto* eval_cmd = app.add_subcommand("eval", "evaluate a target-language query over data");
  eval_cmd->add_option("--query", query_file)->required();
  eval_cmd->add_option("--data", data_file)->required();
  eval_cmd->add_flag("--expand-builtins", expand);
  add_format(eval_cmd);

  auto* check = app.add_subcommand("check", "compare the rewriting with certain answers on random data");
  check->add_option("--program", program_file)->required();
  check->add_option("--atom", atom)->required();
  check->add_option("--fragment", fragment)->required();
  check->add_option("--trials", trials);
  check->add_option("--seed", seed);
  check->add_option("--budget", budget);
  check->add_flag("--expand-builtins", expand);
  check->add_flag("--corrupt-rewriting", corrupt, "test hook: flip the rewriting's answer at the first timestamp");
  add_format(check);

  auto* gen = app.add_subcommand("gen", "seeded random programs, data and reduction instances");
  gen->add_option("--kind", kind, "program, data, circuit, psa or digraph")
      ->check(CLI::IsMember({"program", "data", "circuit", "psa", "digraph"}));
  gen->add_option("--fragment", fragment);
  gen->add_option("--program", program_file);
  gen->add_option("--seed", seed);
  gen->add_option("--program-out", program_out);
  gen->add_option("--data-out", data_out);
  add_format(gen);

  CLI11_PARSE(app, argc, argv);
  bool as_json = format == "json";

  try {
    if (*answer) {
      Program p = parse_program(slurp(program_file));
      DataInstance d = parse_data(slurp(data_file));
      std::string chosen = engine == "auto" ? (is_horn(p) ? "closure" : "oracle") : engine;
      TimestampSet out;
      if (chosen == "closure") {
        out = certain_answers_horn(p, atom, d);
      } else if (chosen == "automaton") {
        out = answer_by_runs(p, atom, d);
      } else {
        OracleOptions o;
        o.budget = budget;
        out = certain_answers_bruteforce(p, atom, d, o);
      }
      print_answers(d, out, as_json);
      return Ok;
    }

    if (*rewrite_cmd) {
      Program p = parse_program(slurp(program_file));
      if (show_automaton) {
        NormalForm nf = normalize(p);
        std::cout << render(nf.program) << "\n" << metric_automaton(nf.program).dump();
        return Ok;
      }
      if (atom.empty() || fragment.empty()) throw InputFailure("rewrite needs --atom and --fragment");
      logic::ExtQuery q = rewrite(parse_fragment(fragment), p, atom);
      if (expand) q = expand_query(q);
      std::string text = logic::render(q);
      if (as_json)
        std::cout << json{{"language", logic::to_string(q.lang)}, {"query", text}}.dump() << "\n";
      else
        std::cout << text << "\n";
      return Ok;
    }

    if (*eval_cmd) {
      logic::ExtQuery q = logic::parse_query(slurp(query_file));
      DataInstance d = parse_data(slurp(data_file));
      print_answers(d, evaluate(q, d, expand), as_json);
      return Ok;
    }

    if (*check) {
      Program p = parse_program(slurp(program_file));
      Fragment f = parse_fragment(fragment);
      logic::ExtQuery q = rewrite(f, p, atom);
      std::vector<std::string> atoms(p.atoms.begin(), p.atoms.end());
      if (atoms.empty()) atoms.push_back(atom);
      std::vector<TrialResult> results(trials);
#pragma omp parallel for schedule(dynamic)
      for (int i = 0; i < trials; ++i) {
        Rng rng(seed + static_cast<std::uint64_t>(i));
        DataInstance d = random_instance(rng, atoms, GenBounds{});
        TrialResult& r = results[i];
        TimestampSet want;
        try {
          want = certain(p, atom, d, budget);
        } catch (const BudgetExceeded&) {
          r.status = TrialResult::Skipped;
          continue;
        }
        TimestampSet got = evaluate(q, d, expand);
        if (corrupt) {
          if (got.count(0)) got.erase(0);
          else got.insert(0);
        }
        if (got != want) {
          r.status = TrialResult::Disagree;
          std::ostringstream os;
          os << "trial " << i << ": mismatch\n  data: " << render(d) << "\n  rewriting:";
          for (const auto& s : times(d, got)) os << " " << s;
          os << "\n  certain:";
          for (const auto& s : times(d, want)) os << " " << s;
          r.report = os.str();
        }
      }
      int agree = 0, skipped = 0;
      json mismatches = json::array();
      for (int i = 0; i < trials; ++i) {
        agree += results[i].status == TrialResult::Agree;
        skipped += results[i].status == TrialResult::Skipped;
        if (results[i].status != TrialResult::Disagree) continue;
        if (as_json)
          mismatches.push_back(results[i].report);
        else
          std::cout << results[i].report << "\n";
      }
      int failed = trials - agree - skipped;
      if (as_json)
        std::cout << json{{"trials", trials}, {"agree", agree}, {"skipped", skipped}, {"mismatches", mismatches}}.dump()
                  << "\n";
      else
        std::cout << agree << "/" << trials << " agree, " << skipped << " skipped\n";
      return failed ? Mismatch : Ok;
    }

    if (*gen) {
      Rng rng(seed);
      if (kind == "program") {
        if (fragment.empty()) throw InputFailure("gen --kind program needs --fragment");
        std::cout << render(random_program(rng, parse_fragment(fragment), GenBounds{})) << "\n";
        return Ok;
      }
      if (kind == "data") {
        std::vector<std::string> atoms = atom_names(GenBounds{}.atoms);
        if (!program_file.empty()) {
          Program p = parse_program(slurp(program_file));
          atoms.assign(p.atoms.begin(), p.atoms.end());
        }
        std::cout << render(random_instance(rng, atoms, GenBounds{})) << "\n";
        return Ok;
      }
      EncodedQuery e;
      if (kind == "circuit") e = from_circuit(random_circuit(rng, 6));
      if (kind == "psa") {
        PsaInstance x = random_psa(rng, 5);
        e = from_psa(x.graph, x.sources, x.target);
      }
      if (kind == "digraph") {
        ReachInstance x = random_reach(rng, 6);
        e = from_digraph(x.graph, x.source, x.target);
      }
      if (!program_out.empty()) write_file(program_out, render(e.program) + "\n");
      if (!data_out.empty()) write_file(data_out, render(e.data) + "\n");
      if (as_json)
        std::cout << json{{"atom", e.atom}, {"target", e.target.str()}}.dump() << "\n";
      else
        std::cout << "atom " << e.atom << "\ntarget " << e.target.str() << "\n";
      if (program_out.empty()) std::cout << render(e.program) << "\n";
      if (data_out.empty()) std::cout << render(e.data) << "\n";
      return Ok;
    }
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return InputError;
  } catch (const InputFailure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return InputError;
  } catch (const FragmentError& e) {
    std::cerr << "engine/fragment mismatch: " << e.what() << "\n";
    return EngineMismatch;
  } catch (const BudgetExceeded& e) {
    std::cerr << "budget exceeded: " << e.what() << "\n";
    return OverBudget;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return InputError;
  }
  return Ok;
}
