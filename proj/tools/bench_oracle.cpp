// Times the model-search oracle serially and with OpenMP on seeded random
// non-Horn instances, and checks that both give the same answers.
#include <chrono>
#include <cstdio>

#include <omp.h>

#include "CLI11.hpp"
#include "mtl/generate.hpp"
#include "mtl/oracle.hpp"

using namespace mtl;

int main(int argc, char** argv) {
  CLI::App app{"Serial versus parallel oracle timing"};
  int instances = 200;
  std::uint64_t seed = 1;
  int timestamps = 12;
  app.add_option("--instances", instances);
  app.add_option("--seed", seed);
  app.add_option("--timestamps", timestamps);
  CLI11_PARSE(app, argc, argv);

  GenBounds b;
  b.timestamps = timestamps;
  Rng rng(seed);
  struct Case {
    Program program;
    DataInstance data;
    std::string atom;
  };
  std::vector<Case> cases;
  for (int i = 0; i < instances; ++i) {
    Fragment f = i % 2 ? Fragment::NonpunctualTc : Fragment::InfiniteFo;
    Program p = random_program(rng, f, b);
    auto names = atom_names(b.atoms);
    cases.push_back({p, random_instance(rng, names, b), names[i % names.size()]});
  }

  double seconds[2] = {0, 0};
  std::vector<TimestampSet> answers[2];
  int skipped = 0;
  for (int mode = 0; mode < 2; ++mode) {
    OracleOptions o;
    o.parallel = mode == 1;
    auto start = std::chrono::steady_clock::now();
    for (const auto& c : cases) {
      try {
        answers[mode].push_back(certain_answers_bruteforce(c.program, c.atom, c.data, o));
      } catch (const BudgetExceeded&) {
        answers[mode].push_back({-1});
        skipped += mode == 0;
      }
    }
    seconds[mode] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  bool same = answers[0] == answers[1];
  std::printf("threads %d, instances %d (%d over budget)\n", omp_get_max_threads(), instances, skipped);
  std::printf("serial   %.3f s\nparallel %.3f s\nspeedup  %.2fx\nanswers %s\n", seconds[0], seconds[1],
              seconds[1] > 0 ? seconds[0] / seconds[1] : 0.0, same ? "identical" : "DIFFER");
  return same ? 0 : 1;
}
