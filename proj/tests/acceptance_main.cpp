// Acceptance gate runner: executes every acceptance criterion at the
// requested budget (default: full), prints one pass/fail line per criterion,
// writes artifacts plus a JSON summary under the output directory, and exits
// nonzero if any criterion failed.
//
// Usage: acceptance_main [cli_binary] [out_dir] [smoke|small|full]

#include <cstdio>
#include <string>
#include <vector>

#include "stablewalk/acceptance.hpp"

int main(int argc, char** argv) {
  stablewalk::AcceptanceOptions opts;
  opts.budget = stablewalk::VerifyBudget::full;
  opts.out_dir = "acceptance_out";
  opts.echo = true;
  if (argc > 1) opts.cli_path = argv[1];
  if (argc > 2) opts.out_dir = argv[2];
  if (argc > 3) opts.budget = stablewalk::budget_from_string(argv[3]);

  std::printf("acceptance criteria, budget %s, seed %llu\n",
              stablewalk::to_string(opts.budget),
              static_cast<unsigned long long>(opts.seed));
  std::fflush(stdout);

  std::vector<stablewalk::CriterionResult> results;
  try {
    results = stablewalk::run_acceptance(opts);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "acceptance runner aborted: %s\n", e.what());
    return 2;
  }
  stablewalk::save_acceptance_summary(results, opts,
                                      opts.out_dir +
                                          "/acceptance_summary.json");
  int failed = 0;
  for (const auto& r : results) {
    if (!r.pass) ++failed;
  }
  std::printf("%d of %zu criteria passed\n",
              static_cast<int>(results.size()) - failed, results.size());
  return failed == 0 ? 0 : 1;
}
