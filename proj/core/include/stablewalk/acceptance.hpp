#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace stablewalk {

enum class VerifyBudget { smoke, small, full };

VerifyBudget budget_from_string(const std::string& s);
const char* to_string(VerifyBudget b);

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

struct AcceptanceOptions {
  VerifyBudget budget = VerifyBudget::small;
  std::uint64_t seed = 20240715;
  std::string out_dir = "out";
  std::string cli_path;       // path to the CLI binary (criteria 1 and 12);
                              // empty => those criteria run in-process where
                              // possible and the shell-out parts are skipped
                              // with a failure note.
  std::vector<int> only;      // empty => all criteria
  bool skip_reproducibility = false;  // used by nested smoke runs
  bool echo = true;           // print one line per criterion as it finishes
};

// Runs the acceptance criteria, writing artifacts under out_dir and
// returning one result per criterion (pass/fail + detail + elapsed time).
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts);

// Serializes the results (plus budget/seed echo) to JSON at path.
void save_acceptance_summary(const std::vector<CriterionResult>& results,
                             const AcceptanceOptions& opts,
                             const std::string& path);

}  // namespace stablewalk
