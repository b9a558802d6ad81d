// Runs every acceptance criterion and prints one line per criterion.
// Exit status is non-zero when any criterion fails.
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>

#include "weaklab/harness/validation.hpp"

int main(int argc, char** argv) {
  weaklab::harness::ValidationOptions opt;
  for (int i = 1; i < argc; ++i) opt.criteria.push_back(std::atoi(argv[i]));
  bool all = true;
  std::vector<weaklab::harness::CriterionResult> results;
  for (int id : opt.criteria.empty() ? std::vector<int>{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12} : opt.criteria) {
    auto r = weaklab::harness::run_criterion(id, opt);
    std::printf("%s\n", weaklab::harness::summary_line(r).c_str());
    std::fflush(stdout);
    all = all && r.pass;
    results.push_back(std::move(r));
  }
  std::ofstream("acceptance_report.json") << weaklab::harness::report_json(results).dump(2) << '\n';
  std::printf("%s\n", all ? "ALL CRITERIA PASS" : "SOME CRITERIA FAIL");
  return all ? 0 : 1;
}
