// One line per acceptance check; exit status 1 if any fails.
// --smoke runs the reduced sizes, otherwise the stated ones.

#include <cstdio>
#include <cstring>
#include <cstdlib>
#include <vector>

#include "ymindex/acceptance.hpp"

int main(int argc, char** argv) {
  using namespace ymindex;
  AcceptanceLevel level = AcceptanceLevel::full;
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--smoke") == 0)
      level = AcceptanceLevel::smoke;
    else
      only.push_back(std::atoi(argv[i]));
  }
  int failed = 0;
  run_acceptance(level, only, [&](const CriterionResult& r) {
    std::printf("%s\n", format_result(r).c_str());
    std::fflush(stdout);
    failed += r.pass ? 0 : 1;
  });
  std::printf("%d failed\n", failed);
  return failed == 0 ? 0 : 1;
}
