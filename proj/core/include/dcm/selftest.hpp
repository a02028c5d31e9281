#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace dcm {

struct SuiteResult {
  std::string name;
  bool pass = true;
  std::string detail;
};

// Property suites run by `dcm selftest`.
std::vector<SuiteResult> run_selftests(std::uint64_t seed);

}  // namespace dcm
