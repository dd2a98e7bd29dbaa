#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace splitkit {

struct PropertyResult {
  std::string name;
  std::size_t samples = 0;
  double max_violation = 0.0;  // error, or Lipschitz ratio for probes
  double threshold = 0.0;
  bool passed = false;
};

struct VerifyReport {
  std::string suite;
  std::vector<PropertyResult> properties;
  [[nodiscard]] bool passed() const;
};

struct VerifyOptions {
  double beta_gamma = 2.0;  // nonexpansive suite: βγ for MCP and γ(a − 1) for SCAD
  unsigned seed = 7;
};

[[nodiscard]] std::vector<std::string> verify_suite_names();

/// Runs one named suite ("all" runs every suite). Unknown names throw UsageError.
[[nodiscard]] VerifyReport run_verify(std::string_view suite, const VerifyOptions& opts = {});

void print_report(std::ostream& out, const VerifyReport& report);

}  // namespace splitkit
