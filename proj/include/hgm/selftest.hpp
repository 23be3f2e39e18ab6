#pragma once

// Cross-oracle and invariant suites shared by the CLI selftest command and
// the acceptance runner.

#include <ostream>
#include <string>
#include <vector>

namespace hgm {

struct SuiteResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

enum class SelftestLevel { Quick, Full };

SuiteResult suite_pfaffian_column_probe();
SuiteResult suite_gauge_round_trip();
SuiteResult suite_series_pfaffian_fd();
SuiteResult suite_recover_f_identity();
SuiteResult suite_phase_switch_continuity();
SuiteResult suite_scale_equivariance();
SuiteResult suite_tolerance_self_convergence(bool full);
SuiteResult suite_ledger_independence();
SuiteResult suite_cross_oracle();
SuiteResult suite_closed_forms();
/// HGM against Monte Carlo on n_configs random problems; passes when at
/// least n_configs - 2 lie within 4 standard errors. Configuration k uses
/// Monte Carlo seed mc_seed + k.
SuiteResult suite_mc_coverage(int n_configs = 50, unsigned long long n_samples = 10'000'000,
                              unsigned long long mc_seed = 1000);

std::vector<SuiteResult> run_selftest(SelftestLevel level, unsigned long long mc_seed = 1000);

/// Prints one "PASS name: detail" / "FAIL name: detail" line per suite.
void print_results(const std::vector<SuiteResult>& results, std::ostream& out);

}  // namespace hgm
