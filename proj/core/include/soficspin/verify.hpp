// Named verification suites with pinned tolerances. Each suite runs a fixed,
// fully seeded experiment and reports one numeric check per claim; the
// acceptance binary and the CLI `verify` subcommand both drive these.
#pragma once

#include <string>
#include <vector>

namespace soficspin::verify {

struct Check {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  std::string relation;  // "<", "<=", "==0 within", ...
  bool pass = false;
};

struct SuiteResult {
  std::string suite;
  std::vector<Check> checks;
  bool pass = true;
  double seconds = 0.0;

  void add(Check c) {
    pass = pass && c.pass;
    checks.push_back(std::move(c));
  }
};

SuiteResult run_derivative();   // analytic d/dt free energy vs finite differences
SuiteResult run_monotone();     // monotonicity, relaxation, stationarity
SuiteResult run_calculation();  // brute-force vs transfer-matrix log Z
SuiteResult run_sampler();      // trajectory sampler vs master equation
SuiteResult run_delta();        // sofic statistics on cycles and random actions
SuiteResult run_stability();    // two-approximation stability inequality
SuiteResult run_gibbs();        // Delta_a^R diagnostics and certificates
SuiteResult run_fed();          // free-energy-density estimator sanity
SuiteResult run_orbit();        // orbit copies of periodic measures

std::vector<SuiteResult> run_all();

// Suites reachable by name from the CLI; "fed" also runs "calculation".
std::vector<SuiteResult> run_named(const std::string& name);

}  // namespace soficspin::verify
