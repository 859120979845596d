// Exact optimal transport between pattern distributions and the certified
// truncated transportation-metric interval.
#pragma once

#include <tuple>
#include <vector>

#include "soficspin/cayley.hpp"
#include "soficspin/state.hpp"

namespace soficspin {

struct TransportSolution {
  double value = 0.0;
  std::vector<double> dual_a;  // row potentials u_i (a subgradient in a)
  std::vector<double> dual_b;  // column potentials v_j
  std::vector<std::tuple<int, int, double>> plan;  // (i, j, mass), basis arcs
};

// Exact transportation simplex for min <C, x> with row marginals a and
// column marginals b (both normalized to total mass 1). Optimality is
// verified through reduced costs and the duality gap; a solution that cannot
// be certified raises SolverFailure instead of returning a number.
TransportSolution solve_transport(const std::vector<double>& a,
                                  const std::vector<double>& b,
                                  const std::vector<std::vector<double>>& cost);

// Ground cost between two depth-R patterns:
// sum over ball vertices of (3r)^{-depth} [p != q].
double pattern_cost(const CayleyBall& ball, const std::vector<Letter>& p,
                    const std::vector<Letter>& q);

struct DbarInterval {
  double lower = 0.0;  // exact OT value over the truncated cost
  double upper = 0.0;  // lower + metric tail beyond radius R
};

// Certified interval for the transportation distance between any two
// measures on A^Gamma having these depth-R marginals.
DbarInterval dbar_truncated(const PatternDistribution& P, const PatternDistribution& Q,
                            const GroupSpec& spec, const CayleyBall& ball);

}  // namespace soficspin
