// Free energy density relative to a sofic approximation sequence:
// constrained minimization over consistency sets, the finitary-Gibbs
// shortcut, and the universal bounds.
#pragma once

#include <cstdint>
#include <vector>

#include "soficspin/dynamics.hpp"
#include "soficspin/model.hpp"
#include "soficspin/targets.hpp"
#include "soficspin/transport.hpp"

namespace soficspin {

struct SoficSequenceSpec {
  enum class Generator { Cycles, Tori, RandomFree, ExplicitList };
  Generator generator = Generator::Cycles;
  std::vector<int> sizes;                    // Cycles / RandomFree: strictly increasing
  std::vector<std::vector<int>> torus_dims;  // Tori
  std::vector<std::uint64_t> seeds;          // RandomFree: one per size
  std::vector<HomGraph> explicit_list;

  std::vector<HomGraph> materialize(const GroupSpec& spec) const;
};

struct FedOptions {
  int max_iterations = 1500;
  int polish_iterations = 300;
  int restarts = 5;
  double objective_tol = 1e-8;
  std::uint64_t seed = 20240915;
  int delta_rmax = 12;  // truncation radius for the reported Delta values
  int workers = 1;      // parallelism over independent (member, epsilon) cells
};

enum class CellStatus { Feasible, InfeasibleCertified, Flagged };

struct ConsistencyResult {
  double value = 0.0;       // per-site zeta(U) - H(zeta); meaningless when infeasible
  bool infeasible = false;  // the +infinity marker
  CellStatus status = CellStatus::Flagged;
  double dbar_upper = 0.0;  // certified residual at the reported witness
  int iterations = 0;
  DenseState witness;       // the feasible state achieving `value`
};

// inf over states zeta with dbar_truncated(P_zeta at depth R, target).upper
// <= epsilon of (1/|V|) [zeta(U) - H(zeta)]. Returns the +infinity marker
// with an InfeasibleCertified status when the convex feasibility subproblem
// stalls above epsilon; a finite value is always achieved by the returned
// witness and re-verified post hoc.
ConsistencyResult consistency_infimum(const GroupSpec& spec, const SpinModel& model,
                                      const HomGraph& hom, const TargetMeasure& target,
                                      double epsilon, int R, const FedOptions& opts = {});

struct FedCell {
  int n = 0;
  double epsilon = 0.0;
  int R = 0;
  bool is_infinite = false;
  double value = 0.0;
  CellStatus status = CellStatus::Flagged;
  double residual = 0.0;  // dbar upper at the witness
  int iterations = 0;
};

struct FedEstimate {
  std::vector<FedCell> cells;              // row-major over (member, epsilon)
  std::vector<double> member_deltas;       // Delta^sigma for each member
  bool headline_infinite = false;
  double headline = 0.0;                   // largest n, smallest feasible epsilon
  int headline_n = 0;
  double headline_epsilon = 0.0;
};

// Table of consistency_infimum over (member, epsilon). Values at looser
// epsilon are tightened by tighter-epsilon witnesses (which remain feasible),
// so each member's column is monotone by construction.
FedEstimate fed_estimate(const GroupSpec& spec, const SoficSequenceSpec& seq,
                         const SpinModel& model, const TargetMeasure& target,
                         const std::vector<double>& eps_schedule, int R,
                         const FedOptions& opts = {});

struct FedLogZResult {
  std::vector<std::pair<int, double>> per_n;  // (|V_n|, (1/|V_n|) log Z_n)
  double value = 0.0;                         // -min_n (1/|V_n|) log Z_n
};

// Finitary-Gibbs shortcut: when the Gibbs empirical distributions converge
// to the target, fed equals -liminf (1/|V_n|) log Z_n. Cycles and tori use
// transfer matrices; other members fall back to brute force within budget.
FedLogZResult fed_via_logZ(const GroupSpec& spec, const SoficSequenceSpec& seq,
                           const SpinModel& model);

// Membership in [u_min - log|A|, u_max] (or +infinity).
bool fed_bounds_check(double value, bool is_infinite, const SpinModel& model, int r);

}  // namespace soficspin
