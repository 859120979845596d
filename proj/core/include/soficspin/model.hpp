// Nearest-neighbor spin models: local energies Phi_v, heat-bath kernels c_v,
// total energy U, finitary Gibbs measures, and the dependence constant M.
//
// Energies are in natural units; inverse temperature is folded into J
// (the standard Ising preset uses J(a,b) = -beta s(a) s(b)).
#pragma once

#include <utility>
#include <vector>

#include "soficspin/cayley.hpp"
#include "soficspin/homgraph.hpp"
#include "soficspin/state.hpp"

namespace soficspin {

struct SpinModel {
  int alphabet = 2;
  std::vector<std::vector<double>> J;  // |A| x |A|, symmetric
  std::vector<double> h;               // |A|

  void validate() const;  // J symmetric, sizes consistent, |A| >= 2

  static SpinModel zero(int alphabet);
  // A = {-1, +1} encoded as letters {0, 1}: J(a,b) = -beta s(a) s(b),
  // h(a) = -field s(a).
  static SpinModel ising(double beta, double field = 0.0);
};

// The 2r neighbor letters of a site, with multiplicity (generators and
// inverses; repeated when sigma identifies them).
using EdgeContext = std::vector<Letter>;

// Neighbor letters of site v under the action: x(sigma^s v) for s in S.
EdgeContext neighbors_of(const SpinModel& model, const HomGraph& hom,
                         const Microstate& x, int v);
// Same, reading letters off a dense-state index.
EdgeContext neighbors_of(const SpinModel& model, const HomGraph& hom,
                         const StateSpace& space, long long idx, int v);
// Neighbor letters of the root in a depth >= 1 pattern.
EdgeContext root_neighbors(const CayleyBall& ball, const std::vector<Letter>& labels);
// Ball-vertex indices of the root's 2r neighbor slots.
std::vector<int> root_neighbor_slots(const CayleyBall& ball);

// Phi_v(x) = h(x(v)) + sum_{s in S} J(x(v), x(sigma^s v)).
double phi(const SpinModel& model, Letter x_v, const EdgeContext& nbrs);

// Heat-bath kernel c_v(x, .): probability vector proportional to
// exp{-Phi_v(x^{v->a})}; independent of x(v).
std::vector<double> kernel(const SpinModel& model, const EdgeContext& nbrs);
std::vector<double> kernel_at(const SpinModel& model, const HomGraph& hom,
                              const Microstate& x, int v);

// U(x) = sum_v h(x(v)) + sum_v sum_{i in [r]} J(x(v), x(sigma^{s_i} v));
// each directed edge counted once.
double total_energy(const SpinModel& model, const HomGraph& hom, const Microstate& x);
double total_energy(const SpinModel& model, const HomGraph& hom,
                    const StateSpace& space, long long idx);

// (u_min, u_max) with u_max = max_a (h(a) + r max_b J(a,b)) and dually.
std::pair<double, double> u_bounds(const SpinModel& model, int r);

struct GibbsResult {
  DenseState state;
  double log_Z = 0.0;
};

// xi_V = exp{-U}/Z over all of A^V, log Z via log-sum-exp.
GibbsResult gibbs_finite(const SpinModel& model, const HomGraph& hom);

// log Z of the n-cycle over Z via the |A| x |A| transfer matrix
// T(a,b) = exp{-h(a) - J(a,b)}; log Z = log trace(T^n).
double log_partition_cycle(const SpinModel& model, int n);

// Row-transfer-matrix log Z for a 2D torus over Z^2 (dims = {rows, cols});
// the row space |A|^rows must stay within the dense budget.
double log_partition_torus(const SpinModel& model, const std::vector<int>& dims);

// c_u(v) = sup over configurations differing only at v of the total-variation
// distance between the kernels at u. Exact by enumeration; u, v are vertex
// indices into a ball of the spec with radius >= 1.
double dependence_coefficient(const SpinModel& model, const GroupSpec& spec, int u, int v);

// M = sum_{h in B(e,1)} c_h(e) (3r)^{d(h,e)}, evaluated at the root by vertex
// transitivity. Always <= 12 r^2.
double M_constant(const SpinModel& model, const GroupSpec& spec);

// log(sum exp(v)) guarded against overflow.
double log_sum_exp(const std::vector<double>& v);

}  // namespace soficspin
