// Glauber dynamics on finite graphs: exact master-equation evolution,
// jump-process trajectory sampling, free energy and its exact time
// derivative, and the two-approximation stability report.
#pragma once

#include <cstdint>
#include <vector>

#include "soficspin/model.hpp"
#include "soficspin/state.hpp"
#include "soficspin/transport.hpp"

namespace soficspin {

struct TrajectoryEvent {
  double time;
  int site;
  Letter new_letter;
};

// U(x) for every dense-state index.
std::vector<double> energy_table(const SpinModel& model, const HomGraph& hom);

// d/dt zeta{x} = sum_{v,a} [zeta{x^{v->a}} c_v(x^{v->a}, x(v)) - zeta{x} c_v(x,a)].
std::vector<double> master_rhs(const SpinModel& model, const HomGraph& hom,
                               const DenseState& zeta);

enum class Integrator { RK4, Uniformization };

// Exact evolution of the master equation to time t. RK4 renormalizes each
// step and rejects steps that produce negative probabilities beyond -1e-10
// (advising a smaller dt); uniformization sums the Poissonized jump chain to
// a 1e-14 tail and serves as an independent cross-check integrator.
DenseState evolve_exact(const SpinModel& model, const HomGraph& hom, const DenseState& zeta0,
                        double t, double dt, Integrator method = Integrator::RK4);

struct TrajectoryResult {
  Microstate final_state;
  std::vector<TrajectoryEvent> events;
};

// Exact-event simulation: total ring rate n, uniform site choice, heat-bath
// resampling. Bit-reproducible for a fixed seed.
TrajectoryResult sample_trajectory(const SpinModel& model, const HomGraph& hom,
                                   const Microstate& x0, double t, std::uint64_t seed);

// In-place advance of a microstate from time t_from to t_to; returns the
// number of rings. Used for long sampling loops that do not keep events.
long advance_microstate(const SpinModel& model, const HomGraph& hom, Microstate& x,
                        double t_from, double t_to, Rng& rng);

// F0(s) = s - s log s - 1 for s > 0, -1 at s = 0. Concave, <= 0, = 0 iff s = 1.
double F0(double s);

// zeta(U) - H(zeta) = sum_x zeta{x} log(zeta{x}/exp(-U(x))), with 0 log 0 = 0.
double free_energy(const SpinModel& model, const HomGraph& hom, const DenseState& zeta);

// Exact time derivative of the free energy:
//   sum_{x,v,a} F0( e^{Phi_v(x^{v->a}) - Phi_v(x)} zeta{x^{v->a}}/zeta{x} )
//                zeta{x} c_v(x,a).
// Requires full support (evolve for any t > 0 first); always <= 0, and 0
// exactly at the finitary Gibbs state.
double free_energy_derivative(const SpinModel& model, const HomGraph& hom,
                              const DenseState& zeta);

// ---------------------------------------------------------------------------
// Stability of empirical distributions under the dynamics
// ---------------------------------------------------------------------------

struct StabilityReport {
  double t = 0.0;
  int R = 0;
  double delta_a = 0.0, delta_b = 0.0;  // Delta^sigma for the two actions
  double M = 0.0;
  double initial_upper = 0.0;           // certified d-bar upper bound at time 0
  DbarInterval measured;                // d-bar interval at time t
  double bound = 0.0;                   // [(Da+Db) t + initial_upper] e^{Mt}
  bool pass = false;                    // measured.upper <= bound
  long n_samples = 0;                   // 0 for the exact dense route
};

// Exact dense route: evolves both states, compares depth-R empirical
// distributions against the theorem bound.
StabilityReport stability_gap(const GroupSpec& spec, const SpinModel& model,
                              const HomGraph& hom_a, const HomGraph& hom_b,
                              const DenseState& zeta0a, const DenseState& zeta0b,
                              double t, int R, double dt = 1e-3, int delta_rmax = 16);

// Exact depth-R empirical distribution of a product state (no evolution).
PatternDistribution empirical_product_exact(const HomGraph& hom,
                                            const std::vector<double>& site_probs,
                                            const CayleyBall& ball);

// Monte-Carlo route for systems beyond the dense budget: both systems start
// from the same product state; time-t pattern marginals are estimated from
// n_samples seeded trajectories, the initial distribution is exact.
StabilityReport stability_gap_mc(const GroupSpec& spec, const SpinModel& model,
                                 const HomGraph& hom_a, const HomGraph& hom_b,
                                 const std::vector<double>& site_probs, double t, int R,
                                 long n_samples, std::uint64_t seed, int delta_rmax = 16);

}  // namespace soficspin
