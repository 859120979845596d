// Gibbsness tests for depth-R pattern marginals: the Delta_a^R statistic,
// conditional-kernel checks at the root, and non-Gibbsness certificates.
#pragma once

#include <optional>
#include <vector>

#include "soficspin/model.hpp"
#include "soficspin/state.hpp"

namespace soficspin {

// Average failure of mu_R to satisfy the Gibbs conditional at the root for
// letter a:
//   sum_y mu{y} F0( e^{Phi_e(y^{e->a}) - Phi_e(y)} mu{y^{e->a}} / mu{y} ).
// Terms with mu{y} = 0 vanish; mu{y} > 0 with mu{y^{e->a}} = 0 contribute
// -mu{y}. Requires R >= 1 (Phi_e reads the radius-1 neighborhood).
double delta_aR(const PatternDistribution& mu, const SpinModel& model, Letter a,
                const CayleyBall& ball);

enum class WitnessKind { SupportViolation, NegativeTerm };

struct GibbsWitness {
  WitnessKind kind = WitnessKind::NegativeTerm;
  std::vector<Letter> pattern;
  Letter letter = 0;
  double term = 0.0;          // the (negative) F0 term, weighted by mu{y}
  double deficit = 0.0;       // -term
  double deficit_rate = 0.0;  // s * deficit / 2, the strict-decrease rate candidate
};

enum class GibbsVerdict { ConsistentToDepth, Violation };

struct GibbsReport {
  int R = 0;
  double tol = 0.0;
  std::vector<double> delta_per_letter;    // Delta_a^R for each a
  bool full_support = false;               // mu_R positive on all patterns
  double max_conditional_deviation = 0.0;  // worst |cond(a|y) - c_e(y,a)| on the support
  GibbsVerdict verdict = GibbsVerdict::ConsistentToDepth;
  std::optional<GibbsWitness> witness;
};

// Compares the conditional law of the root letter given the rest of the
// pattern against the heat-bath kernel, pointwise on the support, and
// aggregates Delta_a^R for every letter.
GibbsReport gibbs_conditional_check(const PatternDistribution& mu, const SpinModel& model,
                                    const CayleyBall& ball, double tol);

// True iff zeta is the finitary Gibbs state within tol (max absolute
// deviation from exp{-U}/Z).
bool is_gibbs_finite(const DenseState& zeta, const SpinModel& model, const HomGraph& hom,
                     double tol);

// Kernel lower bound s = min over configurations on B(e,1) of the heat-bath
// probability of the root letter. Exact by enumeration.
double kernel_lower_bound(const SpinModel& model, const CayleyBall& ball);

// Maximizing-deficit witness of non-Gibbsness at this depth, or nullopt when
// every term is zero within `threshold`.
std::optional<GibbsWitness> non_gibbs_certificate(const PatternDistribution& mu,
                                                  const SpinModel& model,
                                                  const CayleyBall& ball,
                                                  double threshold = 1e-9);

}  // namespace soficspin
