// Target measures: the infinite-volume references whose depth-R marginals
// the free-energy-density machinery compares against.
#pragma once

#include <vector>

#include "soficspin/model.hpp"
#include "soficspin/state.hpp"

namespace soficspin {

// Depth-R marginal of the two-sided Gibbs chain on Z for this model, laid
// out in the ball's vertex order. Requires r = 1.
PatternDistribution gibbs_chain_marginal(const SpinModel& model, const CayleyBall& ball);

struct TargetMeasure {
  enum class Kind { ExplicitMarginals, FiniteGibbs, ProductMeasure };
  Kind kind = Kind::ProductMeasure;
  PatternDistribution marginals;       // ExplicitMarginals: given at depth R*
  std::vector<double> site_probs;      // ProductMeasure: single-site law

  static TargetMeasure explicit_marginals(PatternDistribution P);
  static TargetMeasure product(std::vector<double> probs);
  static TargetMeasure gibbs_chain();  // Gibbs measure of the model on Z

  void validate() const;

  // Marginal at the ball's radius. ExplicitMarginals must have been given at
  // a radius >= ball.radius (prefix truncation); FiniteGibbs requires a
  // one-generator free/abelian spec (the group Z).
  PatternDistribution marginal_at(const GroupSpec& spec, const CayleyBall& ball,
                                  const SpinModel& model) const;
};

}  // namespace soficspin
