#include "soficspin/targets.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace soficspin {

namespace {

// Signed chain position of a ball vertex of Z: s^k at +k, s^{-k} at -k.
int chain_position(const Word& w) {
  if (w.empty()) return 0;
  for (int l : w)
    if (l != w[0]) throw ConfigError("gibbs_chain_marginal: ball is not a Z ball");
  if (w[0] == 0) return static_cast<int>(w.size());
  if (w[0] == 1) return -static_cast<int>(w.size());
  throw ConfigError("gibbs_chain_marginal: ball is not a Z ball");
}

}  // namespace

PatternDistribution gibbs_chain_marginal(const SpinModel& model, const CayleyBall& ball) {
  model.validate();
  if (ball.r != 1) throw ConfigError("gibbs_chain_marginal: requires r = 1");
  const int A = model.alphabet;
  const int R = ball.radius;

  // Symmetrized transfer matrix S = D^{1/2} B D^{1/2}; its top eigenpair
  // yields the stationary Markov chain of the two-sided Gibbs measure.
  Eigen::MatrixXd S(A, A);
  for (int a = 0; a < A; ++a)
    for (int b = 0; b < A; ++b)
      S(a, b) = std::exp(-0.5 * model.h[a] - 0.5 * model.h[b] - model.J[a][b]);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
  if (es.info() != Eigen::Success)
    throw SolverFailure("gibbs_chain_marginal: eigendecomposition failed");
  const double lambda = es.eigenvalues()(A - 1);
  Eigen::VectorXd w = es.eigenvectors().col(A - 1);
  if (w(0) < 0) w = -w;  // Perron vector, strictly positive

  std::vector<double> pi(A);
  for (int a = 0; a < A; ++a) pi[a] = w(a) * w(a);
  // P(a,b) = T(a,b) phi(b) / (lambda phi(a)) with phi = D^{1/2} w.
  std::vector<std::vector<double>> P(A, std::vector<double>(A));
  for (int a = 0; a < A; ++a) {
    const double phi_a = std::exp(-0.5 * model.h[a]) * w(a);
    for (int b = 0; b < A; ++b) {
      const double T_ab = std::exp(-model.h[a] - model.J[a][b]);
      const double phi_b = std::exp(-0.5 * model.h[b]) * w(b);
      P[a][b] = T_ab * phi_b / (lambda * phi_a);
    }
  }

  // Ball vertex -> signed chain position.
  const int width = 2 * R + 1;
  std::vector<int> pos_of_vertex(ball.size());
  for (int j = 0; j < ball.size(); ++j)
    pos_of_vertex[j] = chain_position(ball.vertices[j]) + R;  // shift to [0, width)

  PatternDistribution out;
  out.radius = R;
  std::vector<Letter> window(width, 0), labels(ball.size());
  while (true) {
    double mass = pi[window[0]];
    for (int k = 0; k + 1 < width; ++k) mass *= P[window[k]][window[k + 1]];
    for (int j = 0; j < ball.size(); ++j) labels[j] = window[pos_of_vertex[j]];
    out.w[labels] += mass;
    int k = 0;
    while (k < width) {
      if (++window[k] < A) break;
      window[k] = 0;
      ++k;
    }
    if (k == width) break;
  }
  return out;
}

TargetMeasure TargetMeasure::explicit_marginals(PatternDistribution P) {
  TargetMeasure t;
  t.kind = Kind::ExplicitMarginals;
  t.marginals = std::move(P);
  t.validate();
  return t;
}

TargetMeasure TargetMeasure::product(std::vector<double> probs) {
  TargetMeasure t;
  t.kind = Kind::ProductMeasure;
  t.site_probs = std::move(probs);
  t.validate();
  return t;
}

TargetMeasure TargetMeasure::gibbs_chain() {
  TargetMeasure t;
  t.kind = Kind::FiniteGibbs;
  return t;
}

void TargetMeasure::validate() const {
  switch (kind) {
    case Kind::ExplicitMarginals: {
      if (marginals.w.empty()) throw ConfigError("TargetMeasure: empty marginals");
      double s = 0.0;
      for (const auto& [k, v] : marginals.w) {
        if (v < 0) throw ConfigError("TargetMeasure: negative weight");
        s += v;
      }
      if (std::abs(s - 1.0) > 1e-9)
        throw ConfigError("TargetMeasure: marginal weights do not sum to 1");
      break;
    }
    case Kind::ProductMeasure: {
      double s = 0.0;
      for (double v : site_probs) {
        if (v < 0) throw ConfigError("TargetMeasure: negative site probability");
        s += v;
      }
      if (std::abs(s - 1.0) > 1e-9)
        throw ConfigError("TargetMeasure: site probabilities do not sum to 1");
      break;
    }
    case Kind::FiniteGibbs:
      break;
  }
}

PatternDistribution TargetMeasure::marginal_at(const GroupSpec& spec, const CayleyBall& ball,
                                               const SpinModel& model) const {
  switch (kind) {
    case Kind::ProductMeasure: {
      if (static_cast<int>(site_probs.size()) != model.alphabet)
        throw ConfigError("TargetMeasure: site law does not match the alphabet");
      PatternDistribution P;
      P.radius = ball.radius;
      for (const auto& labels : enumerate_patterns(ball, model.alphabet)) {
        double mass = 1.0;
        for (Letter l : labels) mass *= site_probs[l];
        if (mass > 0) P.w[labels] = mass;
      }
      return P;
    }
    case Kind::ExplicitMarginals: {
      if (marginals.radius < ball.radius)
        throw ConfigError("TargetMeasure: marginals shallower than requested radius");
      if (marginals.radius == ball.radius) return marginals;
      // Smaller balls are vertex prefixes of larger ones.
      PatternDistribution Q;
      Q.radius = ball.radius;
      const size_t keep = static_cast<size_t>(ball.size());
      for (const auto& [labels, mass] : marginals.w) {
        std::vector<Letter> head(labels.begin(), labels.begin() + keep);
        Q.w[head] += mass;
      }
      return Q;
    }
    case Kind::FiniteGibbs: {
      if (spec.r != 1 || (spec.family != GroupFamily::FreeGroup &&
                          spec.family != GroupFamily::FreeAbelian))
        throw ConfigError("TargetMeasure: Gibbs chain target requires the group Z");
      return gibbs_chain_marginal(model, ball);
    }
  }
  throw ConfigError("TargetMeasure: unknown kind");
}

}  // namespace soficspin
