#include "soficspin/diagnostics.hpp"

#include <algorithm>
#include <cmath>

namespace soficspin {

namespace {

// Weighted F0 term mu{y} * F0(e^{dphi} * wa / w), evaluated in log space.
double weighted_F0_term(double w, double wa, double dphi) {
  if (w <= 0.0) return 0.0;
  if (wa <= 0.0) return -w;  // F0(0) = -1
  const double L = dphi + std::log(wa) - std::log(w);
  return std::exp(std::log(w) + L) * (1.0 - L) - w;
}

}  // namespace

double delta_aR(const PatternDistribution& mu, const SpinModel& model, Letter a,
                const CayleyBall& ball) {
  model.validate();
  if (ball.radius < 1) throw RadiusMismatch("delta_aR: requires R >= 1");
  if (mu.radius != ball.radius) throw RadiusMismatch("delta_aR: ball/marginal radius mismatch");
  const auto slots = root_neighbor_slots(ball);
  double total = 0.0;
  std::vector<Letter> flipped;
  for (const auto& [y, w] : mu.w) {
    if (w <= 0.0 || y[0] == a) continue;  // F0(1) = 0 when a == y(e)
    EdgeContext nbrs(slots.size());
    for (size_t k = 0; k < slots.size(); ++k) nbrs[k] = y[slots[k]];
    const double dphi = phi(model, a, nbrs) - phi(model, y[0], nbrs);
    flipped = y;
    flipped[0] = a;
    total += weighted_F0_term(w, mu.weight(flipped), dphi);
  }
  return total;
}

GibbsReport gibbs_conditional_check(const PatternDistribution& mu, const SpinModel& model,
                                    const CayleyBall& ball, double tol) {
  model.validate();
  if (ball.radius < 1)
    throw RadiusMismatch("gibbs_conditional_check: requires R >= 1");
  GibbsReport rep;
  rep.R = ball.radius;
  rep.tol = tol;
  for (int a = 0; a < model.alphabet; ++a)
    rep.delta_per_letter.push_back(delta_aR(mu, model, static_cast<Letter>(a), ball));

  const double pattern_count = std::pow(static_cast<double>(model.alphabet), ball.size());
  size_t positive = 0;
  for (const auto& [y, w] : mu.w)
    if (w > 0) ++positive;
  rep.full_support = static_cast<double>(positive) == pattern_count;

  const auto slots = root_neighbor_slots(ball);
  std::vector<Letter> flipped;
  for (const auto& [y, w] : mu.w) {
    if (w <= 0.0) continue;
    EdgeContext nbrs(slots.size());
    for (size_t k = 0; k < slots.size(); ++k) nbrs[k] = y[slots[k]];
    const std::vector<double> c = kernel(model, nbrs);
    flipped = y;
    double denom = 0.0;
    std::vector<double> root_weights(model.alphabet);
    for (int b = 0; b < model.alphabet; ++b) {
      flipped[0] = static_cast<Letter>(b);
      root_weights[b] = mu.weight(flipped);
      denom += root_weights[b];
    }
    for (int a = 0; a < model.alphabet; ++a) {
      const double cond = root_weights[a] / denom;
      const double dev = std::abs(cond - c[a]);
      if (dev > rep.max_conditional_deviation) {
        rep.max_conditional_deviation = dev;
        GibbsWitness wit;
        wit.kind = root_weights[a] == 0.0 ? WitnessKind::SupportViolation
                                          : WitnessKind::NegativeTerm;
        wit.pattern = y;
        wit.letter = static_cast<Letter>(a);
        wit.term = -dev;
        wit.deficit = dev;
        rep.witness = wit;
      }
    }
  }
  rep.verdict = rep.max_conditional_deviation <= tol ? GibbsVerdict::ConsistentToDepth
                                                     : GibbsVerdict::Violation;
  if (rep.verdict == GibbsVerdict::ConsistentToDepth) rep.witness.reset();
  return rep;
}

bool is_gibbs_finite(const DenseState& zeta, const SpinModel& model, const HomGraph& hom,
                     double tol) {
  if (std::isinf(tol)) return true;
  GibbsResult gibbs = gibbs_finite(model, hom);
  double dev = 0.0;
  for (long long idx = 0; idx < zeta.space.size(); ++idx)
    dev = std::max(dev, std::abs(zeta.p[idx] - gibbs.state.p[idx]));
  return dev <= tol;
}

double kernel_lower_bound(const SpinModel& model, const CayleyBall& ball) {
  const auto slots = root_neighbor_slots(ball);
  // Distinct neighbor ball-vertices; slots may repeat them.
  std::vector<int> distinct;
  std::vector<int> which(slots.size());
  for (size_t k = 0; k < slots.size(); ++k) {
    int id = -1;
    for (size_t d = 0; d < distinct.size(); ++d)
      if (distinct[d] == slots[k]) id = static_cast<int>(d);
    if (id < 0) {
      id = static_cast<int>(distinct.size());
      distinct.push_back(slots[k]);
    }
    which[k] = id;
  }
  const int D = static_cast<int>(distinct.size());
  const int A = model.alphabet;
  std::vector<Letter> assign(D, 0);
  EdgeContext nbrs(slots.size());
  double s = 1.0;
  while (true) {
    for (size_t k = 0; k < slots.size(); ++k) nbrs[k] = assign[which[k]];
    const std::vector<double> c = kernel(model, nbrs);
    for (int a = 0; a < A; ++a) s = std::min(s, c[a]);
    int d = 0;
    while (d < D) {
      if (++assign[d] < A) break;
      assign[d] = 0;
      ++d;
    }
    if (d == D) break;
  }
  return s;
}

std::optional<GibbsWitness> non_gibbs_certificate(const PatternDistribution& mu,
                                                  const SpinModel& model,
                                                  const CayleyBall& ball, double threshold) {
  model.validate();
  if (ball.radius < 1)
    throw RadiusMismatch("non_gibbs_certificate: requires R >= 1");
  const auto slots = root_neighbor_slots(ball);
  const double s = kernel_lower_bound(model, ball);
  std::optional<GibbsWitness> best;
  std::vector<Letter> flipped;
  for (const auto& [y, w] : mu.w) {
    if (w <= 0.0) continue;
    EdgeContext nbrs(slots.size());
    for (size_t k = 0; k < slots.size(); ++k) nbrs[k] = y[slots[k]];
    for (int a = 0; a < model.alphabet; ++a) {
      if (y[0] == static_cast<Letter>(a)) continue;
      flipped = y;
      flipped[0] = static_cast<Letter>(a);
      const double wa = mu.weight(flipped);
      const double dphi =
          phi(model, static_cast<Letter>(a), nbrs) - phi(model, y[0], nbrs);
      const double term = weighted_F0_term(w, wa, dphi);
      if (term < -threshold && (!best || term < best->term)) {
        GibbsWitness wit;
        wit.kind = wa == 0.0 ? WitnessKind::SupportViolation : WitnessKind::NegativeTerm;
        wit.pattern = y;
        wit.letter = static_cast<Letter>(a);
        wit.term = term;
        wit.deficit = -term;
        wit.deficit_rate = 0.5 * s * wit.deficit;
        best = wit;
      }
    }
  }
  return best;
}

}  // namespace soficspin
