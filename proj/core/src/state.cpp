#include "soficspin/state.hpp"

#include <algorithm>
#include <cmath>

namespace soficspin {

StateSpace::StateSpace(int n, int A) : sites(n), alphabet(A) {
  if (n < 1 || A < 2) throw ConfigError("StateSpace: need n >= 1 and |A| >= 2");
  pow.resize(n + 1);
  pow[0] = 1;
  for (int v = 0; v < n; ++v) {
    if (pow[v] > kDenseStateBudget / A)
      throw BudgetExceeded("StateSpace: |A|^n exceeds the dense-state budget");
    pow[v + 1] = pow[v] * A;
  }
}

long long StateSpace::index_of(const Microstate& x) const {
  long long idx = 0;
  for (int v = 0; v < sites; ++v) idx += static_cast<long long>(x[v]) * pow[v];
  return idx;
}

Microstate StateSpace::microstate(long long idx) const {
  Microstate x(sites);
  for (int v = 0; v < sites; ++v) x[v] = letter(idx, v);
  return x;
}

double DenseState::total() const {
  double s = 0.0;
  for (double v : p) s += v;
  return s;
}

void DenseState::check_valid(double tol) const {
  for (double v : p)
    if (v < -tol) throw SolverFailure("DenseState: negative probability");
  if (std::abs(total() - 1.0) > tol)
    throw SolverFailure("DenseState: probabilities do not sum to 1");
}

DenseState DenseState::uniform(const StateSpace& s) {
  DenseState z(s, 1.0 / static_cast<double>(s.size()));
  return z;
}

DenseState DenseState::point_mass(const StateSpace& s, const Microstate& x) {
  DenseState z(s);
  z.p[s.index_of(x)] = 1.0;
  return z;
}

DenseState DenseState::product(const StateSpace& s, const std::vector<double>& site_probs) {
  if (static_cast<int>(site_probs.size()) != s.alphabet)
    throw ConfigError("DenseState::product: site law size mismatch");
  DenseState z(s);
  for (long long idx = 0; idx < s.size(); ++idx) {
    double w = 1.0;
    for (int v = 0; v < s.sites; ++v) w *= site_probs[s.letter(idx, v)];
    z.p[idx] = w;
  }
  return z;
}

double PatternDistribution::total() const {
  double s = 0.0;
  for (const auto& [k, v] : w) s += v;
  return s;
}

double PatternDistribution::weight(const std::vector<Letter>& labels) const {
  auto it = w.find(labels);
  return it == w.end() ? 0.0 : it->second;
}

void PatternDistribution::add(const std::vector<Letter>& labels, double mass) {
  if (mass != 0.0) w[labels] += mass;
}

void PatternDistribution::normalize() {
  double s = total();
  if (s <= 0) throw SolverFailure("PatternDistribution: empty distribution");
  for (auto& [k, v] : w) v /= s;
}

// ---------------------------------------------------------------------------

namespace {

// phi(j) = sigma^{gamma_j}(v) along the ball's BFS tree.
void lift_map(const HomGraph& hom, int v, const CayleyBall& ball, std::vector<int>& phi) {
  phi.resize(ball.size());
  phi[0] = v;
  for (int j = 1; j < ball.size(); ++j)
    phi[j] = hom.step(ball.parent_letter[j], phi[ball.parent[j]]);
}

}  // namespace

Pattern lift(const HomGraph& hom, const Microstate& x, int v, const CayleyBall& ball) {
  std::vector<int> phi;
  lift_map(hom, v, ball, phi);
  Pattern pat;
  pat.radius = ball.radius;
  pat.labels.resize(ball.size());
  for (int j = 0; j < ball.size(); ++j) pat.labels[j] = x[phi[j]];
  return pat;
}

PatternDistribution empirical_micro(const HomGraph& hom, const Microstate& x,
                                    const CayleyBall& ball) {
  PatternDistribution P;
  P.radius = ball.radius;
  std::vector<int> phi;
  std::vector<Letter> labels(ball.size());
  const double unit = 1.0 / hom.n;
  for (int v = 0; v < hom.n; ++v) {
    lift_map(hom, v, ball, phi);
    for (int j = 0; j < ball.size(); ++j) labels[j] = x[phi[j]];
    P.w[labels] += unit;
  }
  return P;
}

PatternDistribution empirical_state(const HomGraph& hom, const DenseState& zeta,
                                    const CayleyBall& ball) {
  PatternDistribution P;
  P.radius = ball.radius;
  // Precompute all lift maps once; the state loop then reads letters directly.
  std::vector<std::vector<int>> phis(hom.n);
  for (int v = 0; v < hom.n; ++v) lift_map(hom, v, ball, phis[v]);
  std::vector<Letter> labels(ball.size());
  const double unit = 1.0 / hom.n;
  for (long long idx = 0; idx < zeta.space.size(); ++idx) {
    const double mass = zeta.p[idx];
    if (mass == 0.0) continue;
    for (int v = 0; v < hom.n; ++v) {
      const auto& phi = phis[v];
      for (int j = 0; j < ball.size(); ++j)
        labels[j] = zeta.space.letter(idx, phi[j]);
      P.w[labels] += mass * unit;
    }
  }
  return P;
}

PatternDistribution good_vertex_empirical(const HomGraph& hom, const DenseState& zeta,
                                          const CayleyBall& ball) {
  std::vector<int> good;
  for (int v = 0; v < hom.n; ++v)
    if (largest_good_radius(hom, v, ball) >= ball.radius) good.push_back(v);
  if (good.empty())
    throw NoGoodVertices("good_vertex_empirical: no vertex matches the Cayley ball");

  PatternDistribution P;
  P.radius = ball.radius;
  std::vector<std::vector<int>> phis(good.size());
  for (size_t gi = 0; gi < good.size(); ++gi) lift_map(hom, good[gi], ball, phis[gi]);
  std::vector<Letter> labels(ball.size());
  const double unit = 1.0 / static_cast<double>(good.size());
  for (long long idx = 0; idx < zeta.space.size(); ++idx) {
    const double mass = zeta.p[idx];
    if (mass == 0.0) continue;
    for (const auto& phi : phis) {
      for (int j = 0; j < ball.size(); ++j)
        labels[j] = zeta.space.letter(idx, phi[j]);
      P.w[labels] += mass * unit;
    }
  }
  return P;
}

double tv_distance(const PatternDistribution& P, const PatternDistribution& Q) {
  if (P.radius != Q.radius) throw RadiusMismatch("tv_distance: radii differ");
  double l1 = 0.0;
  auto ip = P.w.begin();
  auto iq = Q.w.begin();
  while (ip != P.w.end() || iq != Q.w.end()) {
    if (iq == Q.w.end() || (ip != P.w.end() && ip->first < iq->first)) {
      l1 += std::abs(ip->second);
      ++ip;
    } else if (ip == P.w.end() || iq->first < ip->first) {
      l1 += std::abs(iq->second);
      ++iq;
    } else {
      l1 += std::abs(ip->second - iq->second);
      ++ip;
      ++iq;
    }
  }
  return 0.5 * l1;
}

PatternDistribution restrict(const PatternDistribution& P, const CayleyBall& ball, int Rp) {
  if (Rp > P.radius) throw RadiusMismatch("restrict: target radius larger than source");
  if (ball.radius < P.radius) throw RadiusMismatch("restrict: ball smaller than source radius");
  const size_t keep = static_cast<size_t>(ball.prefix_size(Rp));
  PatternDistribution Q;
  Q.radius = Rp;
  for (const auto& [labels, mass] : P.w) {
    std::vector<Letter> head(labels.begin(), labels.begin() + keep);
    Q.w[head] += mass;
  }
  return Q;
}

std::vector<std::vector<Letter>> enumerate_patterns(const CayleyBall& ball, int alphabet) {
  const int nb = ball.size();
  double count = std::pow(static_cast<double>(alphabet), nb);
  if (count > 1 << 20)
    throw BudgetExceeded("enumerate_patterns: pattern space too large");
  std::vector<std::vector<Letter>> out;
  out.reserve(static_cast<size_t>(count));
  std::vector<Letter> cur(nb, 0);
  while (true) {
    out.push_back(cur);
    int j = 0;
    while (j < nb) {
      if (++cur[j] < alphabet) break;
      cur[j] = 0;
      ++j;
    }
    if (j == nb) break;
  }
  return out;
}

}  // namespace soficspin
