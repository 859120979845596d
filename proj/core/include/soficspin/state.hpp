// Microstates, dense states over A^V, depth-R patterns and their empirical
// distributions.
#pragma once

#include <map>
#include <vector>

#include "soficspin/cayley.hpp"
#include "soficspin/common.hpp"
#include "soficspin/homgraph.hpp"

namespace soficspin {

// Dense probability vectors are capped at |A|^n <= 2^20 states.
inline constexpr long long kDenseStateBudget = 1ll << 20;

// Mixed-radix indexing of A^V: site 0 is the least significant digit.
struct StateSpace {
  int sites = 0;
  int alphabet = 2;
  std::vector<long long> pow;  // pow[v] = |A|^v, plus pow[sites] = |A|^n

  StateSpace() = default;
  StateSpace(int n, int A);

  long long size() const { return pow[sites]; }
  Letter letter(long long idx, int v) const {
    return static_cast<Letter>((idx / pow[v]) % alphabet);
  }
  long long with_letter(long long idx, int v, Letter a) const {
    return idx + (static_cast<long long>(a) - letter(idx, v)) * pow[v];
  }
  long long index_of(const Microstate& x) const;
  Microstate microstate(long long idx) const;
};

struct DenseState {
  StateSpace space;
  std::vector<double> p;

  DenseState() = default;
  DenseState(const StateSpace& s, double fill = 0.0) : space(s), p(s.size(), fill) {}

  double total() const;
  // Entries nonnegative (within tol) and summing to 1 (within tol).
  void check_valid(double tol = 1e-12) const;

  static DenseState uniform(const StateSpace& s);
  static DenseState point_mass(const StateSpace& s, const Microstate& x);
  // Product measure with the given single-site law.
  static DenseState product(const StateSpace& s, const std::vector<double>& site_probs);
};

struct Pattern {
  int radius = 0;
  std::vector<Letter> labels;  // one per ball vertex, in ball order
};

// Probability distribution over depth-R patterns. Keys are label arrays in
// the fixed BFS vertex order of the ball, so iteration is reproducible.
struct PatternDistribution {
  int radius = 0;
  std::map<std::vector<Letter>, double> w;

  double total() const;
  double weight(const std::vector<Letter>& labels) const;
  void add(const std::vector<Letter>& labels, double mass);
  void normalize();
};

// (Pi_v x)(gamma) = x(sigma^gamma v), evaluated over the ball's vertices.
Pattern lift(const HomGraph& hom, const Microstate& x, int v, const CayleyBall& ball);

// P_x = uniform average over v of the lifted patterns.
PatternDistribution empirical_micro(const HomGraph& hom, const Microstate& x,
                                    const CayleyBall& ball);

// P_zeta = zeta-weighted average of P_x over microstates.
PatternDistribution empirical_state(const HomGraph& hom, const DenseState& zeta,
                                    const CayleyBall& ball);

// Average restricted to vertices whose R-ball matches the Cayley ball
// (R = ball.radius). Throws NoGoodVertices when the good set is empty.
PatternDistribution good_vertex_empirical(const HomGraph& hom, const DenseState& zeta,
                                          const CayleyBall& ball);

// Total variation distance (half L1). Radii must agree.
double tv_distance(const PatternDistribution& P, const PatternDistribution& Q);

// Push-forward under truncation of patterns to the radius-Rp sub-ball.
// Smaller balls are vertex prefixes of larger ones, so truncation is a prefix.
PatternDistribution restrict(const PatternDistribution& P, const CayleyBall& ball, int Rp);

// All |A|^{|ball|} patterns in index order (small balls only).
std::vector<std::vector<Letter>> enumerate_patterns(const CayleyBall& ball, int alphabet);

}  // namespace soficspin
