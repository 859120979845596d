// Finite actions sigma in Hom(Gamma, Sym(V)): their labeled Schreier graphs,
// the local-similarity statistics delta_R and Delta, and constructions of
// such actions (orbit copies of periodic measures, random models for free
// groups and free products).
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "soficspin/cayley.hpp"
#include "soficspin/common.hpp"

namespace soficspin {

using Microstate = std::vector<Letter>;

struct HomGraph {
  int n = 0;                                  // |V|
  int r = 0;                                  // generator count
  std::vector<std::vector<int>> perms;        // images of s_1..s_r
  std::vector<std::vector<int>> inv_perms;    // cached inverses

  HomGraph() = default;
  // Checks each perm is a bijection and caches inverses.
  HomGraph(int n, std::vector<std::vector<int>> perms);

  // One step by a letter in [0, 2r).
  int step(int letter, int v) const {
    return letter < r ? perms[letter][v] : inv_perms[letter - r][v];
  }

  // sigma^w(v). A word l_1 l_2 ... l_k acts with the rightmost letter first,
  // so that apply(uw, v) = apply(u, apply(w, v)) matches the homomorphism
  // property sigma^{ab} = sigma^a sigma^b.
  int apply(const Word& w, int v) const;
};

struct ValidationReport {
  bool ok = true;
  int relator_index = -1;     // first violated relator
  Word relator;
  int witness_vertex = -1;    // vertex where it fails
  std::string message;
};

// True iff all perms are bijections and all defining relators of the spec act
// trivially. The report names the first violated relator and a witness vertex.
ValidationReport validate(const HomGraph& hom, const GroupSpec& spec);

// The forced candidate map gamma -> sigma^gamma(v), restricted to the ball,
// is an isomorphism of induced labeled directed subgraphs. `ball` may have
// radius larger than R; its prefix is used.
bool ball_isomorphic(const HomGraph& hom, int v, int R, const CayleyBall& ball);

// Largest R in [0, ball.radius] with ball_isomorphic(hom, v, R), or -1 if
// even R = 0 fails (a generator loop at v that the group does not have).
int largest_good_radius(const HomGraph& hom, int v, const CayleyBall& ball);

// Fraction of vertices failing ball_isomorphic at radius R.
double delta_R(const HomGraph& hom, int R, const CayleyBall& ball);

// All of delta_0 .. delta_{ball.radius} in one pass over vertices.
std::vector<double> delta_table(const HomGraph& hom, const CayleyBall& ball);

struct DeltaResult {
  double value = 0.0;          // min over R <= R_max of 9 (2/3)^R + 6 delta_R
  int minimizing_R = 0;
  double slack = 0.0;          // 9 (2/3)^{R_max}: gap to the untruncated inf
  std::vector<double> deltas;  // delta_R for R = 0..R_max
};

// Delta^sigma truncated at R_max. delta_R is nondecreasing in R, so the
// restriction overestimates the true infimum by at most the reported slack.
DeltaResult Delta(const HomGraph& hom, const GroupSpec& spec, int R_max);
DeltaResult Delta(const HomGraph& hom, const CayleyBall& ball);

// Fraction of v with sigma^w(v) = v.
double fixed_point_fraction(const HomGraph& hom, const Word& w);

// ---------------------------------------------------------------------------
// Periodic measures and orbit copies
// ---------------------------------------------------------------------------

// One finite orbit of a periodic shift-invariant measure, stored as a finite
// Gamma-set with a letter at each point (the value of the labeling at e).
struct Orbit {
  HomGraph action;
  std::vector<Letter> labels;
};

struct PeriodicMeasure {
  std::vector<Orbit> orbits;
  std::vector<double> weights;  // probability vector

  // weights form a probability vector; each orbit validates against the spec
  // and is transitive (a genuine single orbit).
  void validate(const GroupSpec& spec) const;
};

struct OrbitCopyResult {
  HomGraph hom;
  Microstate microstate;
  std::vector<double> realized_weights;  // m_i |orbit_i| / |V|
};

// V = disjoint union of multiplicities[i] copies of each orbit; sigma acts
// separately on each copy; the microstate reads off each point's root label.
OrbitCopyResult orbit_copy_construction(const PeriodicMeasure& pm,
                                        const std::vector<int>& multiplicities);

// Integer multiplicities m_i >= 1 with sum m_i |orbit_i| <= n_target
// minimizing max_i | m_i |orbit_i| / sum_j m_j |orbit_j|  -  a_i |.
// Ties prefer more total sites, then lexicographically smaller m.
std::vector<int> multiplicity_select(const std::vector<double>& weights,
                                     const std::vector<int>& orbit_sizes,
                                     int n_target);

// ---------------------------------------------------------------------------
// Constructions
// ---------------------------------------------------------------------------

// n-cycle shift for Z (r = 1).
HomGraph cycle_hom(int n);

// Commuting coordinate shifts on a torus of the given dimensions (r = dims.size()).
HomGraph torus_hom(const std::vector<int>& dims);

// Block-diagonal union; vertex blocks keep their order.
HomGraph disjoint_union(const std::vector<HomGraph>& parts);

// Random action, deterministic given the seed. FreeGroup: independent uniform
// permutations. FreeProductCyclic: uniform fixed-point-free involutions
// (perfect matchings) for order-2 factors, uniform products of m-cycles for
// order-m factors; requires the corresponding divisibility of n.
HomGraph random_hom(const GroupSpec& spec, int n, std::uint64_t seed);

}  // namespace soficspin
