// Group families and their rooted, edge-labeled Cayley balls.
//
// Supported families have closed-form normal forms (free, free abelian,
// free products of cyclic groups). Finitely presented groups fall back to a
// budgeted Knuth-Bendix completion in shortlex order; if completion does not
// finish within the budget the construction fails with UndecidableAtBudget
// rather than returning wrong balls.
#pragma once

#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "soficspin/common.hpp"

namespace soficspin {

enum class GroupFamily {
  FreeGroup,
  FreeAbelian,
  FreeProductCyclic,
  FinitePresented,
};

struct RewriteBudget {
  int max_rules = 4000;
  int max_word_len = 64;
  long max_steps = 4'000'000;
};

struct GroupSpec {
  GroupFamily family = GroupFamily::FreeGroup;
  int r = 1;                       // generator count
  std::vector<int> orders;         // FreeProductCyclic: cyclic orders, each >= 2
  std::vector<Word> relators;      // FinitePresented: nonempty reduced words
  int max_radius = 12;             // cap on ball radii (pattern spaces must stay enumerable)
  RewriteBudget budget;            // FinitePresented only

  // Throws ConfigError when the fields are inconsistent.
  void validate() const;

  // Defining relators used to validate finite actions: none for free groups,
  // commutators for free abelian, s_i^{m_i} for cyclic free products, the
  // given relators otherwise.
  std::vector<Word> defining_relators() const;

  static GroupSpec free_group(int r);
  static GroupSpec free_abelian(int r);
  static GroupSpec free_product_cyclic(std::vector<int> orders);
  static GroupSpec finitely_presented(int r, std::vector<Word> relators);
};

// Normal-form machinery for one GroupSpec. Construction runs Knuth-Bendix
// for FinitePresented (may throw UndecidableAtBudget); the closed-form
// families construct in O(1).
class GroupContext {
 public:
  explicit GroupContext(GroupSpec spec);
  ~GroupContext();
  GroupContext(GroupContext&&) noexcept;
  GroupContext& operator=(GroupContext&&) noexcept;

  const GroupSpec& spec() const { return spec_; }

  // Canonical geodesic representative of the group element spelled by w.
  // The result's length equals the word metric |gamma|.
  Word normal_form(const Word& w) const;

  // normal_form(a concatenated with b), i.e. the product a * b.
  Word multiply(const Word& a, const Word& b) const;

 private:
  GroupSpec spec_;
  struct Impl;                     // rewriting system for FinitePresented
  std::unique_ptr<Impl> impl_;
};

struct LabeledEdge {
  int src;
  int label;                       // generator index in [0, r)
  int dst;
};

// Closed ball B_Gamma(e, R) as a rooted labeled directed graph. Vertex 0 is
// the identity; vertices are listed BFS layer by layer, each layer sorted
// lexicographically by normal form, so the vertex list of a smaller ball is
// a prefix of any larger ball's list.
struct CayleyBall {
  int radius = 0;
  int r = 1;                                 // generator count
  std::vector<Word> vertices;                // normal forms
  std::vector<int> depth;                    // word length, depth[0] == 0
  std::vector<LabeledEdge> edges;            // induced edges, deterministic order
  std::vector<std::vector<int>> out;         // out[i][v] = dst of i-edge from v, or -1
  std::vector<std::vector<int>> in;          // in[i][v]  = src of i-edge into v, or -1
  std::vector<int> parent;                   // BFS tree parent, parent[0] == -1
  std::vector<int> parent_letter;            // vertex = parent_letter * parent (letter in [0,2r))
  std::vector<int> sphere_start;             // sphere_start[n] = first index at depth n; size radius+2

  int size() const { return static_cast<int>(vertices.size()); }
  // Number of vertices with depth <= rr (prefix length of the sub-ball).
  int prefix_size(int rr) const { return sphere_start[rr + 1]; }
  // Index of the vertex with this normal form, or -1.
  int index_of(const Word& nf) const;

  std::map<Word, int> index;                 // normal form -> vertex id
};

// BFS-enumerated ball of radius R. Requires R <= spec.max_radius.
CayleyBall build_ball(const GroupSpec& spec, int R);
CayleyBall build_ball(const GroupContext& ctx, int R);

// |{gamma : |gamma| = n}| for n = 0..R, by BFS.
std::vector<long long> sphere_sizes(const GroupSpec& spec, int R);

// Certified upper bound on sum_{|gamma| > R} (3r)^{-|gamma|}. Exact (to
// double precision) for the closed-form families via closed-form sphere
// counts; the geometric bound via |S_n| <= 2r(2r-1)^{n-1} otherwise.
// Always <= 3 * (2/3)^{R+1}.
double metric_tail(const GroupSpec& spec, int R);

// Closed-form sphere count, available for the three closed-form families.
// Returns nullopt for FinitePresented.
std::optional<double> sphere_size_closed_form(const GroupSpec& spec, int n);

}  // namespace soficspin
