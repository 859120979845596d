#include "soficspin/homgraph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <unordered_map>

namespace soficspin {

namespace {

bool is_permutation(const std::vector<int>& p, int n) {
  if (static_cast<int>(p.size()) != n) return false;
  std::vector<char> seen(n, 0);
  for (int v : p) {
    if (v < 0 || v >= n || seen[v]) return false;
    seen[v] = 1;
  }
  return true;
}

std::vector<int> invert(const std::vector<int>& p) {
  std::vector<int> q(p.size());
  for (size_t i = 0; i < p.size(); ++i) q[p[i]] = static_cast<int>(i);
  return q;
}

}  // namespace

HomGraph::HomGraph(int n_, std::vector<std::vector<int>> perms_)
    : n(n_), r(static_cast<int>(perms_.size())), perms(std::move(perms_)) {
  for (const auto& p : perms)
    if (!is_permutation(p, n)) throw ConfigError("HomGraph: image is not a permutation");
  inv_perms.reserve(perms.size());
  for (const auto& p : perms) inv_perms.push_back(invert(p));
}

int HomGraph::apply(const Word& w, int v) const {
  for (auto it = w.rbegin(); it != w.rend(); ++it) v = step(*it, v);
  return v;
}

ValidationReport validate(const HomGraph& hom, const GroupSpec& spec) {
  ValidationReport rep;
  if (hom.r != spec.r) {
    rep.ok = false;
    rep.message = "generator count mismatch";
    return rep;
  }
  auto relators = spec.defining_relators();
  for (size_t k = 0; k < relators.size(); ++k) {
    for (int v = 0; v < hom.n; ++v) {
      if (hom.apply(relators[k], v) != v) {
        rep.ok = false;
        rep.relator_index = static_cast<int>(k);
        rep.relator = relators[k];
        rep.witness_vertex = v;
        std::ostringstream os;
        os << "relator " << k << " acts nontrivially at vertex " << v;
        rep.message = os.str();
        return rep;
      }
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Local isomorphism statistics
// ---------------------------------------------------------------------------

// Walks the forced map phi(gamma) = sigma^gamma(v) over the ball in BFS order
// and records the smallest radius at which either injectivity or an edge
// condition of the induced-subgraph comparison fails. Conditions per radius
// R, for a ball edge slot (u, i): with w = sigma^{s_i} phi(u),
//   - if s_i u is a ball vertex x with depth <= R: require phi(x) == w;
//   - otherwise: require w not in phi(prefix(R)).
// The earliest failure radius of a slot is max(depth(u), min(depth(x),
// depth(first preimage of w))), with missing entries at +infinity.
int largest_good_radius(const HomGraph& hom, int v, const CayleyBall& ball) {
  const int INF = std::numeric_limits<int>::max();
  const int nb = ball.size();
  std::vector<int> phi(nb);
  std::unordered_map<int, int> first_preimage;
  first_preimage.reserve(nb * 2);

  int fail_R = ball.radius + 1;
  phi[0] = v;
  first_preimage.emplace(v, 0);
  for (int j = 1; j < nb; ++j) {
    phi[j] = hom.step(ball.parent_letter[j], phi[ball.parent[j]]);
    auto [it, inserted] = first_preimage.emplace(phi[j], j);
    if (!inserted) fail_R = std::min(fail_R, ball.depth[j]);  // collision
    if (fail_R == 0) return -1;
  }
  for (int u = 0; u < nb; ++u) {
    const int du = ball.depth[u];
    if (du >= fail_R) continue;
    for (int i = 0; i < ball.r; ++i) {
      const int w = hom.perms[i][phi[u]];
      const int x = ball.out[i][u];
      auto it = first_preimage.find(w);
      const int y = it == first_preimage.end() ? -1 : it->second;
      if (x >= 0 && y == x) continue;
      const int dx = x >= 0 ? ball.depth[x] : INF;
      const int dy = y >= 0 ? ball.depth[y] : INF;
      const int dmin = std::min(dx, dy);
      if (dmin == INF) continue;
      fail_R = std::min(fail_R, std::max(du, dmin));
      if (fail_R == 0) return -1;
    }
  }
  return fail_R - 1;
}

bool ball_isomorphic(const HomGraph& hom, int v, int R, const CayleyBall& ball) {
  if (R > ball.radius) throw RadiusMismatch("ball_isomorphic: ball smaller than R");
  return largest_good_radius(hom, v, ball) >= R;
}

double delta_R(const HomGraph& hom, int R, const CayleyBall& ball) {
  if (R > ball.radius) throw RadiusMismatch("delta_R: ball smaller than R");
  int bad = 0;
  for (int v = 0; v < hom.n; ++v)
    if (largest_good_radius(hom, v, ball) < R) ++bad;
  return static_cast<double>(bad) / hom.n;
}

std::vector<double> delta_table(const HomGraph& hom, const CayleyBall& ball) {
  std::vector<long long> bad(ball.radius + 1, 0);
  for (int v = 0; v < hom.n; ++v) {
    int g = largest_good_radius(hom, v, ball);
    for (int R = g + 1; R <= ball.radius; ++R) ++bad[R];
  }
  std::vector<double> out(ball.radius + 1);
  for (int R = 0; R <= ball.radius; ++R)
    out[R] = static_cast<double>(bad[R]) / hom.n;
  return out;
}

DeltaResult Delta(const HomGraph& hom, const CayleyBall& ball) {
  DeltaResult res;
  res.deltas = delta_table(hom, ball);
  res.value = std::numeric_limits<double>::infinity();
  for (int R = 0; R <= ball.radius; ++R) {
    double v = 9.0 * std::pow(2.0 / 3.0, R) + 6.0 * res.deltas[R];
    if (v < res.value) {
      res.value = v;
      res.minimizing_R = R;
    }
  }
  res.slack = 9.0 * std::pow(2.0 / 3.0, ball.radius);
  return res;
}

DeltaResult Delta(const HomGraph& hom, const GroupSpec& spec, int R_max) {
  if (R_max < 0) throw ConfigError("Delta: R_max must be >= 0");
  GroupSpec capped = spec;
  capped.max_radius = std::max(spec.max_radius, R_max);
  return Delta(hom, build_ball(capped, R_max));
}

double fixed_point_fraction(const HomGraph& hom, const Word& w) {
  int fixed = 0;
  for (int v = 0; v < hom.n; ++v)
    if (hom.apply(w, v) == v) ++fixed;
  return static_cast<double>(fixed) / hom.n;
}

// ---------------------------------------------------------------------------
// Periodic measures and orbit copies
// ---------------------------------------------------------------------------

void PeriodicMeasure::validate(const GroupSpec& spec) const {
  if (orbits.empty()) throw ConfigError("PeriodicMeasure: no orbits");
  if (weights.size() != orbits.size())
    throw ConfigError("PeriodicMeasure: weight/orbit count mismatch");
  double sum = 0.0;
  for (double w : weights) {
    if (w < 0) throw ConfigError("PeriodicMeasure: negative weight");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw ConfigError("PeriodicMeasure: weights do not sum to 1");
  for (const Orbit& orb : orbits) {
    if (static_cast<int>(orb.labels.size()) != orb.action.n)
      throw ConfigError("PeriodicMeasure: label/point count mismatch");
    auto rep = soficspin::validate(orb.action, spec);
    if (!rep.ok)
      throw ConfigError("PeriodicMeasure: orbit is not a Gamma-set: " + rep.message);
    // Transitivity: the orbit of point 0 must be everything.
    std::vector<char> seen(orb.action.n, 0);
    std::vector<int> stack = {0};
    seen[0] = 1;
    int count = 1;
    while (!stack.empty()) {
      int p = stack.back();
      stack.pop_back();
      for (int l = 0; l < 2 * orb.action.r; ++l) {
        int q = orb.action.step(l, p);
        if (!seen[q]) {
          seen[q] = 1;
          ++count;
          stack.push_back(q);
        }
      }
    }
    if (count != orb.action.n)
      throw ConfigError("PeriodicMeasure: orbit is not transitive");
  }
}

OrbitCopyResult orbit_copy_construction(const PeriodicMeasure& pm,
                                        const std::vector<int>& multiplicities) {
  if (multiplicities.empty()) throw ConfigError("orbit_copy_construction: empty multiplicities");
  if (multiplicities.size() != pm.orbits.size())
    throw ConfigError("orbit_copy_construction: multiplicity/orbit count mismatch");
  for (int m : multiplicities)
    if (m < 1) throw ConfigError("orbit_copy_construction: multiplicities must be >= 1");

  const int r = pm.orbits.front().action.r;
  long long total = 0;
  for (size_t i = 0; i < pm.orbits.size(); ++i)
    total += static_cast<long long>(multiplicities[i]) * pm.orbits[i].action.n;

  std::vector<std::vector<int>> perms(r, std::vector<int>(total));
  Microstate micro(total);
  std::vector<double> realized(pm.orbits.size());
  long long base = 0;
  for (size_t i = 0; i < pm.orbits.size(); ++i) {
    const Orbit& orb = pm.orbits[i];
    realized[i] = static_cast<double>(multiplicities[i]) * orb.action.n / total;
    for (int copy = 0; copy < multiplicities[i]; ++copy) {
      for (int p = 0; p < orb.action.n; ++p) {
        for (int g = 0; g < r; ++g)
          perms[g][base + p] = static_cast<int>(base) + orb.action.perms[g][p];
        micro[base + p] = orb.labels[p];
      }
      base += orb.action.n;
    }
  }
  return {HomGraph(static_cast<int>(total), std::move(perms)), std::move(micro),
          std::move(realized)};
}

std::vector<int> multiplicity_select(const std::vector<double>& weights,
                                     const std::vector<int>& orbit_sizes,
                                     int n_target) {
  const size_t k = weights.size();
  if (k == 0 || orbit_sizes.size() != k)
    throw ConfigError("multiplicity_select: size mismatch");
  long long min_total = 0;
  for (int s : orbit_sizes) {
    if (s < 1) throw ConfigError("multiplicity_select: orbit sizes must be >= 1");
    min_total += s;
  }
  if (n_target < min_total)
    throw ConfigError("multiplicity_select: n_target smaller than sum of orbit sizes");

  std::vector<int> best;
  double best_err = std::numeric_limits<double>::infinity();
  long long best_total = -1;
  // Rounded rational approximations at every candidate total.
  for (long long T = min_total; T <= n_target; ++T) {
    std::vector<int> m(k);
    long long total = 0;
    for (size_t i = 0; i < k; ++i) {
      m[i] = static_cast<int>(std::max(1ll, std::llround(weights[i] * T / orbit_sizes[i])));
      total += static_cast<long long>(m[i]) * orbit_sizes[i];
    }
    if (total > n_target) continue;
    double err = 0.0;
    for (size_t i = 0; i < k; ++i)
      err = std::max(err, std::abs(static_cast<double>(m[i]) * orbit_sizes[i] / total - weights[i]));
    if (err < best_err - 1e-15 ||
        (err < best_err + 1e-15 && (total > best_total || (total == best_total && m < best)))) {
      best = m;
      best_err = err;
      best_total = total;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Constructions
// ---------------------------------------------------------------------------

HomGraph cycle_hom(int n) {
  if (n < 1) throw ConfigError("cycle_hom: n must be >= 1");
  std::vector<int> p(n);
  for (int v = 0; v < n; ++v) p[v] = (v + 1) % n;
  return HomGraph(n, {std::move(p)});
}

HomGraph torus_hom(const std::vector<int>& dims) {
  if (dims.empty()) throw ConfigError("torus_hom: empty dims");
  long long n = 1;
  for (int d : dims) {
    if (d < 1) throw ConfigError("torus_hom: dims must be >= 1");
    n *= d;
  }
  const int r = static_cast<int>(dims.size());
  std::vector<long long> stride(r, 1);
  for (int g = r - 2; g >= 0; --g) stride[g] = stride[g + 1] * dims[g + 1];
  std::vector<std::vector<int>> perms(r, std::vector<int>(n));
  for (long long v = 0; v < n; ++v) {
    long long rest = v;
    for (int g = 0; g < r; ++g) {
      long long c = rest / stride[g];
      rest %= stride[g];
      long long cshift = (c + 1) % dims[g];
      perms[g][v] = static_cast<int>(v + (cshift - c) * stride[g]);
    }
  }
  return HomGraph(static_cast<int>(n), std::move(perms));
}

HomGraph disjoint_union(const std::vector<HomGraph>& parts) {
  if (parts.empty()) throw ConfigError("disjoint_union: empty");
  const int r = parts.front().r;
  long long n = 0;
  for (const auto& h : parts) {
    if (h.r != r) throw ConfigError("disjoint_union: generator count mismatch");
    n += h.n;
  }
  std::vector<std::vector<int>> perms(r, std::vector<int>(n));
  long long base = 0;
  for (const auto& h : parts) {
    for (int g = 0; g < r; ++g)
      for (int v = 0; v < h.n; ++v)
        perms[g][base + v] = static_cast<int>(base) + h.perms[g][v];
    base += h.n;
  }
  return HomGraph(static_cast<int>(n), std::move(perms));
}

HomGraph random_hom(const GroupSpec& spec, int n, std::uint64_t seed) {
  if (n < 1) throw ConfigError("random_hom: n must be >= 1");
  Rng rng(seed);
  std::vector<std::vector<int>> perms;
  perms.reserve(spec.r);
  switch (spec.family) {
    case GroupFamily::FreeGroup:
      for (int g = 0; g < spec.r; ++g) perms.push_back(rng.permutation(n));
      break;
    case GroupFamily::FreeProductCyclic:
      for (int g = 0; g < spec.r; ++g) {
        const int m = spec.orders[g];
        if (n % m != 0) {
          std::ostringstream os;
          os << "random_hom: n = " << n << " not divisible by cyclic order " << m;
          throw ConfigError(os.str());
        }
        std::vector<int> shuffled = rng.permutation(n);
        std::vector<int> p(n);
        for (int b = 0; b < n; b += m)
          for (int j = 0; j < m; ++j)
            p[shuffled[b + j]] = shuffled[b + (j + 1) % m];
        perms.push_back(std::move(p));
      }
      break;
    default:
      throw ConfigError("random_hom: supported for FreeGroup and FreeProductCyclic only");
  }
  return HomGraph(n, std::move(perms));
}

}  // namespace soficspin
