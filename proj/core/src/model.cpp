#include "soficspin/model.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

namespace soficspin {

void SpinModel::validate() const {
  if (alphabet < 2) throw ConfigError("SpinModel: alphabet size must be >= 2");
  if (static_cast<int>(J.size()) != alphabet || static_cast<int>(h.size()) != alphabet)
    throw ConfigError("SpinModel: J/h size mismatch");
  for (int a = 0; a < alphabet; ++a) {
    if (static_cast<int>(J[a].size()) != alphabet)
      throw ConfigError("SpinModel: J is not square");
    for (int b = 0; b < alphabet; ++b)
      if (J[a][b] != J[b][a]) {
        throw ConfigError("SpinModel: J must be symmetric; J(" + std::to_string(a) + "," +
                          std::to_string(b) + ") != J(" + std::to_string(b) + "," +
                          std::to_string(a) + ")");
      }
  }
}

SpinModel SpinModel::zero(int alphabet) {
  SpinModel m;
  m.alphabet = alphabet;
  m.J.assign(alphabet, std::vector<double>(alphabet, 0.0));
  m.h.assign(alphabet, 0.0);
  return m;
}

SpinModel SpinModel::ising(double beta, double field) {
  SpinModel m = zero(2);
  const double s[2] = {-1.0, +1.0};
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) m.J[a][b] = -beta * s[a] * s[b];
    m.h[a] = -field * s[a];
  }
  return m;
}

double log_sum_exp(const std::vector<double>& v) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double x : v) mx = std::max(mx, x);
  if (!std::isfinite(mx)) return mx;
  double s = 0.0;
  for (double x : v) s += std::exp(x - mx);
  return mx + std::log(s);
}

// ---------------------------------------------------------------------------
// Local energies and kernels
// ---------------------------------------------------------------------------

EdgeContext neighbors_of(const SpinModel&, const HomGraph& hom, const Microstate& x, int v) {
  EdgeContext nbrs(2 * hom.r);
  for (int i = 0; i < hom.r; ++i) {
    nbrs[i] = x[hom.perms[i][v]];
    nbrs[hom.r + i] = x[hom.inv_perms[i][v]];
  }
  return nbrs;
}

EdgeContext neighbors_of(const SpinModel&, const HomGraph& hom, const StateSpace& space,
                         long long idx, int v) {
  EdgeContext nbrs(2 * hom.r);
  for (int i = 0; i < hom.r; ++i) {
    nbrs[i] = space.letter(idx, hom.perms[i][v]);
    nbrs[hom.r + i] = space.letter(idx, hom.inv_perms[i][v]);
  }
  return nbrs;
}

std::vector<int> root_neighbor_slots(const CayleyBall& ball) {
  if (ball.radius < 1) throw RadiusMismatch("root_neighbor_slots: need radius >= 1");
  std::vector<int> slots(2 * ball.r);
  for (int i = 0; i < ball.r; ++i) {
    slots[i] = ball.out[i][0];           // s_i
    slots[ball.r + i] = ball.in[i][0];   // s_i^{-1}
    if (slots[i] < 0 || slots[ball.r + i] < 0)
      throw RadiusMismatch("root_neighbor_slots: ball misses a root neighbor");
  }
  return slots;
}

EdgeContext root_neighbors(const CayleyBall& ball, const std::vector<Letter>& labels) {
  auto slots = root_neighbor_slots(ball);
  EdgeContext nbrs(slots.size());
  for (size_t k = 0; k < slots.size(); ++k) nbrs[k] = labels[slots[k]];
  return nbrs;
}

double phi(const SpinModel& model, Letter x_v, const EdgeContext& nbrs) {
  double e = model.h[x_v];
  for (Letter b : nbrs) e += model.J[x_v][b];
  return e;
}

std::vector<double> kernel(const SpinModel& model, const EdgeContext& nbrs) {
  std::vector<double> logw(model.alphabet);
  for (int a = 0; a < model.alphabet; ++a)
    logw[a] = -phi(model, static_cast<Letter>(a), nbrs);
  const double lz = log_sum_exp(logw);
  std::vector<double> c(model.alphabet);
  for (int a = 0; a < model.alphabet; ++a) c[a] = std::exp(logw[a] - lz);
  return c;
}

std::vector<double> kernel_at(const SpinModel& model, const HomGraph& hom,
                              const Microstate& x, int v) {
  return kernel(model, neighbors_of(model, hom, x, v));
}

// ---------------------------------------------------------------------------
// Energies and partition functions
// ---------------------------------------------------------------------------

double total_energy(const SpinModel& model, const HomGraph& hom, const Microstate& x) {
  double u = 0.0;
  for (int v = 0; v < hom.n; ++v) {
    u += model.h[x[v]];
    for (int i = 0; i < hom.r; ++i) u += model.J[x[v]][x[hom.perms[i][v]]];
  }
  return u;
}

double total_energy(const SpinModel& model, const HomGraph& hom, const StateSpace& space,
                    long long idx) {
  double u = 0.0;
  for (int v = 0; v < hom.n; ++v) {
    const Letter a = space.letter(idx, v);
    u += model.h[a];
    for (int i = 0; i < hom.r; ++i) u += model.J[a][space.letter(idx, hom.perms[i][v])];
  }
  return u;
}

std::pair<double, double> u_bounds(const SpinModel& model, int r) {
  double u_min = std::numeric_limits<double>::infinity();
  double u_max = -std::numeric_limits<double>::infinity();
  for (int a = 0; a < model.alphabet; ++a) {
    double jmin = std::numeric_limits<double>::infinity();
    double jmax = -std::numeric_limits<double>::infinity();
    for (int b = 0; b < model.alphabet; ++b) {
      jmin = std::min(jmin, model.J[a][b]);
      jmax = std::max(jmax, model.J[a][b]);
    }
    u_min = std::min(u_min, model.h[a] + r * jmin);
    u_max = std::max(u_max, model.h[a] + r * jmax);
  }
  return {u_min, u_max};
}

GibbsResult gibbs_finite(const SpinModel& model, const HomGraph& hom) {
  StateSpace space(hom.n, model.alphabet);
  std::vector<double> neg_u(space.size());
  for (long long idx = 0; idx < space.size(); ++idx)
    neg_u[idx] = -total_energy(model, hom, space, idx);
  const double log_Z = log_sum_exp(neg_u);
  GibbsResult res;
  res.log_Z = log_Z;
  res.state = DenseState(space);
  for (long long idx = 0; idx < space.size(); ++idx)
    res.state.p[idx] = std::exp(neg_u[idx] - log_Z);
  return res;
}

namespace {

// Transfer matrix T = D B (D = diag e^{-h}, B = e^{-J}) is similar to the
// symmetric S = D^{1/2} B D^{1/2}, so trace(T^n) = sum_k lambda_k^n with the
// real eigenvalues of S.
Eigen::VectorXd transfer_eigenvalues(const SpinModel& model) {
  const int A = model.alphabet;
  Eigen::MatrixXd S(A, A);
  for (int a = 0; a < A; ++a)
    for (int b = 0; b < A; ++b)
      S(a, b) = std::exp(-0.5 * model.h[a] - 0.5 * model.h[b] - model.J[a][b]);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
  if (es.info() != Eigen::Success)
    throw SolverFailure("transfer_eigenvalues: eigendecomposition failed");
  return es.eigenvalues();
}

}  // namespace

double log_partition_cycle(const SpinModel& model, int n) {
  model.validate();
  if (n < 1) throw ConfigError("log_partition_cycle: n must be >= 1");
  Eigen::VectorXd lam = transfer_eigenvalues(model);
  const double lmax = lam.cwiseAbs().maxCoeff();
  // trace(T^n) = lmax^n * sum (lam/lmax)^n; the Perron eigenvalue dominates.
  double s = 0.0;
  for (int k = 0; k < lam.size(); ++k) s += std::pow(lam(k) / lmax, n);
  if (s <= 0) throw SolverFailure("log_partition_cycle: non-positive trace");
  return n * std::log(lmax) + std::log(s);
}

double log_partition_torus(const SpinModel& model, const std::vector<int>& dims) {
  model.validate();
  if (dims.size() != 2) throw ConfigError("log_partition_torus: need two dimensions");
  const int rows = dims[0], cols = dims[1];
  StateSpace row_space(rows, model.alphabet);  // also enforces the budget
  const long long m = row_space.size();
  Eigen::MatrixXd T(m, m);
  for (long long a = 0; a < m; ++a) {
    // within-row energy of configuration a (vertical generator wraps the row)
    double horiz = 0.0;
    for (int i = 0; i < rows; ++i) {
      const Letter ai = row_space.letter(a, i);
      horiz += model.h[ai] + model.J[ai][row_space.letter(a, (i + 1) % rows)];
    }
    for (long long b = 0; b < m; ++b) {
      double vert = 0.0;
      for (int i = 0; i < rows; ++i)
        vert += model.J[row_space.letter(a, i)][row_space.letter(b, i)];
      T(a, b) = -horiz - vert;  // log weights; exponentiate after centering
    }
  }
  const double shift = T.maxCoeff();
  Eigen::MatrixXd M = (T.array() - shift).exp().matrix();
  // log trace(M^cols) + cols * shift, by repeated squaring in log scale via
  // plain powers (row spaces are small enough for dense products).
  Eigen::MatrixXd P = Eigen::MatrixXd::Identity(m, m);
  double log_scale = 0.0;
  for (int k = 0; k < cols; ++k) {
    P = P * M;
    const double nrm = P.cwiseAbs().maxCoeff();
    P /= nrm;
    log_scale += std::log(nrm);
  }
  return std::log(P.trace()) + log_scale + cols * shift;
}

// ---------------------------------------------------------------------------
// Dependence coefficients
// ---------------------------------------------------------------------------

namespace {

// Distinct neighbor elements of ball vertex u, with the slot multiplicity of
// each (slots are the 2r directions s in S). Each neighbor is identified by
// its normal form; it may coincide with u itself.
struct NeighborLayout {
  std::vector<Word> elements;          // distinct neighbor normal forms
  std::vector<int> slot_element;       // size 2r; index into elements, or -1 for u itself
};

NeighborLayout neighbor_layout(const GroupContext& ctx, const Word& u) {
  NeighborLayout lay;
  const int r = ctx.spec().r;
  lay.slot_element.assign(2 * r, -1);
  for (int l = 0; l < 2 * r; ++l) {
    Word nb = ctx.multiply(Word{l}, u);
    if (nb == u) continue;  // degenerate presentation with s = e
    int id = -1;
    for (size_t k = 0; k < lay.elements.size(); ++k)
      if (lay.elements[k] == nb) id = static_cast<int>(k);
    if (id < 0) {
      id = static_cast<int>(lay.elements.size());
      lay.elements.push_back(nb);
    }
    lay.slot_element[l] = id;
  }
  return lay;
}

}  // namespace

double dependence_coefficient(const SpinModel& model, const GroupSpec& spec, int u, int v) {
  model.validate();
  GroupContext ctx(spec);
  CayleyBall ball = build_ball(ctx, std::min(1, spec.max_radius));
  if (u < 0 || u >= ball.size() || v < 0 || v >= ball.size())
    throw ConfigError("dependence_coefficient: vertex outside the radius-1 ball");
  if (u == v) return 0.0;  // the kernel at u ignores x(u)

  const Word& uw = ball.vertices[u];
  const Word& vw = ball.vertices[v];
  NeighborLayout lay = neighbor_layout(ctx, uw);
  int v_id = -1;
  for (size_t k = 0; k < lay.elements.size(); ++k)
    if (lay.elements[k] == vw) v_id = static_cast<int>(k);
  if (v_id < 0) return 0.0;  // v is not adjacent to u

  const int A = model.alphabet;
  const int K = static_cast<int>(lay.elements.size());
  // Kernel at u for a labeling eta of the distinct neighbors. Slots equal to
  // u itself take the candidate letter a.
  auto kernel_of = [&](const std::vector<Letter>& eta) {
    std::vector<double> logw(A);
    for (int a = 0; a < A; ++a) {
      double e = model.h[a];
      for (int slot : lay.slot_element)
        e += model.J[a][slot < 0 ? static_cast<Letter>(a) : eta[slot]];
      logw[a] = -e;
    }
    const double lz = log_sum_exp(logw);
    std::vector<double> c(A);
    for (int a = 0; a < A; ++a) c[a] = std::exp(logw[a] - lz);
    return c;
  };

  double sup = 0.0;
  std::vector<Letter> eta(K, 0);
  long long configs = 1;
  for (int k = 0; k < K; ++k) configs *= A;
  for (long long idx = 0; idx < configs; ++idx) {
    long long rest = idx;
    for (int k = 0; k < K; ++k) {
      eta[k] = static_cast<Letter>(rest % A);
      rest /= A;
    }
    auto c1 = kernel_of(eta);
    std::vector<Letter> eta2 = eta;
    for (int b = 0; b < A; ++b) {
      if (static_cast<Letter>(b) == eta[v_id]) continue;
      eta2[v_id] = static_cast<Letter>(b);
      auto c2 = kernel_of(eta2);
      double tv = 0.0;
      for (int a = 0; a < A; ++a) tv += std::abs(c1[a] - c2[a]);
      sup = std::max(sup, 0.5 * tv);
    }
  }
  return sup;
}

double M_constant(const SpinModel& model, const GroupSpec& spec) {
  GroupSpec s1 = spec;
  s1.max_radius = std::max(1, spec.max_radius);
  CayleyBall ball = build_ball(s1, 1);
  double M = 0.0;
  for (int h = 1; h < ball.size(); ++h)
    M += dependence_coefficient(model, s1, h, 0) * std::pow(3.0 * spec.r, ball.depth[h]);
  const double cap = 12.0 * spec.r * spec.r;
  if (M > cap + 1e-9)
    throw SolverFailure("M_constant: computed value exceeds the 12 r^2 bound");
  return M;
}

}  // namespace soficspin
