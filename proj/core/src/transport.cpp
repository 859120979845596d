#include "soficspin/transport.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace soficspin {

namespace {

constexpr double kTol = 1e-12;

struct Arc {
  int i, j;
  double flow;
};

// Spanning-tree operations over the bipartite node set rows + cols.
// Nodes 0..m-1 are rows, m..m+k-1 are columns.
class Basis {
 public:
  Basis(int m, int k) : m_(m), k_(k) {}

  void add(int i, int j, double f) { arcs_.push_back({i, j, f}); }
  std::vector<Arc>& arcs() { return arcs_; }
  const std::vector<Arc>& arcs() const { return arcs_; }

  // Solve u_i + v_j = C_ij on the tree, u_0 = 0.
  void compute_duals(const std::vector<std::vector<double>>& C, std::vector<double>& u,
                     std::vector<double>& v) const {
    u.assign(m_, std::numeric_limits<double>::quiet_NaN());
    v.assign(k_, std::numeric_limits<double>::quiet_NaN());
    auto adj = adjacency();
    u[0] = 0.0;
    std::deque<int> queue = {0};
    while (!queue.empty()) {
      int node = queue.front();
      queue.pop_front();
      for (int e : adj[node]) {
        const Arc& a = arcs_[e];
        int row = a.i, col = m_ + a.j;
        if (node == row && std::isnan(v[a.j])) {
          v[a.j] = C[a.i][a.j] - u[a.i];
          queue.push_back(col);
        } else if (node == col && std::isnan(u[a.i])) {
          u[a.i] = C[a.i][a.j] - v[a.j];
          queue.push_back(row);
        }
      }
    }
    for (double x : u)
      if (std::isnan(x)) throw SolverFailure("transport: basis is not spanning");
    for (double x : v)
      if (std::isnan(x)) throw SolverFailure("transport: basis is not spanning");
  }

  // Unique tree path from row i to column j as a list of arc indices.
  std::vector<int> path(int i, int j) const {
    auto adj = adjacency();
    const int src = i, dst = m_ + j;
    std::vector<int> via_arc(m_ + k_, -1), via_node(m_ + k_, -1);
    std::vector<char> seen(m_ + k_, 0);
    std::deque<int> queue = {src};
    seen[src] = 1;
    while (!queue.empty()) {
      int node = queue.front();
      queue.pop_front();
      if (node == dst) break;
      for (int e : adj[node]) {
        const Arc& a = arcs_[e];
        int other = (node == a.i) ? m_ + a.j : a.i;
        if (!seen[other]) {
          seen[other] = 1;
          via_arc[other] = e;
          via_node[other] = node;
          queue.push_back(other);
        }
      }
    }
    if (!seen[dst]) throw SolverFailure("transport: basis path not found");
    std::vector<int> out;
    for (int node = dst; node != src; node = via_node[node]) out.push_back(via_arc[node]);
    std::reverse(out.begin(), out.end());
    return out;
  }

 private:
  std::vector<std::vector<int>> adjacency() const {
    std::vector<std::vector<int>> adj(m_ + k_);
    for (size_t e = 0; e < arcs_.size(); ++e) {
      adj[arcs_[e].i].push_back(static_cast<int>(e));
      adj[m_ + arcs_[e].j].push_back(static_cast<int>(e));
    }
    return adj;
  }

  int m_, k_;
  std::vector<Arc> arcs_;
};

}  // namespace

TransportSolution solve_transport(const std::vector<double>& a_in,
                                  const std::vector<double>& b_in,
                                  const std::vector<std::vector<double>>& C) {
  const int m = static_cast<int>(a_in.size());
  const int k = static_cast<int>(b_in.size());
  if (m == 0 || k == 0) throw ConfigError("transport: empty marginals");
  if (static_cast<long long>(m) * k > 4'000'000)
    throw BudgetExceeded("transport: support sizes exceed the LP budget");

  // Normalize defensively; inputs are probability vectors up to roundoff.
  std::vector<double> a = a_in, b = b_in;
  double sa = 0, sb = 0;
  for (double x : a) {
    if (x < -kTol) throw ConfigError("transport: negative mass");
    sa += x;
  }
  for (double x : b) {
    if (x < -kTol) throw ConfigError("transport: negative mass");
    sb += x;
  }
  if (sa <= 0 || sb <= 0 || std::abs(sa - sb) > 1e-9)
    throw ConfigError("transport: marginal masses differ");
  for (double& x : a) x /= sa;
  for (double& x : b) x /= sb;

  double cost_scale = 1.0;
  for (const auto& row : C)
    for (double c : row) cost_scale = std::max(cost_scale, std::abs(c));

  // Northwest-corner start: exactly m + k - 1 basic arcs.
  Basis basis(m, k);
  {
    std::vector<double> ar = a, br = b;
    int i = 0, j = 0;
    while (true) {
      double f = std::min(ar[i], br[j]);
      basis.add(i, j, f);
      ar[i] -= f;
      br[j] -= f;
      if (i == m - 1 && j == k - 1) break;
      if (ar[i] <= br[j] && i < m - 1) ++i;
      else if (j < k - 1) ++j;
      else ++i;
    }
  }

  std::vector<double> u, v;
  const long max_pivots = 2000l * (m + k) + 10000;
  const long bland_after = 40l * (m + k) + 1000;
  for (long pivot = 0;; ++pivot) {
    if (pivot > max_pivots) throw SolverFailure("transport: pivot limit exceeded");
    basis.compute_duals(C, u, v);

    // Entering arc: most negative reduced cost (Dantzig), switching to
    // Bland's smallest-index rule if degeneracy stalls progress.
    int ei = -1, ej = -1;
    const bool bland = pivot > bland_after;
    double best = -1e-11 * cost_scale;
    for (int i = 0; i < m && (!bland || ei < 0); ++i) {
      for (int j = 0; j < k; ++j) {
        double rc = C[i][j] - u[i] - v[j];
        if (rc < best) {
          best = rc;
          ei = i;
          ej = j;
          if (bland) break;
        }
      }
    }
    if (ei < 0) break;  // optimal

    // Pivot around the unique cycle formed with the tree path ej -> ei.
    std::vector<int> cyc = basis.path(ei, ej);
    // Arcs at odd positions along the path lose flow when the entering arc
    // gains; the path starts at the entering arc's row.
    double theta = std::numeric_limits<double>::infinity();
    auto& arcs = basis.arcs();
    int sign = -1;  // first path arc is adjacent to row ei: it loses flow
    std::vector<int> losing;
    for (int e : cyc) {
      if (sign < 0) {
        losing.push_back(e);
        theta = std::min(theta, arcs[e].flow);
      }
      sign = -sign;
    }
    // Leaving arc: a theta-achieving losing arc, smallest (i, j) for a
    // deterministic anti-cycling choice.
    int leave = -1;
    for (int e : losing) {
      if (arcs[e].flow > theta + kTol) continue;
      if (leave < 0 || std::pair(arcs[e].i, arcs[e].j) < std::pair(arcs[leave].i, arcs[leave].j))
        leave = e;
    }
    if (leave < 0) throw SolverFailure("transport: degenerate cycle");
    sign = -1;
    for (int e : cyc) {
      arcs[e].flow += sign * theta;
      sign = -sign;
    }
    arcs[leave] = {ei, ej, theta};
  }

  // Certify the result before reporting it.
  TransportSolution sol;
  sol.dual_a = u;
  sol.dual_b = v;
  std::vector<double> row_sum(m, 0.0), col_sum(k, 0.0);
  for (const Arc& arc : basis.arcs()) {
    if (arc.flow < -1e-10) throw SolverFailure("transport: negative flow");
    row_sum[arc.i] += arc.flow;
    col_sum[arc.j] += arc.flow;
    sol.value += arc.flow * C[arc.i][arc.j];
    sol.plan.emplace_back(arc.i, arc.j, arc.flow);
  }
  for (int i = 0; i < m; ++i)
    if (std::abs(row_sum[i] - a[i]) > 1e-9)
      throw SolverFailure("transport: row marginal violated");
  for (int j = 0; j < k; ++j)
    if (std::abs(col_sum[j] - b[j]) > 1e-9)
      throw SolverFailure("transport: column marginal violated");
  double dual_value = 0.0;
  for (int i = 0; i < m; ++i) dual_value += u[i] * a[i];
  for (int j = 0; j < k; ++j) dual_value += v[j] * b[j];
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < k; ++j)
      if (C[i][j] - u[i] - v[j] < -1e-8 * cost_scale)
        throw SolverFailure("transport: dual infeasibility at optimum");
  if (std::abs(dual_value - sol.value) > 1e-8 * cost_scale)
    throw SolverFailure("transport: duality gap not closed");
  return sol;
}

double pattern_cost(const CayleyBall& ball, const std::vector<Letter>& p,
                    const std::vector<Letter>& q) {
  double c = 0.0;
  const double base = 3.0 * ball.r;
  for (int j = 0; j < ball.size(); ++j)
    if (p[j] != q[j]) c += std::pow(base, -ball.depth[j]);
  return c;
}

DbarInterval dbar_truncated(const PatternDistribution& P, const PatternDistribution& Q,
                            const GroupSpec& spec, const CayleyBall& ball) {
  if (P.radius != Q.radius) throw RadiusMismatch("dbar_truncated: radii differ");
  if (ball.radius != P.radius) throw RadiusMismatch("dbar_truncated: ball radius mismatch");
  if (P.w.empty() || Q.w.empty()) throw ConfigError("dbar_truncated: empty distribution");
  if (P.w.size() > 2000 || Q.w.size() > 2000)
    throw BudgetExceeded("dbar_truncated: pattern support exceeds the LP budget");

  std::vector<const std::vector<Letter>*> ps, qs;
  std::vector<double> a, b;
  for (const auto& [labels, mass] : P.w) {
    ps.push_back(&labels);
    a.push_back(mass);
  }
  for (const auto& [labels, mass] : Q.w) {
    qs.push_back(&labels);
    b.push_back(mass);
  }
  std::vector<std::vector<double>> C(ps.size(), std::vector<double>(qs.size()));
  for (size_t i = 0; i < ps.size(); ++i)
    for (size_t j = 0; j < qs.size(); ++j)
      C[i][j] = pattern_cost(ball, *ps[i], *qs[j]);

  TransportSolution sol = solve_transport(a, b, C);
  DbarInterval out;
  out.lower = sol.value;
  out.upper = sol.value + metric_tail(spec, P.radius);
  return out;
}

}  // namespace soficspin
