#include "soficspin/fed.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "soficspin/parallel.hpp"

namespace soficspin {

std::vector<HomGraph> SoficSequenceSpec::materialize(const GroupSpec& spec) const {
  std::vector<HomGraph> out;
  auto check_increasing = [](const std::vector<int>& v) {
    for (size_t i = 1; i < v.size(); ++i)
      if (v[i] <= v[i - 1])
        throw ConfigError("SoficSequenceSpec: sizes must be strictly increasing");
  };
  switch (generator) {
    case Generator::Cycles:
      if (spec.r != 1) throw ConfigError("SoficSequenceSpec: cycles need r = 1");
      check_increasing(sizes);
      for (int n : sizes) out.push_back(cycle_hom(n));
      break;
    case Generator::Tori:
      for (const auto& dims : torus_dims) {
        if (static_cast<int>(dims.size()) != spec.r)
          throw ConfigError("SoficSequenceSpec: torus rank must match r");
        out.push_back(torus_hom(dims));
      }
      break;
    case Generator::RandomFree:
      check_increasing(sizes);
      if (seeds.size() != sizes.size())
        throw ConfigError("SoficSequenceSpec: need one seed per size");
      for (size_t i = 0; i < sizes.size(); ++i)
        out.push_back(random_hom(spec, sizes[i], seeds[i]));
      break;
    case Generator::ExplicitList:
      out = explicit_list;
      break;
  }
  if (out.empty()) throw ConfigError("SoficSequenceSpec: empty sequence");
  return out;
}

// ---------------------------------------------------------------------------
// The consistency-set optimizer
// ---------------------------------------------------------------------------

namespace {

struct Workspace {
  const SpinModel* model;
  const HomGraph* hom;
  StateSpace space;
  std::vector<double> U;
  CayleyBall ball;
  double tail = 0.0;
  double epsilon = 0.0;

  std::vector<std::vector<Letter>> patterns;            // full pattern space
  std::vector<int> lift_pat;                            // idx * n + v -> pattern id
  std::vector<int> bcols;                               // pattern ids with target mass
  std::vector<double> bmass;
  std::vector<std::vector<double>> cost;                // all patterns x bcols

  int n() const { return hom->n; }
  long long S() const { return space.size(); }
  int P() const { return static_cast<int>(patterns.size()); }
};

Workspace make_workspace(const GroupSpec& spec, const SpinModel& model, const HomGraph& hom,
                         const TargetMeasure& target, double epsilon, int R) {
  model.validate();
  Workspace ws;
  ws.model = &model;
  ws.hom = &hom;
  ws.space = StateSpace(hom.n, model.alphabet);
  ws.U = energy_table(model, hom);
  ws.ball = build_ball(spec, R);
  ws.tail = metric_tail(spec, R);
  ws.epsilon = epsilon;

  double count = std::pow(static_cast<double>(model.alphabet), ws.ball.size());
  if (count > 4096)
    throw BudgetExceeded("consistency_infimum: pattern space exceeds the optimizer budget");
  ws.patterns = enumerate_patterns(ws.ball, model.alphabet);
  std::map<std::vector<Letter>, int> pattern_id;
  for (int p = 0; p < ws.P(); ++p) pattern_id[ws.patterns[p]] = p;

  // Lift pattern of every (state, vertex) pair.
  std::vector<std::vector<int>> phis(hom.n);
  for (int v = 0; v < hom.n; ++v) {
    auto& phi = phis[v];
    phi.resize(ws.ball.size());
    phi[0] = v;
    for (int j = 1; j < ws.ball.size(); ++j)
      phi[j] = hom.step(ws.ball.parent_letter[j], phi[ws.ball.parent[j]]);
  }
  ws.lift_pat.resize(ws.S() * hom.n);
  std::vector<Letter> labels(ws.ball.size());
  for (long long idx = 0; idx < ws.S(); ++idx) {
    for (int v = 0; v < hom.n; ++v) {
      for (int j = 0; j < ws.ball.size(); ++j)
        labels[j] = ws.space.letter(idx, phis[v][j]);
      ws.lift_pat[idx * hom.n + v] = pattern_id.at(labels);
    }
  }

  PatternDistribution target_R = target.marginal_at(spec, ws.ball, model);
  std::vector<double> b(ws.P(), 0.0);
  for (const auto& [lab, mass] : target_R.w) {
    auto it = pattern_id.find(lab);
    if (it == pattern_id.end())
      throw ConfigError("consistency_infimum: target pattern outside the pattern space");
    b[it->second] = mass;
  }
  for (int p = 0; p < ws.P(); ++p) {
    if (b[p] > 0) {
      ws.bcols.push_back(p);
      ws.bmass.push_back(b[p]);
    }
  }
  ws.cost.assign(ws.P(), std::vector<double>(ws.bcols.size()));
  for (int p = 0; p < ws.P(); ++p)
    for (size_t j = 0; j < ws.bcols.size(); ++j)
      ws.cost[p][j] = pattern_cost(ws.ball, ws.patterns[p], ws.patterns[ws.bcols[j]]);
  return ws;
}

// Exact OT value between the empirical pattern marginal of zeta and the
// target, with a subgradient in zeta (row potentials pushed through the
// linear lift map).
double eval_ot(const Workspace& ws, const std::vector<double>& zeta,
               std::vector<double>* grad) {
  std::vector<double> a(ws.P(), 0.0);
  const double invn = 1.0 / ws.n();
  for (long long idx = 0; idx < ws.S(); ++idx) {
    if (zeta[idx] <= 0.0) continue;
    const int* pats = &ws.lift_pat[idx * ws.n()];
    for (int v = 0; v < ws.n(); ++v) a[pats[v]] += zeta[idx] * invn;
  }
  std::vector<int> rows;
  std::vector<double> arows;
  for (int p = 0; p < ws.P(); ++p) {
    if (a[p] > 0.0) {
      rows.push_back(p);
      arows.push_back(a[p]);
    }
  }
  std::vector<std::vector<double>> cost_sub(rows.size());
  for (size_t i = 0; i < rows.size(); ++i) cost_sub[i] = ws.cost[rows[i]];
  TransportSolution sol = solve_transport(arows, ws.bmass, cost_sub);
  if (grad) {
    // Dual completion for zero-mass rows: the tightest feasible potential.
    std::vector<double> u_full(ws.P());
    std::vector<char> have(ws.P(), 0);
    for (size_t i = 0; i < rows.size(); ++i) {
      u_full[rows[i]] = sol.dual_a[i];
      have[rows[i]] = 1;
    }
    for (int p = 0; p < ws.P(); ++p) {
      if (have[p]) continue;
      double m = std::numeric_limits<double>::infinity();
      for (size_t j = 0; j < ws.bcols.size(); ++j)
        m = std::min(m, ws.cost[p][j] - sol.dual_b[j]);
      u_full[p] = m;
    }
    grad->assign(ws.S(), 0.0);
    for (long long idx = 0; idx < ws.S(); ++idx) {
      const int* pats = &ws.lift_pat[idx * ws.n()];
      double g = 0.0;
      for (int v = 0; v < ws.n(); ++v) g += u_full[pats[v]];
      (*grad)[idx] = g * invn;
    }
  }
  return sol.value;
}

struct Eval {
  double F = 0.0;         // penalized objective
  double f = 0.0;         // per-site zeta(U) - H(zeta)
  double residual = 0.0;  // OT + tail (the certified d-bar upper bound)
};

std::vector<double> log_softmax(const std::vector<double>& theta) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double t : theta) mx = std::max(mx, t);
  double s = 0.0;
  for (double t : theta) s += std::exp(t - mx);
  const double lse = mx + std::log(s);
  std::vector<double> lz(theta.size());
  for (size_t i = 0; i < theta.size(); ++i) lz[i] = theta[i] - lse;
  return lz;
}

// Penalized objective in softmax coordinates. with_objective = false turns
// the run into the pure feasibility subproblem (minimize the OT residual).
Eval eval_theta(const Workspace& ws, const std::vector<double>& theta, double lambda,
                bool with_objective, std::vector<double>* grad_theta) {
  const auto lz = log_softmax(theta);
  std::vector<double> zeta(lz.size());
  for (size_t i = 0; i < lz.size(); ++i) zeta[i] = std::exp(lz[i]);

  std::vector<double> ot_grad;
  const double ot = eval_ot(ws, zeta, grad_theta ? &ot_grad : nullptr);
  Eval ev;
  ev.residual = ot + ws.tail;
  const double slack = ev.residual - ws.epsilon;

  const double invn = 1.0 / ws.n();
  if (with_objective) {
    double f = 0.0;
    for (long long i = 0; i < ws.S(); ++i)
      if (zeta[i] > 0.0) f += zeta[i] * (ws.U[i] + lz[i]);
    ev.f = f * invn;
    ev.F = ev.f + (slack > 0 ? lambda * slack * slack : 0.0);
  } else {
    ev.f = 0.0;
    ev.F = ot;  // keep gradients alive below epsilon as well
  }

  if (grad_theta) {
    std::vector<double> d(ws.S(), 0.0);
    if (with_objective) {
      for (long long i = 0; i < ws.S(); ++i) d[i] = invn * (ws.U[i] + 1.0 + lz[i]);
      if (slack > 0)
        for (long long i = 0; i < ws.S(); ++i) d[i] += 2.0 * lambda * slack * ot_grad[i];
    } else {
      d = ot_grad;
    }
    double dot = 0.0;
    for (long long i = 0; i < ws.S(); ++i) dot += d[i] * zeta[i];
    grad_theta->assign(ws.S(), 0.0);
    for (long long i = 0; i < ws.S(); ++i) (*grad_theta)[i] = zeta[i] * (d[i] - dot);
  }
  return ev;
}

struct DescentOut {
  std::vector<double> theta;
  Eval ev;
  int iterations = 0;
};

// Gradient descent with Armijo backtracking in softmax coordinates.
DescentOut descend(const Workspace& ws, std::vector<double> theta, double lambda,
                   bool with_objective, int max_iters, double tol) {
  std::vector<double> grad;
  Eval ev = eval_theta(ws, theta, lambda, with_objective, &grad);
  double step = 1.0;
  int stall = 0;
  int it = 0;
  std::vector<double> trial(theta.size());
  for (; it < max_iters; ++it) {
    double gnorm2 = 0.0;
    for (double g : grad) gnorm2 += g * g;
    if (gnorm2 < 1e-26) break;
    bool accepted = false;
    Eval ev_new;
    while (step > 1e-16) {
      for (size_t i = 0; i < theta.size(); ++i) trial[i] = theta[i] - step * grad[i];
      ev_new = eval_theta(ws, trial, lambda, with_objective, nullptr);
      if (ev_new.F <= ev.F - 1e-4 * step * gnorm2) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    theta.swap(trial);
    const double drop = ev.F - ev_new.F;
    ev = eval_theta(ws, theta, lambda, with_objective, &grad);
    step = std::min(step * 2.0, 1e3);
    if (drop < tol * (1.0 + std::abs(ev.F))) {
      if (++stall >= 4) break;
    } else {
      stall = 0;
    }
  }
  // Re-center to keep theta bounded across lambda stages.
  double mx = *std::max_element(theta.begin(), theta.end());
  for (double& t : theta) t -= mx;
  Eval fin = eval_theta(ws, theta, lambda, with_objective, nullptr);
  return {std::move(theta), fin, it};
}

std::vector<double> zeta_of_theta(const std::vector<double>& theta) {
  auto lz = log_softmax(theta);
  std::vector<double> z(lz.size());
  for (size_t i = 0; i < lz.size(); ++i) z[i] = std::exp(lz[i]);
  return z;
}

}  // namespace

ConsistencyResult consistency_infimum(const GroupSpec& spec, const SpinModel& model,
                                      const HomGraph& hom, const TargetMeasure& target,
                                      double epsilon, int R, const FedOptions& opts) {
  target.validate();
  Workspace ws = make_workspace(spec, model, hom, target, epsilon, R);
  const long long S = ws.S();
  const double feas_tol = 1e-9;

  // Structured starting points in theta coordinates (zeta = softmax(theta)).
  std::vector<std::vector<double>> starts;
  starts.emplace_back(S, 0.0);  // uniform
  {
    std::vector<double> th(S);
    for (long long i = 0; i < S; ++i) th[i] = -ws.U[i];  // finitary Gibbs, exactly
    starts.push_back(std::move(th));
  }
  {
    // Product state fitted to the target's depth-0 marginal.
    PatternDistribution t0 = target.marginal_at(spec, build_ball(spec, 0), model);
    std::vector<double> logq(model.alphabet, -700.0);
    for (const auto& [lab, mass] : t0.w)
      if (mass > 0) logq[lab[0]] = std::log(mass);
    std::vector<double> th(S, 0.0);
    for (long long i = 0; i < S; ++i)
      for (int v = 0; v < hom.n; ++v) th[i] += logq[ws.space.letter(i, v)];
    starts.push_back(std::move(th));
  }
  if (R >= 1) {
    // Exponential-family tilt by log target weights of depth-1 patterns.
    CayleyBall ball1 = build_ball(spec, 1);
    PatternDistribution t1 = target.marginal_at(spec, ball1, model);
    const size_t keep = static_cast<size_t>(ball1.size());
    std::vector<double> logw_pat(ws.P(), -27.0);
    for (int p = 0; p < ws.P(); ++p) {
      std::vector<Letter> head(ws.patterns[p].begin(), ws.patterns[p].begin() + keep);
      const double mass = t1.weight(head);
      if (mass > 1e-12) logw_pat[p] = std::log(mass);
    }
    std::vector<double> th(S, 0.0);
    for (long long i = 0; i < S; ++i) {
      const int* pats = &ws.lift_pat[i * hom.n];
      for (int v = 0; v < hom.n; ++v) th[i] += logw_pat[pats[v]];
    }
    starts.push_back(std::move(th));
  }
  Rng rng(opts.seed);
  while (static_cast<int>(starts.size()) < 4 + opts.restarts) {
    std::vector<double> th(S);
    for (long long i = 0; i < S; ++i) th[i] = 2.0 * (rng.next_unit() - 0.5);
    starts.push_back(std::move(th));
  }

  ConsistencyResult res;
  res.status = CellStatus::Flagged;
  bool have_feasible = false;
  double best_value = std::numeric_limits<double>::infinity();
  std::vector<double> best_theta;
  int total_iters = 0;

  auto consider = [&](const std::vector<double>& theta, const Eval& ev) {
    if (ev.residual <= epsilon + feas_tol && ev.f < best_value) {
      best_value = ev.f;
      best_theta = theta;
      have_feasible = true;
    }
  };

  // Evaluate plain candidates first; they are often exactly optimal.
  for (const auto& th : starts) consider(th, eval_theta(ws, th, 0.0, true, nullptr));

  const double lambdas[] = {1e2, 1e4, 1e6, 1e8};
  for (const auto& start : starts) {
    std::vector<double> theta = start;
    for (double lambda : lambdas) {
      DescentOut out =
          descend(ws, theta, lambda, true, opts.max_iterations / 4, opts.objective_tol);
      theta = std::move(out.theta);
      total_iters += out.iterations;
      consider(theta, out.ev);
      if (out.ev.residual <= epsilon + feas_tol) break;  // feasible and converged
    }
  }

  if (have_feasible) {
    // Polish the best feasible point, then re-verify it from scratch.
    DescentOut out =
        descend(ws, best_theta, 1e8, true, opts.polish_iterations, opts.objective_tol);
    total_iters += out.iterations;
    consider(out.theta, out.ev);

    std::vector<double> zeta = zeta_of_theta(best_theta);
    Eval fin = eval_theta(ws, best_theta, 0.0, true, nullptr);
    if (fin.residual <= epsilon + feas_tol) {
      res.value = fin.f;
      res.infeasible = false;
      res.status = CellStatus::Feasible;
      res.dbar_upper = fin.residual;
      res.iterations = total_iters;
      res.witness = DenseState(ws.space);
      res.witness.p = std::move(zeta);
      return res;
    }
  }

  // No feasible point found: minimize the residual alone (convex) and
  // certify infeasibility by stall.
  double min_residual = std::numeric_limits<double>::infinity();
  for (int s = 0; s < 3 && s < static_cast<int>(starts.size()); ++s) {
    DescentOut out =
        descend(ws, starts[s], 0.0, false, opts.max_iterations, opts.objective_tol);
    total_iters += out.iterations;
    min_residual = std::min(min_residual, out.ev.residual);
  }
  res.iterations = total_iters;
  res.dbar_upper = min_residual;
  if (min_residual > epsilon + 1e-6) {
    res.infeasible = true;
    res.status = CellStatus::InfeasibleCertified;
    res.value = std::numeric_limits<double>::infinity();
  } else {
    res.infeasible = false;
    res.status = CellStatus::Flagged;
    res.value = std::numeric_limits<double>::quiet_NaN();
  }
  return res;
}

// ---------------------------------------------------------------------------

FedEstimate fed_estimate(const GroupSpec& spec, const SoficSequenceSpec& seq,
                         const SpinModel& model, const TargetMeasure& target,
                         const std::vector<double>& eps_schedule, int R,
                         const FedOptions& opts) {
  if (eps_schedule.empty()) throw ConfigError("fed_estimate: empty epsilon schedule");
  for (size_t i = 1; i < eps_schedule.size(); ++i)
    if (eps_schedule[i] >= eps_schedule[i - 1])
      throw ConfigError("fed_estimate: epsilon schedule must be strictly decreasing");

  std::vector<HomGraph> homs = seq.materialize(spec);
  FedEstimate est;
  for (const HomGraph& hom : homs)
    est.member_deltas.push_back(Delta(hom, spec, opts.delta_rmax).value);

  const int n_eps = static_cast<int>(eps_schedule.size());
  est.cells.assign(homs.size() * n_eps, FedCell{});
  parallel_for(static_cast<int>(est.cells.size()), opts.workers, [&](int task) {
    const HomGraph& hom = homs[task / n_eps];
    const double eps = eps_schedule[task % n_eps];
    ConsistencyResult r = consistency_infimum(spec, model, hom, target, eps, R, opts);
    FedCell& cell = est.cells[task];
    cell.n = hom.n;
    cell.epsilon = eps;
    cell.R = R;
    cell.is_infinite = r.infeasible;
    cell.value = r.value;
    cell.status = r.status;
    cell.residual = r.dbar_upper;
    cell.iterations = r.iterations;
  });
  // A tighter-epsilon witness stays feasible at looser epsilon, so looser
  // cells may inherit smaller values; this keeps each member's row monotone.
  for (size_t m = 0; m < homs.size(); ++m) {
    FedCell* row = &est.cells[m * n_eps];
    for (int i = n_eps - 2; i >= 0; --i) {
      const FedCell& tighter = row[i + 1];
      if (!tighter.is_infinite && tighter.status == CellStatus::Feasible &&
          !row[i].is_infinite && row[i].status == CellStatus::Feasible &&
          tighter.value < row[i].value) {
        row[i].value = tighter.value;
        row[i].residual = tighter.residual;
      }
    }
  }

  // Headline: largest member, smallest feasible epsilon.
  const HomGraph& last = homs.back();
  est.headline_infinite = true;
  est.headline_n = last.n;
  for (auto it = est.cells.rbegin(); it != est.cells.rend(); ++it) {
    if (it->n != last.n) continue;
    if (it->status == CellStatus::Feasible && !it->is_infinite) {
      est.headline = it->value;
      est.headline_epsilon = it->epsilon;
      est.headline_infinite = false;
      break;
    }
  }
  return est;
}

FedLogZResult fed_via_logZ(const GroupSpec& spec, const SoficSequenceSpec& seq,
                           const SpinModel& model) {
  FedLogZResult res;
  switch (seq.generator) {
    case SoficSequenceSpec::Generator::Cycles:
      for (int n : seq.sizes)
        res.per_n.emplace_back(n, log_partition_cycle(model, n) / n);
      break;
    case SoficSequenceSpec::Generator::Tori:
      for (const auto& dims : seq.torus_dims) {
        long long n = 1;
        for (int d : dims) n *= d;
        res.per_n.emplace_back(static_cast<int>(n), log_partition_torus(model, dims) / n);
      }
      break;
    default:
      for (const HomGraph& hom : seq.materialize(spec))
        res.per_n.emplace_back(hom.n, gibbs_finite(model, hom).log_Z / hom.n);
      break;
  }
  double mn = std::numeric_limits<double>::infinity();
  for (const auto& [n, v] : res.per_n) mn = std::min(mn, v);
  res.value = -mn;
  return res;
}

bool fed_bounds_check(double value, bool is_infinite, const SpinModel& model, int r) {
  if (is_infinite) return true;
  auto [u_min, u_max] = u_bounds(model, r);
  const double lo = u_min - std::log(static_cast<double>(model.alphabet));
  return value >= lo - 1e-9 && value <= u_max + 1e-9;
}

}  // namespace soficspin
