#include "soficspin/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace soficspin {

std::vector<double> energy_table(const SpinModel& model, const HomGraph& hom) {
  StateSpace space(hom.n, model.alphabet);
  std::vector<double> U(space.size());
  for (long long idx = 0; idx < space.size(); ++idx)
    U[idx] = total_energy(model, hom, space, idx);
  return U;
}

namespace {

// Kernel of site v in state idx, written into c (size |A|).
void kernel_dense(const SpinModel& model, const HomGraph& hom, const StateSpace& space,
                  long long idx, int v, std::vector<double>& c) {
  double mx = -std::numeric_limits<double>::infinity();
  for (int a = 0; a < model.alphabet; ++a) {
    double e = model.h[a];
    for (int i = 0; i < hom.r; ++i) {
      e += model.J[a][space.letter(idx, hom.perms[i][v])];
      e += model.J[a][space.letter(idx, hom.inv_perms[i][v])];
    }
    c[a] = -e;
    mx = std::max(mx, -e);
  }
  double z = 0.0;
  for (int a = 0; a < model.alphabet; ++a) {
    c[a] = std::exp(c[a] - mx);
    z += c[a];
  }
  for (int a = 0; a < model.alphabet; ++a) c[a] /= z;
}

}  // namespace

std::vector<double> master_rhs(const SpinModel& model, const HomGraph& hom,
                               const DenseState& zeta) {
  const StateSpace& space = zeta.space;
  std::vector<double> rhs(space.size(), 0.0);
  std::vector<double> c(model.alphabet);
  for (long long idx = 0; idx < space.size(); ++idx) {
    double acc = 0.0;
    for (int v = 0; v < hom.n; ++v) {
      kernel_dense(model, hom, space, idx, v, c);
      // The kernel ignores the site's own letter, so
      // c_v(x^{v->a}, x(v)) = c_v(x, x(v)) and the a-sum collapses.
      double s = 0.0;
      for (int a = 0; a < model.alphabet; ++a)
        s += zeta.p[space.with_letter(idx, v, static_cast<Letter>(a))];
      acc += c[space.letter(idx, v)] * s - zeta.p[idx];
    }
    rhs[idx] = acc;
  }
  return rhs;
}

namespace {

DenseState evolve_rk4(const SpinModel& model, const HomGraph& hom, DenseState zeta,
                      double t, double dt) {
  if (dt <= 0) throw ConfigError("evolve_exact: dt must be positive");
  const long long n_states = zeta.space.size();
  double remaining = t;
  std::vector<double> tmp(n_states);
  while (remaining > 1e-15) {
    const double step = std::min(dt, remaining);
    remaining -= step;
    auto k1 = master_rhs(model, hom, zeta);
    DenseState stage = zeta;
    for (long long i = 0; i < n_states; ++i) stage.p[i] = zeta.p[i] + 0.5 * step * k1[i];
    auto k2 = master_rhs(model, hom, stage);
    for (long long i = 0; i < n_states; ++i) stage.p[i] = zeta.p[i] + 0.5 * step * k2[i];
    auto k3 = master_rhs(model, hom, stage);
    for (long long i = 0; i < n_states; ++i) stage.p[i] = zeta.p[i] + step * k3[i];
    auto k4 = master_rhs(model, hom, stage);
    double sum = 0.0;
    double min_p = 0.0;
    for (long long i = 0; i < n_states; ++i) {
      zeta.p[i] += step / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
      min_p = std::min(min_p, zeta.p[i]);
      sum += zeta.p[i];
    }
    if (min_p < -1e-10)
      throw SolverFailure("evolve_exact: negative probability; reduce dt");
    if (std::abs(sum - 1.0) > 1e-9)
      throw SolverFailure("evolve_exact: probability drift exceeds tolerance");
    for (long long i = 0; i < n_states; ++i) zeta.p[i] = std::max(zeta.p[i], 0.0) / sum;
  }
  return zeta;
}

// One application of the uniformized jump kernel K: ring a uniform site,
// resample it from the heat-bath kernel.
void apply_jump_kernel(const SpinModel& model, const HomGraph& hom, const StateSpace& space,
                       const std::vector<double>& in, std::vector<double>& out) {
  std::fill(out.begin(), out.end(), 0.0);
  std::vector<double> c(model.alphabet);
  const double inv_n = 1.0 / hom.n;
  for (long long idx = 0; idx < space.size(); ++idx) {
    const double mass = in[idx];
    if (mass == 0.0) continue;
    for (int v = 0; v < hom.n; ++v) {
      kernel_dense(model, hom, space, idx, v, c);
      for (int a = 0; a < model.alphabet; ++a)
        out[space.with_letter(idx, v, static_cast<Letter>(a))] += mass * inv_n * c[a];
    }
  }
}

DenseState evolve_uniformized(const SpinModel& model, const HomGraph& hom, DenseState zeta,
                              double t) {
  const double lambda = static_cast<double>(hom.n) * t;
  const StateSpace& space = zeta.space;
  std::vector<double> result(space.size(), 0.0);
  std::vector<double> cur = zeta.p, next(space.size());
  double logw = -lambda;  // log Poisson(k) weight, k = 0
  double acc_weight = 0.0;
  const long k_max = static_cast<long>(lambda + 12.0 * std::sqrt(lambda + 1.0) + 200.0);
  for (long k = 0;; ++k) {
    const double w = std::exp(logw);
    for (size_t i = 0; i < result.size(); ++i) result[i] += w * cur[i];
    acc_weight += w;
    if (1.0 - acc_weight < 1e-14) break;
    if (k >= k_max)
      throw SolverFailure("evolve_exact: uniformization series did not close");
    apply_jump_kernel(model, hom, space, cur, next);
    std::swap(cur, next);
    logw += std::log(lambda) - std::log(static_cast<double>(k + 1));
  }
  for (size_t i = 0; i < result.size(); ++i) zeta.p[i] = result[i] / acc_weight;
  return zeta;
}

}  // namespace

DenseState evolve_exact(const SpinModel& model, const HomGraph& hom, const DenseState& zeta0,
                        double t, double dt, Integrator method) {
  model.validate();
  if (t < 0) throw ConfigError("evolve_exact: t must be >= 0");
  if (t == 0) return zeta0;
  if (method == Integrator::RK4) return evolve_rk4(model, hom, zeta0, t, dt);
  return evolve_uniformized(model, hom, zeta0, t);
}

long advance_microstate(const SpinModel& model, const HomGraph& hom, Microstate& x,
                        double t_from, double t_to, Rng& rng) {
  long rings = 0;
  double time = t_from;
  std::vector<double> c(model.alphabet);
  while (true) {
    time += rng.exponential(static_cast<double>(hom.n));
    if (time > t_to) break;
    const int v = static_cast<int>(rng.below(hom.n));
    c = kernel_at(model, hom, x, v);
    x[v] = static_cast<Letter>(rng.categorical(c.data(), model.alphabet, 1.0));
    ++rings;
  }
  return rings;
}

TrajectoryResult sample_trajectory(const SpinModel& model, const HomGraph& hom,
                                   const Microstate& x0, double t, std::uint64_t seed) {
  model.validate();
  if (t < 0) throw ConfigError("sample_trajectory: t must be >= 0");
  TrajectoryResult res;
  res.final_state = x0;
  Rng rng(seed);
  double time = 0.0;
  std::vector<double> c(model.alphabet);
  while (true) {
    time += rng.exponential(static_cast<double>(hom.n));
    if (time > t) break;
    const int v = static_cast<int>(rng.below(hom.n));
    c = kernel_at(model, hom, res.final_state, v);
    const Letter a = static_cast<Letter>(rng.categorical(c.data(), model.alphabet, 1.0));
    res.final_state[v] = a;
    res.events.push_back({time, v, a});
  }
  return res;
}

// ---------------------------------------------------------------------------
// Free energy
// ---------------------------------------------------------------------------

double F0(double s) {
  if (s < 0) throw ConfigError("F0: argument must be >= 0");
  if (s == 0) return -1.0;
  return s - s * std::log(s) - 1.0;
}

double free_energy(const SpinModel& model, const HomGraph& hom, const DenseState& zeta) {
  std::vector<double> U = energy_table(model, hom);
  double f = 0.0;
  for (long long idx = 0; idx < zeta.space.size(); ++idx) {
    const double p = zeta.p[idx];
    if (p > 0) f += p * (U[idx] + std::log(p));
    else f += p * U[idx];  // p == 0: entropy term vanishes
  }
  return f;
}

double free_energy_derivative(const SpinModel& model, const HomGraph& hom,
                              const DenseState& zeta) {
  const StateSpace& space = zeta.space;
  std::vector<double> logp(space.size());
  for (long long idx = 0; idx < space.size(); ++idx) {
    if (zeta.p[idx] <= 0.0)
      throw SolverFailure(
          "free_energy_derivative: zeta must have full support; evolve for t > 0 first");
    logp[idx] = std::log(zeta.p[idx]);
  }
  std::vector<double> c(model.alphabet);
  double total = 0.0;
  for (long long idx = 0; idx < space.size(); ++idx) {
    for (int v = 0; v < hom.n; ++v) {
      kernel_dense(model, hom, space, idx, v, c);
      const Letter xv = space.letter(idx, v);
      const EdgeContext nbrs = neighbors_of(model, hom, space, idx, v);
      const double phi_x = phi(model, xv, nbrs);
      for (int a = 0; a < model.alphabet; ++a) {
        if (static_cast<Letter>(a) == xv) continue;  // F0(1) = 0 exactly
        const long long flip = space.with_letter(idx, v, static_cast<Letter>(a));
        const double dphi = phi(model, static_cast<Letter>(a), nbrs) - phi_x;
        // zeta{x} F0(e^L) with L = dphi + log zeta{x^{v->a}} - log zeta{x},
        // evaluated in log space so extreme ratios near the support boundary
        // do not overflow.
        const double L = dphi + logp[flip] - logp[idx];
        const double term = std::exp(logp[idx] + L) * (1.0 - L) - zeta.p[idx];
        total += term * c[a];
      }
    }
  }
  return total;
}

// ---------------------------------------------------------------------------
// Stability
// ---------------------------------------------------------------------------

namespace {

StabilityReport stability_common(const GroupSpec& spec, const SpinModel& model,
                                 const HomGraph& hom_a, const HomGraph& hom_b, double t,
                                 int R, int delta_rmax) {
  StabilityReport rep;
  rep.t = t;
  rep.R = R;
  rep.delta_a = Delta(hom_a, spec, delta_rmax).value;
  rep.delta_b = Delta(hom_b, spec, delta_rmax).value;
  rep.M = M_constant(model, spec);
  return rep;
}

}  // namespace

StabilityReport stability_gap(const GroupSpec& spec, const SpinModel& model,
                              const HomGraph& hom_a, const HomGraph& hom_b,
                              const DenseState& zeta0a, const DenseState& zeta0b,
                              double t, int R, double dt, int delta_rmax) {
  StabilityReport rep = stability_common(spec, model, hom_a, hom_b, t, R, delta_rmax);
  CayleyBall ball = build_ball(spec, R);
  rep.initial_upper = dbar_truncated(empirical_state(hom_a, zeta0a, ball),
                                     empirical_state(hom_b, zeta0b, ball), spec, ball)
                          .upper;
  DenseState za = evolve_exact(model, hom_a, zeta0a, t, dt);
  DenseState zb = evolve_exact(model, hom_b, zeta0b, t, dt);
  rep.measured = dbar_truncated(empirical_state(hom_a, za, ball),
                                empirical_state(hom_b, zb, ball), spec, ball);
  rep.bound = ((rep.delta_a + rep.delta_b) * t + rep.initial_upper) * std::exp(rep.M * t);
  rep.pass = rep.measured.upper <= rep.bound;
  return rep;
}

PatternDistribution empirical_product_exact(const HomGraph& hom,
                                            const std::vector<double>& site_probs,
                                            const CayleyBall& ball) {
  PatternDistribution P;
  P.radius = ball.radius;
  const int A = static_cast<int>(site_probs.size());
  const double unit = 1.0 / hom.n;
  std::vector<int> phi;
  for (int v = 0; v < hom.n; ++v) {
    phi.resize(ball.size());
    phi[0] = v;
    for (int j = 1; j < ball.size(); ++j)
      phi[j] = hom.step(ball.parent_letter[j], phi[ball.parent[j]]);
    // Ball vertices mapped to the same site must carry the same letter;
    // enumerate assignments to the distinct sites.
    std::vector<int> distinct;  // site ids
    std::vector<int> which(ball.size());
    for (int j = 0; j < ball.size(); ++j) {
      int id = -1;
      for (size_t d = 0; d < distinct.size(); ++d)
        if (distinct[d] == phi[j]) id = static_cast<int>(d);
      if (id < 0) {
        id = static_cast<int>(distinct.size());
        distinct.push_back(phi[j]);
      }
      which[j] = id;
    }
    const int D = static_cast<int>(distinct.size());
    std::vector<Letter> assign(D, 0), labels(ball.size());
    while (true) {
      double w = unit;
      for (int d = 0; d < D; ++d) w *= site_probs[assign[d]];
      for (int j = 0; j < ball.size(); ++j) labels[j] = assign[which[j]];
      P.w[labels] += w;
      int d = 0;
      while (d < D) {
        if (++assign[d] < A) break;
        assign[d] = 0;
        ++d;
      }
      if (d == D) break;
    }
  }
  return P;
}

StabilityReport stability_gap_mc(const GroupSpec& spec, const SpinModel& model,
                                 const HomGraph& hom_a, const HomGraph& hom_b,
                                 const std::vector<double>& site_probs, double t, int R,
                                 long n_samples, std::uint64_t seed, int delta_rmax) {
  StabilityReport rep = stability_common(spec, model, hom_a, hom_b, t, R, delta_rmax);
  rep.n_samples = n_samples;
  CayleyBall ball = build_ball(spec, R);
  rep.initial_upper = dbar_truncated(empirical_product_exact(hom_a, site_probs, ball),
                                     empirical_product_exact(hom_b, site_probs, ball),
                                     spec, ball)
                          .upper;

  const int A = static_cast<int>(site_probs.size());
  // Patterns are packed into base-|A| integers (enumerate_patterns order) so
  // the hot accumulation loop is a flat array increment.
  long long pattern_count = 1;
  for (int j = 0; j < ball.size(); ++j) {
    pattern_count *= A;
    if (pattern_count > (1ll << 22))
      throw BudgetExceeded("stability_gap_mc: pattern space too large");
  }
  const auto all_patterns = enumerate_patterns(ball, A);
  auto estimate = [&](const HomGraph& hom, std::uint64_t stream) {
    std::vector<std::vector<int>> phis(hom.n);
    for (int v = 0; v < hom.n; ++v) {
      auto& phi = phis[v];
      phi.resize(ball.size());
      phi[0] = v;
      for (int j = 1; j < ball.size(); ++j)
        phi[j] = hom.step(ball.parent_letter[j], phi[ball.parent[j]]);
    }
    std::vector<double> counts(pattern_count, 0.0);
    Microstate x(hom.n);
    for (long s = 0; s < n_samples; ++s) {
      Rng rng(seed + 0x9e3779b97f4a7c15ull * stream + static_cast<std::uint64_t>(s));
      for (int v = 0; v < hom.n; ++v)
        x[v] = static_cast<Letter>(rng.categorical(site_probs.data(), A, 1.0));
      advance_microstate(model, hom, x, 0.0, t, rng);
      for (int v = 0; v < hom.n; ++v) {
        const auto& phi = phis[v];
        long long key = 0;
        for (int j = ball.size() - 1; j >= 0; --j) key = key * A + x[phi[j]];
        counts[key] += 1.0;
      }
    }
    PatternDistribution P;
    P.radius = ball.radius;
    const double unit = 1.0 / (static_cast<double>(n_samples) * hom.n);
    for (long long key = 0; key < pattern_count; ++key)
      if (counts[key] > 0) P.w[all_patterns[key]] = counts[key] * unit;
    return P;
  };
  rep.measured = dbar_truncated(estimate(hom_a, 1), estimate(hom_b, 2), spec, ball);
  rep.bound = ((rep.delta_a + rep.delta_b) * t + rep.initial_upper) * std::exp(rep.M * t);
  rep.pass = rep.measured.upper <= rep.bound;
  return rep;
}

}  // namespace soficspin
