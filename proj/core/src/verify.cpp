#include "soficspin/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "soficspin/diagnostics.hpp"
#include "soficspin/dynamics.hpp"
#include "soficspin/fed.hpp"
#include "soficspin/targets.hpp"

namespace soficspin::verify {

namespace {

using Clock = std::chrono::steady_clock;

Check check_lt(const std::string& name, double value, double threshold) {
  return {name, value, threshold, "<", value < threshold};
}

Check check_le(const std::string& name, double value, double threshold) {
  return {name, value, threshold, "<=", value <= threshold};
}

Check check_abs_le(const std::string& name, double value, double threshold) {
  return {name, value, threshold, "|.| <=", std::abs(value) <= threshold};
}

Check check_eq(const std::string& name, double value, double expected) {
  return {name, value, expected, "==", value == expected};
}

DenseState random_full_support(const StateSpace& space, Rng& rng) {
  DenseState z(space);
  double sum = 0.0;
  for (auto& p : z.p) {
    p = -std::log(rng.next_unit_positive());
    sum += p;
  }
  for (auto& p : z.p) p /= sum;
  return z;
}

double elapsed(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

// ---------------------------------------------------------------------------
// 1. Derivative formula: analytic vs centered finite differences
// ---------------------------------------------------------------------------

SuiteResult run_derivative() {
  const auto t0 = Clock::now();
  SuiteResult res;
  res.suite = "derivative";

  const SpinModel model = SpinModel::ising(0.7);
  const HomGraph hom = cycle_hom(6);
  const StateSpace space(6, 2);
  const double t_eval = 0.05, dt = 1e-3, h_fd = 1e-4;

  for (int seed = 1; seed <= 5; ++seed) {
    Rng rng(seed);
    DenseState zeta0 = random_full_support(space, rng);
    DenseState minus = evolve_exact(model, hom, zeta0, t_eval - h_fd, dt);
    DenseState center = evolve_exact(model, hom, minus, h_fd, h_fd);
    DenseState plus = evolve_exact(model, hom, center, h_fd, h_fd);
    const double analytic = free_energy_derivative(model, hom, center);
    const double fd =
        (free_energy(model, hom, plus) - free_energy(model, hom, minus)) / (2 * h_fd);
    const double rel = std::abs(analytic - fd) / std::max(std::abs(analytic), 1e-30);
    res.add(check_lt("seed " + std::to_string(seed) + " relative error", rel, 1e-5));
  }
  res.seconds = elapsed(t0);
  res.add(check_lt("runtime seconds", res.seconds, 10.0));
  return res;
}

// ---------------------------------------------------------------------------
// 2. Monotonicity and stationarity
// ---------------------------------------------------------------------------

SuiteResult run_monotone() {
  const auto t0 = Clock::now();
  SuiteResult res;
  res.suite = "monotone";

  const SpinModel model = SpinModel::ising(0.5);
  const HomGraph hom = cycle_hom(6);
  const StateSpace space(6, 2);

  Rng rng(7);
  DenseState zeta = random_full_support(space, rng);
  double prev = free_energy(model, hom, zeta);
  double worst_rise = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < 100; ++k) {
    zeta = evolve_exact(model, hom, zeta, 0.5, 1e-3);
    const double f = free_energy(model, hom, zeta);
    worst_rise = std::max(worst_rise, f - prev);
    prev = f;
  }
  res.add(check_le("worst free-energy increase on t grid", worst_rise, 1e-10));

  const GibbsResult gibbs = gibbs_finite(model, hom);
  double tv = 0.0;
  for (long long i = 0; i < space.size(); ++i)
    tv += std::abs(zeta.p[i] - gibbs.state.p[i]);
  res.add(check_lt("TV(zeta_50, xi_V)", 0.5 * tv, 1e-3));

  res.add(check_abs_le("derivative at xi_V", free_energy_derivative(model, hom, gibbs.state),
                       1e-10));

  const HomGraph hom4 = cycle_hom(4);
  const StateSpace space4(4, 2);
  Rng rng4(11);
  double max_deriv = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < 100; ++k) {
    DenseState z = random_full_support(space4, rng4);
    max_deriv = std::max(max_deriv, free_energy_derivative(model, hom4, z));
  }
  res.add(check_lt("max derivative over 100 random 4-site states", max_deriv, -1e-8));

  res.seconds = elapsed(t0);
  return res;
}

// ---------------------------------------------------------------------------
// 3. Calculation shortcut: brute force vs transfer matrix
// ---------------------------------------------------------------------------

SuiteResult run_calculation() {
  const auto t0 = Clock::now();
  SuiteResult res;
  res.suite = "calculation";

  const SpinModel model = SpinModel::ising(0.5);
  double worst = 0.0;
  for (int n = 3; n <= 12; ++n) {
    const double brute = gibbs_finite(model, cycle_hom(n)).log_Z;
    const double tm = log_partition_cycle(model, n);
    worst = std::max(worst, std::abs(brute - tm));
  }
  res.add(check_lt("max |brute log Z - transfer log Z|, n <= 12", worst, 1e-9));

  const double per_site = log_partition_cycle(model, 64) / 64.0;
  res.add(check_lt("|(1/64) log Z_64 - log(2 cosh 0.5)|",
                   std::abs(per_site - std::log(2.0 * std::cosh(0.5))), 1e-2));

  res.seconds = elapsed(t0);
  res.add(check_lt("runtime seconds", res.seconds, 5.0));
  return res;
}

// ---------------------------------------------------------------------------
// 4. Sampler consistency against the master equation
// ---------------------------------------------------------------------------

SuiteResult run_sampler() {
  const auto t0 = Clock::now();
  SuiteResult res;
  res.suite = "sampler";

  const SpinModel model = SpinModel::ising(0.5);
  const int n = 8;
  const HomGraph hom = cycle_hom(n);
  const StateSpace space(n, 2);
  const double t = 1.0;
  const long runs = 100000;

  Microstate x0(n);
  for (int v = 0; v < n; ++v) x0[v] = static_cast<Letter>(v % 2);

  DenseState exact = evolve_exact(model, hom, DenseState::point_mass(space, x0), t, 1e-3);
  std::vector<double> marginal(n, 0.0);
  for (long long idx = 0; idx < space.size(); ++idx)
    for (int v = 0; v < n; ++v)
      if (space.letter(idx, v) == 1) marginal[v] += exact.p[idx];

  std::vector<long> ones(n, 0);
  long long total_events = 0;
  for (long s = 0; s < runs; ++s) {
    Microstate x = x0;
    Rng rng(90000 + static_cast<std::uint64_t>(s));
    total_events += advance_microstate(model, hom, x, 0.0, t, rng);
    for (int v = 0; v < n; ++v)
      if (x[v] == 1) ++ones[v];
  }
  double worst_z = 0.0;
  for (int v = 0; v < n; ++v) {
    const double freq = static_cast<double>(ones[v]) / runs;
    const double se = std::sqrt(std::max(marginal[v] * (1 - marginal[v]), 1e-12) / runs);
    worst_z = std::max(worst_z, std::abs(freq - marginal[v]) / se);
  }
  res.add(check_lt("max per-site |freq - exact| in standard errors", worst_z, 4.0));

  const double mean_events = static_cast<double>(total_events) / runs;
  res.add(check_lt("|mean event count - n t|", std::abs(mean_events - n * t),
                   4.0 * std::sqrt(n * t)));

  res.seconds = elapsed(t0);
  res.add(check_lt("runtime seconds", res.seconds, 60.0));
  return res;
}

// ---------------------------------------------------------------------------
// 5. Sofic statistics
// ---------------------------------------------------------------------------

SuiteResult run_delta() {
  const auto t0 = Clock::now();
  SuiteResult res;
  res.suite = "delta";

  GroupSpec z_spec = GroupSpec::free_group(1);
  const HomGraph cyc = cycle_hom(20);
  CayleyBall ball10 = build_ball(z_spec, 10);
  const std::vector<double> deltas = delta_table(cyc, ball10);
  double max_low = 0.0;
  for (int R = 0; R <= 9; ++R) max_low = std::max(max_low, deltas[R]);
  res.add(check_eq("n=20 cycle: max delta_R for R <= 9", max_low, 0.0));
  res.add(check_eq("n=20 cycle: delta_10", deltas[10], 1.0));

  const DeltaResult d = Delta(cyc, z_spec, 10);
  res.add(check_abs_le("n=20 cycle: Delta - 9 (2/3)^9",
                       d.value - 9.0 * std::pow(2.0 / 3.0, 9), 1e-12));

  GroupSpec f2 = GroupSpec::free_group(2);
  auto median_delta = [&](int n) {
    std::vector<double> vals;
    for (int seed = 0; seed < 20; ++seed)
      vals.push_back(Delta(random_hom(f2, n, 500 + seed), f2, 5).value);
    std::sort(vals.begin(), vals.end());
    return 0.5 * (vals[9] + vals[10]);
  };
  const double med500 = median_delta(500);
  const double med50 = median_delta(50);
  res.add(check_lt("median Delta(n=500) - median Delta(n=50) over 20 seeds",
                   med500 - med50, 0.0));

  res.seconds = elapsed(t0);
  return res;
}

// ---------------------------------------------------------------------------
// 6. Stability of empirical distributions (theorem-backed inequality)
// ---------------------------------------------------------------------------

SuiteResult run_stability() {
  const auto t0 = Clock::now();
  SuiteResult res;
  res.suite = "stability";

  GroupSpec z_spec = GroupSpec::free_group(1);
  z_spec.max_radius = 40;
  const SpinModel model = SpinModel::ising(0.5);
  const HomGraph h32 = cycle_hom(32);
  const HomGraph h64 = cycle_hom(64);
  const std::vector<double> site_probs = {0.2, 0.8};
  const long samples = 400000;

  for (double t : {0.1, 0.2}) {
    StabilityReport rep =
        stability_gap_mc(z_spec, model, h32, h64, site_probs, t, 2, samples, 424242, 31);
    const std::string tag = "t=" + std::to_string(t).substr(0, 3);
    res.add(check_le(tag + ": measured d-bar upper vs theorem bound",
                     rep.measured.upper, rep.bound));
  }

  res.seconds = elapsed(t0);
  return res;
}

// ---------------------------------------------------------------------------
// 7. Gibbs diagnostics
// ---------------------------------------------------------------------------

// Frozen by the direct-formula oracle in the test suite (biased product
// p(+) = 0.8 under the beta = 0.5 Ising potential, depth 1).
const double kBiasedProductDelta0 = -0.24956861124264465;
const double kBiasedProductDelta1 = -0.7519811637310516;

SuiteResult run_gibbs() {
  const auto t0 = Clock::now();
  SuiteResult res;
  res.suite = "gibbs";

  GroupSpec z_spec = GroupSpec::free_group(1);
  const SpinModel model = SpinModel::ising(0.5);

  CayleyBall ball2 = build_ball(z_spec, 2);
  PatternDistribution chain = gibbs_chain_marginal(model, ball2);
  for (int a = 0; a < 2; ++a) {
    res.add(check_abs_le("Delta_a^2(chain marginal), a=" + std::to_string(a),
                         delta_aR(chain, model, static_cast<Letter>(a), ball2), 1e-8));
  }
  res.add(check_eq("chain marginal certificate is none",
                   non_gibbs_certificate(chain, model, ball2) ? 1.0 : 0.0, 0.0));

  CayleyBall ball1 = build_ball(z_spec, 1);
  TargetMeasure biased = TargetMeasure::product({0.2, 0.8});
  PatternDistribution prod = biased.marginal_at(z_spec, ball1, model);
  const double d0 = delta_aR(prod, model, 0, ball1);
  const double d1 = delta_aR(prod, model, 1, ball1);
  res.add(check_lt("Delta_0^1(biased product)", d0, -1e-3));
  res.add(check_lt("Delta_1^1(biased product)", d1, -1e-3));
  res.add(check_abs_le("Delta_0^1 matches frozen oracle value", d0 - kBiasedProductDelta0, 1e-12));
  res.add(check_abs_le("Delta_1^1 matches frozen oracle value", d1 - kBiasedProductDelta1, 1e-12));
  res.add(check_eq("biased product certificate is a witness",
                   non_gibbs_certificate(prod, model, ball1) ? 1.0 : 0.0, 1.0));

  res.seconds = elapsed(t0);
  return res;
}

// ---------------------------------------------------------------------------
// 8. Fed estimator sanity
// ---------------------------------------------------------------------------

SuiteResult run_fed() {
  const auto t0 = Clock::now();
  SuiteResult res;
  res.suite = "fed";

  GroupSpec z_spec = GroupSpec::free_group(1);
  FedOptions opts;

  {
    const SpinModel free_model = SpinModel::zero(2);
    SoficSequenceSpec seq;
    seq.generator = SoficSequenceSpec::Generator::Cycles;
    seq.sizes = {4, 6};
    FedEstimate est = fed_estimate(z_spec, seq, free_model, TargetMeasure::product({0.5, 0.5}),
                                   {2.0, 0.5, 0.2}, 2, opts);
    double worst = 0.0;
    bool all_finite = true;
    for (const FedCell& cell : est.cells) {
      all_finite = all_finite && !cell.is_infinite && cell.status == CellStatus::Feasible;
      worst = std::max(worst, std::abs(cell.value + std::log(2.0)));
    }
    res.add(check_eq("free model: all cells feasible", all_finite ? 1.0 : 0.0, 1.0));
    res.add(check_lt("free model: max |cell value + log 2|", worst, 1e-6));
  }

  {
    const SpinModel model = SpinModel::ising(0.5);
    SoficSequenceSpec seq;
    seq.generator = SoficSequenceSpec::Generator::Cycles;
    seq.sizes = {6, 8};
    FedEstimate est = fed_estimate(z_spec, seq, model, TargetMeasure::gibbs_chain(),
                                   {0.5, 0.25, 0.15}, 2, opts);
    res.add(check_eq("ising: headline is finite", est.headline_infinite ? 1.0 : 0.0, 0.0));
    res.add(check_lt("ising: |headline + log(2 cosh 0.5)|",
                     std::abs(est.headline + std::log(2.0 * std::cosh(0.5))), 5e-2));
    bool bounds_ok = true;
    for (const FedCell& cell : est.cells)
      if (!cell.is_infinite)
        bounds_ok = bounds_ok && fed_bounds_check(cell.value, false, model, z_spec.r);
    res.add(check_eq("ising: bounds hold on every finite cell", bounds_ok ? 1.0 : 0.0, 1.0));
  }

  {
    // Root forced to 0 while both neighbor sites are forced to 1: no
    // shift-invariant measure has these marginals, so every cell is empty.
    const SpinModel model = SpinModel::ising(0.5);
    CayleyBall ball1 = build_ball(z_spec, 1);
    PatternDistribution point;
    point.radius = 1;
    point.w[{0, 1, 1}] = 1.0;
    SoficSequenceSpec seq;
    seq.generator = SoficSequenceSpec::Generator::Cycles;
    seq.sizes = {4, 6};
    FedEstimate est = fed_estimate(z_spec, seq, model,
                                   TargetMeasure::explicit_marginals(point),
                                   {0.5, 0.25}, 1, opts);
    bool all_infinite = true;
    for (const FedCell& cell : est.cells)
      all_infinite = all_infinite && cell.is_infinite &&
                     cell.status == CellStatus::InfeasibleCertified;
    res.add(check_eq("incompatible target: all cells +infinity",
                     all_infinite ? 1.0 : 0.0, 1.0));
  }

  res.seconds = elapsed(t0);
  return res;
}

// ---------------------------------------------------------------------------
// 9. Orbit copies of periodic measures
// ---------------------------------------------------------------------------

SuiteResult run_orbit() {
  const auto t0 = Clock::now();
  SuiteResult res;
  res.suite = "orbit";

  GroupSpec z_spec = GroupSpec::free_group(1);

  auto orbit_of_period = [](const std::vector<Letter>& labels) {
    const int k = static_cast<int>(labels.size());
    std::vector<int> shift(k);
    for (int p = 0; p < k; ++p) shift[p] = (p + 1) % k;
    return Orbit{HomGraph(k, {shift}), labels};
  };

  // Three hand-built periodic measures over Z.
  std::vector<PeriodicMeasure> measures;
  measures.push_back({{orbit_of_period({0})}, {1.0}});
  measures.push_back({{orbit_of_period({0, 1})}, {1.0}});
  measures.push_back({{orbit_of_period({0}), orbit_of_period({0, 1, 1})}, {0.25, 0.75}});
  const std::vector<std::vector<int>> mults = {{5}, {3}, {2, 2}};

  for (size_t m = 0; m < measures.size(); ++m) {
    const PeriodicMeasure& pm = measures[m];
    pm.validate(z_spec);
    OrbitCopyResult copy = orbit_copy_construction(pm, mults[m]);
    res.add(check_eq("measure " + std::to_string(m) + ": validate(hom)",
                     validate(copy.hom, z_spec).ok ? 1.0 : 0.0, 1.0));
    double worst = 0.0;
    for (int R = 0; R <= 3; ++R) {
      CayleyBall ball = build_ball(z_spec, R);
      PatternDistribution got = empirical_micro(copy.hom, copy.microstate, ball);
      PatternDistribution want;
      want.radius = R;
      for (size_t i = 0; i < pm.orbits.size(); ++i) {
        PatternDistribution orb =
            empirical_micro(pm.orbits[i].action, pm.orbits[i].labels, ball);
        for (const auto& [lab, mass] : orb.w)
          want.w[lab] += copy.realized_weights[i] * mass;
      }
      worst = std::max(worst, tv_distance(got, want));
    }
    res.add(check_abs_le("measure " + std::to_string(m) + ": max TV to marginals, R<=3",
                         worst, 1e-12));
  }

  {
    auto m1 = multiplicity_select({0.5, 0.5}, {1, 1}, 10);
    res.add(check_eq("multiplicity (1/2,1/2) sizes (1,1) n=10 -> (5,5)",
                     m1 == std::vector<int>{5, 5} ? 1.0 : 0.0, 1.0));
    auto m2 = multiplicity_select({1.0 / 3.0, 2.0 / 3.0}, {1, 1}, 9);
    res.add(check_eq("multiplicity (1/3,2/3) sizes (1,1) n=9 -> (3,6)",
                     m2 == std::vector<int>{3, 6} ? 1.0 : 0.0, 1.0));
    auto m3 = multiplicity_select({1.0 / 3.0, 2.0 / 3.0}, {1, 2}, 10);
    double err = 0.0;
    long long total = m3[0] * 1 + m3[1] * 2;
    err = std::max(std::abs(static_cast<double>(m3[0]) / total - 1.0 / 3.0),
                   std::abs(static_cast<double>(m3[1]) * 2 / total - 2.0 / 3.0));
    res.add(check_abs_le("multiplicity weight error on representable target", err, 0.0));
  }

  res.seconds = elapsed(t0);
  return res;
}

std::vector<SuiteResult> run_all() {
  return {run_derivative(), run_monotone(), run_calculation(), run_sampler(), run_delta(),
          run_stability(),  run_gibbs(),    run_fed(),         run_orbit()};
}

std::vector<SuiteResult> run_named(const std::string& name) {
  if (name == "derivative") return {run_derivative()};
  if (name == "monotone") return {run_monotone()};
  if (name == "calculation") return {run_calculation()};
  if (name == "sampler") return {run_sampler()};
  if (name == "delta") return {run_delta()};
  if (name == "stability") return {run_stability()};
  if (name == "gibbs") return {run_gibbs()};
  if (name == "fed") return {run_calculation(), run_fed()};
  if (name == "orbit") return {run_orbit()};
  if (name == "all") return run_all();
  throw ConfigError("unknown verify suite '" + name + "'");
}

}  // namespace soficspin::verify
