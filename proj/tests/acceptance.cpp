// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ombrl/config.hpp"
#include "ombrl/harness.hpp"
#include "ombrl/report.hpp"
#include "oracles.hpp"

using namespace ombrl;

namespace {

// Tolerances and thresholds.
constexpr double kOracleTol = 1e-8;
constexpr double kIdentityTol = 1e-8;
constexpr double kCoverageTarget = 0.9;
constexpr double kSlopeRatio = 1.3;
constexpr double kStationarySpread = 0.2;
constexpr double kDriftMultiple = 5.0;
// Noise std of the calibration trials. The confidence multiplier scales its
// log-det term by sigma, which is only conservative for sigma near 1; at 0.05
// the stationary band misses most grids even without drift (reported below).
constexpr double kCalibrationNoise = 0.5;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

Dataset make_data(const Matrix& x, const Matrix& y) {
  Dataset d(x.cols(), y.cols());
  d.inputs = x;
  d.targets = y;
  d.episode_tags.assign(static_cast<std::size_t>(x.rows()), 1);
  return d;
}

Outcome gp_equivalence() {
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<int> size(1, 50), dim(1, 3);
  std::uniform_real_distribution<double> ell(0.3, 2.0), var(0.5, 2.0), s2(0.01, 0.1);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = size(rng);
    const int dx = dim(rng);
    const int dout = dim(rng);
    const double l = ell(rng), v = var(rng), s = s2(rng);
    const Matrix x = oracle::random_matrix(rng, n, dx + 1, -2.0, 2.0);
    const Matrix y = oracle::random_matrix(rng, n, dout, -1.0, 1.0);
    const GpPosterior post(KernelSpec::squared_exponential(l, v), make_data(x, y), s);
    const Matrix q = oracle::random_matrix(rng, 5, dx + 1, -2.5, 2.5);
    for (Eigen::Index i = 0; i < q.rows(); ++i) {
      const Vector z = q.row(i).transpose();
      const auto ref = oracle::dense_posterior(x, y, z, l, v, s);
      const Prediction p = post.predict(z);
      worst = std::max(worst, (p.mean - ref.mean).cwiseAbs().maxCoeff());
      for (Eigen::Index j = 0; j < p.std.size(); ++j)
        worst = std::max(worst, std::abs(p.std(j) * p.std(j) - ref.variance));
    }
  }
  return {worst <= kOracleTol, "max abs error " + fmt("%.3g", worst) + " over 100 datasets"};
}

// SynthRkhs ground truth on [-1, 1]^2 (one state, one action) whose
// coefficients move by `drift` in RKHS norm per episode.
EnvSpec calibration_env(double drift, std::uint64_t seed) {
  const auto kernel = KernelSpec::squared_exponential(0.5, 1.0);
  DecaySchedule flat;
  flat.theta_max = flat.theta_min = 1.0;
  return EnvSpec::make_synth_rkhs(random_synth_params(kernel, 1, 1, 10, 1.0, drift, seed), flat,
                                  1, 0.0, 1.0);
}

Matrix grid_points() {
  Matrix g(100, 2);
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j) g.row(10 * i + j) << -1.0 + i * 2.0 / 9.0, -1.0 + j * 2.0 / 9.0;
  return g;
}

CalibrationParams calibration_params(CalibrationMode mode, double noise_std) {
  CalibrationParams p;
  p.rkhs_bound = 1.0;
  p.noise_std = noise_std;
  p.confidence = 0.1;
  p.state_dim = 1;
  p.mode = mode;
  return p;
}

// Fraction of grid points where |f - mu| <= beta std + bias.
double grid_coverage(const GpPosterior& post, const Matrix& truth, double beta, double bias) {
  const Matrix grid = grid_points();
  int covered = 0;
  for (Eigen::Index i = 0; i < grid.rows(); ++i) {
    const Interval band = confidence_interval(post, grid.row(i).transpose(), beta, bias);
    if (truth(i, 0) >= band.lo(0) && truth(i, 0) <= band.hi(0)) ++covered;
  }
  return covered / static_cast<double>(grid.rows());
}

// Fraction of 200 trials whose band covers the whole grid.
double stationary_coverage_rate(double sigma) {
  const CalibrationParams params = calibration_params(CalibrationMode::Reset, sigma);
  int full = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const EnvSpec env = calibration_env(0.0, 1000 + trial);
    std::mt19937_64 rng(5000 + trial);
    std::normal_distribution<double> noise(0.0, sigma);
    const Matrix x = oracle::random_matrix(rng, 50, 2, -1.0, 1.0);
    Matrix y = true_dynamics(env, 1, x);
    for (Eigen::Index i = 0; i < y.size(); ++i) y.data()[i] += noise(rng);
    const GpPosterior post(env.synth.kernel, make_data(x, y), sigma * sigma);
    const double beta = beta_width(params, 1, post.information_gain(), 2);
    if (grid_coverage(post, true_dynamics(env, 2, grid_points()), beta, 0.0) == 1.0) ++full;
  }
  return full / 200.0;
}

Outcome stationary_coverage() {
  std::string detail = "trials with full grid coverage:";
  double rate = 0.0;
  for (double sigma : {1.0, kCalibrationNoise, 0.2, 0.05}) {
    const double r = stationary_coverage_rate(sigma);
    if (sigma == kCalibrationNoise) rate = r;
    detail += fmt(" noise %g", sigma) + fmt(" -> %.3f", r);
  }
  return {rate >= kCoverageTarget, detail + " (target " + fmt("%.2f", kCoverageTarget) + fmt(" at noise %g)", kCalibrationNoise)};
}

struct DriftCoverage {
  bool ordered = true;
  double stationary_rate = 0.0;
  double drift_rate = 0.0;
};

// Four episodes of 15 noisy points from f_1..f_4, evaluated against f_5.
DriftCoverage drift_coverage(double drift, int trials) {
  constexpr double sigma = kCalibrationNoise;
  constexpr int episodes = 4;
  const CalibrationParams stationary = calibration_params(CalibrationMode::Reset, sigma);
  const CalibrationParams windowed = calibration_params(CalibrationMode::SlidingWindow, sigma);
  DriftCoverage out;
  int stationary_full = 0, drift_full = 0;
  for (int trial = 0; trial < trials; ++trial) {
    EnvSpec env = calibration_env(drift, 2000 + trial);
    env.schedule.start_episode = 0;
    env.horizon_T = 15;
    std::mt19937_64 rng(7000 + trial);
    std::normal_distribution<double> noise(0.0, sigma);
    Matrix x(episodes * 15, 2), y(episodes * 15, 1);
    for (int k = 1; k <= episodes; ++k) {
      const Matrix xk = oracle::random_matrix(rng, 15, 2, -1.0, 1.0);
      Matrix yk = true_dynamics(env, k, xk);
      for (Eigen::Index i = 0; i < yk.size(); ++i) yk.data()[i] += noise(rng);
      x.middleRows((k - 1) * 15, 15) = xk;
      y.middleRows((k - 1) * 15, 15) = yk;
    }
    const GpPosterior post(env.synth.kernel, make_data(x, y), sigma * sigma);
    const double gamma = post.information_gain();
    const int n = episodes + 1;
    double variation = 0.0;
    for (int k = 1; k < n; ++k) variation += drift_increment(env, k);
    const Matrix truth = true_dynamics(env, n, grid_points());
    const double cs = grid_coverage(post, truth, beta_width(stationary, episodes, gamma, n), 0.0);
    const double cd = grid_coverage(post, truth, beta_width(windowed, episodes, gamma, n),
                                    xi_coefficient(windowed, episodes, gamma) * variation);
    out.ordered = out.ordered && cd >= cs;
    stationary_full += cs == 1.0;
    drift_full += cd == 1.0;
  }
  out.stationary_rate = stationary_full / static_cast<double>(trials);
  out.drift_rate = drift_full / static_cast<double>(trials);
  return out;
}

Outcome drift_ordering() {
  constexpr double sigma = kCalibrationNoise;
  const DriftCoverage control = drift_coverage(0.0, 50);
  bool pass = control.ordered;
  std::string detail = "no drift: stationary band " + fmt("%.2f", control.stationary_rate);
  for (double multiple : {kDriftMultiple, 2.0 * kDriftMultiple}) {
    const DriftCoverage c = drift_coverage(multiple * sigma, 50);
    pass = pass && c.ordered && c.stationary_rate < kCoverageTarget;
    detail += fmt("; drift %.0fx noise: ", multiple) +
              "drift band " + fmt("%.2f", c.drift_rate) + ", stationary band " +
              fmt("%.2f", c.stationary_rate) + (c.ordered ? ", ordered" : ", NOT ordered");
  }
  return {pass, detail};
}

std::vector<MethodSummary> run_bundled(const std::string& name, ExperimentConfig& cfg) {
  cfg = load_config(name);
  return summarize(run_experiment(cfg));
}

const MethodSummary& method(const std::vector<MethodSummary>& s, const std::string& name) {
  for (const auto& m : s)
    if (m.method == name) return m;
  throw std::runtime_error("missing method " + name);
}

Outcome regret_slopes() {
  ExperimentConfig cfg;
  const auto s = run_bundled("pendulum_halved", cfg);
  const double before = decay_value(cfg.env.schedule, 9);
  const double after = decay_value(cfg.env.schedule, 10);
  std::vector<double> x;
  for (int n = 15; n <= 40; ++n) x.push_back(n);
  auto slope = [&](const std::string& name) {
    const auto& c = method(s, name).mean_curve;
    return least_squares_slope(x, std::vector<double>(c.begin() + 14, c.begin() + 40));
  };
  const double none = slope("none"), reset = slope("reset"), window = slope("window");
  const bool setup = cfg.episodes == 40 && cfg.seeds.size() == 5 &&
                     std::abs(after / before - 0.5) < 1e-3 && cfg.reset_period == 20 &&
                     cfg.window_size == 20;
  const bool pass = setup && none >= kSlopeRatio * reset && none >= kSlopeRatio * window;
  return {pass, "slopes over episodes 15-40: none " + fmt("%.4f", none) + ", reset " +
                    fmt("%.4f", reset) + ", window " + fmt("%.4f", window) + "; ratios " +
                    fmt("%.3f", none / reset) + " and " + fmt("%.3f", none / window) +
                    " (need >= " + fmt("%.1f", kSlopeRatio) + ")" +
                    (setup ? "" : "; config does not match the required setup")};
}

Outcome stationary_indifference() {
  ExperimentConfig cfg;
  const auto s = run_bundled("pendulum_stationary", cfg);
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  std::string detail = "final regret";
  for (const auto& m : s) {
    lo = std::min(lo, m.final_mean);
    hi = std::max(hi, m.final_mean);
    detail += " " + m.method + " " + fmt("%.3f", m.final_mean);
  }
  const bool setup = cfg.env.schedule.rate == 0.0 && cfg.seeds.size() == 5 && s.size() == 3;
  const bool pass = setup && hi <= (1.0 + kStationarySpread) * lo;
  return {pass, detail + "; max/min " + fmt("%.3f", hi / lo) + " (need <= " +
                    fmt("%.2f", 1.0 + kStationarySpread) + ")"};
}

Outcome buffer_audit() {
  int mismatches = 0, checks = 0;
  for (int size = 1; size <= 10; ++size) {
    for (const auto& policy : {ForgettingPolicy::reset(size), ForgettingPolicy::window(size)}) {
      EpisodeBuffer buffer(policy);
      for (int n = 1; n <= 50; ++n) {
        const auto got = buffer.retained_episodes();
        const std::set<int> want = policy.kind == ForgettingPolicy::Kind::Reset
                                       ? oracle::reset_retained(n, size)
                                       : oracle::window_retained(n, size);
        ++checks;
        if (std::set<int>(got.begin(), got.end()) != want || got.size() != want.size() ||
            retained_count(policy, n) != static_cast<int>(want.size()))
          ++mismatches;
        Trajectory t;
        t.episode_index = n;
        t.transitions.push_back({Vector::Constant(1, n), Vector::Zero(1), Vector::Zero(1), 0});
        buffer.push_trajectory(std::move(t));
      }
    }
  }
  return {mismatches == 0,
          std::to_string(mismatches) + " mismatches in " + std::to_string(checks) + " states"};
}

Outcome bound_tradeoff() {
  constexpr int N = 1000;
  const std::vector<std::pair<std::string, std::function<double(int)>>> models = {
      {"log(1+p)", [](int p) { return std::log1p(p); }},
      {"sqrt(p)", [](int p) { return std::sqrt(static_cast<double>(p)); }}};
  bool pass = true;
  std::string detail;
  for (const auto& [label, gamma] : models) {
    for (double P : {0.0, 0.1, 1.0, 10.0}) {
      bool learning_down = true, drift_up = true;
      int argmin = 1;
      double best = std::numeric_limits<double>::infinity();
      BoundDiagnostics prev{};
      for (int p = 1; p <= 1000; ++p) {
        const BoundDiagnostics d = bound_terms(p, gamma(p), N, P);
        if (p > 1) {
          learning_down = learning_down && d.learning_term < prev.learning_term;
          if (P > 0.0) drift_up = drift_up && d.drift_term > prev.drift_term;
        }
        if (d.total() < best) {
          best = d.total();
          argmin = p;
        }
        prev = d;
      }
      const bool ok = P == 0.0 ? argmin == 1000
                               : learning_down && drift_up && argmin > 1 && argmin < 1000;
      pass = pass && ok;
      detail += (detail.empty() ? "" : "; ") + label + fmt(" P=%g: ", P) + "argmin " +
                std::to_string(argmin) + (learning_down ? "" : ", learning not decreasing") +
                (drift_up ? "" : ", drift not increasing");
    }
  }
  return {pass, detail};
}

Outcome info_gain_identities() {
  std::mt19937_64 rng(808);
  std::uniform_int_distribution<int> size(1, 8), dim(1, 3);
  std::uniform_real_distribution<double> ell(0.3, 2.0), var(0.5, 2.0), s2(0.01, 0.5);
  double chain = 0.0, single = 0.0, reference = 0.0;
  bool monotone = true;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = size(rng), d = dim(rng);
    const double l = ell(rng), v = var(rng), s = s2(rng);
    const auto spec = KernelSpec::squared_exponential(l, v);
    const Matrix S = oracle::random_matrix(rng, n, d, -1.5, 1.5);
    const Vector z = oracle::random_matrix(rng, 1, d, -1.5, 1.5).row(0).transpose();
    Matrix Sz(n + 1, d);
    Sz << S, z.transpose();
    const double before = info_gain(spec, S, s), after = info_gain(spec, Sz, s);
    const GpPosterior post(spec, make_data(S, Matrix::Zero(n, 1)), s);
    chain = std::max(chain, std::abs(after - before - 0.5 * std::log1p(post.variance(z) / s)));
    monotone = monotone && after >= before - kIdentityTol;
    single = std::max(single, std::abs(info_gain(spec, z.transpose(), s) -
                                       0.5 * std::log1p(kernel_eval(spec, z, z) / s)));
    reference = std::max(reference, std::abs(after - oracle::info_gain(Sz, l, v, s)));
  }
  const bool pass = chain <= kIdentityTol && single <= kIdentityTol &&
                    reference <= kIdentityTol && monotone;
  return {pass, "chain rule err " + fmt("%.3g", chain) + ", single point err " +
                    fmt("%.3g", single) + ", determinant err " + fmt("%.3g", reference) +
                    (monotone ? ", monotone" : ", NOT monotone")};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

Outcome determinism() {
  const auto root = std::filesystem::temp_directory_path() / "ombrl_acceptance_determinism";
  std::filesystem::remove_all(root);
  std::string files[2];
  for (int i = 0; i < 2; ++i) {
    const auto out = root / std::to_string(i);
    const std::string cmd = std::string("\"") + OMBRL_CLI_PATH +
                            "\" run --config pendulum_medium --seeds 0 -q --out \"" +
                            out.string() + "\" > /dev/null";
    if (std::system(cmd.c_str()) != 0) return {false, "cli run failed: " + cmd};
    files[i] = slurp(out / "episodes.csv");
  }
  std::filesystem::remove_all(root);
  const bool pass = !files[0].empty() && files[0] == files[1];
  return {pass, "episodes.csv " + std::to_string(files[0].size()) + " bytes, " +
                    (pass ? "identical" : "different")};
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  Outcome (*run)();
};

const std::vector<Criterion> kCriteria = {
    {1, "GP oracle equivalence", 10.0, gp_equivalence},
    {2, "stationary calibration coverage", 120.0, stationary_coverage},
    {3, "drift calibration ordering", 120.0, drift_ordering},
    {4, "post-change regret slopes", 900.0, regret_slopes},
    {5, "stationary indifference", 600.0, stationary_indifference},
    {6, "buffer closed-form audit", 1.0, buffer_audit},
    {7, "bound trade-off", 1.0, bound_tradeoff},
    {8, "info-gain identities", 5.0, info_gain_identities},
    {9, "end-to-end determinism", 300.0, determinism},
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  std::vector<int> selected;
  app.add_option("--criterion,-c", selected, "criteria to run (default: all)")
      ->check(CLI::Range(1, 9));
  CLI11_PARSE(app, argc, argv);

  bool all_pass = true;
  for (const auto& c : kCriteria) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), c.id) == selected.end())
      continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs <= c.budget_s;
    const bool pass = o.pass && in_time;
    all_pass = all_pass && pass;
    std::printf("criterion %d %s: %s; %s (%.2fs, budget %.0fs)\n", c.id, pass ? "PASS" : "FAIL",
                c.name, o.detail.c_str(), secs, c.budget_s);
    std::fflush(stdout);
  }
  return all_pass ? 0 : 1;
}
