#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <chrono>

#include "mmv/errors.hpp"
#include "mmv/map.hpp"
#include "mmv/metrics.hpp"
#include "mmv/model.hpp"
#include "oracles.hpp"

using namespace mmv;
using oracle::C;

namespace {

ProblemInstance instance(std::size_t l, std::size_t n, std::size_t m, double p, std::uint64_t seed,
                         double sigma2 = 0.1) {
  Rng rng(derive_seed(seed, 1));
  const ComplexMatrix a = gaussian_pilots(l, n, false, rng);
  return make_instance(a, ActivityModel::independent_two_group(n, p, p), m, sigma2,
                       derive_seed(seed, 2));
}

// Objective restricted to coordinate n, evaluated with dense LU.
double along(const ProblemInstance& inst, const oracle::Mat& an, const oracle::Mat& sh,
             std::vector<double> alpha, std::size_t n, double value, const MapConfig& cfg) {
  alpha[n] = value;
  return oracle::map_objective(an, alpha, sh, cfg.sigma2, inst.y.cols(),
                               cfg.variant == MapVariant::kMap ? &cfg.eps : nullptr);
}

std::vector<double> random_eps(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.02, 0.45);
  std::vector<double> eps(n);
  for (double& e : eps) e = u(rng);
  return eps;
}

double pe_of(const std::vector<std::vector<double>>& scores, const std::vector<Support>& truth,
             double gamma) {
  return threshold_error_rate(scores, truth, gamma);
}

}  // namespace

TEST_CASE("empirical_covariance") {
  CHECK(empirical_covariance(ComplexMatrix(3, 2)).squared_norm() == 0.0);

  std::mt19937_64 rng(1);
  const auto y1 = oracle::random_matrix(4, 1, rng);
  CHECK(oracle::max_abs_diff(oracle::mul(y1, oracle::herm(y1)), empirical_covariance(oracle::flat(y1))) <=
        1e-12);

  const auto y = oracle::random_matrix(4, 6, rng);
  auto expect = oracle::mul(y, oracle::herm(y));
  for (auto& r : expect)
    for (C& z : r) z /= 6.0;
  const ComplexMatrix got = empirical_covariance(oracle::flat(y));
  CHECK(oracle::max_abs_diff(expect, got) <= 1e-12);
  CHECK(got == adjoint(got));
}

TEST_CASE("coordinate_step: a zero step leaves the state alone") {
  const auto inst = instance(6, 10, 4, 0.2, 2);
  MapConfig cfg = MapConfig::ml(0.1);
  MapState st = init_map_state(ComplexMatrix(6, 4), inst.a, cfg);
  const ComplexMatrix before = st.sinv;
  const auto step = coordinate_step(st, 3, inst.a, cfg);
  CHECK(step.d == 0.0);
  CHECK(st.sinv == before);
  CHECK(st.alpha[3] == 0.0);
}

TEST_CASE("rank-one update agrees with direct inversion") {
  const auto inst = instance(6, 12, 8, 0.25, 3);
  std::mt19937_64 rng(3);
  MapConfig cfg = MapConfig::map(random_eps(12, rng), 0.1);
  cfg.refresh_interval = 0;
  MapState st = init_map_state(inst.y, inst.a, cfg);
  const auto an = oracle::nested(inst.a);
  for (std::size_t k = 0; k < 36; ++k) {
    coordinate_step(st, k % 12, inst.a, cfg);
    const auto direct = oracle::inverse(oracle::covariance(an, st.alpha, cfg.sigma2));
    CHECK(oracle::max_abs_diff(direct, st.sinv) <= 1e-8);
  }
  CHECK(oracle::max_abs_diff(oracle::nested(st.sinv), adjoint(st.sinv)) <= 1e-9);
  CHECK(inverse_drift(st) <= 1e-6);
}

TEST_CASE("coordinate_step minimizes the objective along its coordinate") {
  std::mt19937_64 rng(4);
  for (std::uint64_t trial = 0; trial < 10; ++trial) {
    const auto inst = instance(8, 20, 6, 0.15, 40 + trial);
    MapConfig cfg = trial % 2 ? MapConfig::ml(0.1) : MapConfig::map(random_eps(20, rng), 0.1);
    MapState st = init_map_state(inst.y, inst.a, cfg);
    for (std::size_t k = 0; k < 25; ++k) coordinate_step(st, (k * 7) % 20, inst.a, cfg);

    const auto an = oracle::nested(inst.a), sh = oracle::nested(st.sigma_hat);
    const std::size_t n = trial % 20;
    const double a0 = st.alpha[n];
    const std::vector<double> alpha = st.alpha;
    const double d = coordinate_step(st, n, inst.a, cfg).d;
    const auto f = [&](double delta) { return along(inst, an, sh, alpha, n, a0 + delta, cfg); };
    const double f_step = f(d);
    for (int i = 0; i <= 4000; ++i) {
      const double delta = -a0 + (2.0 * a0 + 3.0) * i / 4000.0;
      CHECK(f_step <= f(delta) + 1e-6);
    }
  }
}

TEST_CASE("closed-form step equals the textbook quotient") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.1, 10.0), cc(-0.5, -1e-3);
  for (int i = 0; i < 1000; ++i) {
    const double s = u(rng), q = u(rng), c = cc(rng);
    const double d = coordinate_increment(s, q, c);
    CHECK(d == doctest::Approx(coordinate_increment_quotient(s, q, c)).epsilon(1e-8));
    // Stationarity of log(1+ds) − dq/(1+ds) − cd.
    const double w = 1.0 + d * s;
    CHECK(std::abs(s / w - q / (w * w) - c) <= 1e-9 * (1.0 + std::abs(c) + s));
  }
}

TEST_CASE("ML step is the limit of the MAP step at eps = 1/2") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.1, 10.0);
  for (int i = 0; i < 100; ++i) {
    const double s = u(rng), q = u(rng);
    const double m = 1.0 + i % 32;
    const double ml = coordinate_increment_ml(s, q);
    for (double eps : {0.5 - 1e-6, 0.5 + 1e-6}) {
      const double c = std::log(eps / (1.0 - eps)) / m;
      CHECK(std::abs(coordinate_increment(s, q, c) - ml) <= 1e-4 * std::max(1.0, std::abs(ml)));
      CHECK(std::abs(coordinate_increment_quotient(s, q, c) - ml) <=
            1e-4 * std::max(1.0, std::abs(ml)));
    }
  }
}

TEST_CASE("f_map at the origin has a closed form") {
  const auto inst = instance(5, 10, 7, 0.2, 7);
  std::mt19937_64 rng(7);
  const MapConfig cfg = MapConfig::map(random_eps(10, rng), 0.1);
  const ComplexMatrix sh = empirical_covariance(inst.y);
  double tr = 0.0, prior = 0.0;
  for (std::size_t i = 0; i < 5; ++i) tr += sh.re(i, i);
  for (double e : cfg.eps) prior += std::log(1.0 - e);
  const double expect = 5.0 * std::log(0.1) + tr / 0.1 - prior / 7.0;
  CHECK(f_map(std::vector<double>(10, 0.0), inst.a, sh, 7, cfg) == doctest::Approx(expect).epsilon(1e-12));

  std::vector<double> alpha(10, 0.3);
  CHECK(f_map(alpha, inst.a, sh, 7, cfg) ==
        doctest::Approx(oracle::map_objective(oracle::nested(inst.a), alpha, oracle::nested(sh), 0.1, 7,
                                              &cfg.eps))
            .epsilon(1e-10));
  alpha[2] = -0.1;
  CHECK_THROWS_AS(f_map(alpha, inst.a, sh, 7, cfg), ContractViolation);
}

TEST_CASE("f_map never increases across sweeps") {
  std::mt19937_64 rng(8);
  for (std::uint64_t trial = 0; trial < 20; ++trial) {
    const auto inst = instance(8, 20, 8, 0.15, 80 + trial);
    const MapConfig cfg = trial % 2 ? MapConfig::ml(0.1) : MapConfig::map(random_eps(20, rng), 0.1);
    const auto res = solve_map(inst.y, inst.a, cfg, true);
    double prev = f_map(std::vector<double>(20, 0.0), inst.a, empirical_covariance(inst.y), 8, cfg);
    for (double f : res.objective_trace) {
      CHECK(f <= prev + 1e-9 * std::abs(prev));
      prev = f;
    }
    for (double v : res.alpha) CHECK(v >= 0.0);
  }
}

TEST_CASE("ML objective prefers the true support over a random one") {
  int wins = 0;
  const int trials = 100;
  const MapConfig cfg = MapConfig::ml(0.1);
  for (int t = 0; t < trials; ++t) {
    const auto inst = instance(20, 100, 32, 0.1, 900 + t);
    const ComplexMatrix sh = empirical_covariance(inst.y);
    std::vector<double> truth(100), other(100, 0.0);
    for (std::size_t n = 0; n < 100; ++n) truth[n] = inst.alpha[n];
    std::vector<std::size_t> idx(100);
    for (std::size_t n = 0; n < 100; ++n) idx[n] = n;
    Rng rng(derive_seed(77, t));
    std::shuffle(idx.begin(), idx.end(), rng);
    for (std::size_t k = 0; k < count_active(inst.alpha); ++k) other[idx[k]] = 1.0;
    wins += f_map(truth, inst.a, sh, 32, cfg) <= f_map(other, inst.a, sh, 32, cfg);
  }
  CHECK(wins >= 95);
}

TEST_CASE("solve_map: no evidence keeps alpha at zero") {
  const auto inst = instance(6, 10, 4, 0.2, 9);
  const auto res = solve_map(ComplexMatrix(6, 4), inst.a, MapConfig::ml(0.1));
  for (double v : res.alpha) CHECK(v == 0.0);
  CHECK(res.converged);
}

TEST_CASE("solve_map detects activity at N=100, L=20, M=64") {
  std::vector<std::vector<double>> cal_s, test_s;
  std::vector<Support> cal_t, test_t;
  for (int t = 0; t < 60; ++t) {
    const auto inst = instance(20, 100, 64, 0.1, 1000 + t);
    const auto res = solve_map(inst.y, inst.a, MapConfig::map(std::vector<double>(100, 0.1), 0.1));
    (t < 30 ? cal_s : test_s).push_back(res.alpha);
    (t < 30 ? cal_t : test_t).push_back(inst.alpha);
  }
  const double gamma = calibrate_threshold(cal_s, cal_t).gamma_star;
  const double pe = pe_of(test_s, test_t, gamma);
  MESSAGE("error rate " << pe << " at gamma " << gamma);
  CHECK(pe < 1e-2);
}

TEST_CASE("informative priors help MAP beat ML") {
  const auto model = ActivityModel::independent_two_group(100, 0.15, 0.05);
  std::vector<std::vector<double>> map_s[2], ml_s[2];
  std::vector<Support> truth[2];
  for (int t = 0; t < 200; ++t) {
    Rng rng(derive_seed(11, t));
    const ComplexMatrix a = gaussian_pilots(16, 100, false, rng);
    const auto inst = make_instance(a, model, 8, 0.1, derive_seed(12, t));
    const int half = t < 100 ? 0 : 1;
    map_s[half].push_back(solve_map(inst.y, a, MapConfig::map(model.marginals(), 0.1)).alpha);
    ml_s[half].push_back(solve_map(inst.y, a, MapConfig::ml(0.1)).alpha);
    truth[half].push_back(inst.alpha);
  }
  const double pe_map = pe_of(map_s[1], truth[1], calibrate_threshold(map_s[0], truth[0]).gamma_star);
  const double pe_ml = pe_of(ml_s[1], truth[1], calibrate_threshold(ml_s[0], truth[0]).gamma_star);
  MESSAGE("MAP " << pe_map << " ML " << pe_ml);
  CHECK(pe_map <= pe_ml);
}

TEST_CASE("mmse_given_support") {
  const auto inst = instance(12, 20, 3, 0.2, 13);
  CHECK(mmse_given_support(inst.y, inst.a, Support(20, 0), 0.1).squared_norm() == 0.0);

  SUBCASE("vanishing noise recovers X on the true support") {
    const auto quiet = instance(12, 20, 3, 0.2, 14, 1e-8);
    const ComplexMatrix xhat = mmse_given_support(quiet.y, quiet.a, quiet.alpha, 1e-8);
    CHECK(frobenius_distance(xhat, quiet.x) / quiet.x.norm() < 1e-3);
    for (std::size_t n = 0; n < 20; ++n)
      if (!quiet.alpha[n])
        for (std::size_t m = 0; m < 3; ++m) CHECK(xhat(n, m) == C(0.0));
  }

  SUBCASE("MMSE beats least squares on the support at sigma2 = 0.1") {
    double e_mmse = 0.0, e_ls = 0.0;
    for (int t = 0; t < 1000; ++t) {
      const auto p = instance(12, 30, 4, 0.15, 5000 + t);
      std::vector<std::size_t> sup;
      for (std::size_t n = 0; n < 30; ++n)
        if (p.alpha[n]) sup.push_back(n);
      if (sup.empty() || sup.size() > 10) continue;
      const auto an = oracle::nested(p.a);
      oracle::Mat as = oracle::zeros(12, sup.size());
      for (std::size_t l = 0; l < 12; ++l)
        for (std::size_t k = 0; k < sup.size(); ++k) as[l][k] = an[l][sup[k]];
      const auto ls = oracle::mul(oracle::inverse(oracle::mul(oracle::herm(as), as)),
                                  oracle::mul(oracle::herm(as), oracle::nested(p.y)));
      const ComplexMatrix mm = mmse_given_support(p.y, p.a, p.alpha, 0.1);
      for (std::size_t k = 0; k < sup.size(); ++k)
        for (std::size_t m = 0; m < 4; ++m) {
          e_ls += std::norm(ls[k][m] - p.x(sup[k], m));
          e_mmse += std::norm(mm(sup[k], m) - p.x(sup[k], m));
        }
    }
    CHECK(e_mmse <= e_ls);
  }
}

TEST_CASE("inverse drift is checked and repaired") {
  const auto inst = instance(10, 40, 8, 0.2, 15);
  MapConfig cfg = MapConfig::ml(0.1);
  cfg.drift_tol = 0.0;  // every check rebuilds
  cfg.refresh_interval = 10;
  cfg.k_max = 2;
  const auto res = solve_map(inst.y, inst.a, cfg);
  CHECK(res.rebuilds == 8);

  cfg.drift_tol = 1e-6;
  MapState st = init_map_state(inst.y, inst.a, cfg);
  for (std::size_t k = 0; k < 200; ++k) coordinate_step(st, k % 40, inst.a, cfg);
  CHECK(inverse_drift(st) <= 1e-6);
  const auto an = oracle::nested(inst.a);
  const auto prod = oracle::mul(oracle::nested(st.sinv), oracle::covariance(an, st.alpha, 0.1));
  CHECK(oracle::fro(oracle::add(prod, oracle::eye(10), -1.0)) <= 1e-6);
}

TEST_CASE("MapConfig validation") {
  CHECK_THROWS_AS(MapConfig::map(std::vector<double>(4, 0.5), 0.1).validate(4), ContractViolation);
  CHECK_THROWS_AS(MapConfig::map(std::vector<double>(4, 0.1), 0.1).validate(5), ContractViolation);
  CHECK_THROWS_AS(MapConfig::ml(0.0).validate(4), ContractViolation);
  CHECK_NOTHROW(MapConfig::ml(0.1).validate(4));
}

TEST_CASE("per-sweep cost grows as N times L squared") {
  auto time_sweeps = [](std::size_t l, std::size_t n) {
    const auto inst = instance(l, n, 16, 0.1, 16);
    MapConfig cfg = MapConfig::ml(0.1);
    cfg.k_max = 4;
    cfg.tol = -1.0;
    cfg.refresh_interval = 0;
    double best = 1e300;
    for (int rep = 0; rep < 7; ++rep) {
      const auto t0 = std::chrono::steady_clock::now();
      const auto res = solve_map(inst.y, inst.a, cfg);
      const auto t1 = std::chrono::steady_clock::now();
      REQUIRE(res.sweeps == 4);
      best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
    }
    return best;
  };
  const double base = time_sweeps(32, 200);
  CHECK(time_sweeps(32, 400) / base <= 2.5);
  CHECK(time_sweeps(64, 200) / base <= 4.0 * 1.25);
}
