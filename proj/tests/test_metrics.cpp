#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "mmv/errors.hpp"
#include "mmv/metrics.hpp"
#include "mmv/model.hpp"
#include "oracles.hpp"

using namespace mmv;
using oracle::C;

TEST_CASE("mse: both normalizations") {
  std::vector<ComplexMatrix> truth{ComplexMatrix(2, 3), ComplexMatrix(2, 3)};
  std::vector<ComplexMatrix> est = truth;
  est[0].set(0, 0, cplx(1.0, 1.0));  // |·|² = 2
  est[1].set(1, 2, cplx(0.0, 2.0));  // |·|² = 4
  CHECK(mse(truth, est, MseNormalization::kPerTrain) == doctest::Approx(6.0 / (3 * 2 * 2)));
  CHECK(mse(truth, est, MseNormalization::kPerEval) == doctest::Approx(6.0 / (2 * 2)));
  CHECK(mse(truth, truth, MseNormalization::kPerEval) == 0.0);
  CHECK_THROWS_AS(mse(truth, std::vector<ComplexMatrix>{truth[0]}, MseNormalization::kPerEval),
                  ContractViolation);
  std::vector<ComplexMatrix> bad{ComplexMatrix(2, 3), ComplexMatrix(3, 2)};
  CHECK_THROWS_AS(mse(truth, bad, MseNormalization::kPerEval), ContractViolation);
}

TEST_CASE("hard_threshold keeps scores at or above gamma") {
  const std::vector<double> s{0.1, 0.5, 0.9, 0.5};
  CHECK(hard_threshold(s, 0.5) == Support{0, 1, 1, 1});
  CHECK(hard_threshold(s, 1.0) == Support{0, 0, 0, 0});
  CHECK(hard_threshold(s, -1.0) == Support{1, 1, 1, 1});
  CHECK_THROWS_AS(hard_threshold(s, std::nan("")), ContractViolation);
}

TEST_CASE("error_rate counts mismatches over all entries") {
  const std::vector<Support> truth{{1, 0, 0, 1}, {0, 0, 0, 0}};
  const std::vector<Support> est{{1, 1, 0, 0}, {0, 0, 0, 1}};
  CHECK(error_rate(truth, est) == doctest::Approx(3.0 / 8.0));
  CHECK(error_rate(truth, truth) == 0.0);
  const std::vector<Support> nonbinary{{1, 2, 0, 0}, {0, 0, 0, 0}};
  CHECK_THROWS_AS(error_rate(truth, nonbinary), ContractViolation);
}

TEST_CASE("calibrate_threshold: separated scores give zero error") {
  const std::vector<std::vector<double>> s{{0.9, 0.1, 0.2}, {0.05, 0.8, 0.3}};
  const std::vector<Support> truth{{1, 0, 0}, {0, 1, 0}};
  const auto cal = calibrate_threshold(s, truth);
  CHECK(cal.pe_star == 0.0);
  CHECK(cal.gamma_star > 0.3);
  CHECK(cal.gamma_star <= 0.8);
  CHECK(threshold_error_rate(s, truth, cal.gamma_star) == 0.0);
  CHECK(std::is_sorted(cal.pe_curve.begin(), cal.pe_curve.end()));
}

TEST_CASE("calibrate_threshold: uninformative scores give min(p, 1-p)") {
  const std::vector<std::vector<double>> s{{0.4, 0.4, 0.4, 0.4, 0.4}};
  const std::vector<Support> truth{{1, 0, 0, 0, 0}};
  CHECK(calibrate_threshold(s, truth).pe_star == doctest::Approx(0.2));
  const std::vector<Support> mostly{{1, 1, 1, 1, 0}};
  CHECK(calibrate_threshold(s, mostly).pe_star == doctest::Approx(0.2));
}

TEST_CASE("calibrate_threshold is optimal against a dense grid") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  std::bernoulli_distribution b(0.3);
  for (int batch = 0; batch < 20; ++batch) {
    std::vector<std::vector<double>> s(5, std::vector<double>(10));
    std::vector<Support> truth(5, Support(10));
    double lo = 1e300, hi = -1e300;
    for (int i = 0; i < 5; ++i)
      for (int n = 0; n < 10; ++n) {
        truth[i][n] = b(rng) ? 1 : 0;
        s[i][n] = g(rng) + 1.5 * truth[i][n];
        lo = std::min(lo, s[i][n]);
        hi = std::max(hi, s[i][n]);
      }
    const auto cal = calibrate_threshold(s, truth);
    CHECK(threshold_error_rate(s, truth, cal.gamma_star) == doctest::Approx(cal.pe_star));
    double grid_best = 1.0;
    for (int k = 0; k < 10000; ++k) {
      const double gamma = lo - 0.5 + (hi - lo + 1.0) * k / 9999.0;
      grid_best = std::min(grid_best, threshold_error_rate(s, truth, gamma));
    }
    CHECK(cal.pe_star <= grid_best + 1e-15);
  }
}

TEST_CASE("calibrate_threshold input validation") {
  const std::vector<std::vector<double>> s{{0.1, std::nan("")}};
  const std::vector<Support> truth{{0, 1}};
  CHECK_THROWS_AS(calibrate_threshold(s, truth), ContractViolation);
  CHECK_THROWS_AS(calibrate_threshold(std::vector<std::vector<double>>{},
                                      std::vector<Support>{}),
                  ContractViolation);
}

TEST_CASE("coherence: orthonormal and repeated columns") {
  ComplexMatrix eye(4, 4);
  for (std::size_t i = 0; i < 4; ++i) eye.set(i, i, 2.0);  // normalization is internal
  const auto c = coherence_metrics(eye, 2);
  CHECK(c.mu == doctest::Approx(0.0));
  CHECK(c.mu_block == doctest::Approx(0.0));
  CHECK(c.nu_sub == doctest::Approx(0.0));

  ComplexMatrix rep(3, 4);
  for (std::size_t n = 0; n < 4; ++n) {
    rep.set(0, n, cplx(1.0, 0.5));
    rep.set(1, n, cplx(n < 2 ? -0.3 : 0.7, 0.0));
    rep.set(2, n, cplx(0.2, n < 2 ? 0.0 : 1.0));
  }
  CHECK(coherence_metrics(rep, 2).nu_sub == doctest::Approx(1.0));
  CHECK_THROWS_AS(coherence_metrics(rep, 3), ContractViolation);
}

TEST_CASE("coherence matches a direct evaluation") {
  std::mt19937_64 rng(11);
  const auto a = oracle::random_matrix(6, 8, rng);
  auto an = a;
  for (std::size_t n = 0; n < 8; ++n) {
    double s = 0.0;
    for (std::size_t l = 0; l < 6; ++l) s += std::norm(a[l][n]);
    for (std::size_t l = 0; l < 6; ++l) an[l][n] /= std::sqrt(s);
  }
  const auto g = oracle::mul(oracle::herm(an), an);
  double mu = 0.0, nu = 0.0, mub = 0.0;
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t j = 0; j < 8; ++j) {
      if (i == j) continue;
      mu = std::max(mu, std::abs(g[i][j]));
      if (i / 2 == j / 2) nu = std::max(nu, std::abs(g[i][j]));
    }
  for (std::size_t gi = 0; gi < 4; ++gi)
    for (std::size_t hi = 0; hi < 4; ++hi) {
      if (gi == hi) continue;
      oracle::Mat blk = oracle::zeros(2, 2);
      for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) blk[i][j] = g[2 * gi + i][2 * hi + j];
      mub = std::max(mub, std::sqrt(oracle::gram_norm(blk)) / 2.0);
    }
  const auto c = coherence_metrics(oracle::flat(a), 2);
  CHECK(c.mu == doctest::Approx(mu).epsilon(1e-12));
  CHECK(c.nu_sub == doctest::Approx(nu).epsilon(1e-12));
  CHECK(c.mu_block == doctest::Approx(mub).epsilon(1e-9));
  CHECK(c.mu_block <= c.mu + 1e-12);
  CHECK(c.mu_block_avg <= c.mu_block + 1e-12);
  CHECK(c.nu_sub_avg <= c.nu_sub + 1e-12);

  const auto one = coherence_metrics(oracle::flat(a), 1);
  CHECK(one.mu_block == doctest::Approx(one.mu));
  CHECK(one.nu_sub == 0.0);
}

TEST_CASE("coherence of Gaussian pilots is moderate") {
  Rng rng(21);
  double sum = 0.0;
  for (int t = 0; t < 100; ++t) sum += coherence_metrics(gaussian_pilots(64, 128, false, rng), 1).mu;
  const double mean = sum / 100.0;
  CHECK(mean > 0.3);
  CHECK(mean < 0.7);
}
