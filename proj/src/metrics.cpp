#include "mmv/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

#include "mmv/errors.hpp"

namespace mmv {

double mse(std::span<const ComplexMatrix> truth, std::span<const ComplexMatrix> estimate,
           MseNormalization normalization) {
  detail::require(truth.size() == estimate.size() && !truth.empty(),
                  "mse: batches must be nonempty and equally sized");
  double total = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    detail::require(truth[i].rows() == estimate[i].rows() &&
                        truth[i].cols() == estimate[i].cols() &&
                        truth[i].rows() == truth[0].rows() && truth[i].cols() == truth[0].cols(),
                    "mse: shape mismatch");
    const double d = frobenius_distance(truth[i], estimate[i]);
    total += d * d;
  }
  const double n = static_cast<double>(truth[0].rows());
  const double batch = static_cast<double>(truth.size());
  if (normalization == MseNormalization::kPerTrain) {
    return total / (static_cast<double>(truth[0].cols()) * n * batch);
  }
  return total / (n * batch);
}

Support hard_threshold(std::span<const double> scores, double gamma) {
  detail::require(std::isfinite(gamma), "hard_threshold: gamma must be finite");
  Support out(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) out[i] = scores[i] >= gamma ? 1 : 0;
  return out;
}

double error_rate(std::span<const Support> truth, std::span<const Support> estimate) {
  detail::require(truth.size() == estimate.size() && !truth.empty(),
                  "error_rate: batches must be nonempty and equally sized");
  std::size_t errors = 0, total = 0;
  for (std::size_t t = 0; t < truth.size(); ++t) {
    detail::require(truth[t].size() == estimate[t].size(), "error_rate: length mismatch");
    for (std::size_t n = 0; n < truth[t].size(); ++n) {
      detail::require(truth[t][n] <= 1 && estimate[t][n] <= 1,
                      "error_rate: activity vectors must be binary");
      errors += truth[t][n] != estimate[t][n] ? 1 : 0;
    }
    total += truth[t].size();
  }
  return static_cast<double>(errors) / static_cast<double>(total);
}

double threshold_error_rate(std::span<const std::vector<double>> scores,
                            std::span<const Support> truth, double gamma) {
  detail::require(scores.size() == truth.size() && !scores.empty(),
                  "threshold_error_rate: batch mismatch");
  std::vector<Support> est;
  est.reserve(scores.size());
  for (const auto& s : scores) est.push_back(hard_threshold(s, gamma));
  return error_rate(truth, est);
}

ThresholdCalibration calibrate_threshold(std::span<const std::vector<double>> scores,
                                         std::span<const Support> truth) {
  detail::require(scores.size() == truth.size() && !scores.empty(),
                  "calibrate_threshold: need at least one calibration sample");
  std::vector<std::pair<double, std::uint8_t>> pts;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    detail::require(scores[i].size() == truth[i].size(), "calibrate_threshold: length mismatch");
    for (std::size_t n = 0; n < scores[i].size(); ++n) {
      detail::require(std::isfinite(scores[i][n]), "calibrate_threshold: non-finite score");
      detail::require(truth[i][n] <= 1, "calibrate_threshold: activity must be binary");
      pts.emplace_back(scores[i][n], truth[i][n]);
    }
  }
  detail::require(!pts.empty(), "calibrate_threshold: empty score vectors");
  std::sort(pts.begin(), pts.end());
  const double total = static_cast<double>(pts.size());
  std::size_t active = 0;
  for (const auto& p : pts) active += p.second;

  ThresholdCalibration cal;
  // γ below every score: everything declared active, errors = #inactive.
  std::size_t missed = 0;                       // active with score < γ
  std::size_t false_alarms = pts.size() - active;  // inactive with score ≥ γ
  cal.pe_curve.emplace_back(pts.front().first - 1.0,
                            static_cast<double>(missed + false_alarms) / total);
  std::size_t i = 0;
  while (i < pts.size()) {
    const double v = pts[i].first;
    while (i < pts.size() && pts[i].first == v) {
      if (pts[i].second) ++missed; else --false_alarms;
      ++i;
    }
    const double gamma = i < pts.size() ? 0.5 * (v + pts[i].first) : v + 1.0;
    cal.pe_curve.emplace_back(gamma, static_cast<double>(missed + false_alarms) / total);
  }
  auto best = cal.pe_curve.begin();
  for (auto it = cal.pe_curve.begin(); it != cal.pe_curve.end(); ++it) {
    if (it->second < best->second) best = it;
  }
  cal.gamma_star = best->first;
  cal.pe_star = best->second;
  return cal;
}

Coherence coherence_metrics(const ComplexMatrix& a, std::size_t group_size) {
  const std::size_t L = a.rows(), N = a.cols();
  detail::require(group_size >= 1 && N % group_size == 0,
                  "coherence_metrics: group size must divide N");
  Eigen::MatrixXcd an(L, N);
  const auto norms2 = column_squared_norms(a);
  for (std::size_t n = 0; n < N; ++n) {
    detail::require(norms2[n] > 0.0, "coherence_metrics: zero column");
    const double inv = 1.0 / std::sqrt(norms2[n]);
    for (std::size_t l = 0; l < L; ++l) an(l, n) = a(l, n) * inv;
  }
  const Eigen::MatrixXcd gram = an.adjoint() * an;
  Coherence out;
  for (std::size_t i = 0; i < N; ++i) {
    for (std::size_t j = i + 1; j < N; ++j) out.mu = std::max(out.mu, std::abs(gram(i, j)));
  }
  if (group_size == 1) {
    out.mu_block = out.mu_block_avg = out.mu;
    return out;
  }
  const std::size_t d = group_size, groups = N / d;
  const double inv_d = 1.0 / static_cast<double>(d);
  double block_sum = 0.0, sub_sum = 0.0;
  for (std::size_t g = 0; g < groups; ++g) {
    double sub = 0.0;
    for (std::size_t i = g * d; i < (g + 1) * d; ++i) {
      for (std::size_t j = i + 1; j < (g + 1) * d; ++j) sub = std::max(sub, std::abs(gram(i, j)));
    }
    out.nu_sub = std::max(out.nu_sub, sub);
    sub_sum += sub;
    double block = 0.0;
    for (std::size_t h = 0; h < groups; ++h) {
      if (h == g) continue;
      const Eigen::MatrixXcd cross = gram.block(g * d, h * d, d, d);
      Eigen::JacobiSVD<Eigen::MatrixXcd> svd(cross);
      block = std::max(block, svd.singularValues()(0) * inv_d);
    }
    out.mu_block = std::max(out.mu_block, block);
    block_sum += block;
  }
  out.mu_block_avg = block_sum / static_cast<double>(groups);
  out.nu_sub_avg = sub_sum / static_cast<double>(groups);
  return out;
}

}  // namespace mmv
