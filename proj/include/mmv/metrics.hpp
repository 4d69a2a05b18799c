#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "mmv/complex_matrix.hpp"
#include "mmv/model.hpp"

namespace mmv {

enum class MseNormalization {
  kPerTrain,  // Σ‖X − X̂‖²_F / (M·N·I)
  kPerEval,   // Σ‖X − X̂‖²_F / (N·T)
};

double mse(std::span<const ComplexMatrix> truth, std::span<const ComplexMatrix> estimate,
           MseNormalization normalization);

/// α̂(n) = 1 iff score(n) ≥ γ.
Support hard_threshold(std::span<const double> scores, double gamma);

/// (1/NT)·Σ_t ‖α⁽ᵗ⁾ − α̂⁽ᵗ⁾‖₁.  Throws ContractViolation on non-binary input.
double error_rate(std::span<const Support> truth, std::span<const Support> estimate);

/// P_E(γ) of thresholded scores against the true supports.
double threshold_error_rate(std::span<const std::vector<double>> scores,
                            std::span<const Support> truth, double gamma);

struct ThresholdCalibration {
  double gamma_star = 0.0;
  double pe_star = 0.0;
  std::vector<std::pair<double, double>> pe_curve;  // (γ, P_E(γ)), ascending γ
};

/// Exact minimizer of P_E over γ.  P_E is piecewise constant with breaks at
/// score values, so the candidates are one point below the smallest score,
/// every midpoint between consecutive distinct scores, and one point above
/// the largest.  Ties go to the smaller γ.
ThresholdCalibration calibrate_threshold(std::span<const std::vector<double>> scores,
                                         std::span<const Support> truth);

struct Coherence {
  double mu = 0.0;        // max_{i≠j} |āᵢᴴāⱼ|
  double mu_block = 0.0;  // max_{g≠h} ‖Ā_gᴴĀ_h‖₂ / d
  double nu_sub = 0.0;    // max_g max_{i≠j∈g} |āᵢᴴāⱼ|
  // Group averages: the mean over g of max_{h≠g} ‖Ā_gᴴĀ_h‖₂/d, and of the
  // within-group maximum.
  double mu_block_avg = 0.0;
  double nu_sub_avg = 0.0;
};

/// Coherence measures of the column-normalized matrix with contiguous groups
/// of `group_size` columns.  group_size = 1 reports μ_B = μ and ν = 0.
Coherence coherence_metrics(const ComplexMatrix& a, std::size_t group_size);

}  // namespace mmv
