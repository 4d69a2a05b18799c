#pragma once

#include <cstddef>
#include <vector>

#include "mmv/complex_matrix.hpp"
#include "mmv/model.hpp"

namespace mmv {

enum class MapVariant { kMap, kMl };

/// Coordinate descent over the relaxed activity vector α ⪰ 0 minimizing
///   log|Σ| + tr(Σ⁻¹Σ̂) − (1/M)Σ_n(α(n) log ε(n) + (1−α(n)) log(1−ε(n))),
/// Σ = σ²I + A·diag(α)·Aᴴ.  The ML variant drops the prior term.
struct MapConfig {
  std::vector<double> eps;  // unused by the ML variant
  double sigma2 = 0.1;
  std::size_t k_max = 55;
  MapVariant variant = MapVariant::kMap;
  double tol = 1e-6;  // stop when the largest |d(n)| of a sweep falls below this
  /// Every `refresh_interval` coordinate steps the Sherman–Morrison inverse is
  /// checked against Σ and rebuilt when ‖Σ⁻¹Σ − I‖_F exceeds `drift_tol`.
  /// Zero disables the check.
  std::size_t refresh_interval = 50;
  double drift_tol = 1e-6;

  static MapConfig ml(double sigma2);
  static MapConfig map(std::vector<double> eps, double sigma2);
  void validate(std::size_t n) const;
};

struct MapState {
  std::vector<double> alpha;
  ComplexMatrix sinv;       // (σ²I + AΓAᴴ)⁻¹, maintained by rank-one updates
  ComplexMatrix sigma;      // σ²I + AΓAᴴ, maintained alongside for drift checks
  ComplexMatrix sigma_hat;  // YYᴴ/M
  std::size_t antennas = 0;
  std::size_t k = 0;
  std::size_t steps = 0;
  std::size_t clamped_discriminants = 0;
  std::size_t rejected_steps = 0;
  std::size_t rebuilds = 0;
};

/// YYᴴ/M from the split real/imaginary products.
ComplexMatrix empirical_covariance(const ComplexMatrix& y);

/// σ²I + A·diag(α)·Aᴴ.
ComplexMatrix model_covariance(const std::vector<double>& alpha, const ComplexMatrix& a,
                               double sigma2);

/// α = 0, Σ⁻¹ = I/σ².
MapState init_map_state(const ComplexMatrix& y, const ComplexMatrix& a, const MapConfig& config);

/// Unclamped minimizer of the objective along one coordinate, from
/// s = aᴴΣ⁻¹a, q = aᴴΣ⁻¹Σ̂Σ⁻¹a and c = (1/M)·log(ε/(1−ε)).  Evaluates the
/// "−√Δ" root of the stationarity quadratic in cancellation-free form; c = 0
/// gives the ML step (q − s)/s².  Negative discriminants are treated as zero.
double coordinate_increment(double s, double q, double c);

/// Same root written as the textbook quotient
///   (s² − 2cs − √Δ) / (2cs²),  Δ = (s² − 2cs)² + 4cs²(s − q − c).
/// Singular at c = 0; exposed for cross-checking.
double coordinate_increment_quotient(double s, double q, double c);

/// ML step (q − s)/s².
double coordinate_increment_ml(double s, double q);

struct CoordinateStep {
  double d = 0.0;
  double alpha = 0.0;
  double s = 0.0;
  double q = 0.0;
};

/// Minimizes along α(n) (floored at −α(n)), then applies the rank-one
/// update of Σ⁻¹.
CoordinateStep coordinate_step(MapState& state, std::size_t n, const ComplexMatrix& a,
                               const MapConfig& config);

/// Objective value; throws ContractViolation when Σ is not positive definite.
double f_map(const std::vector<double>& alpha, const ComplexMatrix& a,
             const ComplexMatrix& sigma_hat, std::size_t antennas, const MapConfig& config);

/// ‖Σ⁻¹·Σ − I‖_F for the maintained pair.
double inverse_drift(const MapState& state);

/// Recomputes Σ and Σ⁻¹ from α directly.
void rebuild_inverse(MapState& state, const ComplexMatrix& a, double sigma2);

struct MapResult {
  std::vector<double> alpha;  // relaxed soft scores
  std::size_t sweeps = 0;
  bool converged = false;
  std::vector<double> objective_trace;  // f_map after each sweep, when requested
  std::size_t clamped_discriminants = 0;
  std::size_t rejected_steps = 0;
  std::size_t rebuilds = 0;
};

MapResult solve_map(const ComplexMatrix& y, const ComplexMatrix& a, const MapConfig& config,
                    bool track_objective = false);

/// X̂ = Γ·Aᴴ·(AΓAᴴ + σ²I)⁻¹·Y with Γ = diag(α̂); inactive rows are exactly zero.
ComplexMatrix mmse_given_support(const ComplexMatrix& y, const ComplexMatrix& a,
                                 const Support& alpha_hat, double sigma2);

}  // namespace mmv
