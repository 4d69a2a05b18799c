#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mmv/complex_matrix.hpp"

namespace mmv {

/// Which M×M matrix multiplies the previous residual in the Onsager
/// correction R⁺ = Y − A·X⁺ + (N/L)·R·S.
enum class OnsagerForm {
  /// S = (1/N)·Σ_n J_n with J_n the Jacobian of the row denoiser:
  /// c/(1+t)·I + t·conj(v)ᵀv / ((τ²+1)²τ²(1+t)²).
  kJacobian,
  /// S = Σ_n [c/(1+t) + t‖v‖² / ((τ²+1)²τ⁴(1+t)²)]·I, the typeset form.
  /// Kept for comparison; it does not converge at practical sizes.
  kAsPrinted,
};

struct AmpConfig {
  std::vector<double> eps;  // per-device activity prior, each in (0, 1)
  std::size_t k_max = 50;
  double tau_floor = 1e-12;
  double damping = 0.0;     // X⁺ ← (1−β)·η(·) + β·X
  double rel_tol = 1e-8;
  OnsagerForm onsager = OnsagerForm::kJacobian;
  /// Rescale (Y, A) by 1/sqrt(mean ‖a_n‖²) so pilots have unit average
  /// column energy, the normalization the denoiser's noise model assumes.
  bool normalize_pilots = true;

  static AmpConfig uniform(std::size_t n, double eps);
  void validate(std::size_t n) const;
};

struct AmpState {
  ComplexMatrix x;  // N×M
  ComplexMatrix r;  // L×M
  double tau = 0.0;
  std::vector<double> t_lr;  // likelihood ratios t(n), clamped to [1e-300, 1e300]
  std::size_t k = 0;
};

/// log t = log((1−ε)/ε) + M·log((τ²+1)/τ²) − ‖v‖²/(τ²(τ²+1)).
double log_likelihood_ratio(double pseudo_norm2, double tau, double eps, std::size_t m);

/// t(n) evaluated from the log form and clamped.
double likelihood_ratio(double pseudo_norm2, double tau, double eps, std::size_t m);

/// Bernoulli-Gaussian posterior mean of a unit-variance row observed in
/// CN(0, τ²) noise.  `pseudo` is the row-oriented pseudo-observation
/// A_{:,n}ᴴR + X_{n,:}; the result is the updated row X_{n,:}.
std::vector<cplx> mmse_denoise_row(std::span<const cplx> pseudo, double tau, double eps);

/// Rows A_{:,n}ᴴR + X_{n,:} for all n (N×M).
ComplexMatrix pseudo_observations(const AmpState& state, const ComplexMatrix& a);

/// M×M Onsager matrix S for the given pseudo-observations and t(n).
ComplexMatrix onsager_matrix(const ComplexMatrix& pseudo, double tau,
                             std::span<const double> t_lr, OnsagerForm form);

/// R⁺ = Y − A·X⁺ + (N/L)·R·S.  Throws DivergenceError on non-finite output.
ComplexMatrix onsager_residual(const AmpState& state, const ComplexMatrix& y,
                               const ComplexMatrix& a, const ComplexMatrix& x_next,
                               const ComplexMatrix& s);

struct AmpIterate {
  std::size_t iteration = 0;
  double tau = 0.0;
  double residual_norm = 0.0;
  double relative_change = 0.0;
};

/// Initial state X = 0, R = Y.
AmpState init_amp_state(const ComplexMatrix& y, std::size_t n, const AmpConfig& config);

/// One iteration on an already-normalized model.
AmpIterate amp_iterate(AmpState& state, const ComplexMatrix& y, const ComplexMatrix& a,
                       const AmpConfig& config);

struct AmpResult {
  ComplexMatrix x;
  /// Posterior activity probabilities 1/(1+t(n)) from the last iteration.
  std::vector<double> activity;
  std::size_t iterations = 0;
  bool converged = false;
  double pilot_scale = 1.0;
  std::vector<AmpIterate> trace;
};

AmpResult solve_amp(const ComplexMatrix& y, const ComplexMatrix& a, const AmpConfig& config);

}  // namespace mmv
