#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "mmv/complex_matrix.hpp"

namespace mmv {

/// ADMM for the GROUP LASSO problem
///     min_X ½‖AX − Y‖²_F + λ Σ_n ‖X_{n,:}‖₂
/// in its sharing form: each device owns an auxiliary block B_n = A_{:,n}X_{n,:},
/// but only the average B̄ is ever stored.
struct AdmmConfig {
  double lambda = 0.1;
  double rho = 1.0;
  std::size_t k_max = 200;
  double eps_abs = 1e-6;
  double eps_rel = 1e-4;

  void validate() const;
};

struct AdmmState {
  ComplexMatrix x;      // N×M
  ComplexMatrix bbar;   // L×M
  ComplexMatrix c;      // L×M scaled dual
  ComplexMatrix axbar;  // (1/N)·A·X
  std::vector<double> col_norms2;
  std::size_t k = 0;
};

/// X = 0, B̄ = 0, C = 0.  Throws on a zero pilot column.
AdmmState init_admm_state(const ComplexMatrix& a, std::size_t antennas);

/// Closed-form minimizer of the per-row subproblem (block soft threshold).
/// Reads only iteration-k state, so rows may be evaluated in any order.
std::vector<cplx> row_update(const AdmmState& state, const ComplexMatrix& a,
                             std::size_t n, const AdmmConfig& config);

/// B̄ = (Y + ρ·AX̄ + ρ·C)/(N + ρ); expects `state.axbar` already at k+1.
ComplexMatrix bbar_update(const AdmmState& state, const ComplexMatrix& y,
                          const AdmmConfig& config);

/// C + AX̄ − B̄ with both averages already at k+1.
ComplexMatrix dual_update(const AdmmState& state);

struct AdmmIterate {
  std::size_t iteration = 0;
  double objective = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
};

/// One full iteration: all row updates from the frozen snapshot, then B̄, then C.
AdmmIterate admm_iterate(AdmmState& state, const ComplexMatrix& a, const ComplexMatrix& y,
                         const AdmmConfig& config);

struct GroupLassoResult {
  ComplexMatrix x;
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<AdmmIterate> trace;
};

/// Runs until k_max or until both residuals pass the tolerance test.
/// Throws DivergenceError on a non-finite iterate.
GroupLassoResult solve_group_lasso(const ComplexMatrix& y, const ComplexMatrix& a,
                                   const AdmmConfig& config);

double group_lasso_objective(const ComplexMatrix& a, const ComplexMatrix& x,
                             const ComplexMatrix& y, double lambda);

/// iteration,objective,primal_residual,dual_residual
void write_admm_trace_csv(const std::vector<AdmmIterate>& trace, std::ostream& os);

}  // namespace mmv
