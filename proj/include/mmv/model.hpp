#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "mmv/complex_matrix.hpp"

namespace mmv {

using Rng = std::mt19937_64;

/// Binary activity vector α ∈ {0,1}^N.
using Support = std::vector<std::uint8_t>;

/// Mixes a root seed with a trial index (splitmix64 finalizer over both
/// words) so every trial owns an independent, order-free stream.
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t index) noexcept;

enum class ActivityKind { kIndependentTwoGroup, kSingleActiveGroup, kIidGroupActivity };

/// Joint law of the activity vector.  Groups are contiguous index blocks:
/// group g owns [g·N/G, (g+1)·N/G).
struct ActivityModel {
  ActivityKind kind = ActivityKind::kIndependentTwoGroup;
  std::size_t n = 0;
  double p1 = 0.0;
  double p2 = 0.0;
  std::size_t groups = 1;
  double p = 0.0;

  static ActivityModel independent_two_group(std::size_t n, double p1, double p2);
  static ActivityModel single_active_group(std::size_t n, std::size_t groups);
  static ActivityModel iid_group_activity(std::size_t n, std::size_t groups, double p);

  /// Throws ContractViolation when the invariants of the variant fail.
  void validate() const;

  /// Average per-device access probability.
  double mean_access_probability() const;

  /// Marginal Pr[α(n) = 1] for every device.
  std::vector<double> marginals() const;

  std::size_t group_size() const { return n / groups; }

  std::string describe() const;
};

Support draw_support(const ActivityModel& model, Rng& rng);

/// Row n = α(n)·h_n with h_n i.i.d. CN(0, 1).
ComplexMatrix draw_signal(const Support& alpha, std::size_t antennas, Rng& rng);

/// I.i.d. CN(0, variance) entries.
ComplexMatrix draw_complex_gaussian(std::size_t rows, std::size_t cols,
                                    double variance, Rng& rng);

struct Measurement {
  ComplexMatrix y;
  ComplexMatrix z;
};

/// Y = A·X + Z with Z i.i.d. CN(0, σ²).
Measurement measure(const ComplexMatrix& a, const ComplexMatrix& x, double sigma2,
                    Rng& rng);

/// L×N pilot matrix with CN(0,1) entries, optionally rescaled so every column
/// has norm exactly √L.
ComplexMatrix gaussian_pilots(std::size_t l, std::size_t n, bool normalize, Rng& rng);

/// Rescales every column of `a` to Euclidean norm `target`.
void normalize_columns(ComplexMatrix& a, double target);

struct ProblemInstance {
  ComplexMatrix a;
  ComplexMatrix x;
  ComplexMatrix y;
  ComplexMatrix z;
  Support alpha;
  double sigma2 = 0.0;
  std::uint64_t seed = 0;
};

/// Draws α, X and the noise from `seed` for the given pilots.  The same
/// (pilots, model, M, σ², seed) always yields a bit-identical instance.
ProblemInstance make_instance(const ComplexMatrix& pilots, const ActivityModel& model,
                              std::size_t antennas, double sigma2, std::uint64_t seed);

std::size_t count_active(const Support& alpha);

}  // namespace mmv
