#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mmv/complex_matrix.hpp"
#include "mmv/metrics.hpp"
#include "mmv/model.hpp"

namespace mmv {

enum class SolverId { kGroupLasso, kAmp, kMap, kMl, kCovLasso };

std::string to_string(SolverId id);
SolverId parse_solver_id(const std::string& s);

/// Where a solver's activity prior ε(n) comes from.
struct PriorSource {
  enum class Kind { kUniform, kMarginal, kFile, kConstant };
  Kind kind = Kind::kMarginal;
  double value = 0.0;           // kConstant
  std::filesystem::path path;   // kFile
};

struct SolverSpec {
  SolverId id = SolverId::kAmp;
  std::optional<double> lambda;  // group-lasso / cov-lasso; unset → validation grid
  double rho = 1.0;
  std::optional<std::size_t> iterations;  // unset → per-solver default budget
  PriorSource prior;
  bool subtract_noise = false;  // cov-lasso
};

/// Default iteration budgets: GROUP LASSO 200, AMP 50, MAP/ML 55 sweeps,
/// covariance LASSO 200 sweeps.
std::size_t default_iterations(SolverId id);

struct Scenario {
  ActivityModel activity;
  std::size_t antennas = 4;
  std::size_t pilot_length = 12;
  double sigma2 = 0.1;
};

enum class SweepAxis { kUndersampling, kAccessProbability, kAntennas, kAccessRatio, kGroups };

std::string to_string(SweepAxis axis);
SweepAxis parse_sweep_axis(const std::string& s);

struct PilotSpec {
  enum class Kind { kGaussian, kGaussianNormalized, kFile };
  Kind kind = Kind::kGaussian;
  std::filesystem::path path;
  std::string describe() const;
};

struct ExperimentConfig {
  Scenario scenario;
  PilotSpec pilots;
  std::vector<SolverSpec> solvers;
  SweepAxis axis = SweepAxis::kUndersampling;
  std::vector<double> sweep_values;
  std::size_t trials = 1000;
  std::size_t calibration_trials = 1000;
  std::size_t validation_trials = 50;
  std::uint64_t root_seed = 1;
  std::size_t workers = 1;
  bool record_timing = false;

  void validate() const;
};

/// Scenario with one sweep value applied.
Scenario apply_sweep_value(const Scenario& base, SweepAxis axis, double value);

struct ExperimentRecord {
  std::string sweep_axis;
  double sweep_value = 0.0;
  std::string solver;
  std::string metric;
  double value = 0.0;
  std::size_t trials = 0;
  std::size_t excluded_trials = 0;
  std::uint64_t seed = 0;
  std::string pilot_source;
  std::optional<double> ms_per_trial;
};

/// Runs every (sweep point, solver) pair over `trials` test instances and
/// returns records sorted by (sweep value, solver, metric).  Metrics:
///   group-lasso: mse, lambda
///   amp:         mse, pe, gamma_star
///   map, ml:     pe, gamma_star, mse (MMSE channel estimate on the detected support)
///   cov-lasso:   pe, gamma_star, lambda
/// Each sweep point draws one pilot matrix shared by all solvers.  Trial t
/// of point i uses seed derive_seed(point_seed(i), t); the record's seed is
/// point_seed(i).
std::vector<ExperimentRecord> run_sweep(const ExperimentConfig& config);

/// Seed of sweep point `index`; all pilot, validation, calibration and test
/// streams of that point derive from it.
std::uint64_t point_seed(std::uint64_t root_seed, std::size_t index);

/// Stream tags mixed into a point seed.
inline constexpr std::uint64_t kPilotStream = 0x70696c6f74ULL;
inline constexpr std::uint64_t kValidationStream = 0x76616c6964ULL;
inline constexpr std::uint64_t kCalibrationStream = 0x63616c6962ULL;
inline constexpr std::uint64_t kTestStream = 0x74657374ULL;

/// Seed of test trial `t` at a sweep point.
std::uint64_t trial_seed(std::uint64_t point, std::size_t t);

/// Pilots for a sweep point (shared by every solver at that point).
ComplexMatrix make_pilots(const PilotSpec& spec, std::size_t l, std::size_t n,
                          std::uint64_t point);

/// Calibration curve for one solver at the first sweep point.
ThresholdCalibration calibrate_solver(const ExperimentConfig& config, SolverId id);

inline constexpr const char* kCsvHeader =
    "sweep_axis,sweep_value,solver,metric,value,trials,excluded_trials,seed,pilot_source,"
    "ms_per_trial";

void write_results(const std::vector<ExperimentRecord>& records, std::ostream& os);
/// Throws WriteError on an unwritable path and ContractViolation when empty.
void emit_results(const std::vector<ExperimentRecord>& records,
                  const std::filesystem::path& path);

/// Renders with 17 significant digits so values parse back exactly.
std::string format_number(double v);

ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Worker count from MMV_WORKERS, or `fallback` when unset or invalid.
std::size_t workers_from_env(std::size_t fallback);

}  // namespace mmv
