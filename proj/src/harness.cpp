#include "mmv/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "mmv/amp.hpp"
#include "mmv/cmat_io.hpp"
#include "mmv/cov_lasso.hpp"
#include "mmv/errors.hpp"
#include "mmv/group_lasso.hpp"
#include "mmv/map.hpp"

namespace mmv {

namespace {

using Clock = std::chrono::steady_clock;

template <class F>
void parallel_for(std::size_t count, std::size_t workers, F&& body) {
  workers = std::max<std::size_t>(1, std::min(workers, count));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

bool is_support_solver(SolverId id) { return id != SolverId::kGroupLasso; }
bool needs_lambda(SolverId id) { return id == SolverId::kGroupLasso || id == SolverId::kCovLasso; }
bool uses_prior(SolverId id) { return id == SolverId::kAmp || id == SolverId::kMap; }

// Solver with every per-point parameter resolved.
struct ResolvedSolver {
  SolverSpec spec;
  std::vector<double> eps;
  double lambda = 0.0;
  double gamma = 0.0;
  std::size_t iterations = 0;
  double sigma2 = 0.1;
};

struct SolveOutput {
  ComplexMatrix x_hat;
  std::vector<double> scores;
};

SolveOutput run_solver(const ResolvedSolver& s, const ProblemInstance& inst) {
  SolveOutput out;
  switch (s.spec.id) {
    case SolverId::kGroupLasso: {
      AdmmConfig cfg;
      cfg.lambda = s.lambda;
      cfg.rho = s.spec.rho;
      cfg.k_max = s.iterations;
      out.x_hat = solve_group_lasso(inst.y, inst.a, cfg).x;
      break;
    }
    case SolverId::kAmp: {
      AmpConfig cfg;
      cfg.eps = s.eps;
      cfg.k_max = s.iterations;
      AmpResult r = solve_amp(inst.y, inst.a, cfg);
      out.x_hat = std::move(r.x);
      out.scores = std::move(r.activity);
      break;
    }
    case SolverId::kMap:
    case SolverId::kMl: {
      MapConfig cfg = s.spec.id == SolverId::kMl ? MapConfig::ml(s.sigma2)
                                                 : MapConfig::map(s.eps, s.sigma2);
      cfg.k_max = s.iterations;
      out.scores = solve_map(inst.y, inst.a, cfg).alpha;
      break;
    }
    case SolverId::kCovLasso: {
      const auto sys = build_system(inst.y, inst.a,
                                    s.spec.subtract_noise ? std::optional<double>(s.sigma2)
                                                          : std::nullopt);
      NnLassoConfig cfg;
      cfg.lambda = s.lambda;
      cfg.max_sweeps = s.iterations;
      out.scores = solve_nn_lasso(sys, cfg).r;
      break;
    }
  }
  return out;
}

// Divergence and non-convergence exclude a trial; anything else is a bug.
std::optional<SolveOutput> try_solve(const ResolvedSolver& s, const ProblemInstance& inst) {
  try {
    return run_solver(s, inst);
  } catch (const DivergenceError&) {
    return std::nullopt;
  } catch (const NnLassoError&) {
    return std::nullopt;
  }
}

std::vector<double> resolve_prior(const PriorSource& src, const ActivityModel& model) {
  switch (src.kind) {
    case PriorSource::Kind::kUniform:
      return std::vector<double>(model.n, model.mean_access_probability());
    case PriorSource::Kind::kMarginal: return model.marginals();
    case PriorSource::Kind::kConstant: return std::vector<double>(model.n, src.value);
    case PriorSource::Kind::kFile: {
      auto eps = import_real_vector(src.path);
      detail::require(eps.size() == model.n, "prior file length does not match N");
      return eps;
    }
  }
  return {};
}

std::vector<ProblemInstance> make_batch(const ComplexMatrix& pilots, const Scenario& sc,
                                        std::uint64_t stream_seed, std::size_t count,
                                        std::size_t workers) {
  std::vector<ProblemInstance> batch(count);
  parallel_for(count, workers, [&](std::size_t t) {
    batch[t] = make_instance(pilots, sc.activity, sc.antennas, sc.sigma2,
                             derive_seed(stream_seed, t));
  });
  return batch;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

double group_lasso_lambda_max(const ProblemInstance& inst) {
  const ComplexMatrix g = adjoint_matmul(inst.a, inst.y);
  double best = 0.0;
  for (std::size_t n = 0; n < g.rows(); ++n) {
    double r2 = 0.0;
    for (std::size_t m = 0; m < g.cols(); ++m) r2 += std::norm(g(n, m));
    best = std::max(best, std::sqrt(r2));
  }
  return best;
}

double cov_lasso_lambda_max(const CovarianceSystem& sys) {
  double best = 0.0;
  for (std::size_t n = 0; n < sys.n; ++n) {
    double acc = 0.0;
    for (std::size_t row = 0; row < sys.rows(); ++row) acc += sys.phi_at(row, n) * sys.b[row];
    best = std::max(best, acc);
  }
  return best;
}

// Relative grid 10^{-3}, 10^{-2.75}, ..., 10^0 of the batch-median λ_max.
std::vector<double> lambda_grid(double lambda_max) {
  std::vector<double> grid;
  for (int i = 0; i <= 12; ++i) grid.push_back(lambda_max * std::pow(10.0, -3.0 + 0.25 * i));
  return grid;
}

double select_lambda(ResolvedSolver s, const std::vector<ProblemInstance>& val,
                     std::size_t workers) {
  std::vector<double> lmax(val.size());
  parallel_for(val.size(), workers, [&](std::size_t t) {
    if (s.spec.id == SolverId::kGroupLasso) {
      lmax[t] = group_lasso_lambda_max(val[t]);
    } else {
      lmax[t] = cov_lasso_lambda_max(build_system(
          val[t].y, val[t].a,
          s.spec.subtract_noise ? std::optional<double>(s.sigma2) : std::nullopt));
    }
  });
  const auto grid = lambda_grid(median(lmax));
  double best_lambda = grid.front();
  double best_primary = std::numeric_limits<double>::infinity();
  double best_secondary = std::numeric_limits<double>::infinity();
  for (double lambda : grid) {
    s.lambda = lambda;
    std::vector<std::optional<SolveOutput>> outs(val.size());
    parallel_for(val.size(), workers, [&](std::size_t t) { outs[t] = try_solve(s, val[t]); });
    double primary = 0.0, secondary = 0.0;
    std::size_t used = 0;
    std::vector<std::vector<double>> scores;
    std::vector<Support> truth;
    for (std::size_t t = 0; t < val.size(); ++t) {
      if (!outs[t]) continue;
      ++used;
      if (s.spec.id == SolverId::kGroupLasso) {
        const double d = frobenius_distance(val[t].x, outs[t]->x_hat);
        primary += d * d;
      } else {
        const auto r_true = signal_powers(val[t].x);
        for (std::size_t n = 0; n < r_true.size(); ++n) {
          secondary += (outs[t]->scores[n] - r_true[n]) * (outs[t]->scores[n] - r_true[n]);
        }
        scores.push_back(outs[t]->scores);
        truth.push_back(val[t].alpha);
      }
    }
    if (used == 0) continue;
    if (s.spec.id == SolverId::kCovLasso) primary = calibrate_threshold(scores, truth).pe_star;
    primary /= s.spec.id == SolverId::kGroupLasso ? static_cast<double>(used) : 1.0;
    secondary /= static_cast<double>(used);
    if (primary < best_primary || (primary == best_primary && secondary < best_secondary)) {
      best_primary = primary;
      best_secondary = secondary;
      best_lambda = lambda;
    }
  }
  return best_lambda;
}

struct PointContext {
  std::size_t index = 0;
  double sweep_value = 0.0;
  std::uint64_t seed = 0;
  Scenario scenario;
  ComplexMatrix pilots;
  std::vector<ResolvedSolver> solvers;
};

PointContext prepare_point(const ExperimentConfig& cfg, std::size_t index) {
  PointContext pc;
  pc.index = index;
  pc.sweep_value = cfg.sweep_values[index];
  pc.seed = point_seed(cfg.root_seed, index);
  pc.scenario = apply_sweep_value(cfg.scenario, cfg.axis, pc.sweep_value);
  pc.pilots = make_pilots(cfg.pilots, pc.scenario.pilot_length, pc.scenario.activity.n, pc.seed);
  pc.scenario.pilot_length = pc.pilots.rows();

  std::vector<ProblemInstance> validation;
  for (const auto& spec : cfg.solvers) {
    ResolvedSolver rs;
    rs.spec = spec;
    rs.sigma2 = pc.scenario.sigma2;
    rs.iterations = spec.iterations.value_or(default_iterations(spec.id));
    if (uses_prior(spec.id)) rs.eps = resolve_prior(spec.prior, pc.scenario.activity);
    if (needs_lambda(spec.id)) {
      if (spec.lambda) {
        rs.lambda = *spec.lambda;
      } else {
        if (validation.empty()) {
          validation = make_batch(pc.pilots, pc.scenario, derive_seed(pc.seed, kValidationStream),
                                  cfg.validation_trials, cfg.workers);
        }
        rs.lambda = select_lambda(rs, validation, cfg.workers);
      }
    }
    pc.solvers.push_back(std::move(rs));
  }
  return pc;
}

ThresholdCalibration calibrate_point(const ExperimentConfig& cfg, const PointContext& pc,
                                     const ResolvedSolver& s,
                                     const std::vector<ProblemInstance>& calib) {
  std::vector<std::optional<SolveOutput>> outs(calib.size());
  parallel_for(calib.size(), cfg.workers, [&](std::size_t t) { outs[t] = try_solve(s, calib[t]); });
  std::vector<std::vector<double>> scores;
  std::vector<Support> truth;
  for (std::size_t t = 0; t < calib.size(); ++t) {
    if (!outs[t]) continue;
    scores.push_back(std::move(outs[t]->scores));
    truth.push_back(calib[t].alpha);
  }
  if (scores.empty()) {
    throw std::runtime_error("calibration failed: every trial of " + to_string(s.spec.id) +
                             " diverged at sweep point " + std::to_string(pc.index));
  }
  return calibrate_threshold(scores, truth);
}

}  // namespace

std::string to_string(SolverId id) {
  switch (id) {
    case SolverId::kGroupLasso: return "group-lasso";
    case SolverId::kAmp: return "amp";
    case SolverId::kMap: return "map";
    case SolverId::kMl: return "ml";
    case SolverId::kCovLasso: return "cov-lasso";
  }
  return "?";
}

SolverId parse_solver_id(const std::string& s) {
  if (s == "group-lasso") return SolverId::kGroupLasso;
  if (s == "amp") return SolverId::kAmp;
  if (s == "map") return SolverId::kMap;
  if (s == "ml") return SolverId::kMl;
  if (s == "cov-lasso") return SolverId::kCovLasso;
  throw ContractViolation("unknown solver id '" + s + "'");
}

std::size_t default_iterations(SolverId id) {
  switch (id) {
    case SolverId::kGroupLasso: return 200;
    case SolverId::kAmp: return 50;
    case SolverId::kMap:
    case SolverId::kMl: return 55;
    case SolverId::kCovLasso: return 200;
  }
  return 1;
}

std::string to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::kUndersampling: return "L/N";
    case SweepAxis::kAccessProbability: return "p";
    case SweepAxis::kAntennas: return "M";
    case SweepAxis::kAccessRatio: return "p1/p2";
    case SweepAxis::kGroups: return "G";
  }
  return "?";
}

SweepAxis parse_sweep_axis(const std::string& s) {
  if (s == "L/N") return SweepAxis::kUndersampling;
  if (s == "p") return SweepAxis::kAccessProbability;
  if (s == "M") return SweepAxis::kAntennas;
  if (s == "p1/p2") return SweepAxis::kAccessRatio;
  if (s == "G") return SweepAxis::kGroups;
  throw ContractViolation("unknown sweep axis '" + s + "'");
}

std::string PilotSpec::describe() const {
  switch (kind) {
    case Kind::kGaussian: return "gaussian";
    case Kind::kGaussianNormalized: return "gaussian-normalized";
    case Kind::kFile: return path.string();
  }
  return "?";
}

void ExperimentConfig::validate() const {
  scenario.activity.validate();
  detail::require(trials >= 1, "config: trials must be at least 1");
  detail::require(calibration_trials >= 1, "config: calibration_trials must be at least 1");
  detail::require(validation_trials >= 1, "config: validation_trials must be at least 1");
  detail::require(!solvers.empty(), "config: at least one solver is required");
  detail::require(!sweep_values.empty(), "config: sweep needs at least one value");
  detail::require(scenario.sigma2 > 0.0, "config: sigma2 must be positive");
  if (pilots.kind == PilotSpec::Kind::kFile) {
    if (!std::filesystem::exists(pilots.path)) {
      throw ContractViolation("config: pilot file '" + pilots.path.string() + "' does not exist");
    }
    detail::require(axis != SweepAxis::kUndersampling || sweep_values.size() == 1,
                    "config: an L/N sweep cannot use a fixed pilot file");
  }
  for (double v : sweep_values) {
    Scenario s = apply_sweep_value(scenario, axis, v);
    s.activity.validate();
  }
}

Scenario apply_sweep_value(const Scenario& base, SweepAxis axis, double value) {
  Scenario s = base;
  ActivityModel& act = s.activity;
  switch (axis) {
    case SweepAxis::kUndersampling: {
      detail::require(value > 0.0, "sweep: L/N must be positive");
      s.pilot_length = std::max<std::size_t>(
          1, static_cast<std::size_t>(std::llround(value * static_cast<double>(act.n))));
      break;
    }
    case SweepAxis::kAccessProbability: {
      if (act.kind == ActivityKind::kIndependentTwoGroup) {
        const double ratio = act.p2 > 0.0 ? act.p1 / act.p2 : 1.0;
        act = ActivityModel::independent_two_group(act.n, 2.0 * value * ratio / (1.0 + ratio),
                                                   2.0 * value / (1.0 + ratio));
      } else if (act.kind == ActivityKind::kIidGroupActivity) {
        act = ActivityModel::iid_group_activity(act.n, act.groups, value);
      } else {
        throw ContractViolation("sweep: p is set through G for the single-group model");
      }
      break;
    }
    case SweepAxis::kAntennas:
      detail::require(value >= 1.0, "sweep: M must be at least 1");
      s.antennas = static_cast<std::size_t>(std::llround(value));
      break;
    case SweepAxis::kAccessRatio: {
      detail::require(act.kind == ActivityKind::kIndependentTwoGroup,
                      "sweep: p1/p2 applies to the independent model only");
      detail::require(value > 0.0, "sweep: p1/p2 must be positive");
      const double p = act.mean_access_probability();
      act = ActivityModel::independent_two_group(act.n, 2.0 * p * value / (1.0 + value),
                                                 2.0 * p / (1.0 + value));
      break;
    }
    case SweepAxis::kGroups: {
      const auto g = static_cast<std::size_t>(std::llround(value));
      if (act.kind == ActivityKind::kSingleActiveGroup) {
        act = ActivityModel::single_active_group(act.n, g);
      } else if (act.kind == ActivityKind::kIidGroupActivity) {
        act = ActivityModel::iid_group_activity(act.n, g, act.p);
      } else {
        throw ContractViolation("sweep: G applies to the correlated models only");
      }
      break;
    }
  }
  return s;
}

std::uint64_t point_seed(std::uint64_t root_seed, std::size_t index) {
  return derive_seed(root_seed, index);
}

std::uint64_t trial_seed(std::uint64_t point, std::size_t t) {
  return derive_seed(derive_seed(point, kTestStream), t);
}

ComplexMatrix make_pilots(const PilotSpec& spec, std::size_t l, std::size_t n,
                          std::uint64_t point) {
  if (spec.kind == PilotSpec::Kind::kFile) {
    ComplexMatrix a = import_matrix(spec.path);
    detail::require(a.cols() == n, "pilot file column count does not match N");
    return a;
  }
  Rng rng(derive_seed(point, kPilotStream));
  return gaussian_pilots(l, n, spec.kind == PilotSpec::Kind::kGaussianNormalized, rng);
}

std::vector<ExperimentRecord> run_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<ExperimentRecord> records;
  const std::string axis = to_string(cfg.axis);
  for (std::size_t pi = 0; pi < cfg.sweep_values.size(); ++pi) {
    PointContext pc = prepare_point(cfg, pi);

    std::vector<ProblemInstance> calib;
    for (auto& s : pc.solvers) {
      if (!is_support_solver(s.spec.id)) continue;
      if (calib.empty()) {
        calib = make_batch(pc.pilots, pc.scenario, derive_seed(pc.seed, kCalibrationStream),
                           cfg.calibration_trials, cfg.workers);
      }
      s.gamma = calibrate_point(cfg, pc, s, calib).gamma_star;
    }
    calib.clear();

    const std::size_t S = pc.solvers.size(), T = cfg.trials;
    struct Cell {
      bool ok = false;
      double sq_error = 0.0;
      Support alpha_hat;
      Support alpha;
      double ms = 0.0;
    };
    std::vector<Cell> cells(S * T);
    parallel_for(T, cfg.workers, [&](std::size_t t) {
      const ProblemInstance inst = make_instance(pc.pilots, pc.scenario.activity,
                                                 pc.scenario.antennas, pc.scenario.sigma2,
                                                 trial_seed(pc.seed, t));
      for (std::size_t si = 0; si < S; ++si) {
        const ResolvedSolver& s = pc.solvers[si];
        Cell& cell = cells[si * T + t];
        const auto start = Clock::now();
        auto out = try_solve(s, inst);
        if (out) {
          cell.ok = true;
          cell.alpha = inst.alpha;
          if (is_support_solver(s.spec.id)) cell.alpha_hat = hard_threshold(out->scores, s.gamma);
          if (s.spec.id == SolverId::kGroupLasso || s.spec.id == SolverId::kAmp) {
            const double d = frobenius_distance(inst.x, out->x_hat);
            cell.sq_error = d * d;
          } else if (s.spec.id == SolverId::kMap || s.spec.id == SolverId::kMl) {
            const double d = frobenius_distance(
                inst.x, mmse_given_support(inst.y, inst.a, cell.alpha_hat, inst.sigma2));
            cell.sq_error = d * d;
          }
        }
        cell.ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
      }
    });

    for (std::size_t si = 0; si < S; ++si) {
      const ResolvedSolver& s = pc.solvers[si];
      std::vector<Support> truth, est;
      std::vector<double> times;
      double sq = 0.0;
      std::size_t used = 0;
      for (std::size_t t = 0; t < T; ++t) {
        const Cell& c = cells[si * T + t];
        times.push_back(c.ms);
        if (!c.ok) continue;
        ++used;
        sq += c.sq_error;
        if (is_support_solver(s.spec.id)) {
          truth.push_back(c.alpha);
          est.push_back(c.alpha_hat);
        }
      }
      auto emit = [&](const std::string& metric, double value) {
        ExperimentRecord r;
        r.sweep_axis = axis;
        r.sweep_value = pc.sweep_value;
        r.solver = to_string(s.spec.id);
        r.metric = metric;
        r.value = value;
        r.trials = T;
        r.excluded_trials = T - used;
        r.seed = pc.seed;
        r.pilot_source = cfg.pilots.describe();
        if (cfg.record_timing) r.ms_per_trial = median(times);
        records.push_back(std::move(r));
      };
      const double nan = std::numeric_limits<double>::quiet_NaN();
      const double n = static_cast<double>(pc.scenario.activity.n);
      const double mse_value = used ? sq / (n * static_cast<double>(used)) : nan;
      if (s.spec.id != SolverId::kCovLasso) emit("mse", mse_value);
      if (is_support_solver(s.spec.id)) {
        emit("pe", used ? error_rate(truth, est) : nan);
        emit("gamma_star", s.gamma);
      }
      if (needs_lambda(s.spec.id)) emit("lambda", s.lambda);
    }
  }
  std::stable_sort(records.begin(), records.end(), [](const auto& a, const auto& b) {
    if (a.sweep_value != b.sweep_value) return a.sweep_value < b.sweep_value;
    if (a.solver != b.solver) return a.solver < b.solver;
    return a.metric < b.metric;
  });
  return records;
}

ThresholdCalibration calibrate_solver(const ExperimentConfig& cfg, SolverId id) {
  cfg.validate();
  detail::require(is_support_solver(id), "calibrate: solver produces no activity scores");
  ExperimentConfig one = cfg;
  auto it = std::find_if(cfg.solvers.begin(), cfg.solvers.end(),
                         [&](const SolverSpec& s) { return s.id == id; });
  SolverSpec spec;
  spec.id = id;
  if (it != cfg.solvers.end()) spec = *it;
  one.solvers = {spec};
  PointContext pc = prepare_point(one, 0);
  const auto calib = make_batch(pc.pilots, pc.scenario, derive_seed(pc.seed, kCalibrationStream),
                                one.calibration_trials, one.workers);
  return calibrate_point(one, pc, pc.solvers.front(), calib);
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_results(const std::vector<ExperimentRecord>& records, std::ostream& os) {
  os << kCsvHeader << '\n';
  for (const auto& r : records) {
    os << r.sweep_axis << ',' << format_number(r.sweep_value) << ',' << r.solver << ','
       << r.metric << ',' << format_number(r.value) << ',' << r.trials << ','
       << r.excluded_trials << ',' << r.seed << ',' << r.pilot_source << ','
       << (r.ms_per_trial ? format_number(*r.ms_per_trial) : std::string()) << '\n';
  }
}

void emit_results(const std::vector<ExperimentRecord>& records,
                  const std::filesystem::path& path) {
  detail::require(!records.empty(), "emit_results: no records");
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw WriteError("cannot open '" + path.string() + "' for writing");
  write_results(records, os);
  if (!os) throw WriteError("write to '" + path.string() + "' failed");
}

namespace {

PriorSource parse_prior(const nlohmann::json& j) {
  PriorSource p;
  if (j.is_number()) {
    p.kind = PriorSource::Kind::kConstant;
    p.value = j.get<double>();
    return p;
  }
  const auto s = j.get<std::string>();
  if (s == "uniform") {
    p.kind = PriorSource::Kind::kUniform;
  } else if (s == "marginal") {
    p.kind = PriorSource::Kind::kMarginal;
  } else if (s.rfind("file:", 0) == 0) {
    p.kind = PriorSource::Kind::kFile;
    p.path = s.substr(5);
  } else {
    throw ContractViolation("config: unknown prior '" + s + "'");
  }
  return p;
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ContractViolation(std::string("config: ") + e.what());
  }
  ExperimentConfig cfg;
  try {
    const auto& sc = j.at("scenario");
    const std::string kind = sc.value("activity", "independent");
    const auto n = sc.at("N").get<std::size_t>();
    if (kind == "independent") {
      cfg.scenario.activity = ActivityModel::independent_two_group(
          n, sc.value("p1", 0.15), sc.value("p2", 0.05));
    } else if (kind == "single-group") {
      cfg.scenario.activity = ActivityModel::single_active_group(n, sc.at("G").get<std::size_t>());
    } else if (kind == "iid-group") {
      cfg.scenario.activity = ActivityModel::iid_group_activity(
          n, sc.at("G").get<std::size_t>(), sc.at("p").get<double>());
    } else {
      throw ContractViolation("config: unknown activity model '" + kind + "'");
    }
    cfg.scenario.antennas = sc.value("M", std::size_t{4});
    cfg.scenario.pilot_length = sc.value("L", std::size_t{12});
    cfg.scenario.sigma2 = sc.value("sigma2", 0.1);

    const std::string pilots = j.value("pilots", "gaussian");
    if (pilots == "gaussian") {
      cfg.pilots.kind = PilotSpec::Kind::kGaussian;
    } else if (pilots == "gaussian-normalized") {
      cfg.pilots.kind = PilotSpec::Kind::kGaussianNormalized;
    } else {
      cfg.pilots.kind = PilotSpec::Kind::kFile;
      cfg.pilots.path = pilots.rfind("file:", 0) == 0 ? pilots.substr(5) : pilots;
    }

    for (const auto& sj : j.at("solvers")) {
      SolverSpec s;
      s.id = parse_solver_id(sj.is_string() ? sj.get<std::string>() : sj.at("id").get<std::string>());
      if (sj.is_object()) {
        if (sj.contains("lambda") && !sj["lambda"].is_null()) s.lambda = sj["lambda"].get<double>();
        s.rho = sj.value("rho", 1.0);
        if (sj.contains("iterations")) s.iterations = sj["iterations"].get<std::size_t>();
        if (sj.contains("prior")) s.prior = parse_prior(sj["prior"]);
        s.subtract_noise = sj.value("subtract_noise", false);
      }
      cfg.solvers.push_back(s);
    }

    if (j.contains("sweep")) {
      cfg.axis = parse_sweep_axis(j["sweep"].at("axis").get<std::string>());
      cfg.sweep_values = j["sweep"].at("values").get<std::vector<double>>();
    } else {
      cfg.axis = SweepAxis::kUndersampling;
      cfg.sweep_values = {static_cast<double>(cfg.scenario.pilot_length) /
                          static_cast<double>(n)};
    }
    cfg.trials = j.value("trials", std::size_t{1000});
    cfg.calibration_trials = j.value("calibration_trials", std::size_t{1000});
    cfg.validation_trials = j.value("validation_trials", std::size_t{50});
    cfg.root_seed = j.value("root_seed", std::uint64_t{1});
    cfg.record_timing = j.value("timing", false);
  } catch (const nlohmann::json::exception& e) {
    throw ContractViolation(std::string("config: ") + e.what());
  }
  cfg.workers = workers_from_env(1);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ContractViolation("cannot open config '" + path.string() + "'");
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

std::size_t workers_from_env(std::size_t fallback) {
  const char* v = std::getenv("MMV_WORKERS");
  if (!v || !*v) return fallback;
  char* end = nullptr;
  const long n = std::strtol(v, &end, 10);
  if (end == v || *end != '\0' || n < 1) return fallback;
  return static_cast<std::size_t>(n);
}

}  // namespace mmv
