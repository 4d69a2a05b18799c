#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mmv/cmat_io.hpp"
#include "mmv/errors.hpp"
#include "mmv/harness.hpp"
#include "mmv/model.hpp"

using namespace mmv;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "mmv_test_harness";
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::string to_csv(const std::vector<ExperimentRecord>& recs) {
  std::ostringstream os;
  write_results(recs, os);
  return os.str();
}

std::size_t line_count(const std::string& s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

LoadError::Kind load_error_kind(const std::string& bytes) {
  try {
    decode_cmat(bytes);
  } catch (const LoadError& e) {
    return e.kind();
  }
  FAIL("expected LoadError");
  return LoadError::Kind::kOpen;
}

const char* kSmallConfig = R"({
  "scenario": {"activity": "independent", "N": 20, "p1": 0.15, "p2": 0.05, "M": 4, "L": 8},
  "solvers": ["amp", {"id": "group-lasso", "lambda": 0.5}],
  "sweep": {"axis": "L/N", "values": [0.3, 0.4]},
  "trials": 6, "calibration_trials": 6, "validation_trials": 3, "root_seed": 11
})";

}  // namespace

TEST_CASE("cmat round trip is bitwise exact") {
  Rng rng(3);
  ComplexMatrix m = draw_complex_gaussian(5, 7, 1.0, rng);
  m.set(0, 0, cplx(-0.0, 1e-310));
  const ComplexMatrix back = decode_cmat(encode_cmat(m));
  REQUIRE(back.rows() == 5);
  REQUIRE(back.cols() == 7);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 7; ++j) {
      const cplx x = back(i, j), y = m(i, j);
      CHECK(std::memcmp(&x, &y, sizeof(cplx)) == 0);
    }
  const auto path = scratch("m.cmat");
  export_matrix(m, path);
  CHECK(slurp(path) == encode_cmat(m));
  CHECK(frobenius_distance(import_matrix(path), m) == 0.0);
}

TEST_CASE("cmat header and payload layout") {
  ComplexMatrix m(1, 2);
  m.set(0, 0, cplx(1.0, 3.0));
  m.set(0, 1, cplx(2.0, 4.0));
  const std::string bytes = encode_cmat(m);
  const std::string header = "CMAT1 1 2\n";
  REQUIRE(bytes.size() == header.size() + 32);
  CHECK(bytes.substr(0, header.size()) == header);
  double vals[4];
  std::memcpy(vals, bytes.data() + header.size(), 32);  // little-endian host
  CHECK(vals[0] == 1.0);
  CHECK(vals[1] == 2.0);
  CHECK(vals[2] == 3.0);
  CHECK(vals[3] == 4.0);
}

TEST_CASE("cmat decode errors") {
  const std::string good = encode_cmat(ComplexMatrix(2, 2));
  try {
    decode_cmat(good.substr(0, good.size() - 8));
    FAIL("expected LoadError");
  } catch (const LoadError& e) {
    CHECK(e.kind() == LoadError::Kind::kTruncated);
    CHECK(std::string(e.what()).find("64") != std::string::npos);
    CHECK(std::string(e.what()).find("56") != std::string::npos);
  }
  CHECK(load_error_kind(good + "x") == LoadError::Kind::kTrailingBytes);
  CHECK(load_error_kind("CMAT1 0 0\n") == LoadError::Kind::kEmpty);
  CHECK(load_error_kind("CMAT2 1 1\n") == LoadError::Kind::kMalformedHeader);
  CHECK(load_error_kind("CMAT1 1\n") == LoadError::Kind::kMalformedHeader);
  CHECK(load_error_kind("garbage") == LoadError::Kind::kMalformedHeader);
  std::string nonfinite = encode_cmat(ComplexMatrix(1, 1));
  const double inf = std::numeric_limits<double>::infinity();
  std::memcpy(nonfinite.data() + nonfinite.size() - 8, &inf, 8);
  CHECK(load_error_kind(nonfinite) == LoadError::Kind::kNonFinite);
  CHECK_THROWS_AS(import_matrix(scratch("does-not-exist.cmat")), LoadError);
}

TEST_CASE("real vectors round trip through cmat") {
  const std::vector<double> v{0.1, 0.25, 0.9};
  const auto path = scratch("eps.cmat");
  export_real_vector(v, path);
  CHECK(import_real_vector(path) == v);
  const ComplexMatrix m = import_matrix(path);
  CHECK(m.rows() == 3);
  CHECK(m.cols() == 1);
  ComplexMatrix c(2, 1);
  c.set(0, 0, cplx(0.5, 0.5));
  export_matrix(c, path);
  CHECK_THROWS(import_real_vector(path));
}

TEST_CASE("format_number round trips") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 0.0}) {
    CHECK(std::strtod(format_number(v).c_str(), nullptr) == v);
  }
  CHECK(format_number(0.1) == "0.10000000000000001");
  CHECK(format_number(std::nan("")) == "nan");
}

TEST_CASE("emit_results writes header plus one line per record") {
  std::vector<ExperimentRecord> recs(3);
  for (std::size_t i = 0; i < 3; ++i) {
    recs[i].sweep_axis = "M";
    recs[i].sweep_value = 4.0;
    recs[i].solver = "amp";
    recs[i].metric = "pe";
    recs[i].value = 0.1 * static_cast<double>(i + 1);
    recs[i].trials = 10;
    recs[i].seed = 42;
    recs[i].pilot_source = "gaussian";
  }
  recs[2].ms_per_trial = 1.5;
  const auto path = scratch("out.csv");
  emit_results(recs, path);
  const std::string text = slurp(path);
  CHECK(line_count(text) == 4);
  CHECK(text.substr(0, text.find('\n')) == kCsvHeader);
  std::istringstream is(text);
  std::string line;
  std::getline(is, line);
  std::getline(is, line);
  CHECK(line == "M,4,amp,pe,0.10000000000000001,10,0,42,gaussian,");
  std::getline(is, line);
  std::getline(is, line);
  CHECK(line.substr(line.rfind(',') + 1) == "1.5");

  CHECK_THROWS_AS(emit_results(recs, scratch("no/such/dir/out.csv")), WriteError);
  CHECK_THROWS_AS(emit_results({}, path), ContractViolation);
}

TEST_CASE("parse_config reads every section") {
  const auto cfg = parse_config(R"({
    "scenario": {"activity": "iid-group", "N": 40, "G": 8, "p": 0.2, "M": 16, "L": 10, "sigma2": 0.05},
    "pilots": "gaussian-normalized",
    "solvers": [
      {"id": "cov-lasso", "lambda": 0.01, "subtract_noise": true},
      {"id": "map", "prior": 0.3, "iterations": 7},
      {"id": "ml"},
      {"id": "amp", "prior": "uniform"}
    ],
    "sweep": {"axis": "G", "values": [4, 8]},
    "trials": 12, "calibration_trials": 13, "validation_trials": 14, "root_seed": 99,
    "timing": true
  })");
  CHECK(cfg.scenario.activity.kind == ActivityKind::kIidGroupActivity);
  CHECK(cfg.scenario.activity.groups == 8);
  CHECK(cfg.scenario.activity.p == 0.2);
  CHECK(cfg.scenario.antennas == 16);
  CHECK(cfg.scenario.pilot_length == 10);
  CHECK(cfg.scenario.sigma2 == 0.05);
  CHECK(cfg.pilots.kind == PilotSpec::Kind::kGaussianNormalized);
  REQUIRE(cfg.solvers.size() == 4);
  CHECK(cfg.solvers[0].id == SolverId::kCovLasso);
  CHECK(*cfg.solvers[0].lambda == 0.01);
  CHECK(cfg.solvers[0].subtract_noise);
  CHECK(cfg.solvers[1].prior.kind == PriorSource::Kind::kConstant);
  CHECK(cfg.solvers[1].prior.value == 0.3);
  CHECK(*cfg.solvers[1].iterations == 7);
  CHECK(cfg.solvers[2].id == SolverId::kMl);
  CHECK_FALSE(cfg.solvers[2].iterations.has_value());
  CHECK(cfg.solvers[3].prior.kind == PriorSource::Kind::kUniform);
  CHECK(cfg.axis == SweepAxis::kGroups);
  CHECK(cfg.sweep_values == std::vector<double>{4, 8});
  CHECK(cfg.trials == 12);
  CHECK(cfg.calibration_trials == 13);
  CHECK(cfg.validation_trials == 14);
  CHECK(cfg.root_seed == 99);
  CHECK(cfg.record_timing);
  CHECK_NOTHROW(cfg.validate());

  const auto minimal = parse_config(R"({"scenario": {"N": 20}, "solvers": ["amp"]})");
  CHECK(minimal.axis == SweepAxis::kUndersampling);
  CHECK(minimal.sweep_values == std::vector<double>{12.0 / 20.0});
  CHECK(minimal.solvers[0].prior.kind == PriorSource::Kind::kMarginal);
}

TEST_CASE("parse_config rejects bad input") {
  CHECK_THROWS_AS(parse_config("{not json"), ContractViolation);
  CHECK_THROWS_AS(parse_config(R"({"solvers": ["amp"]})"), ContractViolation);
  CHECK_THROWS_AS(parse_config(R"({"scenario": {"N": 20}, "solvers": ["nope"]})"),
                  ContractViolation);
  CHECK_THROWS_AS(parse_config(R"({"scenario": {"N": 20, "activity": "x"}, "solvers": []})"),
                  ContractViolation);
  CHECK_THROWS_AS(
      parse_config(R"({"scenario": {"N": 20}, "solvers": ["amp"], "sweep": {"axis": "Q", "values": [1]}})"),
      ContractViolation);
  auto cfg = parse_config(R"({"scenario": {"N": 20}, "solvers": ["amp"],
                              "pilots": "file:/definitely/missing.cmat"})");
  CHECK_THROWS_AS(cfg.validate(), ContractViolation);
  CHECK_THROWS_AS(load_config(scratch("missing.json")), ContractViolation);
}

TEST_CASE("apply_sweep_value") {
  Scenario base;
  base.activity = ActivityModel::independent_two_group(100, 0.15, 0.05);
  CHECK(apply_sweep_value(base, SweepAxis::kUndersampling, 0.12).pilot_length == 12);
  CHECK(apply_sweep_value(base, SweepAxis::kAntennas, 32).antennas == 32);
  const auto p = apply_sweep_value(base, SweepAxis::kAccessProbability, 0.2).activity;
  CHECK(p.mean_access_probability() == doctest::Approx(0.2));
  CHECK(p.p1 / p.p2 == doctest::Approx(3.0));
  const auto r = apply_sweep_value(base, SweepAxis::kAccessRatio, 1.0).activity;
  CHECK(r.p1 == doctest::Approx(0.1));
  CHECK(r.p2 == doctest::Approx(0.1));
  CHECK_THROWS_AS(apply_sweep_value(base, SweepAxis::kGroups, 4), ContractViolation);

  Scenario grouped;
  grouped.activity = ActivityModel::single_active_group(100, 10);
  CHECK(apply_sweep_value(grouped, SweepAxis::kGroups, 5).activity.groups == 5);
  CHECK_THROWS_AS(apply_sweep_value(grouped, SweepAxis::kAccessProbability, 0.1),
                  ContractViolation);
}

TEST_CASE("solver and axis names round trip") {
  for (auto id : {SolverId::kGroupLasso, SolverId::kAmp, SolverId::kMap, SolverId::kMl,
                  SolverId::kCovLasso}) {
    CHECK(parse_solver_id(to_string(id)) == id);
  }
  for (auto ax : {SweepAxis::kUndersampling, SweepAxis::kAccessProbability, SweepAxis::kAntennas,
                  SweepAxis::kAccessRatio, SweepAxis::kGroups}) {
    CHECK(parse_sweep_axis(to_string(ax)) == ax);
  }
}

TEST_CASE("run_sweep emits one record per metric") {
  auto cfg = parse_config(kSmallConfig);
  cfg.trials = 1;
  cfg.solvers.resize(1);
  cfg.sweep_values = {0.4};
  const auto recs = run_sweep(cfg);
  REQUIRE(recs.size() == 3);
  CHECK(recs[0].metric == "gamma_star");
  CHECK(recs[1].metric == "mse");
  CHECK(recs[2].metric == "pe");
  for (const auto& r : recs) {
    CHECK(r.solver == "amp");
    CHECK(r.trials == 1);
    CHECK(r.sweep_axis == "L/N");
    CHECK(r.seed == point_seed(11, 0));
    CHECK_FALSE(r.ms_per_trial.has_value());
  }
  CHECK(trial_seed(point_seed(11, 0), 0) != trial_seed(point_seed(11, 0), 1));
}

TEST_CASE("run_sweep is reproducible across reruns and worker counts") {
  auto cfg = parse_config(kSmallConfig);
  cfg.workers = 1;
  const std::string a = to_csv(run_sweep(cfg));
  const std::string b = to_csv(run_sweep(cfg));
  cfg.workers = 3;
  const std::string c = to_csv(run_sweep(cfg));
  CHECK(a == b);
  CHECK(a == c);
  CHECK(line_count(a) == 1 + 2 * (3 + 2));
  cfg.root_seed = 12;
  CHECK(to_csv(run_sweep(cfg)) != a);
}

TEST_CASE("pilot file is used verbatim") {
  Rng rng(5);
  const ComplexMatrix a = gaussian_pilots(8, 20, false, rng);
  const auto path = scratch("pilots.cmat");
  export_matrix(a, path);
  PilotSpec spec;
  spec.kind = PilotSpec::Kind::kFile;
  spec.path = path;
  CHECK(frobenius_distance(make_pilots(spec, 8, 20, 1), a) == 0.0);
  CHECK_THROWS(make_pilots(spec, 8, 21, 1));
}

TEST_CASE("workers_from_env") {
  ::setenv("MMV_WORKERS", "3", 1);
  CHECK(workers_from_env(1) == 3);
  ::setenv("MMV_WORKERS", "zero", 1);
  CHECK(workers_from_env(2) == 2);
  ::setenv("MMV_WORKERS", "0", 1);
  CHECK(workers_from_env(2) == 2);
  ::unsetenv("MMV_WORKERS");
  CHECK(workers_from_env(4) == 4);
}
