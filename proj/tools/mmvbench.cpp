// Command-line front end: parameter sweeps, threshold calibration, pilot
// coherence and .cmat round-trip checks.
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "mmv/cmat_io.hpp"
#include "mmv/errors.hpp"
#include "mmv/harness.hpp"
#include "mmv/metrics.hpp"
#include "mmv/model.hpp"

namespace {

int run_sweep_cmd(const std::string& config_path, const std::string& out,
                  std::optional<std::size_t> trials, std::optional<std::uint64_t> seed,
                  bool timing) {
  mmv::ExperimentConfig cfg = mmv::load_config(config_path);
  if (trials) cfg.trials = *trials;
  if (seed) cfg.root_seed = *seed;
  if (timing) cfg.record_timing = true;
  const auto records = mmv::run_sweep(cfg);
  if (out.empty() || out == "-") {
    mmv::write_results(records, std::cout);
  } else {
    mmv::emit_results(records, out);
    std::cerr << "wrote " << records.size() << " records to " << out << '\n';
  }
  return 0;
}

int run_calibrate_cmd(const std::string& config_path, const std::string& solver,
                      const std::string& out) {
  const mmv::ExperimentConfig cfg = mmv::load_config(config_path);
  const auto cal = mmv::calibrate_solver(cfg, mmv::parse_solver_id(solver));
  std::cout << "gamma_star," << mmv::format_number(cal.gamma_star) << '\n'
            << "pe_star," << mmv::format_number(cal.pe_star) << '\n';
  if (!out.empty()) {
    std::ofstream os(out);
    if (!os) throw mmv::WriteError("cannot open '" + out + "' for writing");
    os << "gamma,pe\n";
    for (const auto& [g, pe] : cal.pe_curve) {
      os << mmv::format_number(g) << ',' << mmv::format_number(pe) << '\n';
    }
  }
  return 0;
}

int run_coherence_cmd(const std::string& pilots, std::size_t l, std::size_t n, bool normalize,
                      std::size_t group, std::uint64_t seed) {
  mmv::ComplexMatrix a;
  if (!pilots.empty()) {
    a = mmv::import_matrix(pilots);
  } else {
    mmv::Rng rng(seed);
    a = mmv::gaussian_pilots(l, n, normalize, rng);
  }
  const auto c = mmv::coherence_metrics(a, group);
  std::cout << "mu," << mmv::format_number(c.mu) << '\n'
            << "mu_block," << mmv::format_number(c.mu_block) << '\n'
            << "nu_sub," << mmv::format_number(c.nu_sub) << '\n'
            << "mu_block_avg," << mmv::format_number(c.mu_block_avg) << '\n'
            << "nu_sub_avg," << mmv::format_number(c.nu_sub_avg) << '\n';
  return 0;
}

int run_roundtrip_cmd(const std::string& in, std::size_t rows, std::size_t cols,
                      std::uint64_t seed) {
  mmv::ComplexMatrix m;
  if (!in.empty()) {
    m = mmv::import_matrix(in);
  } else {
    mmv::Rng rng(seed);
    m = mmv::draw_complex_gaussian(rows, cols, 1.0, rng);
  }
  const mmv::ComplexMatrix back = mmv::decode_cmat(mmv::encode_cmat(m));
  const bool same = back == m;
  std::cout << (same ? "ok" : "MISMATCH") << ' ' << m.rows() << 'x' << m.cols() << '\n';
  return same ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse activity detection benchmark"};
  app.require_subcommand(1);

  std::string config, out, solver = "amp", pilots, in;
  std::optional<std::size_t> trials;
  std::optional<std::uint64_t> seed;
  bool timing = false, normalize = false;
  std::size_t l = 64, n = 128, group = 1, rows = 8, cols = 16;
  std::uint64_t gen_seed = 1;

  auto* sweep = app.add_subcommand("sweep", "run a parameter sweep and write CSV records");
  sweep->add_option("-c,--config", config, "JSON experiment file")->required()->check(CLI::ExistingFile);
  sweep->add_option("-o,--out", out, "output CSV (default stdout)");
  sweep->add_option("--trials", trials, "override test trials per point");
  sweep->add_option("--seed", seed, "override root seed");
  sweep->add_flag("--timing", timing, "record median ms per trial");

  auto* calib = app.add_subcommand("calibrate", "calibrate the detection threshold");
  calib->add_option("-c,--config", config, "JSON experiment file")->required()->check(CLI::ExistingFile);
  calib->add_option("-s,--solver", solver, "amp, map, ml or cov-lasso");
  calib->add_option("-o,--out", out, "write the P_E(gamma) curve as CSV");

  auto* coh = app.add_subcommand("coherence", "coherence metrics of a pilot matrix");
  coh->add_option("-p,--pilots", pilots, ".cmat pilot file")->check(CLI::ExistingFile);
  coh->add_option("-L", l, "pilot length for generated pilots");
  coh->add_option("-N", n, "users for generated pilots");
  coh->add_flag("--normalize", normalize, "scale generated columns to norm sqrt(L)");
  coh->add_option("-d,--group", group, "group size");
  coh->add_option("--seed", gen_seed, "seed for generated pilots");

  auto* rt = app.add_subcommand("roundtrip-check", "encode/decode a matrix and compare bitwise");
  rt->add_option("-i,--in", in, ".cmat file (default: random matrix)")->check(CLI::ExistingFile);
  rt->add_option("--rows", rows);
  rt->add_option("--cols", cols);
  rt->add_option("--seed", gen_seed);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sweep) return run_sweep_cmd(config, out, trials, seed, timing);
    if (*calib) return run_calibrate_cmd(config, solver, out);
    if (*coh) return run_coherence_cmd(pilots, l, n, normalize, group, gen_seed);
    if (*rt) return run_roundtrip_cmd(in, rows, cols, gen_seed);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
