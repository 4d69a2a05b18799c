#include "mmv/model.hpp"

#include <cmath>
#include <sstream>

#include "mmv/errors.hpp"

namespace mmv {

namespace {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

bool open_unit(double v) { return v > 0.0 && v < 1.0; }

}  // namespace

std::uint64_t derive_seed(std::uint64_t root, std::uint64_t index) noexcept {
  return splitmix64(splitmix64(root) ^ (index * 0xd1342543de82ef95ULL + 1));
}

ActivityModel ActivityModel::independent_two_group(std::size_t n, double p1, double p2) {
  ActivityModel m;
  m.kind = ActivityKind::kIndependentTwoGroup;
  m.n = n;
  m.p1 = p1;
  m.p2 = p2;
  m.groups = 2;
  m.p = 0.5 * (p1 + p2);
  m.validate();
  return m;
}

ActivityModel ActivityModel::single_active_group(std::size_t n, std::size_t groups) {
  ActivityModel m;
  m.kind = ActivityKind::kSingleActiveGroup;
  m.n = n;
  m.groups = groups;
  m.p = groups == 0 ? 0.0 : 1.0 / static_cast<double>(groups);
  m.validate();
  return m;
}

ActivityModel ActivityModel::iid_group_activity(std::size_t n, std::size_t groups, double p) {
  ActivityModel m;
  m.kind = ActivityKind::kIidGroupActivity;
  m.n = n;
  m.groups = groups;
  m.p = p;
  m.validate();
  return m;
}

void ActivityModel::validate() const {
  detail::require(n >= 1, "ActivityModel: N must be positive");
  switch (kind) {
    case ActivityKind::kIndependentTwoGroup:
      detail::require(n % 2 == 0, "ActivityModel: independent case needs even N");
      // Zero probabilities are allowed so degenerate draws can be exercised.
      detail::require(p1 >= 0.0 && p1 < 1.0 && p2 >= 0.0 && p2 < 1.0,
                      "ActivityModel: p1, p2 must lie in [0, 1)");
      break;
    case ActivityKind::kSingleActiveGroup:
      detail::require(groups >= 1 && n % groups == 0,
                      "ActivityModel: G must divide N");
      break;
    case ActivityKind::kIidGroupActivity:
      detail::require(groups >= 1 && n % groups == 0,
                      "ActivityModel: G must divide N");
      detail::require(open_unit(p), "ActivityModel: p must lie in (0, 1)");
      break;
  }
}

double ActivityModel::mean_access_probability() const {
  switch (kind) {
    case ActivityKind::kIndependentTwoGroup: return 0.5 * (p1 + p2);
    case ActivityKind::kSingleActiveGroup: return 1.0 / static_cast<double>(groups);
    case ActivityKind::kIidGroupActivity: return p;
  }
  return 0.0;
}

std::vector<double> ActivityModel::marginals() const {
  std::vector<double> out(n, mean_access_probability());
  if (kind == ActivityKind::kIndependentTwoGroup) {
    for (std::size_t i = 0; i < n; ++i) out[i] = i < n / 2 ? p1 : p2;
  }
  return out;
}

std::string ActivityModel::describe() const {
  std::ostringstream os;
  switch (kind) {
    case ActivityKind::kIndependentTwoGroup:
      os << "independent(N=" << n << ",p1=" << p1 << ",p2=" << p2 << ")";
      break;
    case ActivityKind::kSingleActiveGroup:
      os << "single-group(N=" << n << ",G=" << groups << ")";
      break;
    case ActivityKind::kIidGroupActivity:
      os << "iid-group(N=" << n << ",G=" << groups << ",p=" << p << ")";
      break;
  }
  return os.str();
}

Support draw_support(const ActivityModel& model, Rng& rng) {
  Support alpha(model.n, 0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  switch (model.kind) {
    case ActivityKind::kIndependentTwoGroup: {
      const std::size_t half = model.n / 2;
      for (std::size_t i = 0; i < model.n; ++i) {
        const double prob = i < half ? model.p1 : model.p2;
        alpha[i] = unif(rng) < prob ? 1 : 0;
      }
      break;
    }
    case ActivityKind::kSingleActiveGroup: {
      std::uniform_int_distribution<std::size_t> pick(0, model.groups - 1);
      const std::size_t g = pick(rng), d = model.group_size();
      for (std::size_t i = g * d; i < (g + 1) * d; ++i) alpha[i] = 1;
      break;
    }
    case ActivityKind::kIidGroupActivity: {
      const std::size_t d = model.group_size();
      for (std::size_t g = 0; g < model.groups; ++g) {
        if (unif(rng) < model.p) {
          for (std::size_t i = g * d; i < (g + 1) * d; ++i) alpha[i] = 1;
        }
      }
      break;
    }
  }
  return alpha;
}

ComplexMatrix draw_complex_gaussian(std::size_t rows, std::size_t cols, double variance,
                                    Rng& rng) {
  detail::require(variance >= 0.0, "draw_complex_gaussian: negative variance");
  ComplexMatrix out(rows, cols);
  if (variance == 0.0) return out;
  std::normal_distribution<double> gauss(0.0, std::sqrt(0.5 * variance));
  auto re = out.re_plane();
  auto im = out.im_plane();
  for (std::size_t i = 0; i < out.size(); ++i) {
    re[i] = gauss(rng);
    im[i] = gauss(rng);
  }
  return out;
}

ComplexMatrix draw_signal(const Support& alpha, std::size_t antennas, Rng& rng) {
  ComplexMatrix h = draw_complex_gaussian(alpha.size(), antennas, 1.0, rng);
  for (std::size_t n = 0; n < alpha.size(); ++n) {
    if (alpha[n]) continue;
    for (std::size_t m = 0; m < antennas; ++m) {
      h.re(n, m) = 0.0;
      h.im(n, m) = 0.0;
    }
  }
  return h;
}

Measurement measure(const ComplexMatrix& a, const ComplexMatrix& x, double sigma2,
                    Rng& rng) {
  if (!(sigma2 >= 0.0)) throw ContractViolation("measure: sigma2 must be >= 0");
  Measurement out{complex_matmul(a, x), ComplexMatrix{}};
  out.z = draw_complex_gaussian(a.rows(), x.cols(), sigma2, rng);
  out.y += out.z;
  return out;
}

void normalize_columns(ComplexMatrix& a, double target) {
  const auto norms2 = column_squared_norms(a);
  for (std::size_t c = 0; c < a.cols(); ++c) {
    detail::require(norms2[c] > 0.0, "normalize_columns: zero column");
    const double s = target / std::sqrt(norms2[c]);
    for (std::size_t r = 0; r < a.rows(); ++r) {
      a.re(r, c) *= s;
      a.im(r, c) *= s;
    }
  }
}

ComplexMatrix gaussian_pilots(std::size_t l, std::size_t n, bool normalize, Rng& rng) {
  detail::require(l >= 1 && n >= 1, "gaussian_pilots: L and N must be positive");
  ComplexMatrix a = draw_complex_gaussian(l, n, 1.0, rng);
  if (normalize) normalize_columns(a, std::sqrt(static_cast<double>(l)));
  return a;
}

ProblemInstance make_instance(const ComplexMatrix& pilots, const ActivityModel& model,
                              std::size_t antennas, double sigma2, std::uint64_t seed) {
  detail::require(pilots.cols() == model.n, "make_instance: pilot count != N");
  Rng rng(seed);
  ProblemInstance inst;
  inst.a = pilots;
  inst.alpha = draw_support(model, rng);
  inst.x = draw_signal(inst.alpha, antennas, rng);
  auto meas = measure(pilots, inst.x, sigma2, rng);
  inst.y = std::move(meas.y);
  inst.z = std::move(meas.z);
  inst.sigma2 = sigma2;
  inst.seed = seed;
  return inst;
}

std::size_t count_active(const Support& alpha) {
  std::size_t k = 0;
  for (auto v : alpha) k += v ? 1 : 0;
  return k;
}

}  // namespace mmv
