#include "aks/flow.hpp"

#include "aks/spectral.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace aks {

std::array<Complex, 8> complex_sample_z() {
  std::array<Complex, 8> out;
  for (int k = 0; k < 8; ++k) {
    const double phi = 2.0 * std::numbers::pi * k / 8.0;
    out[static_cast<size_t>(k)] = 0.9 * Complex(std::cos(phi), std::sin(phi));
  }
  return out;
}

std::array<double, 4> real_sample_z() { return {0.5, 1.0, 1.5, -0.75}; }

LoopElement v_field(const LoopElement& x, int i) {
  const int n = x.block_size();
  if (i < 1 || i > n) {
    throw std::out_of_range("v_field index " + std::to_string(i) + " outside [1, " +
                            std::to_string(n) + "]");
  }
  return shifted(power(x, 2 * i - 1), 2 - 2 * i);
}

LoopElement connection_component(const LoopElement& x, Rule rule, int i) {
  return project(v_field(x, i), rule);
}

std::vector<LoopElement> lax_rhs(const LoopElement& x, Rule rule, double* trim) {
  const int n = x.block_size();
  std::vector<LoopElement> out;
  out.reserve(static_cast<size_t>(n));
  for (int i = 1; i <= n; ++i) {
    LoopElement comp = bracket(x, connection_component(x, rule, i));
    out.push_back(clipped(comp, x.lo(), x.hi(), trim));
  }
  return out;
}

long GridSpec::total() const {
  long t = 1;
  for (int c : counts) t *= c;
  return t;
}

std::vector<double> GridSpec::point(const std::vector<int>& idx) const {
  std::vector<double> t(counts.size());
  for (size_t k = 0; k < counts.size(); ++k) t[k] = origin[k] + spacing[k] * idx[k];
  return t;
}

long GridSpec::linear(const std::vector<int>& idx) const {
  long lin = 0;
  for (size_t k = 0; k < counts.size(); ++k) {
    if (idx[k] < 0 || idx[k] >= counts[k]) throw std::out_of_range("grid index out of range");
    lin = lin * counts[k] + idx[k];
  }
  return lin;
}

std::vector<int> GridSpec::unlinear(long k) const {
  std::vector<int> idx(counts.size());
  for (size_t d = counts.size(); d-- > 0;) {
    idx[d] = static_cast<int>(k % counts[d]);
    k /= counts[d];
  }
  return idx;
}

std::optional<std::vector<int>> GridSpec::index_of(const std::vector<double>& t,
                                                   double tol) const {
  if (t.size() != counts.size()) return std::nullopt;
  std::vector<int> idx(counts.size());
  for (size_t k = 0; k < counts.size(); ++k) {
    const double raw = (t[k] - origin[k]) / spacing[k];
    const int rounded = static_cast<int>(std::lround(raw));
    if (std::abs(raw - rounded) * spacing[k] > tol) return std::nullopt;
    if (rounded < 0 || rounded >= counts[k]) return std::nullopt;
    idx[k] = rounded;
  }
  return idx;
}

const LoopElement& FlowResult::at(const std::vector<int>& idx) const {
  return samples[static_cast<size_t>(grid.linear(idx))];
}

const LoopElement& FlowResult::at_time(const std::vector<double>& t) const {
  auto idx = grid.index_of(t);
  if (!idx) throw std::invalid_argument("requested time is not a grid node");
  return at(*idx);
}

namespace {

LoopElement rhs_component(const LoopElement& x, Rule rule, int direction, double* trim) {
  LoopElement comp = bracket(x, connection_component(x, rule, direction));
  return clipped(comp, x.lo(), x.hi(), trim);
}

void check_finite(const LoopElement& x, const char* where) {
  if (!std::isfinite(x.max_abs())) {
    throw std::runtime_error(std::string("non-finite values encountered in ") + where);
  }
}

}  // namespace

LoopElement rk4_step(const LoopElement& x, Rule rule, int direction, double h,
                     StepStats* stats) {
  double* trim = stats ? &stats->max_trim : nullptr;
  const LoopElement k1 = rhs_component(x, rule, direction, trim);
  const LoopElement k2 = rhs_component(add(x, scaled(k1, h / 2)), rule, direction, trim);
  const LoopElement k3 = rhs_component(add(x, scaled(k2, h / 2)), rule, direction, trim);
  const LoopElement k4 = rhs_component(add(x, scaled(k3, h)), rule, direction, trim);
  LoopElement next = add(x, scaled(add(add(k1, k4), scaled(add(k2, k3), 2.0)), h / 6));
  next = renormalized(next, stats ? &stats->max_renorm : nullptr);
  if (stats) ++stats->steps;
  return next;
}

LoopElement integrate_path(const LoopElement& x0, Rule rule,
                           std::span<const PathSegment> path, double h,
                           StepStats* stats) {
  if (h <= 0) throw std::invalid_argument("step size must be positive");
  LoopElement x = x0;
  for (const auto& seg : path) {
    if (seg.length == 0.0) continue;
    const int steps = std::max(1L, std::lround(std::ceil(std::abs(seg.length) / h - 1e-12)));
    const double hh = seg.length / steps;
    for (int s = 0; s < steps; ++s) x = rk4_step(x, rule, seg.direction, hh, stats);
    check_finite(x, "integrate_path");
  }
  return x;
}

FlowResult integrate_flow(const LoopElement& x0, const FlowConfig& config) {
  if (config.h <= 0) throw std::invalid_argument("step size must be positive");
  const auto& grid = config.grid;
  const int n = grid.dims();
  if (n < 1 || n > x0.block_size()) {
    throw std::invalid_argument("grid dimension must be in [1, n]");
  }
  auto report = validate(x0);
  if (!report.all_pass) {
    throw std::invalid_argument("initial condition fails validation:\n" + report.summary());
  }
  if (x0.hi() > 1) throw std::invalid_argument("initial condition must have top degree <= 1");

  FlowResult out;
  out.rule = config.rule;
  out.h = config.h;
  out.grid = grid;
  out.x0 = x0;
  out.samples.assign(static_cast<size_t>(grid.total()), x0);

  // Number of uniform sub-steps per grid edge in each direction.
  std::vector<int> sub(static_cast<size_t>(n));
  std::vector<double> hh(static_cast<size_t>(n));
  for (int k = 0; k < n; ++k) {
    sub[k] = std::max(1L, std::lround(std::ceil(std::abs(grid.spacing[k]) / config.h - 1e-12)));
    hh[k] = grid.spacing[k] / sub[k];
  }

  // Fill rows along direction 1 first, then the later directions within
  // rows: each node is reached from its predecessor in the highest
  // nonzero index direction.
  for (long lin = 1; lin < grid.total(); ++lin) {
    const std::vector<int> idx = grid.unlinear(lin);
    int dir = -1;
    for (int k = n; k-- > 0;) {
      if (idx[static_cast<size_t>(k)] > 0) { dir = k; break; }
    }
    std::vector<int> prev = idx;
    --prev[static_cast<size_t>(dir)];
    LoopElement x = out.at(prev);
    for (int s = 0; s < sub[static_cast<size_t>(dir)]; ++s) {
      x = rk4_step(x, config.rule, dir + 1, hh[static_cast<size_t>(dir)], &out.stats);
    }
    check_finite(x, "integrate_flow");
    out.samples[static_cast<size_t>(lin)] = x;
  }

  if (config.record_residuals) {
    const auto zr = real_sample_z();
    const auto cp0 = char_poly(x0);
    std::vector<double> frob0(zr.size());
    for (size_t k = 0; k < zr.size(); ++k) frob0[k] = x0.evaluate_real(zr[k]).squaredNorm();
    out.norm_drift.resize(out.samples.size());
    out.charpoly_drift.resize(out.samples.size());
    for (size_t s = 0; s < out.samples.size(); ++s) {
      const LoopElement& x = out.samples[s];
      double nd = 0.0;
      for (size_t k = 0; k < zr.size(); ++k) {
        nd = std::max(nd, std::abs(x.evaluate_real(zr[k]).squaredNorm() - frob0[k]));
      }
      out.norm_drift[s] = nd;
      out.charpoly_drift[s] = charpoly_distance(char_poly(x), cp0);
    }
  }
  return out;
}

double ad_equivariance_residual(int i, const LoopElement& x, const LoopElement& y,
                                double fd_step) {
  if (fd_step <= 0) throw std::invalid_argument("fd_step must be positive");
  const LoopElement xy = bracket(x, y);
  const LoopElement vp = v_field(add(x, scaled(xy, fd_step)), i);
  const LoopElement vm = v_field(sub(x, scaled(xy, fd_step)), i);
  const LoopElement dv = scaled(sub(vp, vm), 1.0 / (2.0 * fd_step));
  return distance(dv, bracket(v_field(x, i), y));
}

double commuting_fields_residual(int i, int j, const LoopElement& x) {
  // The directional derivatives dV_i(V_j) and dV_j(V_i) differ by the
  // scalar factor (2i-1)/(2j-1) for these monomial fields, so the fields
  // do not commute as vector fields.  What the AKS construction uses is
  // that their VALUES commute pointwise: [V_i(X), V_j(X)] = 0, both being
  // polynomials in the same X.
  return bracket(v_field(x, i), v_field(x, j)).max_abs();
}

double maurer_cartan_residual(const FlowResult& flow) {
  const auto& grid = flow.grid;
  const int n = grid.dims();
  for (int k = 0; k < n; ++k) {
    if (grid.counts[static_cast<size_t>(k)] < 3) {
      throw std::invalid_argument("maurer_cartan_residual needs >= 3 points per direction");
    }
  }
  auto comp = [&](const std::vector<int>& idx, int dir) {
    return connection_component(flow.at(idx), flow.rule, dir + 1);
  };
  double worst = 0.0;
  for (long lin = 0; lin < grid.total(); ++lin) {
    const std::vector<int> idx = grid.unlinear(lin);
    bool interior = true;
    for (int k = 0; k < n; ++k) {
      if (idx[static_cast<size_t>(k)] < 1 ||
          idx[static_cast<size_t>(k)] > grid.counts[static_cast<size_t>(k)] - 2) {
        interior = false;
        break;
      }
    }
    if (!interior) continue;
    for (int a = 0; a < n; ++a) {
      for (int b = a + 1; b < n; ++b) {
        auto shift_idx = [&](int dim, int delta) {
          std::vector<int> s = idx;
          s[static_cast<size_t>(dim)] += delta;
          return s;
        };
        const double sa = grid.spacing[static_cast<size_t>(a)];
        const double sb = grid.spacing[static_cast<size_t>(b)];
        const LoopElement da_b =
            scaled(sub(comp(shift_idx(a, 1), b), comp(shift_idx(a, -1), b)), 1.0 / (2 * sa));
        const LoopElement db_a =
            scaled(sub(comp(shift_idx(b, 1), a), comp(shift_idx(b, -1), a)), 1.0 / (2 * sb));
        const LoopElement res = add(sub(da_b, db_a), bracket(comp(idx, a), comp(idx, b)));
        worst = std::max(worst, res.max_abs());
      }
    }
  }
  return worst;
}

}  // namespace aks
