#include "aks/frame.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace aks {

namespace {

constexpr double kOrthAbortTol = 1e-6;

double orth_drift(const RMatrix& f) {
  return (f.transpose() * f - RMatrix::Identity(f.rows(), f.cols())).cwiseAbs().maxCoeff();
}

struct FrameWalkChecks {
  double max_orth = 0.0;
  double max_det = 0.0;

  void visit(const RMatrix& f) {
    const double o = orth_drift(f);
    max_orth = std::max(max_orth, o);
    max_det = std::max(max_det, std::abs(f.determinant() - 1.0));
    if (o > kOrthAbortTol) {
      throw std::runtime_error("frame orthogonality drift " + fmt_g17(o) +
                               " exceeds 1e-6; aborting");
    }
  }
};

int substeps_for(double spacing, double h) {
  return static_cast<int>(std::max(1L, std::lround(std::ceil(std::abs(spacing) / h - 1e-12))));
}

}  // namespace

const RMatrix& FrameField::at(const std::vector<int>& idx) const {
  return frames[static_cast<size_t>(grid.linear(idx))];
}

const RMatrix& FrameField::at_time(const std::vector<double>& t) const {
  auto idx = grid.index_of(t);
  if (!idx) throw std::invalid_argument("requested time is not a grid node");
  return at(*idx);
}

std::vector<RMatrix> connection_at(const LoopElement& x, Rule rule, double z0) {
  if (z0 == 0.0) throw std::invalid_argument("z0 must be nonzero");
  if (!x.real_flag()) throw std::invalid_argument("connection_at requires a real-flagged element");
  const int n = x.block_size();
  std::vector<RMatrix> out;
  out.reserve(static_cast<size_t>(n));
  for (int i = 1; i <= n; ++i) {
    out.push_back(connection_component(x, rule, i).evaluate_real(z0));
  }
  return out;
}

FrameField integrate_frame(const FlowResult& flow, Rule rule, double z0, double h,
                           const RMatrix* f_init) {
  if (z0 == 0.0) throw std::invalid_argument("z0 must be nonzero");
  if (h <= 0.0) throw std::invalid_argument("step size must be positive");
  const auto& grid = flow.grid;
  const int n = grid.dims();
  const int m = flow.x0.size();

  FrameField out;
  out.grid = grid;
  out.z0 = z0;
  out.rule = rule;
  out.frames.assign(static_cast<size_t>(grid.total()), RMatrix::Identity(m, m));
  if (f_init) out.frames[0] = *f_init;

  FrameWalkChecks checks;
  checks.visit(out.frames[0]);

  for (long lin = 1; lin < grid.total(); ++lin) {
    const std::vector<int> idx = grid.unlinear(lin);
    int dir = -1;
    for (int k = n; k-- > 0;) {
      if (idx[static_cast<size_t>(k)] > 0) { dir = k; break; }
    }
    std::vector<int> prev = idx;
    --prev[static_cast<size_t>(dir)];

    const int sub = substeps_for(grid.spacing[static_cast<size_t>(dir)], h);
    const double hh = grid.spacing[static_cast<size_t>(dir)] / sub;
    RMatrix f = out.frames[static_cast<size_t>(grid.linear(prev))];
    LoopElement x = flow.at(prev);
    for (int s = 0; s < sub; ++s) {
      // Midpoint evaluation of the connection along the edge.
      const LoopElement x_mid = rk4_step(x, rule, dir + 1, hh / 2);
      const RMatrix d = connection_component(x_mid, rule, dir + 1).evaluate_real(z0);
      f = f * (hh * d).exp();
      x = rk4_step(x_mid, rule, dir + 1, hh / 2);
    }
    if (!f.allFinite()) throw std::runtime_error("non-finite frame entries encountered");
    checks.visit(f);
    out.frames[static_cast<size_t>(lin)] = f;
  }
  out.max_orth_drift = checks.max_orth;
  out.max_det_drift = checks.max_det;
  return out;
}

double immersion_det(const LoopElement& x) {
  if (!x.real_flag()) throw std::invalid_argument("immersion_det requires a real-flagged element");
  const int n = x.block_size();
  const RMatrix x1 = x.coeff(1).real();
  RMatrix m(n, n);
  RMatrix p = x1;  // x1^(2i-1) for row i
  for (int i = 1; i <= n; ++i) {
    if (i > 1) p = p * x1 * x1;
    m.row(i - 1) = p.row(n).head(n);
  }
  // Sign anchored so that n = 2 reproduces (x1 x2 + y1 y2)(x1 y2 - x2 y1).
  const double sign = (n % 2 == 0) ? -1.0 : 1.0;
  return sign * m.determinant();
}

CurvatureResiduals flatness_residuals(const FlowResult& flow, Rule rule, double z0) {
  const auto& grid = flow.grid;
  const int n = grid.dims();
  for (int k = 0; k < n; ++k) {
    if (grid.counts[static_cast<size_t>(k)] < 3) {
      throw std::invalid_argument("flatness_residuals needs >= 3 grid points per direction");
    }
  }
  const int bs = flow.x0.block_size();
  // omega / eta blocks of every connection component at every node.
  std::vector<std::vector<RMatrix>> omega(static_cast<size_t>(grid.total()));
  std::vector<std::vector<RMatrix>> eta(static_cast<size_t>(grid.total()));
  for (long lin = 0; lin < grid.total(); ++lin) {
    const auto comps = connection_at(flow.samples[static_cast<size_t>(lin)], rule, z0);
    for (const auto& c : comps) {
      omega[static_cast<size_t>(lin)].push_back(c.topLeftCorner(bs, bs));
      eta[static_cast<size_t>(lin)].push_back(c.bottomRightCorner(bs, bs));
    }
  }
  CurvatureResiduals out;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  out.omega.assign(static_cast<size_t>(grid.total()), nan);
  out.eta.assign(static_cast<size_t>(grid.total()), nan);
  auto curvature = [&](const std::vector<std::vector<RMatrix>>& blocks,
                       const std::vector<int>& idx) {
    double worst = 0.0;
    for (int a = 0; a < n; ++a) {
      for (int b = a + 1; b < n; ++b) {
        auto at = [&](int dim, int delta, int comp) {
          std::vector<int> s = idx;
          s[static_cast<size_t>(dim)] += delta;
          return blocks[static_cast<size_t>(grid.linear(s))][static_cast<size_t>(comp)];
        };
        const double sa = grid.spacing[static_cast<size_t>(a)];
        const double sb = grid.spacing[static_cast<size_t>(b)];
        const RMatrix da_b = (at(a, 1, b) - at(a, -1, b)) / (2 * sa);
        const RMatrix db_a = (at(b, 1, a) - at(b, -1, a)) / (2 * sb);
        const RMatrix ba = at(a, 0, a) * at(b, 0, b) - at(b, 0, b) * at(a, 0, a);
        worst = std::max(worst, (da_b - db_a + ba).cwiseAbs().maxCoeff());
      }
    }
    return worst;
  };
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
    out.omega[static_cast<size_t>(lin)] = curvature(omega, idx);
    out.eta[static_cast<size_t>(lin)] = curvature(eta, idx);
    out.max_omega = std::max(out.max_omega, out.omega[static_cast<size_t>(lin)]);
    out.max_eta = std::max(out.max_eta, out.eta[static_cast<size_t>(lin)]);
  }
  return out;
}

std::vector<ImmersionSample> immersion_samples(const FrameField& frames,
                                               const FlowResult& flow, int column) {
  const int m = flow.x0.size();
  const int n = m / 2;
  if (column < 0) column = n + 1;
  if (column < n + 1 || column > 2 * n) {
    throw std::invalid_argument("immersion column must be in [n+1, 2n]");
  }
  // Grids without interior nodes get NaN residuals instead of failing.
  bool has_interior = true;
  for (int c : frames.grid.counts) has_interior = has_interior && c >= 3;
  CurvatureResiduals residuals;
  if (has_interior) {
    residuals = flatness_residuals(flow, frames.rule, frames.z0);
  } else {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    residuals.omega.assign(static_cast<size_t>(frames.grid.total()), nan);
    residuals.eta.assign(static_cast<size_t>(frames.grid.total()), nan);
  }
  std::vector<ImmersionSample> out;
  out.reserve(static_cast<size_t>(frames.grid.total()));
  for (long lin = 0; lin < frames.grid.total(); ++lin) {
    ImmersionSample s;
    s.t = frames.grid.point(frames.grid.unlinear(lin));
    s.f = frames.frames[static_cast<size_t>(lin)].col(column - 1);
    s.imm_det = immersion_det(flow.samples[static_cast<size_t>(lin)]);
    s.omega_residual = residuals.omega[static_cast<size_t>(lin)];
    s.eta_residual = residuals.eta[static_cast<size_t>(lin)];
    out.push_back(std::move(s));
  }
  return out;
}

CliffordTorus::CliffordTorus(double a_, double b_) : a(a_), b(b_) {
  if (std::abs(a * a + b * b - 1.0) > 1e-12) {
    throw std::invalid_argument("clifford preset requires a^2 + b^2 = 1");
  }
}

RMatrix CliffordTorus::connection(int direction) const {
  RMatrix d = RMatrix::Zero(4, 4);
  if (direction == 1) {
    d(0, 2) = a; d(0, 3) = b;
    d(2, 0) = -a; d(3, 0) = -b;
  } else if (direction == 2) {
    d(1, 2) = b; d(1, 3) = -a;
    d(2, 1) = -b; d(3, 1) = a;
  } else {
    throw std::out_of_range("clifford connection direction must be 1 or 2");
  }
  return d;
}

RMatrix CliffordTorus::frame_origin() const { return frame(0.0, 0.0); }

RMatrix CliffordTorus::frame(double s1, double s2) const {
  RMatrix f(4, 4);
  f << -std::sin(s1), 0.0, a * std::cos(s1), b * std::cos(s1),
       std::cos(s1), 0.0, a * std::sin(s1), b * std::sin(s1),
       0.0, -std::sin(s2), b * std::cos(s2), -a * std::cos(s2),
       0.0, std::cos(s2), b * std::sin(s2), -a * std::sin(s2);
  return f;
}

Eigen::Vector4d CliffordTorus::immersion(double s1, double s2) const {
  return {a * std::cos(s1), a * std::sin(s1), b * std::cos(s2), b * std::sin(s2)};
}

LoopElement CliffordTorus::killing_field() const {
  LoopElement x(4, 1, 1, true);
  x.set_coeff_real(1, connection(1) + connection(2));
  return x;
}

FrameField integrate_clifford_frame(const CliffordTorus& torus, const GridSpec& grid,
                                    double z0, double h) {
  if (grid.dims() != 2) throw std::invalid_argument("clifford grid must be 2-dimensional");
  if (z0 == 0.0) throw std::invalid_argument("z0 must be nonzero");
  FrameField out;
  out.grid = grid;
  out.z0 = z0;
  out.rule = Rule::Simple;
  out.frames.assign(static_cast<size_t>(grid.total()), RMatrix::Identity(4, 4));
  out.frames[0] = torus.frame(grid.origin[0], grid.origin[1]);

  FrameWalkChecks checks;
  checks.visit(out.frames[0]);
  const RMatrix d1 = z0 * torus.connection(1);
  const RMatrix d2 = z0 * torus.connection(2);
  std::vector<RMatrix> edge_exp;
  for (int k = 0; k < 2; ++k) {
    const int sub = substeps_for(grid.spacing[static_cast<size_t>(k)], h);
    const double hh = grid.spacing[static_cast<size_t>(k)] / sub;
    RMatrix step = (hh * (k == 0 ? d1 : d2)).exp();
    RMatrix full = RMatrix::Identity(4, 4);
    for (int s = 0; s < sub; ++s) full = full * step;
    edge_exp.push_back(full);
  }
  for (long lin = 1; lin < grid.total(); ++lin) {
    const std::vector<int> idx = grid.unlinear(lin);
    const int dir = idx[1] > 0 ? 1 : 0;
    std::vector<int> prev = idx;
    --prev[static_cast<size_t>(dir)];
    const RMatrix f = out.frames[static_cast<size_t>(grid.linear(prev))] *
                      edge_exp[static_cast<size_t>(dir)];
    checks.visit(f);
    out.frames[static_cast<size_t>(lin)] = f;
  }
  out.max_orth_drift = checks.max_orth;
  out.max_det_drift = checks.max_det;
  return out;
}

}  // namespace aks
