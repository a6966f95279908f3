#include "aks/periodicity.hpp"

#include <Eigen/SVD>
#include <unsupported/Eigen/KroneckerProduct>

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace aks {

const char* period_kind_name(PeriodKind k) {
  switch (k) {
    case PeriodKind::ExactPeriod: return "exact_period";
    case PeriodKind::TypeI: return "type_I";
    case PeriodKind::TypeII: return "type_II";
    case PeriodKind::None: return "none";
  }
  return "?";
}

std::string PeriodReport::serialized() const {
  std::ostringstream os;
  os << "kind " << period_kind_name(kind) << "\n";
  os << "P";
  for (double p : P) os << " " << fmt_g17(p);
  os << "\n";
  os << "x_residual " << fmt_g17(x_residual) << "\n";
  os << "f_residual " << fmt_g17(f_residual) << "\n";
  os << "b_condition " << fmt_g17(b_condition) << "\n";
  os << "nullspace_dim " << nullspace_dim << "\n";
  os << "B";
  for (int r = 0; r < B.rows(); ++r) {
    for (int c = 0; c < B.cols(); ++c) os << " " << fmt_g17(B(r, c));
  }
  os << "\n";
  if (!notes.empty()) os << "notes " << notes << "\n";
  return os.str();
}

ConjugatorResult solve_conjugator(const LoopElement& x_at_0, const LoopElement& x_at_p) {
  if (x_at_0.size() != x_at_p.size()) {
    throw std::invalid_argument("solve_conjugator: size mismatch");
  }
  if (x_at_0.lo() != x_at_p.lo() || x_at_0.hi() != x_at_p.hi()) {
    throw std::invalid_argument("solve_conjugator: degree range mismatch");
  }
  if (!x_at_0.real_flag() || !x_at_p.real_flag()) {
    throw std::invalid_argument("solve_conjugator expects real-flagged elements");
  }
  const int m = x_at_0.size();
  const int degrees = x_at_0.hi() - x_at_0.lo() + 1;
  RMatrix system(degrees * m * m, m * m);
  const RMatrix eye = RMatrix::Identity(m, m);
  for (int d = x_at_0.lo(); d <= x_at_0.hi(); ++d) {
    const RMatrix a0 = x_at_0.coeff_ref(d).real();
    const RMatrix ap = x_at_p.coeff_ref(d).real();
    // vec(A0 B - B Ap) = (I (x) A0 - Ap^T (x) I) vec(B), column-major vec.
    system.middleRows((d - x_at_0.lo()) * m * m, m * m) =
        Eigen::kroneckerProduct(eye, a0) - Eigen::kroneckerProduct(ap.transpose(), eye);
  }
  Eigen::JacobiSVD<RMatrix> svd(system, Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double smax = sv(0);
  int null_dim = 0;
  for (int i = 0; i < sv.size(); ++i) {
    if (sv(i) <= 1e-8 * std::max(smax, 1e-300)) ++null_dim;
  }

  ConjugatorResult out;
  Eigen::VectorXd vec_b = svd.matrixV().col(m * m - 1);
  out.B = Eigen::Map<RMatrix>(vec_b.data(), m, m);
  const double det = out.B.determinant();
  if (std::abs(det) < 1e-12) {
    out.invertible = false;
    out.notes = "recovered B is singular";
    out.residual = std::numeric_limits<double>::infinity();
    return out;
  }
  // det(cB) = c^m det B with m even, so only |det| can be normalized.
  out.B /= std::pow(std::abs(det), 1.0 / m);
  if (det < 0.0) out.notes = "det B = -1 after scaling";
  out.nullspace_dim = std::max(null_dim, 1);
  if (null_dim > 1) {
    out.notes += std::string(out.notes.empty() ? "" : "; ") +
                 "B non-unique: centralizer is nontrivial (nullspace dim " +
                 std::to_string(null_dim) + ")";
  }
  Eigen::JacobiSVD<RMatrix> bsvd(out.B);
  out.condition = bsvd.singularValues()(0) / bsvd.singularValues()(m - 1);

  const RMatrix binv = out.B.inverse();
  double res = 0.0;
  for (int d = x_at_0.lo(); d <= x_at_0.hi(); ++d) {
    const RMatrix diff = x_at_p.coeff_ref(d).real() - binv * x_at_0.coeff_ref(d).real() * out.B;
    res = std::max(res, diff.cwiseAbs().maxCoeff());
  }
  out.residual = res;
  return out;
}

std::vector<std::vector<int>> translated_test_points(const GridSpec& grid,
                                                     const std::vector<double>& P,
                                                     int limit) {
  std::vector<int> offset(P.size());
  for (size_t k = 0; k < P.size(); ++k) {
    const double raw = P[k] / grid.spacing[k];
    const long rounded = std::lround(raw);
    if (std::abs(raw - rounded) > 1e-9 / grid.spacing[k]) {
      throw std::invalid_argument("candidate period is not grid-aligned");
    }
    offset[k] = static_cast<int>(rounded);
  }
  std::vector<std::vector<int>> points;
  for (long lin = 0; lin < grid.total(); ++lin) {
    const std::vector<int> idx = grid.unlinear(lin);
    bool ok = true;
    for (size_t k = 0; k < offset.size(); ++k) {
      const int shifted = idx[k] + offset[k];
      if (shifted < 0 || shifted >= grid.counts[k]) { ok = false; break; }
    }
    if (ok) points.push_back(idx);
  }
  if (points.empty()) {
    throw std::invalid_argument("grid does not contain the required translated points");
  }
  if (static_cast<int>(points.size()) > limit) {
    std::vector<std::vector<int>> strided;
    const double stride = static_cast<double>(points.size()) / limit;
    for (int i = 0; i < limit; ++i) {
      strided.push_back(points[static_cast<size_t>(i * stride)]);
    }
    points = std::move(strided);
  }
  return points;
}

double verify_type_ii(const FrameField& frames, const RMatrix& B,
                      const std::vector<double>& P,
                      std::span<const std::vector<int>> test_points) {
  if (std::abs(B.determinant()) < 1e-12) {
    throw std::invalid_argument("verify_type_ii: B is singular");
  }
  const auto& grid = frames.grid;
  std::vector<int> offset(P.size());
  for (size_t k = 0; k < P.size(); ++k) {
    offset[k] = static_cast<int>(std::lround(P[k] / grid.spacing[k]));
  }
  std::vector<int> p_idx(P.size(), 0);
  for (size_t k = 0; k < P.size(); ++k) p_idx[k] = offset[k];
  const RMatrix f_p = frames.at(p_idx);
  const RMatrix binv = B.inverse();
  double worst = 0.0;
  for (const auto& idx : test_points) {
    std::vector<int> shifted = idx;
    for (size_t k = 0; k < offset.size(); ++k) shifted[k] += offset[k];
    const RMatrix lhs = frames.at(shifted);
    const RMatrix rhs = f_p * binv * frames.at(idx) * B;
    worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff());
  }
  return worst;
}

PeriodReport detect_period(const FlowResult& flow, const FrameField& frames,
                           const std::vector<double>& P, double tol) {
  PeriodReport report;
  report.P = P;
  const int m = flow.x0.size();
  report.B = RMatrix::Identity(m, m);

  const auto& grid = flow.grid;
  auto origin_idx = grid.unlinear(0);
  auto p_idx = grid.index_of([&] {
    std::vector<double> t = grid.point(origin_idx);
    for (size_t k = 0; k < P.size(); ++k) t[k] += P[k];
    return t;
  }());
  if (!p_idx) throw std::invalid_argument("grid does not contain the candidate period point");

  const LoopElement& x0 = flow.samples[0];
  const LoopElement& xp = flow.at(*p_idx);
  const double direct = distance(xp, x0);
  const auto test_points = translated_test_points(grid, P);

  if (direct < tol && flow.rule == Rule::Simple) {
    // Killing-field equivalence: verify both consequences at 10x slack.
    report.kind = PeriodKind::TypeI;
    report.x_residual = direct;
    double worst_x = 0.0;
    for (const auto& idx : test_points) {
      std::vector<int> shifted = idx;
      for (size_t k = 0; k < P.size(); ++k) {
        shifted[k] += static_cast<int>(std::lround(P[k] / grid.spacing[k]));
      }
      worst_x = std::max(worst_x, distance(flow.at(shifted), flow.at(idx)));
    }
    report.f_residual = verify_type_ii(frames, report.B, P, test_points);
    if (worst_x > 10 * tol || report.f_residual > 10 * tol) {
      report.kind = PeriodKind::None;
      report.notes = "type-I hypothesis detected but consequence check failed "
                     "(integration-accuracy alarm): worst X translate residual " +
                     fmt_g17(worst_x) + ", F residual " + fmt_g17(report.f_residual);
      return report;
    }
    std::vector<int> pp(P.size());
    for (size_t k = 0; k < P.size(); ++k) {
      pp[k] = static_cast<int>(std::lround(P[k] / grid.spacing[k]));
    }
    const RMatrix f_p = frames.at(pp);
    if ((f_p - RMatrix::Identity(m, m)).cwiseAbs().maxCoeff() < 10 * tol) {
      report.kind = PeriodKind::ExactPeriod;
      report.notes = "F(P) = I: P is an exact period of the frame";
    }
    return report;
  }

  if (direct < tol && flow.rule != Rule::Simple) {
    report.notes = "X(P) = X(0) but the rule is not simple; "
                   "the type-I equivalence is only available for simple flows";
  }

  // Type-II attempt through the conjugator.
  auto conj = solve_conjugator(x0, xp);
  report.x_residual = conj.residual;
  report.b_condition = conj.condition;
  report.nullspace_dim = conj.nullspace_dim;
  if (!conj.invertible || conj.residual >= tol) {
    report.kind = PeriodKind::None;
    report.x_residual = std::min(direct, conj.residual);
    report.notes += std::string(report.notes.empty() ? "" : "; ") +
                    "not conjugate within tolerance";
    return report;
  }
  report.B = conj.B;
  report.f_residual = verify_type_ii(frames, report.B, P, test_points);
  if (report.f_residual > 10 * tol || flow.rule != Rule::Simple) {
    report.kind = PeriodKind::None;
    report.notes += std::string(report.notes.empty() ? "" : "; ") +
                    "type-II frame verification failed or rule not simple";
    return report;
  }
  report.kind = PeriodKind::TypeII;
  if (!conj.notes.empty()) {
    report.notes += std::string(report.notes.empty() ? "" : "; ") + conj.notes;
  }
  return report;
}

}  // namespace aks
