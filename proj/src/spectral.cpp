#include "aks/spectral.hpp"

#include "aks/flow.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>

namespace aks {

namespace {

using PolyMatrix = std::vector<LaurentPoly>;  // row-major size*size

PolyMatrix poly_identity(int size) {
  PolyMatrix out(static_cast<size_t>(size) * size);
  for (int i = 0; i < size; ++i) out[static_cast<size_t>(i) * size + i] = LaurentPoly(1.0);
  return out;
}

PolyMatrix from_element(const LoopElement& x) {
  const int m = x.size();
  PolyMatrix out(static_cast<size_t>(m) * m);
  for (int r = 0; r < m; ++r) {
    for (int c = 0; c < m; ++c) {
      std::vector<Complex> coeffs(static_cast<size_t>(x.hi() - x.lo() + 1));
      for (int d = x.lo(); d <= x.hi(); ++d) coeffs[static_cast<size_t>(d - x.lo())] = x.coeff_ref(d)(r, c);
      out[static_cast<size_t>(r) * m + c] = LaurentPoly(x.lo(), std::move(coeffs)).trimmed();
    }
  }
  return out;
}

PolyMatrix poly_mul(const PolyMatrix& a, const PolyMatrix& b, int m) {
  PolyMatrix out(static_cast<size_t>(m) * m);
  for (int r = 0; r < m; ++r) {
    for (int c = 0; c < m; ++c) {
      LaurentPoly acc;
      for (int k = 0; k < m; ++k) {
        acc += a[static_cast<size_t>(r) * m + k] * b[static_cast<size_t>(k) * m + c];
      }
      out[static_cast<size_t>(r) * m + c] = acc.trimmed();
    }
  }
  return out;
}

LaurentPoly poly_trace(const PolyMatrix& a, int m) {
  LaurentPoly acc;
  for (int i = 0; i < m; ++i) acc += a[static_cast<size_t>(i) * m + i];
  return acc.trimmed();
}

}  // namespace

std::vector<LaurentPoly> char_poly(const LoopElement& x) {
  const int m = x.size();
  const PolyMatrix X = from_element(x);
  std::vector<LaurentPoly> c(static_cast<size_t>(m + 1));
  c[static_cast<size_t>(m)] = LaurentPoly(1.0);
  PolyMatrix M = poly_identity(m);
  for (int k = 1; k <= m; ++k) {
    PolyMatrix N = poly_mul(X, M, m);
    const LaurentPoly ck = Complex(-1.0 / k, 0.0) * poly_trace(N, m);
    c[static_cast<size_t>(m - k)] = ck;
    M = N;
    for (int i = 0; i < m; ++i) M[static_cast<size_t>(i) * m + i] += ck;
  }
  // For skew-symmetric X(z) the polynomial is even in w (m even): the odd
  // w-codegree coefficients cancel identically, so zero the float residue.
  double skew_violation = 0.0;
  for (int d = x.lo(); d <= x.hi(); ++d) {
    const CMatrix& cf = x.coeff_ref(d);
    skew_violation = std::max(skew_violation, (cf + cf.transpose()).cwiseAbs().maxCoeff());
  }
  if (skew_violation <= 1e-12) {
    const double scale = std::max(1.0, std::pow(std::max(1.0, x.max_abs()), m));
    for (int k = 0; k <= m; ++k) {
      if ((m - k) % 2 == 1) {
        if (c[static_cast<size_t>(k)].max_abs() <= 1e-9 * scale) {
          c[static_cast<size_t>(k)] = LaurentPoly();
        }
      }
    }
  }
  for (auto& p : c) p = p.trimmed(kTrimTol);
  return c;
}

LaurentPoly pfaffian(const LoopElement& x) {
  const PolyMatrix a = from_element(x);
  const int m = x.size();
  std::vector<int> all(static_cast<size_t>(m));
  for (int i = 0; i < m; ++i) all[static_cast<size_t>(i)] = i;
  // Expansion along the first remaining row:
  // Pf(A) = sum_j (-1)^j a_{1j} Pf(A with rows/cols 1, j removed).
  std::function<LaurentPoly(const std::vector<int>&)> pf =
      [&](const std::vector<int>& idx) -> LaurentPoly {
    if (idx.empty()) return LaurentPoly(1.0);
    LaurentPoly acc;
    const int i0 = idx[0];
    for (size_t j = 1; j < idx.size(); ++j) {
      std::vector<int> rest;
      rest.reserve(idx.size() - 2);
      for (size_t k = 1; k < idx.size(); ++k) {
        if (k != j) rest.push_back(idx[k]);
      }
      const LaurentPoly term =
          a[static_cast<size_t>(i0) * m + idx[j]] * pf(rest);
      acc = (j % 2 == 1) ? acc + term : acc - term;
    }
    return acc.trimmed();
  };
  return pf(all);
}

double charpoly_distance(const std::vector<LaurentPoly>& a,
                         const std::vector<LaurentPoly>& b) {
  double m = 0.0;
  const size_t n = std::max(a.size(), b.size());
  for (size_t k = 0; k < n; ++k) {
    const LaurentPoly& pa = k < a.size() ? a[k] : LaurentPoly();
    const LaurentPoly& pb = k < b.size() ? b[k] : LaurentPoly();
    m = std::max(m, laurent_distance(pa, pb));
  }
  return m;
}

double trace_power_drift(const LoopElement& x_t, const LoopElement& x_0) {
  const auto zs = complex_sample_z();
  double worst = 0.0;
  for (const Complex& z : zs) {
    CMatrix a = x_t.evaluate(z);
    CMatrix b = x_0.evaluate(z);
    CMatrix pa = CMatrix::Identity(a.rows(), a.cols());
    CMatrix pb = pa;
    for (int k = 1; k <= x_t.size(); ++k) {
      pa = pa * a;
      pb = pb * b;
      if (k % 2 == 0) worst = std::max(worst, std::abs(pa.trace() - pb.trace()));
    }
  }
  return worst;
}

std::vector<double> isospectral_drift(const FlowResult& flow) {
  std::vector<double> out(flow.samples.size());
  for (size_t s = 0; s < flow.samples.size(); ++s) {
    out[s] = trace_power_drift(flow.samples[s], flow.x0);
  }
  return out;
}

std::vector<DriftRow> isospectral_drift_table(const FlowResult& flow) {
  const auto zs = complex_sample_z();
  std::vector<DriftRow> rows;
  for (size_t s = 0; s < flow.samples.size(); ++s) {
    const auto idx = flow.grid.unlinear(static_cast<long>(s));
    const auto t = flow.grid.point(idx);
    for (const Complex& z : zs) {
      CMatrix a = flow.samples[s].evaluate(z);
      CMatrix b = flow.x0.evaluate(z);
      CMatrix pa = CMatrix::Identity(a.rows(), a.cols());
      CMatrix pb = pa;
      for (int k = 1; k <= flow.x0.size(); ++k) {
        pa = pa * a;
        pb = pb * b;
        if (k % 2 == 0) {
          rows.push_back({t, k, z, std::abs(pa.trace() - pb.trace())});
        }
      }
    }
  }
  return rows;
}

const char* regularity_name(Regularity r) {
  switch (r) {
    case Regularity::Yes: return "yes (sampled)";
    case Regularity::No: return "no";
    case Regularity::Undetermined: return "undetermined";
  }
  return "?";
}

std::string RegularityReport::summary() const {
  std::ostringstream os;
  os << "regular: " << regularity_name(verdict);
  if (!reason.empty()) os << " [" << reason << "]";
  if (branch_points >= 0) {
    os << "; branch points " << branch_points << "; nodes " << nodes
       << "; genus estimate " << genus_estimate;
  }
  return os.str();
}

Complex discriminant_at(const LoopElement& x, Complex z) {
  Eigen::ComplexEigenSolver<CMatrix> es(x.evaluate(z), false);
  const auto& w = es.eigenvalues();
  Complex d = 1.0;
  for (int i = 0; i < w.size(); ++i) {
    for (int j = i + 1; j < w.size(); ++j) {
      const Complex diff = w(i) - w(j);
      d *= diff * diff;
    }
  }
  return d;
}

namespace {

double min_eigenvalue_gap(const CMatrix& m) {
  Eigen::ComplexEigenSolver<CMatrix> es(m, false);
  const auto& w = es.eigenvalues();
  double gap = std::numeric_limits<double>::infinity();
  for (int i = 0; i < w.size(); ++i) {
    for (int j = i + 1; j < w.size(); ++j) gap = std::min(gap, std::abs(w(i) - w(j)));
  }
  return gap;
}

// Roots of a dense complex polynomial (ascending coefficients) via the
// companion matrix.
std::vector<Complex> poly_roots(std::vector<Complex> coeffs) {
  while (coeffs.size() > 1 && std::abs(coeffs.back()) == 0.0) coeffs.pop_back();
  if (coeffs.size() <= 1) return {};
  const int deg = static_cast<int>(coeffs.size()) - 1;
  CMatrix companion = CMatrix::Zero(deg, deg);
  for (int i = 1; i < deg; ++i) companion(i, i - 1) = 1.0;
  for (int i = 0; i < deg; ++i) companion(i, deg - 1) = -coeffs[static_cast<size_t>(i)] / coeffs.back();
  Eigen::ComplexEigenSolver<CMatrix> es(companion, false);
  std::vector<Complex> roots(static_cast<size_t>(deg));
  for (int i = 0; i < deg; ++i) roots[static_cast<size_t>(i)] = es.eigenvalues()(i);
  return roots;
}

}  // namespace

namespace {

// Roots of a trimmed Laurent polynomial away from z = 0.
std::vector<Complex> laurent_roots(const LaurentPoly& p) {
  const LaurentPoly t = p.trimmed(1e-12 * std::max(1.0, p.max_abs()));
  std::vector<Complex> coeffs;
  for (int d = t.lo(); d <= t.hi(); ++d) coeffs.push_back(t.coeff(d));
  return poly_roots(std::move(coeffs));
}

}  // namespace

RegularityReport regularity_check(const LoopElement& x, int z_samples) {
  RegularityReport report;
  if (!(x.lo() < 0)) {
    report.verdict = Regularity::Undetermined;
    report.reason = "no z^- coefficients";
    return report;
  }
  if (!(x.hi() > 0)) {
    report.verdict = Regularity::Undetermined;
    report.reason = "no z^+ coefficients";
    return report;
  }
  const int m = x.size();
  const int n = m / 2;
  const double scale = std::max(1.0, x.max_abs());
  if (min_eigenvalue_gap(x.coeff_ref(x.lo())) < 1e-8 * scale) {
    report.verdict = Regularity::No;
    report.reason = "repeated eigenvalue of the lowest coefficient (branch point over 0)";
    return report;
  }
  if (min_eigenvalue_gap(x.coeff_ref(x.hi())) < 1e-8 * scale) {
    report.verdict = Regularity::No;
    report.reason = "repeated eigenvalue of the highest coefficient (branch point over infinity)";
    return report;
  }

  // Skew symmetry makes det(wI - X) even in w and det X = Pf(X)^2, so the
  // curve carries the involution w -> -w: every w-collision comes in pairs
  // and the zeros of c_0 are structurally double (ordinary nodes on the
  // line w = 0).  The full w-discriminant therefore has no simple zeros at
  // all, and simplicity is read off the factored data for q(u) = p(sqrt(u)):
  // zeros of Pf(X(z)) (nodes) and zeros of disc_u(q) (pairs of branch
  // points at +-w), each of which must be simple, mutually disjoint and
  // away from z = 0.
  const auto cp = char_poly(x);
  for (int k = 0; k <= m; ++k) {
    if ((m - k) % 2 == 1 && !cp[static_cast<size_t>(k)].is_zero(1e-9 * scale)) {
      report.verdict = Regularity::Undetermined;
      report.reason = "characteristic polynomial is not even in w (input not skew?)";
      return report;
    }
  }
  const std::vector<Complex> node_roots = laurent_roots(pfaffian(x));

  // disc_u(q)(z) by circle interpolation from exact coefficient samples.
  const int dlo = 2 * n * (n - 1) * x.lo();
  const int dhi = 2 * n * (n - 1) * x.hi();
  const int span = dhi - dlo + 1;
  const int N = std::max(z_samples, 2 * span);
  std::vector<Complex> samples(static_cast<size_t>(N));
  for (int j = 0; j < N; ++j) {
    const double phi = 2.0 * std::numbers::pi * j / N;
    const Complex z(std::cos(phi), std::sin(phi));
    std::vector<Complex> q(static_cast<size_t>(n) + 1);
    for (int k = 0; k <= n; ++k) q[static_cast<size_t>(k)] = cp[static_cast<size_t>(2 * k)].eval(z);
    const auto u_roots = poly_roots(q);
    Complex disc = 1.0;
    for (size_t a = 0; a < u_roots.size(); ++a) {
      for (size_t b = a + 1; b < u_roots.size(); ++b) {
        const Complex diff = u_roots[a] - u_roots[b];
        disc *= diff * diff;
      }
    }
    samples[static_cast<size_t>(j)] = disc;
  }
  std::vector<Complex> coeffs(static_cast<size_t>(span));
  double dmax = 0.0;
  for (int d = dlo; d <= dhi; ++d) {
    Complex acc = 0.0;
    for (int j = 0; j < N; ++j) {
      const double phi = -2.0 * std::numbers::pi * j * d / N;
      acc += samples[static_cast<size_t>(j)] * Complex(std::cos(phi), std::sin(phi));
    }
    coeffs[static_cast<size_t>(d - dlo)] = acc / static_cast<double>(N);
    dmax = std::max(dmax, std::abs(coeffs[static_cast<size_t>(d - dlo)]));
  }
  if (dmax < 1e-12) {
    report.verdict = Regularity::No;
    report.reason = "u-discriminant vanishes identically on the sample circle";
    return report;
  }
  for (auto& c : coeffs) {
    if (std::abs(c) < 1e-10 * dmax) c = 0.0;
  }
  size_t lead = 0;
  while (lead + 1 < coeffs.size() && std::abs(coeffs[lead]) == 0.0) ++lead;
  const auto disc_roots = poly_roots(
      std::vector<Complex>(coeffs.begin() + static_cast<long>(lead), coeffs.end()));

  double min_gap = std::numeric_limits<double>::infinity();
  auto pair_gap = [&min_gap](const std::vector<Complex>& r) {
    for (size_t i = 0; i < r.size(); ++i) {
      for (size_t j = i + 1; j < r.size(); ++j) min_gap = std::min(min_gap, std::abs(r[i] - r[j]));
    }
  };
  pair_gap(node_roots);
  pair_gap(disc_roots);
  double cross_gap = std::numeric_limits<double>::infinity();
  for (const auto& a : node_roots) {
    for (const auto& b : disc_roots) cross_gap = std::min(cross_gap, std::abs(a - b));
  }
  report.min_root_gap = std::min(min_gap, cross_gap);
  // Each disc root is a +-w pair of simple branch points; Pfaffian zeros
  // are nodes of the plane curve, resolved by normalization.
  report.nodes = static_cast<int>(node_roots.size());
  report.branch_points = static_cast<int>(2 * disc_roots.size());
  report.genus_estimate = report.branch_points / 2.0 - m + 1;
  for (const auto& sets : {node_roots, disc_roots}) {
    for (const auto& r : sets) {
      if (std::abs(r) < 1e-8) {
        report.verdict = Regularity::No;
        report.reason = "branch point over z = 0";
        return report;
      }
    }
  }
  if (min_gap < 1e-6) {
    report.verdict = Regularity::No;
    report.reason = "branch-point collision on the sample set (multiplicity >= 2)";
    return report;
  }
  if (cross_gap < 1e-6) {
    report.verdict = Regularity::No;
    report.reason = "w = 0 node collides with a +-w branch pair";
    return report;
  }
  report.verdict = Regularity::Yes;
  report.reason = "sampled certificate";
  return report;
}

SpectralRecord spectral_record(const LoopElement& x, int z_samples) {
  SpectralRecord rec;
  rec.charpoly = char_poly(x);
  const auto zs = complex_sample_z();
  for (const Complex& z : zs) rec.disc_samples.emplace_back(z, discriminant_at(x, z));
  rec.regularity = regularity_check(x, z_samples);
  return rec;
}

MuSample mu_eigenvalues(const LoopElement& x0, int i, Complex z) {
  MuSample out;
  out.z = z;
  out.i = i;
  if (z == Complex(0.0, 0.0)) {
    out.reason = "z must be nonzero";
    return out;
  }
  const CMatrix m = x0.evaluate(z);
  Eigen::ComplexEigenSolver<CMatrix> es(m, true);
  if (es.info() != Eigen::Success) {
    out.reason = "eigendecomposition failed";
    return out;
  }
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  double gap = std::numeric_limits<double>::infinity();
  for (int a = 0; a < m.rows(); ++a) {
    for (int b = a + 1; b < m.rows(); ++b) {
      gap = std::min(gap, std::abs(es.eigenvalues()(a) - es.eigenvalues()(b)));
    }
  }
  if (gap < 1e-10 * scale) {
    out.reason = "X0(z) not safely diagonalizable at this sample (pick another z)";
    return out;
  }
  // V_i(X0)(z) = z^{2-2i} X0(z)^{2i-1} as a plain matrix.
  CMatrix v = CMatrix::Identity(m.rows(), m.cols());
  for (int k = 0; k < 2 * i - 1; ++k) v = v * m;
  v *= std::pow(z, 2 - 2 * i);
  for (int a = 0; a < m.rows(); ++a) {
    const Eigen::VectorXcd s = es.eigenvectors().col(a);
    const Complex mu = (s.adjoint() * (v * s))(0, 0) / (s.adjoint() * s)(0, 0);
    const double residual = (v * s - mu * s).norm();
    out.pairs.push_back({es.eigenvalues()(a), mu, residual});
  }
  std::sort(out.pairs.begin(), out.pairs.end(), [](const MuPair& a, const MuPair& b) {
    if (a.w.real() != b.w.real()) return a.w.real() < b.w.real();
    return a.w.imag() < b.w.imag();
  });
  out.ok = true;
  return out;
}

}  // namespace aks
