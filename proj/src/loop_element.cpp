#include "aks/loop_element.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <sstream>
#include <stdexcept>

namespace aks {

namespace {

void check_degree(int degree) {
  if (degree < -kMaxDegree || degree > kMaxDegree) {
    throw std::invalid_argument("loop element degree " + std::to_string(degree) +
                                " outside [-64, 64]");
  }
}

void check_size(int size) {
  if (size < 4 || size % 2 != 0) {
    throw std::invalid_argument("loop element size must be even and >= 4, got " +
                                std::to_string(size));
  }
}

// Largest |entry| in the blocks forbidden by the twist at this degree:
// even degrees live in V_0 (block-diagonal), odd in V_1 (off-diagonal).
double twist_violation(const CMatrix& m, int degree) {
  const int n = static_cast<int>(m.rows()) / 2;
  const bool even = ((degree % 2) + 2) % 2 == 0;
  double v = 0.0;
  if (even) {
    v = std::max(m.topRightCorner(n, n).cwiseAbs().maxCoeff(),
                 m.bottomLeftCorner(n, n).cwiseAbs().maxCoeff());
  } else {
    v = std::max(m.topLeftCorner(n, n).cwiseAbs().maxCoeff(),
                 m.bottomRightCorner(n, n).cwiseAbs().maxCoeff());
  }
  return v;
}

CMatrix zero_twist_forbidden(const CMatrix& m, int degree) {
  const int n = static_cast<int>(m.rows()) / 2;
  CMatrix out = CMatrix::Zero(m.rows(), m.cols());
  const bool even = ((degree % 2) + 2) % 2 == 0;
  if (even) {
    out.topLeftCorner(n, n) = m.topLeftCorner(n, n);
    out.bottomRightCorner(n, n) = m.bottomRightCorner(n, n);
  } else {
    out.topRightCorner(n, n) = m.topRightCorner(n, n);
    out.bottomLeftCorner(n, n) = m.bottomLeftCorner(n, n);
  }
  return out;
}

}  // namespace

const char* rule_name(Rule rule) {
  switch (rule) {
    case Rule::Admissible: return "admissible";
    case Rule::Simple: return "simple";
    case Rule::CurvedFlat: return "curved_flat";
  }
  return "?";
}

Rule rule_from_name(std::string_view name) {
  if (name == "admissible") return Rule::Admissible;
  if (name == "simple") return Rule::Simple;
  if (name == "curved_flat" || name == "curvedflat") return Rule::CurvedFlat;
  throw std::invalid_argument("unknown decomposition rule: " + std::string(name));
}

LoopElement::LoopElement(int size, int lo, int hi, bool real_flag)
    : size_(size), lo_(lo), hi_(hi), real_flag_(real_flag) {
  check_size(size);
  check_degree(lo);
  check_degree(hi);
  if (lo > hi) throw std::invalid_argument("loop element degree range empty (lo > hi)");
  coeffs_.assign(static_cast<size_t>(hi - lo + 1), CMatrix::Zero(size, size));
}

LoopElement LoopElement::zero(int size, bool real_flag) {
  return LoopElement(size, 0, 0, real_flag);
}

CMatrix LoopElement::coeff(int degree) const {
  if (!has_degree(degree)) return CMatrix::Zero(size_, size_);
  return coeffs_[static_cast<size_t>(degree - lo_)];
}

const CMatrix& LoopElement::coeff_ref(int degree) const {
  if (!has_degree(degree)) throw std::out_of_range("coefficient degree out of range");
  return coeffs_[static_cast<size_t>(degree - lo_)];
}

void LoopElement::set_coeff(int degree, const CMatrix& value) {
  if (!has_degree(degree)) throw std::out_of_range("coefficient degree out of range");
  if (value.rows() != size_ || value.cols() != size_) {
    throw std::invalid_argument("coefficient size mismatch");
  }
  coeffs_[static_cast<size_t>(degree - lo_)] = value;
}

void LoopElement::set_coeff_real(int degree, const RMatrix& value) {
  set_coeff(degree, value.cast<Complex>());
}

double LoopElement::max_abs() const {
  double m = 0.0;
  for (const auto& c : coeffs_) m = std::max(m, c.cwiseAbs().maxCoeff());
  return m;
}

double LoopElement::max_abs_imag() const {
  double m = 0.0;
  for (const auto& c : coeffs_) m = std::max(m, c.imag().cwiseAbs().maxCoeff());
  return m;
}

CMatrix LoopElement::evaluate(Complex z) const {
  CMatrix out = CMatrix::Zero(size_, size_);
  Complex zi = std::pow(z, lo_);
  for (int d = lo_; d <= hi_; ++d) {
    out += coeffs_[static_cast<size_t>(d - lo_)] * zi;
    zi *= z;
  }
  return out;
}

RMatrix LoopElement::evaluate_real(double z) const {
  if (!real_flag_) throw std::logic_error("evaluate_real requires a real-flagged element");
  return evaluate(Complex(z, 0.0)).real();
}

LoopElement LoopElement::with_real_flag(bool flag) const {
  LoopElement out = *this;
  out.real_flag_ = flag;
  return out;
}

LoopElement add(const LoopElement& x, const LoopElement& y) {
  if (x.size() != y.size()) throw std::invalid_argument("size mismatch in add");
  LoopElement out(x.size(), std::min(x.lo(), y.lo()), std::max(x.hi(), y.hi()),
                  x.real_flag() && y.real_flag());
  for (int d = out.lo(); d <= out.hi(); ++d) out.set_coeff(d, x.coeff(d) + y.coeff(d));
  return out;
}

LoopElement sub(const LoopElement& x, const LoopElement& y) {
  if (x.size() != y.size()) throw std::invalid_argument("size mismatch in sub");
  LoopElement out(x.size(), std::min(x.lo(), y.lo()), std::max(x.hi(), y.hi()),
                  x.real_flag() && y.real_flag());
  for (int d = out.lo(); d <= out.hi(); ++d) out.set_coeff(d, x.coeff(d) - y.coeff(d));
  return out;
}

LoopElement scaled(const LoopElement& x, double s) {
  LoopElement out = x;
  for (int d = x.lo(); d <= x.hi(); ++d) out.set_coeff(d, x.coeff_ref(d) * s);
  return out;
}

LoopElement scaled(const LoopElement& x, Complex s) {
  LoopElement out = x.with_real_flag(x.real_flag() && s.imag() == 0.0);
  for (int d = x.lo(); d <= x.hi(); ++d) out.set_coeff(d, x.coeff_ref(d) * s);
  return out;
}

LoopElement shifted(const LoopElement& x, int k) {
  LoopElement out(x.size(), x.lo() + k, x.hi() + k, x.real_flag());
  for (int d = x.lo(); d <= x.hi(); ++d) out.set_coeff(d + k, x.coeff_ref(d));
  return out;
}

LoopElement multiply(const LoopElement& x, const LoopElement& y) {
  if (x.size() != y.size()) throw std::invalid_argument("size mismatch in multiply");
  LoopElement out(x.size(), x.lo() + y.lo(), x.hi() + y.hi(), x.real_flag() && y.real_flag());
  for (int i = x.lo(); i <= x.hi(); ++i) {
    for (int j = y.lo(); j <= y.hi(); ++j) {
      out.set_coeff(i + j, out.coeff_ref(i + j) + x.coeff_ref(i) * y.coeff_ref(j));
    }
  }
  return out;
}

LoopElement power(const LoopElement& x, int p) {
  if (p < 1) throw std::invalid_argument("power expects p >= 1");
  LoopElement out = x;
  for (int k = 1; k < p; ++k) out = multiply(out, x);
  return out;
}

LoopElement bracket(const LoopElement& x, const LoopElement& y) {
  if (x.size() != y.size()) throw std::invalid_argument("size mismatch in bracket");
  LoopElement out(x.size(), x.lo() + y.lo(), x.hi() + y.hi(), x.real_flag() && y.real_flag());
  for (int i = x.lo(); i <= x.hi(); ++i) {
    for (int j = y.lo(); j <= y.hi(); ++j) {
      const CMatrix& a = x.coeff_ref(i);
      const CMatrix& b = y.coeff_ref(j);
      out.set_coeff(i + j, out.coeff_ref(i + j) + (a * b - b * a));
    }
  }
  return trimmed(out);
}

LoopElement project(const LoopElement& x, Rule rule) {
  const int keep_from = (rule == Rule::Simple) ? 1 : (rule == Rule::CurvedFlat ? 0 : 1);
  int lo = std::max(x.lo(), (rule == Rule::Admissible) ? 0 : keep_from);
  lo = std::min(lo, x.hi());
  LoopElement out(x.size(), lo, std::max(x.hi(), lo), x.real_flag());
  for (int d = std::max(x.lo(), keep_from); d <= x.hi(); ++d) out.set_coeff(d, x.coeff_ref(d));
  if (rule == Rule::Admissible && x.has_degree(0) && out.has_degree(0)) {
    const int n = x.block_size();
    out.set_coeff(0, embed_upper_left(x.coeff_ref(0).topLeftCorner(n, n), x.size()));
  }
  // Trim exact zeros only, so project + complement reproduces x exactly.
  return trimmed(out, 0.0);
}

LoopElement complement(const LoopElement& x, Rule rule) {
  return trimmed(sub(x, project(x, rule)), 0.0);
}

bool in_subalgebra_p(const LoopElement& x, Rule rule, double tol) {
  return distance(x, project(x, rule)) <= tol;
}

bool in_subalgebra_n(const LoopElement& x, Rule rule, double tol) {
  return distance(x, complement(x, rule)) <= tol;
}

double inner_product(const LoopElement& x, const LoopElement& y) {
  if (x.size() != y.size()) throw std::invalid_argument("size mismatch in inner_product");
  if (!x.real_flag() || !y.real_flag()) {
    throw std::invalid_argument("inner_product requires real-flagged elements");
  }
  double s = 0.0;
  for (int d = std::max(x.lo(), y.lo()); d <= std::min(x.hi(), y.hi()); ++d) {
    s += (x.coeff_ref(d).real().cwiseProduct(y.coeff_ref(d).real())).sum();
  }
  return s;
}

LoopElement trimmed(const LoopElement& x, double tol, double* max_dropped) {
  auto mag = [&](int d) { return x.coeff_ref(d).cwiseAbs().maxCoeff(); };
  int lo = x.lo(), hi = x.hi();
  double dropped = 0.0;
  while (lo < hi && mag(lo) <= tol) dropped = std::max(dropped, mag(lo)), ++lo;
  while (hi > lo && mag(hi) <= tol) dropped = std::max(dropped, mag(hi)), --hi;
  if (max_dropped) *max_dropped = std::max(*max_dropped, dropped);
  if (lo == x.lo() && hi == x.hi()) return x;
  LoopElement out(x.size(), lo, hi, x.real_flag());
  for (int d = lo; d <= hi; ++d) out.set_coeff(d, x.coeff_ref(d));
  return out;
}

LoopElement clipped(const LoopElement& x, int lo, int hi, double* max_dropped) {
  double dropped = 0.0;
  for (int d = x.lo(); d <= x.hi(); ++d) {
    if (d < lo || d > hi) dropped = std::max(dropped, x.coeff_ref(d).cwiseAbs().maxCoeff());
  }
  if (max_dropped) *max_dropped = std::max(*max_dropped, dropped);
  LoopElement out(x.size(), lo, hi, x.real_flag());
  for (int d = std::max(lo, x.lo()); d <= std::min(hi, x.hi()); ++d) out.set_coeff(d, x.coeff_ref(d));
  return out;
}

LoopElement renormalized(const LoopElement& x, double* correction) {
  LoopElement out = x;
  double corr = 0.0;
  for (int d = x.lo(); d <= x.hi(); ++d) {
    CMatrix c = x.coeff_ref(d);
    CMatrix skew = 0.5 * (c - c.transpose());
    CMatrix fixed = zero_twist_forbidden(skew, d);
    if (x.real_flag()) fixed = fixed.real().cast<Complex>();
    corr = std::max(corr, (fixed - c).cwiseAbs().maxCoeff());
    out.set_coeff(d, fixed);
  }
  if (correction) *correction = std::max(*correction, corr);
  return out;
}

double distance(const LoopElement& x, const LoopElement& y) {
  if (x.size() != y.size()) throw std::invalid_argument("size mismatch in distance");
  double m = 0.0;
  for (int d = std::min(x.lo(), y.lo()); d <= std::max(x.hi(), y.hi()); ++d) {
    m = std::max(m, (x.coeff(d) - y.coeff(d)).cwiseAbs().maxCoeff());
  }
  return m;
}

std::string ValidationReport::summary() const {
  std::ostringstream os;
  for (const auto& c : checks) {
    os << c.name << ": " << (c.pass ? "pass" : "FAIL") << " (max " << fmt_g17(c.magnitude)
       << ")\n";
  }
  return os.str();
}

ValidationReport validate(const LoopElement& x, double tol) {
  ValidationReport report;
  InvariantCheck skew{"skew_symmetry"};
  InvariantCheck twist{"twist"};
  InvariantCheck reality{"reality"};
  for (int d = x.lo(); d <= x.hi(); ++d) {
    const CMatrix& c = x.coeff_ref(d);
    skew.magnitude = std::max(skew.magnitude, (c + c.transpose()).cwiseAbs().maxCoeff());
    twist.magnitude = std::max(twist.magnitude, twist_violation(c, d));
    if (x.real_flag()) {
      reality.magnitude = std::max(reality.magnitude, c.imag().cwiseAbs().maxCoeff());
    }
  }
  skew.pass = skew.magnitude <= tol;
  twist.pass = twist.magnitude <= tol;
  reality.pass = reality.magnitude <= tol;
  report.checks = {skew, twist, reality};
  for (const auto& c : report.checks) {
    report.all_pass = report.all_pass && c.pass;
    report.max_violation = std::max(report.max_violation, c.magnitude);
  }
  return report;
}

CMatrix upper_left_block(const CMatrix& m) {
  const int n = static_cast<int>(m.rows()) / 2;
  return m.topLeftCorner(n, n);
}

CMatrix lower_right_block(const CMatrix& m) {
  const int n = static_cast<int>(m.rows()) / 2;
  return m.bottomRightCorner(n, n);
}

CMatrix embed_upper_left(const CMatrix& block, int size) {
  CMatrix out = CMatrix::Zero(size, size);
  out.topLeftCorner(block.rows(), block.cols()) = block;
  return out;
}

CMatrix embed_lower_right(const CMatrix& block, int size) {
  CMatrix out = CMatrix::Zero(size, size);
  out.bottomRightCorner(block.rows(), block.cols()) = block;
  return out;
}

std::string fmt_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string serialize(const LoopElement& x) {
  std::ostringstream os;
  os << "loopelement v1\n";
  os << "m " << x.size() << "\n";
  os << "lo " << x.lo() << "\n";
  os << "hi " << x.hi() << "\n";
  os << "real " << (x.real_flag() ? 1 : 0) << "\n";
  for (int d = x.lo(); d <= x.hi(); ++d) {
    os << "degree " << d << "\n";
    const CMatrix& c = x.coeff_ref(d);
    for (int r = 0; r < x.size(); ++r) {
      for (int col = 0; col < x.size(); ++col) {
        if (col) os << " ";
        os << fmt_g17(c(r, col).real()) << "," << fmt_g17(c(r, col).imag());
      }
      os << "\n";
    }
  }
  os << "end\n";
  return os.str();
}

LoopElement parse_loop_element(std::istream& in) {
  auto fail = [](const std::string& why) -> LoopElement {
    throw std::runtime_error("loop element parse error: " + why);
  };
  std::string tag, version;
  in >> tag >> version;
  if (tag != "loopelement" || version != "v1") return fail("bad header");
  int m = 0, lo = 0, hi = 0, real = 1;
  std::string key;
  in >> key >> m;
  if (key != "m") return fail("expected m");
  in >> key >> lo;
  if (key != "lo") return fail("expected lo");
  in >> key >> hi;
  if (key != "hi") return fail("expected hi");
  in >> key >> real;
  if (key != "real") return fail("expected real");
  LoopElement out(m, lo, hi, real != 0);
  for (int d = lo; d <= hi; ++d) {
    int deg = 0;
    in >> key >> deg;
    if (key != "degree" || deg != d) return fail("expected degree " + std::to_string(d));
    CMatrix c(m, m);
    for (int r = 0; r < m; ++r) {
      for (int col = 0; col < m; ++col) {
        std::string entry;
        in >> entry;
        auto comma = entry.find(',');
        if (comma == std::string::npos) return fail("bad entry " + entry);
        c(r, col) = Complex(std::stod(entry.substr(0, comma)), std::stod(entry.substr(comma + 1)));
      }
    }
    out.set_coeff(d, c);
  }
  in >> key;
  if (key != "end") return fail("missing end");
  return out;
}

LoopElement parse_loop_element(const std::string& text) {
  std::istringstream is(text);
  return parse_loop_element(is);
}

}  // namespace aks
