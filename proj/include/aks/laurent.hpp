#pragma once

#include <complex>
#include <cstdlib>
#include <stdexcept>
#include <vector>

namespace aks {

// Scalar Laurent polynomial sum_{d=lo..hi} c_d z^d with complex
// coefficients; the value ring for characteristic-polynomial work.
class LaurentPoly {
 public:
  LaurentPoly() : lo_(0), c_(1, 0.0) {}
  explicit LaurentPoly(std::complex<double> constant) : lo_(0), c_(1, constant) {}
  LaurentPoly(int lo, std::vector<std::complex<double>> coeffs)
      : lo_(lo), c_(std::move(coeffs)) {
    if (c_.empty()) { c_.assign(1, 0.0); lo_ = 0; }
  }

  static LaurentPoly monomial(std::complex<double> c, int degree) {
    return LaurentPoly(degree, {c});
  }

  int lo() const { return lo_; }
  int hi() const { return lo_ + static_cast<int>(c_.size()) - 1; }

  std::complex<double> coeff(int degree) const {
    if (degree < lo() || degree > hi()) return 0.0;
    return c_[static_cast<size_t>(degree - lo_)];
  }

  bool is_zero(double tol = 0.0) const {
    for (const auto& v : c_) {
      if (std::abs(v) > tol) return false;
    }
    return true;
  }

  double max_abs() const {
    double m = 0.0;
    for (const auto& v : c_) m = std::max(m, std::abs(v));
    return m;
  }

  std::complex<double> eval(std::complex<double> z) const {
    // Horner on the polynomial part, then the z^lo factor.
    std::complex<double> acc = 0.0;
    for (size_t k = c_.size(); k-- > 0;) acc = acc * z + c_[k];
    return acc * std::pow(z, lo_);
  }

  LaurentPoly trimmed(double tol = 0.0) const {
    int a = lo(), b = hi();
    while (a < b && std::abs(coeff(a)) <= tol) ++a;
    while (b > a && std::abs(coeff(b)) <= tol) --b;
    std::vector<std::complex<double>> out;
    out.reserve(static_cast<size_t>(b - a + 1));
    for (int d = a; d <= b; ++d) out.push_back(coeff(d));
    if (out.size() == 1 && std::abs(out[0]) <= tol) return LaurentPoly();
    return LaurentPoly(a, std::move(out));
  }

  friend LaurentPoly operator+(const LaurentPoly& x, const LaurentPoly& y) {
    const int a = std::min(x.lo(), y.lo());
    const int b = std::max(x.hi(), y.hi());
    std::vector<std::complex<double>> c(static_cast<size_t>(b - a + 1));
    for (int d = a; d <= b; ++d) c[static_cast<size_t>(d - a)] = x.coeff(d) + y.coeff(d);
    return LaurentPoly(a, std::move(c));
  }

  friend LaurentPoly operator-(const LaurentPoly& x, const LaurentPoly& y) {
    const int a = std::min(x.lo(), y.lo());
    const int b = std::max(x.hi(), y.hi());
    std::vector<std::complex<double>> c(static_cast<size_t>(b - a + 1));
    for (int d = a; d <= b; ++d) c[static_cast<size_t>(d - a)] = x.coeff(d) - y.coeff(d);
    return LaurentPoly(a, std::move(c));
  }

  friend LaurentPoly operator*(const LaurentPoly& x, const LaurentPoly& y) {
    std::vector<std::complex<double>> c(x.c_.size() + y.c_.size() - 1, 0.0);
    for (size_t i = 0; i < x.c_.size(); ++i) {
      for (size_t j = 0; j < y.c_.size(); ++j) c[i + j] += x.c_[i] * y.c_[j];
    }
    return LaurentPoly(x.lo_ + y.lo_, std::move(c));
  }

  friend LaurentPoly operator*(std::complex<double> s, const LaurentPoly& x) {
    std::vector<std::complex<double>> c = x.c_;
    for (auto& v : c) v *= s;
    return LaurentPoly(x.lo_, std::move(c));
  }

  LaurentPoly& operator+=(const LaurentPoly& y) { return *this = *this + y; }
  LaurentPoly& operator-=(const LaurentPoly& y) { return *this = *this - y; }

 private:
  int lo_;
  std::vector<std::complex<double>> c_;
};

// max over degrees of |x_d - y_d|.
inline double laurent_distance(const LaurentPoly& x, const LaurentPoly& y) {
  double m = 0.0;
  for (int d = std::min(x.lo(), y.lo()); d <= std::max(x.hi(), y.hi()); ++d) {
    m = std::max(m, std::abs(x.coeff(d) - y.coeff(d)));
  }
  return m;
}

}  // namespace aks
