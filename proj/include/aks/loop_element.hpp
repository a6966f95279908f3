#pragma once

#include <Eigen/Dense>

#include <complex>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace aks {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using RMatrix = Eigen::MatrixXd;

// Degrees outside this window are rejected at construction; guards against
// runaway polynomial arithmetic.
inline constexpr int kMaxDegree = 64;

// Coefficients at or below this magnitude are dropped when normalizing
// degree ranges.
inline constexpr double kTrimTol = 1e-14;

// Subalgebra splitting G = P (+) N used by the projection pi_P:
//   Admissible: P = { X | X_i = 0 for i < 0, X_0 upper-left block only }
//   Simple:     P = { X | X_i = 0 for i < 1 }
//   CurvedFlat: P = { X | X_i = 0 for i < 0 }
enum class Rule { Admissible, Simple, CurvedFlat };

const char* rule_name(Rule rule);
Rule rule_from_name(std::string_view name);

// A matrix-valued Laurent polynomial X(z) = sum_{i=lo..hi} X_i z^i with
// X_i in so(2n,C) and the order-2 twist X_i in V_{i mod 2}, where V_0 is
// the block-diagonal and V_1 the block-off-diagonal eigenspace of Ad(Q),
// Q = diag(I, -I).  Values are immutable once built; all operations below
// are pure and return fresh elements.
class LoopElement {
 public:
  // Zero element with the given degree span.
  LoopElement(int size, int lo, int hi, bool real_flag = true);

  // Zero 4x4 element; the smallest valid size, for containers.
  LoopElement() : LoopElement(4, 0, 0, true) {}

  static LoopElement zero(int size, bool real_flag = true);

  int size() const { return size_; }
  int block_size() const { return size_ / 2; }
  int lo() const { return lo_; }
  int hi() const { return hi_; }
  bool real_flag() const { return real_flag_; }

  bool has_degree(int degree) const { return degree >= lo_ && degree <= hi_; }
  // Coefficient matrix; zero outside [lo, hi].
  CMatrix coeff(int degree) const;
  const CMatrix& coeff_ref(int degree) const;  // degree must be in range
  void set_coeff(int degree, const CMatrix& value);
  void set_coeff_real(int degree, const RMatrix& value);

  // Largest |entry| over all coefficients.
  double max_abs() const;
  double max_abs_imag() const;

  // X(z) as a plain matrix.
  CMatrix evaluate(Complex z) const;
  // Real part of X(z) at real z; requires the real flag.
  RMatrix evaluate_real(double z) const;

  LoopElement with_real_flag(bool flag) const;

 private:
  int size_;
  int lo_;
  int hi_;
  bool real_flag_;
  std::vector<CMatrix> coeffs_;  // index d - lo_
};

// Arithmetic.
LoopElement add(const LoopElement& x, const LoopElement& y);
LoopElement sub(const LoopElement& x, const LoopElement& y);
LoopElement scaled(const LoopElement& x, double s);
LoopElement scaled(const LoopElement& x, Complex s);
// Multiply by z^k.
LoopElement shifted(const LoopElement& x, int k);
// Laurent matrix product (not a Lie-algebra element in general).
LoopElement multiply(const LoopElement& x, const LoopElement& y);
LoopElement power(const LoopElement& x, int p);

inline LoopElement operator+(const LoopElement& x, const LoopElement& y) { return add(x, y); }
inline LoopElement operator-(const LoopElement& x, const LoopElement& y) { return sub(x, y); }
inline LoopElement operator*(double s, const LoopElement& x) { return scaled(x, s); }

// [X, Y](z) = sum_{i,j} [X_i, Y_j] z^{i+j}, zero coefficients dropped.
LoopElement bracket(const LoopElement& x, const LoopElement& y);

// pi_P / pi_N for the given rule.  project + complement == identity, and
// project is idempotent.
LoopElement project(const LoopElement& x, Rule rule);
LoopElement complement(const LoopElement& x, Rule rule);

// Membership predicates for the two factors (within tol).
bool in_subalgebra_p(const LoopElement& x, Rule rule, double tol = 1e-12);
bool in_subalgebra_n(const LoopElement& x, Rule rule, double tol = 1e-12);

// <X,Y> = sum_i trace(X_i Y_i^T).  Requires real-flagged inputs of equal
// size.  Positive definite; ad-invariant on degree-matched triples.
double inner_product(const LoopElement& x, const LoopElement& y);

// Drop near-zero leading/trailing coefficients.  max_dropped, when given,
// receives the largest magnitude removed.
LoopElement trimmed(const LoopElement& x, double tol = kTrimTol,
                    double* max_dropped = nullptr);

// Restrict the degree span to [lo, hi], recording the largest coefficient
// magnitude clipped away.
LoopElement clipped(const LoopElement& x, int lo, int hi, double* max_dropped = nullptr);

// Force skew-symmetry, the twist block pattern, and (for real-flagged
// elements) vanishing imaginary parts.  correction, when given, receives
// the largest entry changed.
LoopElement renormalized(const LoopElement& x, double* correction = nullptr);

// max over degrees of the entrywise max-norm of X_i - Y_i.
double distance(const LoopElement& x, const LoopElement& y);

struct InvariantCheck {
  std::string name;
  bool pass = true;
  double magnitude = 0.0;  // largest violation observed
};

struct ValidationReport {
  std::vector<InvariantCheck> checks;
  bool all_pass = true;
  double max_violation = 0.0;
  std::string summary() const;
};

// Diagnostic check of skew-symmetry, the twist pattern and (if flagged)
// reality.  Never throws.
ValidationReport validate(const LoopElement& x, double tol = 1e-12);

// Block helpers for the V_0 = V_0^U (+) V_0^L splitting.
CMatrix upper_left_block(const CMatrix& m);
CMatrix lower_right_block(const CMatrix& m);
CMatrix embed_upper_left(const CMatrix& block, int size);
CMatrix embed_lower_right(const CMatrix& block, int size);

// Textual serialization: header (m, lo, hi, real) followed by one record
// per degree with row-major "re,im" entries.  Round-trips bit-exactly.
std::string serialize(const LoopElement& x);
LoopElement parse_loop_element(std::istream& in);
LoopElement parse_loop_element(const std::string& text);

// %.17g formatting used by every exporter (bit-exact round trip).
std::string fmt_g17(double v);

}  // namespace aks
