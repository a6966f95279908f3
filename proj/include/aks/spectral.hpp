#pragma once

#include "aks/laurent.hpp"
#include "aks/loop_element.hpp"

#include <string>
#include <vector>

namespace aks {

struct FlowResult;

// Coefficients of det(wI - X(z)) as Laurent polynomials in z; entry k
// multiplies w^k (k = 0..m, leading coefficient identically 1).  Exact
// polynomial arithmetic via Faddeev-LeVerrier; for skew-symmetric inputs
// the coefficients of odd w-codegree are zeroed after an internal
// magnitude check (they vanish identically).
std::vector<LaurentPoly> char_poly(const LoopElement& x);

// max over k and z-degrees of the coefficient difference.
double charpoly_distance(const std::vector<LaurentPoly>& a,
                         const std::vector<LaurentPoly>& b);

// Pfaffian of X(z) as a Laurent polynomial; det X(z) = Pf(X(z))^2.
LaurentPoly pfaffian(const LoopElement& x);

// max over k in {2,4,...,m} and the fixed complex z samples of
// |tr X_t(z)^k - tr X_0(z)^k|.
double trace_power_drift(const LoopElement& x_t, const LoopElement& x_0);

// Per-sample trace-power drift along a flow, versus the t = 0 sample.
std::vector<double> isospectral_drift(const FlowResult& flow);

struct DriftRow {
  std::vector<double> t;
  int k = 0;
  Complex z;
  double drift = 0.0;
};

// Full drift table (t, k, z-sample, drift) for CSV export.
std::vector<DriftRow> isospectral_drift_table(const FlowResult& flow);

enum class Regularity { Yes, No, Undetermined };
const char* regularity_name(Regularity r);

struct RegularityReport {
  Regularity verdict = Regularity::Undetermined;
  std::string reason;
  int branch_points = -1;      // simple branch points found on the sample set
  int nodes = -1;              // ordinary double points on w = 0 (Pfaffian zeros)
  double genus_estimate = -1;  // Riemann-Hurwitz count for the normalized curve
  double min_root_gap = -1;    // smallest distance between located roots
  std::string summary() const;
};

// Probabilistic regularity certificate for the spectral curve of X.
// Skew symmetry forces det X = Pf(X)^2 and the w -> -w involution, so the
// full w-discriminant has no simple zeros at all; simplicity is read off
// the factored data instead:
//   "no"  if the extreme coefficients have repeated eigenvalues (branch
//          point over z = 0 or infinity), or the zeros of Pf(X(z)) or of
//          the u = w^2 discriminant collide / coincide on the sample set
//          (collision threshold 1e-6), or any of them sits at z = 0;
//   "yes (sampled)" otherwise;
//   "undetermined" when X has no genuine z^- or z^+ part or the sampling
//          is inconclusive.
RegularityReport regularity_check(const LoopElement& x, int z_samples = 64);

struct SpectralRecord {
  std::vector<LaurentPoly> charpoly;
  std::vector<std::pair<Complex, Complex>> disc_samples;  // (z, disc)
  RegularityReport regularity;
};

SpectralRecord spectral_record(const LoopElement& x, int z_samples = 64);

// Discriminant of det(wI - X(z)) in w at a fixed z, from the numeric
// eigenvalues: prod_{i<j} (w_i - w_j)^2.
Complex discriminant_at(const LoopElement& x, Complex z);

struct MuPair {
  Complex w;        // eigenvalue of X0(z)
  Complex mu;       // eigenvalue of V_i(X0)(z) on the shared eigenvector
  double residual;  // ||V_i s - mu s||
};

struct MuSample {
  Complex z;
  int i = 1;
  bool ok = false;
  std::string reason;  // set when the sample is rejected
  std::vector<MuPair> pairs;  // sorted by w (real part, then imaginary)
};

// Eigenvalue functions mu_i of V_i(X0(z)) at a sample z, matched to the
// eigenvalues w of X0(z) by shared eigenvector.
MuSample mu_eigenvalues(const LoopElement& x0, int i, Complex z);

}  // namespace aks
