#pragma once

#include "aks/loop_element.hpp"

#include <array>
#include <optional>
#include <span>
#include <vector>

namespace aks {

// Fixed z-sample sets used by the flow diagnostics: trace-power /
// characteristic-polynomial drift is monitored on the complex ring,
// norm conservation on the real axis (where X(z) stays in so(2n,R) and
// the Frobenius norm is an exact invariant of the Lax flow).
std::array<Complex, 8> complex_sample_z();
std::array<double, 4> real_sample_z();

// V_i(X) = z^{2-2i} X^{2i-1}, i = 1..n (1-based).
LoopElement v_field(const LoopElement& x, int i);

// Connection component A_i = pi_P V_i(X) for the given rule.
LoopElement connection_component(const LoopElement& x, Rule rule, int i);

// Right-hand side of dX = [X, sum_i pi_P V_i(X) dt_i]: component i is
// [X, pi_P V_i(X)], clipped to the degree span of X (finite type).  The
// largest clipped magnitude is accumulated into *trim when given.
std::vector<LoopElement> lax_rhs(const LoopElement& x, Rule rule, double* trim = nullptr);

struct PathSegment {
  int direction = 1;   // 1-based time direction
  double length = 0.0; // signed arc length
};

// Rectangular sample grid in R^n.
struct GridSpec {
  std::vector<double> origin;
  std::vector<double> spacing;
  std::vector<int> counts;

  int dims() const { return static_cast<int>(counts.size()); }
  long total() const;
  std::vector<double> point(const std::vector<int>& idx) const;
  long linear(const std::vector<int>& idx) const;
  std::vector<int> unlinear(long k) const;
  // Grid index of t (within tol of a node); nullopt if off-grid.
  std::optional<std::vector<int>> index_of(const std::vector<double>& t,
                                           double tol = 1e-9) const;
};

struct FlowConfig {
  Rule rule = Rule::Simple;
  double h = 1e-3;
  std::vector<PathSegment> path;  // used by integrate_path
  GridSpec grid;                  // used by integrate_flow
  bool record_residuals = true;
};

struct StepStats {
  double max_trim = 0.0;     // largest coefficient clipped by finite-type trimming
  double max_renorm = 0.0;   // largest post-step skew/twist/reality correction
  long steps = 0;
};

struct FlowResult {
  Rule rule = Rule::Simple;
  double h = 1e-3;
  GridSpec grid;
  LoopElement x0;
  std::vector<LoopElement> samples;     // linear grid order
  std::vector<double> norm_drift;       // per sample, vs t = 0
  std::vector<double> charpoly_drift;   // per sample, vs t = 0
  StepStats stats;

  const LoopElement& at(const std::vector<int>& idx) const;
  const LoopElement& at_time(const std::vector<double>& t) const;
};

// One classical 4th-order step of size h along the given direction,
// followed by skew/twist/reality renormalization.
LoopElement rk4_step(const LoopElement& x, Rule rule, int direction, double h,
                     StepStats* stats = nullptr);

// Integrate along an explicit path, one direction at a time.  Each segment
// is split into uniform steps of size <= h that land exactly on the segment
// end.
LoopElement integrate_path(const LoopElement& x0, Rule rule,
                           std::span<const PathSegment> path, double h,
                           StepStats* stats = nullptr);

// Fill the grid: rows along direction 1 first, then the remaining
// directions within rows.  Residuals record, per sample, the max drift of
// ||X(z)||_F^2 over the real z samples and the max coefficient drift of
// det(wI - X(z)) versus t = 0.
FlowResult integrate_flow(const LoopElement& x0, const FlowConfig& config);

// Central-difference residual of d V_i|_X([X,Y]) = [V_i(X), Y].
double ad_equivariance_residual(int i, const LoopElement& x, const LoopElement& y,
                                double fd_step);

// Pointwise commutation of the field values: ||[V_i(X), V_j(X)]||, zero
// because both are polynomials in the same X.  (The fields do not commute
// as vector fields; their commuting VALUES are what the scheme needs.)
double commuting_fields_residual(int i, int j, const LoopElement& x);

// Discrete Maurer-Cartan residual of A = sum_i pi_P V_i(X) dt_i over the
// flow grid: max over interior points and direction pairs of
// || dA_j/dt_i - dA_i/dt_j + [A_i, A_j] || (central differences).
double maurer_cartan_residual(const FlowResult& flow);

}  // namespace aks
