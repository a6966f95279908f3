#pragma once

#include "aks/flow.hpp"
#include "aks/loop_element.hpp"

#include <optional>
#include <vector>

namespace aks {

// Adapted frame F(t) in SO(2n) at a fixed real z0.
struct Frame {
  std::vector<double> t;
  double z0 = 1.0;
  RMatrix F;
};

struct FrameField {
  GridSpec grid;
  double z0 = 1.0;
  Rule rule = Rule::Simple;
  std::vector<RMatrix> frames;  // linear grid order
  double max_orth_drift = 0.0;  // ||F^T F - I||_max over the grid
  double max_det_drift = 0.0;   // |det F - 1| over the grid

  const RMatrix& at(const std::vector<int>& idx) const;
  const RMatrix& at_time(const std::vector<double>& t) const;
};

// The n real connection matrices A_i(z0) = [pi_P V_i(X)](z0).
std::vector<RMatrix> connection_at(const LoopElement& x, Rule rule, double z0);

// Integrate F^{-1} dF = A(X(t)) at z0 over the flow grid with F(origin) =
// f_init (identity by default).  Stepping multiplies by the exact matrix
// exponential of h * A_i evaluated at the step midpoint, co-integrating X
// with RK4 half-steps, so every frame is orthogonal up to roundoff.
// Throws if orthogonality drift exceeds 1e-6.
FrameField integrate_frame(const FlowResult& flow, Rule rule, double z0, double h,
                           const RMatrix* f_init = nullptr);

// det of the n x n matrix whose row i is entries (n+1, 1..n) of
// X_1^{2i-1}; the sign convention makes the n = 2 value equal to
// (x1 x2 + y1 y2)(x1 y2 - x2 y1).
double immersion_det(const LoopElement& x);

struct CurvatureResiduals {
  std::vector<double> omega;  // per grid sample (NaN on the boundary)
  std::vector<double> eta;
  double max_omega = 0.0;
  double max_eta = 0.0;
};

// Flatness diagnostics: omega (upper-left block) and eta (lower-right
// block) of the connection A = F^{-1} dF assembled at each grid node, with
// the curvature 2-form coefficient dB_j/dt_i - dB_i/dt_j + [B_i, B_j]
// evaluated by central differences at interior nodes.
CurvatureResiduals flatness_residuals(const FlowResult& flow, Rule rule, double z0);

struct ImmersionSample {
  std::vector<double> t;
  Eigen::VectorXd f;
  double imm_det = 0.0;
  double omega_residual = 0.0;
  double eta_residual = 0.0;
};

// Per-node sphere map (column `column`, 1-based, default n+1) plus the
// immersion determinant and curvature residuals.
std::vector<ImmersionSample> immersion_samples(const FrameField& frames,
                                               const FlowResult& flow,
                                               int column = -1);

// Clifford torus closed forms: the product-of-circles immersion
// f(s1,s2) = [a cos s1, a sin s1, b cos s2, b sin s2], a^2 + b^2 = 1, its
// adapted frame, and the constant connection the frame satisfies.
struct CliffordTorus {
  double a = 0.6;
  double b = 0.8;

  CliffordTorus(double a_, double b_);

  RMatrix connection(int direction) const;  // direction 1 or 2, 4x4
  RMatrix frame_origin() const;
  RMatrix frame(double s1, double s2) const;
  Eigen::Vector4d immersion(double s1, double s2) const;
  // Constant Killing field (A1 + A2) z used by the flow-facing presets.
  LoopElement killing_field() const;
};

// Integrate the constant Clifford connection z0*(A1 ds1 + A2 ds2) over the
// grid with F(origin) = frame_origin * frame(origin), stepping with exact
// exponentials of substep size <= h.
FrameField integrate_clifford_frame(const CliffordTorus& torus, const GridSpec& grid,
                                    double z0, double h);

}  // namespace aks
