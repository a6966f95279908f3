#pragma once

#include "aks/flow.hpp"
#include "aks/frame.hpp"
#include "aks/loop_element.hpp"

#include <span>
#include <string>
#include <vector>

namespace aks {

enum class PeriodKind { ExactPeriod, TypeI, TypeII, None };
const char* period_kind_name(PeriodKind k);

struct PeriodReport {
  std::vector<double> P;
  PeriodKind kind = PeriodKind::None;
  double x_residual = 0.0;  // ||X(P) - X(0)|| or ||X(P) - B^-1 X(0) B||
  double f_residual = 0.0;  // worst quasiperiodicity defect over test points
  RMatrix B;
  double b_condition = 1.0;
  int nullspace_dim = 1;
  std::string notes;

  // Flat key/value text block.
  std::string serialized() const;
};

// Solve X_i(0) B = B X_i(P) over all degrees (stacked homogeneous system in
// the m^2 entries of B), taking the right-singular vector of least singular
// value, scaled toward det B = 1 when possible.
struct ConjugatorResult {
  RMatrix B;
  double residual = 0.0;    // ||X(P) - B^-1 X(0) B||
  int nullspace_dim = 1;    // singular values below 1e-8 * sigma_max
  double condition = 1.0;   // cond(B)
  bool invertible = true;
  std::string notes;
};

ConjugatorResult solve_conjugator(const LoopElement& x_at_0, const LoopElement& x_at_p);

// Candidate-period check per the Killing-field equivalence: X(P) = X(0)
// within tol makes F type I quasiperiodic; otherwise a conjugacy
// X(P) = B^-1 X(0) B makes it type II.  Each hypothesis is verified on the
// grid test set at 10x slack; verification failure downgrades to "none".
PeriodReport detect_period(const FlowResult& flow, const FrameField& frames,
                           const std::vector<double>& P, double tol);

// max over test points of ||F(t+P) - F(P) B^-1 F(t) B||.
double verify_type_ii(const FrameField& frames, const RMatrix& B,
                      const std::vector<double>& P,
                      std::span<const std::vector<int>> test_points);

// Grid nodes t for which t + P is also on the grid (up to `limit` of them,
// evenly strided).
std::vector<std::vector<int>> translated_test_points(const GridSpec& grid,
                                                     const std::vector<double>& P,
                                                     int limit = 25);

}  // namespace aks
