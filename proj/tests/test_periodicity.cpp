#include "aks/periodicity.hpp"

#include "support/oracles.hpp"

#include <doctest.h>

#include <numbers>
#include <random>

using namespace aks;
using testing::random_block_orthogonal;
using testing::random_element;
using testing::random_orthogonal;
using testing::RigidRotationFlow;

namespace {

constexpr double kPi = std::numbers::pi;

struct FlowWithFrames {
  FlowResult flow;
  FrameField frames;
};

FlowWithFrames run(const LoopElement& x0, Rule rule, const GridSpec& grid, double h) {
  FlowConfig cfg;
  cfg.rule = rule;
  cfg.h = h;
  cfg.grid = grid;
  cfg.record_residuals = false;
  FlowResult flow = integrate_flow(x0, cfg);
  FrameField frames = integrate_frame(flow, rule, 1.0, h);
  return {std::move(flow), std::move(frames)};
}

GridSpec grid2(double e1, double e2, double s1, double s2) {
  GridSpec g;
  g.origin = {0.0, 0.0};
  g.spacing = {s1, s2};
  g.counts = {static_cast<int>(std::lround(e1 / s1)) + 1,
              static_cast<int>(std::lround(e2 / s2)) + 1};
  return g;
}

LoopElement conjugated(const LoopElement& x, const RMatrix& g) {
  LoopElement out = x;
  for (int d = x.lo(); d <= x.hi(); ++d) {
    out.set_coeff_real(d, g.transpose() * x.coeff_ref(d).real() * g);
  }
  return out;
}

}  // namespace

TEST_CASE("solve_conjugator") {
  std::mt19937_64 rng(71);
  const LoopElement x = random_element(rng, 2, -2, 1);

  SUBCASE("identical inputs give B = identity up to scale") {
    const auto res = solve_conjugator(x, x);
    CHECK(res.residual < 1e-12);
    CHECK(res.nullspace_dim == 1);
    const double diag = std::abs(res.B(0, 0));
    CHECK((res.B / res.B(0, 0) - RMatrix::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(diag > 0.0);
  }

  SUBCASE("constructed conjugacy by a random orthogonal matrix is recovered") {
    for (int rep = 0; rep < 10; ++rep) {
      const RMatrix g = random_orthogonal(rng, 4);
      const auto res = solve_conjugator(x, conjugated(x, g));
      CHECK(res.invertible);
      CHECK(res.residual < 1e-9);
      CHECK(res.condition < 1e3);
    }
  }

  SUBCASE("spectrally different inputs are flagged as not conjugate") {
    const LoopElement y = random_element(rng, 2, -2, 1);
    const auto res = solve_conjugator(x, y);
    CHECK(res.residual > 1e-3);
  }

  SUBCASE("degree range mismatch throws") {
    CHECK_THROWS(solve_conjugator(x, random_element(rng, 2, -1, 1)));
  }
}

TEST_CASE("conjugation by a constant matrix commutes with the simple projection") {
  std::mt19937_64 rng(72);
  const LoopElement x = random_element(rng, 2, -2, 1);
  const RMatrix g = random_block_orthogonal(rng, 2);
  CHECK(distance(project(conjugated(x, g), Rule::Simple),
                 conjugated(project(x, Rule::Simple), g)) == 0.0);
}

TEST_CASE("clifford constant flow: every grid vector is a type-I quasiperiod") {
  const CliffordTorus torus(0.6, 0.8);
  const GridSpec grid = grid2(2.5 * kPi, 2.5 * kPi, kPi / 4, kPi / 4);
  const auto rf = run(torus.killing_field(), Rule::Simple, grid, 5e-3);

  SUBCASE("generic grid vector: type I with zero X-residual") {
    const auto report = detect_period(rf.flow, rf.frames, {kPi / 2, kPi / 4}, 1e-6);
    CHECK((report.kind == PeriodKind::TypeI || report.kind == PeriodKind::ExactPeriod));
    CHECK(report.x_residual < 1e-10);
    CHECK(report.f_residual < 1e-6);
  }

  SUBCASE("P = (2pi, 2pi) is an exact period of the frame") {
    const auto report = detect_period(rf.flow, rf.frames, {2 * kPi, 2 * kPi}, 1e-6);
    CHECK(report.kind == PeriodKind::ExactPeriod);
    CHECK(report.f_residual < 1e-6);
  }

  SUBCASE("lemma-4 surrogate: F(0) = F((2pi,0)) forces the period") {
    std::vector<int> b_idx = {8, 0};
    CHECK((rf.frames.at(b_idx) - RMatrix::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-8);
    const auto points = translated_test_points(grid, {2 * kPi, 0.0});
    double worst = 0.0;
    for (const auto& idx : points) {
      std::vector<int> shifted = idx;
      shifted[0] += 8;
      worst = std::max(worst,
                       (rf.frames.at(shifted) - rf.frames.at(idx)).cwiseAbs().maxCoeff());
    }
    CHECK(worst < 1e-6);
  }

  SUBCASE("off-grid candidate period throws") {
    CHECK_THROWS(detect_period(rf.flow, rf.frames, {0.1, 0.0}, 1e-6));
  }
}

TEST_CASE("rigid rotation flow: nonconstant type-I and type-II quasiperiods") {
  RigidRotationFlow oracle;
  oracle.u = 2.0;
  oracle.l = -2.0;  // X-period (pi/2, 0), conjugator B(P1) = exp(P1 Omega)
  const double spacing = kPi / 16;
  const GridSpec grid = grid2(kPi / 2 + 4 * spacing, 2 * spacing, spacing, spacing);
  const auto rf = run(oracle.initial(), Rule::Simple, grid, 1e-3);

  SUBCASE("X-period detection (type I on a nonconstant flow)") {
    const auto report = detect_period(rf.flow, rf.frames, {oracle.x_period(), 0.0}, 1e-6);
    CHECK((report.kind == PeriodKind::TypeI || report.kind == PeriodKind::ExactPeriod));
    CHECK(report.x_residual < 1e-10);
    CHECK(report.f_residual < 1e-6);
    // the flow actually moves
    CHECK(distance(rf.flow.at({1, 0}), rf.flow.at({0, 0})) > 1e-3);
  }

  SUBCASE("intermediate translate is a genuine type-II quasiperiod") {
    const std::vector<double> P = {2 * spacing, 0.0};
    const auto report = detect_period(rf.flow, rf.frames, P, 1e-6);
    CHECK(report.kind == PeriodKind::TypeII);
    CHECK(report.x_residual < 1e-9);
    CHECK(report.f_residual < 1e-6);
    // the conjugator genuinely moves X(0): this really is type II
    LoopElement moved = rf.flow.samples[0];
    const RMatrix binv = report.B.inverse();
    for (int d = moved.lo(); d <= moved.hi(); ++d) {
      moved.set_coeff_real(d, binv * moved.coeff_ref(d).real() * report.B);
    }
    CHECK(distance(moved, rf.flow.samples[0]) > 1e-3);
  }

  SUBCASE("verify_type_ii against the closed-form conjugator") {
    const std::vector<double> P = {2 * spacing, 0.0};
    const RMatrix b = oracle.conjugator(2 * spacing);
    const auto points = translated_test_points(grid, P);
    CHECK(verify_type_ii(rf.frames, b, P, points) < 1e-6);
    CHECK_THROWS(verify_type_ii(rf.frames, RMatrix::Zero(4, 4), P, points));
  }

  SUBCASE("solve_conjugator recovers a working conjugator from flow data") {
    const auto p_idx = grid.index_of({2 * spacing, 0.0});
    REQUIRE(p_idx.has_value());
    const auto res = solve_conjugator(rf.flow.samples[0], rf.flow.at(*p_idx));
    CHECK(res.invertible);
    CHECK(res.residual < 1e-9);
    // this family has a nontrivial centralizer; the solver must say so
    CHECK(res.nullspace_dim > 1);
  }
}

TEST_CASE("random initial data is not periodic") {
  std::mt19937_64 rng(73);
  const LoopElement x0 = random_element(rng, 2, -1, 1);
  const GridSpec grid = grid2(0.4, 0.1, 0.1, 0.05);
  const auto rf = run(x0, Rule::Simple, grid, 1e-3);
  const auto report = detect_period(rf.flow, rf.frames, {0.2, 0.0}, 1e-6);
  CHECK(report.kind == PeriodKind::None);
}

TEST_CASE("translation lemma: F(t+Q) = F(Q) Fhat(t)") {
  std::mt19937_64 rng(74);
  const LoopElement x0 = random_element(rng, 2, -2, 1, 0.6);
  const GridSpec grid = grid2(0.5, 0.4, 0.05, 0.05);
  const auto rf = run(x0, Rule::Simple, grid, 1e-3);

  const std::vector<double> q = {0.2, 0.15};
  const auto q_idx = grid.index_of(q);
  REQUIRE(q_idx.has_value());
  const LoopElement xq = rf.flow.at(*q_idx);
  const RMatrix fq = rf.frames.at(*q_idx);

  GridSpec hat_grid = grid2(0.3, 0.25, 0.05, 0.05);
  const auto hat = run(xq, Rule::Simple, hat_grid, 1e-3);

  double worst = 0.0;
  for (long lin = 0; lin < hat_grid.total(); ++lin) {
    const auto idx = hat_grid.unlinear(lin);
    std::vector<int> shifted = idx;
    shifted[0] += (*q_idx)[0];
    shifted[1] += (*q_idx)[1];
    const RMatrix lhs = rf.frames.at(shifted);
    const RMatrix rhs = fq * hat.frames.frames[static_cast<size_t>(lin)];
    worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff());
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("period report serialization is a flat key/value block") {
  PeriodReport report;
  report.P = {1.5, 0.0};
  report.kind = PeriodKind::TypeII;
  report.B = RMatrix::Identity(4, 4);
  report.x_residual = 1e-12;
  const std::string text = report.serialized();
  CHECK(text.find("kind type_II\n") != std::string::npos);
  CHECK(text.find("P 1.5 0\n") != std::string::npos);
  CHECK(text.find("nullspace_dim 1\n") != std::string::npos);
}
