#include "aks/frame.hpp"

#include "support/oracles.hpp"

#include <doctest.h>

#include <numbers>
#include <random>

using namespace aks;
using testing::offdiag;
using testing::random_element;

namespace {

GridSpec grid2(double e1, double e2, double s1, double s2) {
  GridSpec g;
  g.origin = {0.0, 0.0};
  g.spacing = {s1, s2};
  g.counts = {static_cast<int>(std::lround(e1 / s1)) + 1,
              static_cast<int>(std::lround(e2 / s2)) + 1};
  return g;
}

FlowResult small_flow(const LoopElement& x0, Rule rule, const GridSpec& grid,
                      double h = 1e-3) {
  FlowConfig cfg;
  cfg.rule = rule;
  cfg.h = h;
  cfg.grid = grid;
  cfg.record_residuals = false;
  return integrate_flow(x0, cfg);
}

RMatrix kkk(const RMatrix& k) { return k * k.transpose() * k; }

}  // namespace

TEST_CASE("connection_at: simple rule component formulas") {
  RMatrix k(2, 2);

  SUBCASE("second component carries -K K^T K in the upper-right block") {
    k << 0.4, -1.2, 0.8, 0.3;
    LoopElement x(4, 1, 1);
    x.set_coeff_real(1, offdiag(k));
    const auto comps = connection_at(x, Rule::Simple, 1.0);
    REQUIRE(comps.size() == 2);
    CHECK((comps[0] - offdiag(k)).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((comps[1].topRightCorner(2, 2) + kkk(k)).cwiseAbs().maxCoeff() < 1e-13);
    // and matches the printed 2x2 entries of the cubic formula
    const double x1 = k(0, 0), x2 = k(0, 1), y1 = k(1, 0), y2 = k(1, 1);
    RMatrix c(2, 2);
    c << x1 * (x1 * x1 + y1 * y1) + x2 * (x1 * x2 + y1 * y2),
         x1 * (x1 * x2 + y1 * y2) + x2 * (x2 * x2 + y2 * y2),
         y1 * (x1 * x1 + y1 * y1) + y2 * (x1 * x2 + y1 * y2),
         y1 * (x1 * x2 + y1 * y2) + y2 * (x2 * x2 + y2 * y2);
    CHECK((kkk(k) - c).cwiseAbs().maxCoeff() < 1e-13);
  }

  SUBCASE("K = I gives C = I") {
    CHECK((kkk(RMatrix::Identity(2, 2)) - RMatrix::Identity(2, 2)).cwiseAbs().maxCoeff() ==
          0.0);
  }

  SUBCASE("unit-norm first row with zero second row gives C = K") {
    k << 0.6, 0.8, 0.0, 0.0;
    CHECK((kkk(k) - k).cwiseAbs().maxCoeff() < 1e-15);
  }

  SUBCASE("z0 = 0 and complex elements are rejected") {
    LoopElement x(4, 1, 1);
    x.set_coeff_real(1, offdiag(RMatrix::Identity(2, 2)));
    CHECK_THROWS(connection_at(x, Rule::Simple, 0.0));
    CHECK_THROWS(connection_at(x.with_real_flag(false), Rule::Simple, 1.0));
  }
}

TEST_CASE("connection_at block structure per rule") {
  std::mt19937_64 rng(61);
  const LoopElement x = random_element(rng, 2, -2, 1);
  const double z0 = 1.3;

  SUBCASE("admissible: eta block vanishes, omega survives") {
    for (const auto& c : connection_at(x, Rule::Admissible, z0)) {
      CHECK((c + c.transpose()).cwiseAbs().maxCoeff() < 1e-13);
      CHECK(c.bottomRightCorner(2, 2).cwiseAbs().maxCoeff() == 0.0);
    }
  }

  SUBCASE("simple: both diagonal blocks vanish") {
    for (const auto& c : connection_at(x, Rule::Simple, z0)) {
      CHECK(c.topLeftCorner(2, 2).cwiseAbs().maxCoeff() == 0.0);
      CHECK(c.bottomRightCorner(2, 2).cwiseAbs().maxCoeff() == 0.0);
    }
  }
}

TEST_CASE("integrate_frame basics") {
  std::mt19937_64 rng(62);
  const LoopElement x0 = random_element(rng, 2, -2, 1, 0.5);
  const GridSpec grid = grid2(0.2, 0.2, 0.05, 0.05);
  const FlowResult flow = small_flow(x0, Rule::Simple, grid);
  const FrameField frames = integrate_frame(flow, Rule::Simple, 1.0, 1e-3);

  SUBCASE("origin frame is the identity") {
    CHECK((frames.at({0, 0}) - RMatrix::Identity(4, 4)).cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("orthogonality and determinant hold everywhere") {
    CHECK(frames.max_orth_drift < 1e-8);
    CHECK(frames.max_det_drift < 1e-8);
  }

  SUBCASE("sphere columns are unit vectors") {
    for (const auto& f : frames.frames) {
      for (int col = 2; col < 4; ++col) {
        CHECK(std::abs(f.col(col).norm() - 1.0) < 1e-8);
      }
    }
  }

  SUBCASE("killing-field consistency: X(t) = F^-1 X(0) F at z0") {
    double worst = 0.0;
    for (long lin = 0; lin < grid.total(); ++lin) {
      const RMatrix& f = frames.frames[static_cast<size_t>(lin)];
      const RMatrix lhs = flow.samples[static_cast<size_t>(lin)].evaluate_real(1.0);
      const RMatrix rhs = f.transpose() * x0.evaluate_real(1.0) * f;
      worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff());
    }
    CHECK(worst < 1e-6);
  }
}

TEST_CASE("clifford frame column matches the closed form") {
  const CliffordTorus torus(0.6, 0.8);
  const double two_pi = 2.0 * std::numbers::pi;
  const GridSpec grid = grid2(two_pi, two_pi, two_pi / 20, two_pi / 20);
  const FrameField frames = integrate_clifford_frame(torus, grid, 1.0, 1e-3);
  double worst = 0.0;
  for (long lin = 0; lin < grid.total(); ++lin) {
    const auto t = grid.point(grid.unlinear(lin));
    const Eigen::Vector4d f = frames.frames[static_cast<size_t>(lin)].col(2);
    worst = std::max(worst, (f - torus.immersion(t[0], t[1])).cwiseAbs().maxCoeff());
  }
  CHECK(worst < 1e-6);
  CHECK(frames.max_orth_drift < 1e-8);

  SUBCASE("frame_origin is the closed-form frame at zero") {
    CHECK((torus.frame_origin() - torus.frame(0.0, 0.0)).cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("parameters must sit on the unit circle") {
    CHECK_THROWS(CliffordTorus(0.6, 0.9));
  }
}

TEST_CASE("clifford connection arises from a constant killing field after a "
          "linear change of coordinates") {
  // With K = [[a p, b p], [b q, -a q]] the two flow directions X_1 and
  // X_1^3 span the same plane as the closed-form connection matrices, so
  // s = B t with an invertible B turns one connection into the other.
  const double a = 0.6, b = 0.8;
  const double p = 1.0, q = 2.0;
  RMatrix k(2, 2);
  k << a * p, b * p, b * q, -a * q;
  const RMatrix d1 = offdiag(k);
  const RMatrix d2 = d1 * d1 * d1;
  const CliffordTorus torus(a, b);

  // Least-squares solve of d1 * binv(0,c) + d2 * binv(1,c) = A_{c+1}.
  Eigen::Matrix<double, 16, 2> basis;
  basis.col(0) = Eigen::Map<const Eigen::VectorXd>(d1.data(), 16);
  basis.col(1) = Eigen::Map<const Eigen::VectorXd>(d2.data(), 16);
  RMatrix binv(2, 2);
  double residual = 0.0;
  for (int c = 0; c < 2; ++c) {
    const RMatrix target = torus.connection(c + 1);
    const Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(target.data(), 16);
    const Eigen::Vector2d sol = basis.colPivHouseholderQr().solve(rhs);
    binv.col(c) = sol;
    residual = std::max(residual, (basis * sol - rhs).cwiseAbs().maxCoeff());
  }
  CHECK(residual < 1e-12);
  CHECK(std::abs(binv.determinant()) > 1e-3);
}

TEST_CASE("immersion determinant") {
  auto element_for = [](double x1, double x2, double y1, double y2) {
    RMatrix k(2, 2);
    k << x1, x2, y1, y2;
    LoopElement x(4, 1, 1);
    x.set_coeff_real(1, offdiag(k));
    return x;
  };

  SUBCASE("worked substitutions") {
    CHECK(immersion_det(element_for(1, 0, 0, 1)) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(immersion_det(element_for(2, 1, 0, 1)) == doctest::Approx(4.0));
    CHECK(immersion_det(LoopElement(4, 1, 1)) == 0.0);
  }

  SUBCASE("factored form holds on random input") {
    std::mt19937_64 rng(63);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int rep = 0; rep < 1000; ++rep) {
      const double x1 = u(rng), x2 = u(rng), y1 = u(rng), y2 = u(rng);
      const double expected = (x1 * x2 + y1 * y2) * (x1 * y2 - y1 * x2);
      CHECK(std::abs(immersion_det(element_for(x1, x2, y1, y2)) - expected) < 1e-10);
    }
  }

  SUBCASE("degenerate clifford-type data is never immersive") {
    // K K^T proportional to I makes the two flow directions parallel.
    const CliffordTorus torus(0.6, 0.8);
    CHECK(std::abs(immersion_det(torus.killing_field())) < 1e-15);
  }
}

TEST_CASE("flatness residuals per rule") {
  std::mt19937_64 rng(64);
  const LoopElement x0 = random_element(rng, 2, -2, 1, 0.4);
  const GridSpec grid = grid2(0.04, 0.04, 0.01, 0.01);

  SUBCASE("simple: omega and eta vanish identically, residuals exactly zero") {
    const FlowResult flow = small_flow(x0, Rule::Simple, grid);
    const auto res = flatness_residuals(flow, Rule::Simple, 1.0);
    CHECK(res.max_omega == 0.0);
    CHECK(res.max_eta == 0.0);
  }

  SUBCASE("admissible: omega curvature small, eta exactly zero") {
    const FlowResult flow = small_flow(x0, Rule::Admissible, grid);
    const auto res = flatness_residuals(flow, Rule::Admissible, 1.0);
    CHECK(res.max_omega < 1e-4);
    CHECK(res.max_omega > 0.0);
    CHECK(res.max_eta == 0.0);
  }

  SUBCASE("curved flat: both curvatures small") {
    const FlowResult flow = small_flow(x0, Rule::CurvedFlat, grid);
    const auto res = flatness_residuals(flow, Rule::CurvedFlat, 1.0);
    CHECK(res.max_omega < 1e-4);
    CHECK(res.max_eta < 1e-4);
  }

  SUBCASE("grids below 3 points per direction are rejected") {
    const FlowResult flow = small_flow(x0, Rule::Simple, grid2(0.01, 0.04, 0.01, 0.01));
    CHECK_THROWS(flatness_residuals(flow, Rule::Simple, 1.0));
  }
}

TEST_CASE("immersion samples bundle frame columns with diagnostics") {
  std::mt19937_64 rng(65);
  const LoopElement x0 = random_element(rng, 2, -1, 1, 0.5);
  const GridSpec grid = grid2(0.04, 0.04, 0.01, 0.01);
  const FlowResult flow = small_flow(x0, Rule::Admissible, grid);
  const FrameField frames = integrate_frame(flow, Rule::Admissible, 1.0, 1e-3);
  const auto samples = immersion_samples(frames, flow);
  REQUIRE(samples.size() == static_cast<size_t>(grid.total()));
  for (const auto& s : samples) {
    CHECK(std::abs(s.f.norm() - 1.0) < 1e-8);
  }
  // column n+1 of the frame is the designated sphere map
  CHECK((samples[0].f - frames.at({0, 0}).col(2)).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS(immersion_samples(frames, flow, 2));
  CHECK_THROWS(immersion_samples(frames, flow, 5));
}

TEST_CASE("frames stay finite over long ranges") {
  std::mt19937_64 rng(66);
  const LoopElement x0 = random_element(rng, 2, -1, 1, 0.5);
  GridSpec grid;
  grid.origin = {-10.0, -10.0};
  grid.spacing = {1.0, 1.0};
  grid.counts = {21, 21};
  const FlowResult flow = small_flow(x0, Rule::Simple, grid, 1e-2);
  const FrameField frames = integrate_frame(flow, Rule::Simple, 1.0, 1e-2);
  CHECK(frames.max_orth_drift < 1e-8);
  for (const auto& f : frames.frames) CHECK(f.allFinite());
}
