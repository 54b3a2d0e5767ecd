#include <doctest.h>

#include <random>

#include "gdyne/model.hpp"

using namespace gdyne;

namespace {

SystemParams<double> sys(double w, double e) { return SystemParams<double>::make(w, e); }

}  // namespace

TEST_CASE("unconditional covariance solves the Lyapunov equation") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(0.05, 2.0), F(0.0, 0.999);
  for (int i = 0; i < 50; ++i) {
    const double w = U(rng);
    const auto p = sys(w, F(rng) * critical_amplitude(w, 1.0));
    const Mat2 S = unconditional_steady_covariance(p);
    const Mat2 A = drift_matrix(p);
    const Mat2 res = A * S + S * A.transpose() + diffusion_matrix(p);
    CHECK(res.norm() < 1e-10 * (1 + S.norm()));
    CHECK(S.determinant() >= 1 - 1e-12);
    // Independent route through the generic solver.
    CHECK((lyapunov_sym2<double>(A, -diffusion_matrix(p)) - S).norm() < 1e-10 * S.norm());
  }
}

TEST_CASE("vacuum at zero drive") {
  const Mat2 S = unconditional_steady_covariance(sys(0.7, 0.0));
  CHECK((S - Mat2::Identity()).norm() < 1e-14);
}

TEST_CASE("outside the normal phase is rejected") {
  CHECK_THROWS_AS(unconditional_steady_covariance(sys(0.2, 0.6)), Error);
  try {
    unconditional_steady_covariance(sys(0.2, 0.6));
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::OutsidePhase);
  }
  CHECK_THROWS_AS(SystemParams<double>::make(-0.1, 0.1), Error);
  CHECK_THROWS_AS(SystemParams<double>::make(0.1, 0.1, 1.0, 0.5), Error);
  CHECK_THROWS_AS(MeasurementParams<double>::make(1.5, 0.0, 1.0), Error);
  CHECK_THROWS_AS(MeasurementParams<double>::make(0.0, 0.0, -0.1), Error);
}

TEST_CASE("BECP lies on the boundary with matching squeezing angle") {
  for (double phi : {0.05, 0.3, 0.6, 0.75}) {
    const auto [w, e] = becp_from_angle(phi);
    CHECK(e == doctest::Approx(critical_amplitude(w, 1.0)).epsilon(1e-13));
    CHECK(squeezing_angle(sys(w, 0.1)) == doctest::Approx(phi).epsilon(1e-13));
  }
  const auto [w, e] = becp_from_angle(0.6);
  CHECK(w == doctest::Approx(0.1944).epsilon(5e-4));
  CHECK(e == doctest::Approx(0.5365).epsilon(5e-4));
  CHECK_THROWS_AS(becp_from_angle(0.0), Error);
  CHECK_THROWS_AS(becp_from_angle(std::numbers::pi / 4), Error);
}

TEST_CASE("kappa sets the scale") {
  const auto [w1, e1] = becp_from_angle(0.4, 1.0);
  const auto [w3, e3] = becp_from_angle(0.4, 3.0);
  CHECK(w3 == doctest::Approx(3 * w1));
  CHECK(e3 == doctest::Approx(3 * e1));
  const Mat2 S1 = unconditional_steady_covariance(sys(0.3, 0.4));
  const Mat2 S3 = unconditional_steady_covariance(SystemParams<double>::make(0.9, 1.2, 3.0));
  CHECK((S1 - S3).norm() < 1e-13);
}

TEST_CASE("measurement matrix") {
  for (double s : {0.1, 0.5, 1.0}) {
    for (double phi : {-1.0, 0.0, 0.6, 2.0}) {
      const auto m = MeasurementParams<double>::make(s, phi, 0.7);
      const Mat2 B = measurement_matrix_B(m);
      const Mat2 R = rotation(phi);
      Mat2 sm = Mat2::Zero();
      sm(0, 0) = s;
      sm(1, 1) = 1 / s;
      const Mat2 sigma_m = R.transpose() * sm * R;
      CHECK((B * B * (Mat2::Identity() + sigma_m) - Mat2::Identity()).norm() < 1e-13);
      CHECK((B - B.transpose()).norm() < 1e-15);
    }
  }
  SUBCASE("continuous into the homodyne limit") {
    const Mat2 B0 = measurement_matrix_B(MeasurementParams<double>::make(0.0, 0.6, 1.0));
    const Mat2 Bs = measurement_matrix_B(MeasurementParams<double>::make(1e-12, 0.6, 1.0));
    CHECK((B0 - Bs).norm() < 2e-6);
    CHECK(std::abs(B0.determinant()) < 1e-15);
  }
  SUBCASE("heterodyne is isotropic") {
    const Mat2 B = measurement_matrix_B(MeasurementParams<double>::make(1.0, 0.3, 1.0));
    CHECK((B - Mat2::Identity() / std::sqrt(2.0)).norm() < 1e-14);
  }
  try {
    measurement_matrix_B(MeasurementParams<double>::make(0.2, 0.1, 0.0));
    FAIL("expected EtaZero");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::EtaZero);
  }
}

TEST_CASE("backaction functional matches the generic product") {
  for (double w : {0.2, 0.5, 1.3}) {
    for (double frac : {0.3, 0.9, 0.99}) {
      const auto p = sys(w, frac * critical_amplitude(w, 1.0));
      for (double phi : {0.1, 0.5, 1.2}) {
        const Mat2 F = backaction_functional(p, phi);
        const Mat2 R = rotation(squeezing_angle(p));
        const Mat2 Sb = R * unconditional_steady_covariance(p) * R.transpose() - Mat2::Identity();
        const Mat2 B = measurement_matrix_B(MeasurementParams<double>::make(0.0, phi, 1.0));
        const Mat2 Bb = R * B * R.transpose();
        const Mat2 G = Sb * Bb * Bb * Sb;
        CHECK((F - G).norm() < 1e-10 * (1 + G.norm()));
        Eigen::SelfAdjointEigenSolver<Mat2> es(F);
        CHECK(es.eigenvalues().minCoeff() > -1e-12);
      }
    }
  }
}

// At phi = theta0 the correction still grows like 1/deps (the soft mode's left
// eigenvector is not orthogonal to x_theta0), i.e. at the same rate as the
// unconditional antisqueezing, so the ratio to Sigma0 stays bounded. Off the
// angle the source itself carries 1/deps^2 and the (2,2) entry runs to -inf
// faster than Sigma0 grows.
TEST_CASE("first-order correction relative to the unconditional antisqueezing") {
  const double w = 0.4;
  const double th = squeezing_angle(sys(w, 0.1));
  auto ratio = [&](double deps, double phi) {
    const auto p = SystemParams<double>::near_boundary(w, deps);
    const Mat2 R = rotation(th);
    const double s0 = (R * unconditional_steady_covariance(p) * R.transpose())(1, 1);
    return first_order_correction(p, phi)(1, 1) / s0;
  };
  const double r2 = ratio(1e-2, th), r3 = ratio(1e-3, th), r4 = ratio(1e-4, th);
  CHECK(r2 < 0);
  CHECK(std::abs(r4) < 2 * std::abs(r2));
  CHECK(std::abs(r4 - r3) < 0.1 * std::abs(r3));
  double prev = 0;
  for (double deps : {1e-2, 1e-3, 1e-4}) {
    const auto p = SystemParams<double>::near_boundary(w, deps);
    const double x22 = first_order_correction(p, th + 0.2)(1, 1);
    CHECK(x22 < prev);
    prev = x22;
    CHECK(ratio(deps, th + 0.2) < 0);
  }
  CHECK(std::abs(ratio(1e-4, th + 0.2)) > 100 * std::abs(ratio(1e-2, th + 0.2)));
}
