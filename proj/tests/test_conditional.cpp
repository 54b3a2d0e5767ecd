#include <doctest.h>

#include <random>

#include "gdyne/conditional.hpp"

using namespace gdyne;

TEST_CASE("riccati at eta = 0 relaxes to the unconditional covariance") {
  const System p = System::make(0.5, 0.4);
  const auto r = steady_covariance(p, Measurement::make(0.3, 0.2, 0.0));
  REQUIRE(r.status == SteadyStatus::Converged);
  CHECK((r.sigma - unconditional_steady_covariance(p)).norm() < 1e-8);
}

TEST_CASE("pure steady states at unit efficiency") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(0, 1);
  for (int i = 0; i < 20; ++i) {
    const double w = 0.1 + 1.4 * U(rng);
    const System p = System::make(w, 0.95 * U(rng) * critical_amplitude(w, 1.0));
    const Measurement m = Measurement::make(U(rng), std::numbers::pi * (U(rng) - 0.5), 1.0);
    const auto r = steady_covariance(p, m);
    REQUIRE(r.status == SteadyStatus::Converged);
    CHECK(r.sigma.determinant() == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("monitoring never adds fluctuations") {
  const System p = System::make(0.3, 0.45);
  const Mat2 S0 = unconditional_steady_covariance(p);
  for (double eta : {0.1, 0.5, 1.0}) {
    const auto r = steady_covariance(p, Measurement::make(0.2, 0.6, eta));
    Eigen::SelfAdjointEigenSolver<Mat2> es(S0 - r.sigma);
    CHECK(es.eigenvalues().minCoeff() > -1e-9);
    CHECK(r.sigma.determinant() >= 1 - 1e-9);
  }
}

TEST_CASE("steady Sigma is a root of the algebraic Riccati equation") {
  const System p = System::make(0.7, 0.5);
  const Measurement m = Measurement::make(0.4, 1.1, 0.6);
  const auto r = steady_covariance(p, m);
  const Mat2 res = riccati_rhs(drift_matrix(p), diffusion_matrix(p), Coupling::from(p, m), r.sigma);
  CHECK(res.norm() < 1e-8);
}

TEST_CASE("d Sigma / d omega agrees with a central difference") {
  const Measurement m = Measurement::make(0.1, 0.6, 0.8);
  const double w = 0.4, e = 0.5, h = 1e-5, T = 6;
  const auto t0 = integrate_covariance(System::make(w, e), m, Mat2::Identity(), T);
  const auto tp = integrate_covariance(System::make(w + h, e), m, Mat2::Identity(), T);
  const auto tm = integrate_covariance(System::make(w - h, e), m, Mat2::Identity(), T);
  for (double t : {0.5, 2.0, 6.0}) {
    const Mat2 fd = (tp.sigma_at(t) - tm.sigma_at(t)) / (2 * h);
    CHECK((t0.dsigma_at(t) - fd).norm() < 1e-6 * (1 + fd.norm()));
  }
}

TEST_CASE("covariance integration converges with the step") {
  const System p = System::make(0.25, 0.5);
  const Measurement m = Measurement::make(0.0, 0.6, 1.0);
  auto at = [&](double dt) { return integrate_covariance(p, m, Mat2::Identity(), 4.0, dt).sigma.back(); };
  const Mat2 a = at(0.1), b = at(0.05), c = at(0.025);
  const double d1 = (a - b).norm(), d2 = (b - c).norm();
  CHECK(d2 < d1 / 4);
}

TEST_CASE("divergence at the backaction-evading point is efficiency independent") {
  const auto [w_be, e_be] = becp_from_angle(0.6);
  (void)e_be;
  SteadyOptions opt;
  opt.t_max = 600;
  for (double eta : {0.3, 1.0}) {
    const Measurement m = Measurement::make(0.0, 0.6, eta);
    CHECK(steady_covariance(System::near_boundary(w_be, 0.0), m, opt).status == SteadyStatus::Diverged);
    for (double dw : {-0.05, 0.05}) {
      const auto r = steady_covariance(System::near_boundary(w_be + dw, 0.0), m, opt);
      CHECK(r.status == SteadyStatus::Converged);
      CHECK(std::isfinite(r.sigma(1, 1)));
    }
  }
}

TEST_CASE("step size limits are reported") {
  const System p = System::make(0.5, 0.3);
  CHECK_THROWS_AS(integrate_covariance(p, Measurement::make(0, 0.6, 1), Mat2::Identity(), 500.0, 50.0),
                  Error);
}

TEST_CASE("seeded trajectories are bit-identical") {
  const System p = System::make(0.3, 0.4);
  const Measurement m = Measurement::make(0.2, 0.5, 0.9);
  TrajectoryOptions o;
  o.tangent = true;
  o.sample_every = 7;
  const auto a = simulate_trajectory(p, m, GaussianState{}, 3.0, 1234, o);
  const auto b = simulate_trajectory(p, m, GaussianState{}, 3.0, 1234, o);
  const auto c = simulate_trajectory(p, m, GaussianState{}, 3.0, 1235, o);
  REQUIRE(a.samples.size() == b.samples.size());
  bool same = true, differs = false;
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    same &= a.samples[i].r == b.samples[i].r && a.samples[i].y == b.samples[i].y &&
            a.samples[i].dr == b.samples[i].dr;
    differs |= a.samples[i].y != c.samples[i].y;
  }
  CHECK(same);
  CHECK(differs);
}

TEST_CASE("ensemble statistics do not depend on the thread count") {
  const System p = System::make(0.5, 0.3);
  const Measurement m = Measurement::make(0.0, 0.6, 1.0);
  EnsembleOptions o1, o3;
  o1.threads = 1;
  o3.threads = 3;
  const auto a = ensemble_statistics(p, m, {0.5, 1.0}, 24, 5, o1);
  const auto b = ensemble_statistics(p, m, {0.5, 1.0}, 24, 5, o3);
  for (std::size_t k = 0; k < a.size(); ++k) {
    CHECK(a[k].Err == b[k].Err);
    CHECK(a[k].Eyy == b[k].Eyy);
    CHECK(a[k].Edrdr == b[k].Edrdr);
  }
}

// Conditional variance plus spread of the conditional means recovers the
// unconditional covariance: Sigma_unc = Sigma + 2 E[r r^T].
TEST_CASE("law of total variance") {
  const System p = System::make(0.5, 0.35);
  const Measurement m = Measurement::make(0.0, 0.4, 1.0);
  EnsembleOptions o;
  o.tangent = false;
  const double T = 12;
  const auto pts = ensemble_statistics(p, m, {T}, 2000, 900, o);
  const Mat2 S = steady_covariance(p, m).sigma;
  const Mat2 S0 = unconditional_steady_covariance(p);
  for (int i = 0; i < 2; ++i) {
    const double lhs = S(i, i) / 2 + pts[0].Err(i, i);
    CHECK(std::abs(lhs - S0(i, i) / 2) < 3 * pts[0].se_Err(i, i) + 1e-3);
  }
}
