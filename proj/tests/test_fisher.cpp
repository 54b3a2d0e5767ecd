#include <doctest.h>

#include "gdyne/fisher.hpp"
#include "gdyne/qfi.hpp"

using namespace gdyne;

TEST_CASE("growth rate: stationary integrand equals late-time slope") {
  const System p = System::make(0.5, 0.35);
  const Measurement m = Measurement::make(0.3, 0.8, 0.9);
  const FisherResult r = fisher_information(p, m);
  REQUIRE(r.converged);
  CHECK(r.k_F_fit == doctest::Approx(r.k_F).epsilon(1e-5));
  CHECK(r.fit_r2 > 0.999999);
  CHECK(r.F.front() == 0.0);
  for (std::size_t i = 1; i < r.F.size(); ++i) CHECK(r.F[i] >= r.F[i - 1]);
}

TEST_CASE("growth rate matches the steady Sylvester chain") {
  const System p = System::make(0.3, 0.4);
  const Measurement m = Measurement::make(0.0, 0.6, 1.0);
  const Mat2 A = drift_matrix(p), dA = drift_derivative();
  const Mat2 B2 = measurement_matrix_B(m) * measurement_matrix_B(m);
  const Mat2 S = steady_covariance(p, m).sigma, Sm = S - Mat2::Identity();
  const Mat2 At = A - Sm * B2;
  const Mat2 dS = sylvester2<double>(At, At.transpose(), -(dA * S + S * dA.transpose()));
  const Mat2 Err = sylvester2<double>(A, A.transpose(), -0.5 * Sm * B2 * Sm);
  const Mat2 Edrr = sylvester2<double>(At, A.transpose(), -(dA * Err + 0.5 * dS * B2 * Sm));
  const Mat2 Edrdr = sylvester2<double>(
      At, At.transpose(), -(dA * Edrr.transpose() + Edrr * dA.transpose() + 0.5 * dS * B2 * dS));
  CHECK(fisher_rate(p, m) == doctest::Approx(2 * (B2 * Edrdr).trace()).epsilon(1e-6));
}

TEST_CASE("zero efficiency carries no information") {
  const FisherResult r = fisher_information(System::make(0.4, 0.3), Measurement::make(0.0, 0.6, 0.0));
  CHECK(r.k_F == 0.0);
  CHECK(r.F.back() == 0.0);
}

TEST_CASE("classical rate never exceeds the quantum bound") {
  for (double w : {0.2, 0.5, 1.0})
    for (double frac : {0.5, 0.9})
      for (double phi : {0.0, 0.6, 1.3})
        for (double s : {0.0, 0.5}) {
          const System p = System::make(w, frac * critical_amplitude(w, 1.0));
          const double kF = fisher_rate(p, Measurement::make(s, phi, 1.0));
          CHECK(kF <= qfi_rate_analytic(p).k_G * (1 + 1e-3));
          CHECK(kF >= 0);
        }
}

TEST_CASE("rate is insensitive to the step") {
  const System p = System::make(0.2, 0.5);
  const Measurement m = Measurement::make(0.1, 0.55, 1.0);
  FisherOptions a, b;
  b.dt = a.dt / 2;
  CHECK(fisher_rate(p, m, a) == doctest::Approx(fisher_rate(p, m, b)).epsilon(1e-7));
}

TEST_CASE("stationarity not reached within the horizon") {
  FisherOptions o;
  o.t_max = 5;
  CHECK_THROWS_AS(fisher_rate(System::near_boundary(0.2, 0.03), Measurement::make(0, 0.58, 1), o), Error);
}

TEST_CASE("optimizer returns the best traced point inside the box") {
  const System p = System::make(0.5, 0.4);
  OptimizeOptions o;
  o.grid_phi = 8;
  o.grid_s = 4;
  o.budget = 60;
  const auto r = optimize_measurement(p, 1.0, o);
  REQUIRE(!r.trace.empty());
  double best = -1;
  for (const auto& t : r.trace) {
    CHECK(t.s >= 0);
    CHECK(t.s <= 1);
    CHECK(t.phi > 0);
    CHECK(t.phi <= std::numbers::pi / 4 + 1e-12);
    best = std::max(best, t.k_F);
  }
  CHECK(r.k_F_opt == best);
  CHECK(fisher_rate(p, Measurement::make(r.s_opt, r.phi_opt, 1.0)) == doctest::Approx(r.k_F_opt));
  CHECK(r.k_F_opt <= qfi_rate_analytic(p).k_G * (1 + 1e-3));
}

TEST_CASE("landscape flags points outside the normal phase") {
  const auto cells = kf_landscape({0.3, 0.6}, {0.2, 0.7}, Measurement::make(0, 0.6, 1.0));
  REQUIRE(cells.size() == 4);
  CHECK(cells[0].ok);
  CHECK(cells[1].ok);
  CHECK(!cells[2].ok);  // eps 0.7 > eps_c(0.3)
  CHECK(cells[2].status == "OutsidePhase");
  CHECK(cells[3].ok);
}
