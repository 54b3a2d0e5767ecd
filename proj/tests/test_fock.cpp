#include <doctest.h>

#include "gdyne/fock.hpp"
#include "gdyne/qfi.hpp"

using namespace gdyne;

namespace {

using System = SystemParams<double>;

FockOptions small(int dim) {
  FockOptions o;
  o.dim = dim;
  o.dt = 5e-3;
  o.sample_every = 200;
  return o;
}

}  // namespace

TEST_CASE("Lindblad evolution keeps a physical state") {
  const System p = System::make(0.5, 0.45);
  const auto run = lindblad_evolve(p, fock_vacuum(40), 8.0, small(40));
  for (const auto& s : run) {
    CHECK(std::abs(s.rho.trace() - 1.0) < 1e-10);
    CHECK((s.rho - s.rho.adjoint()).norm() < 1e-12);
    Eigen::SelfAdjointEigenSolver<FockMatrix> es(s.rho);
    CHECK(es.eigenvalues().minCoeff() > -1e-8);
  }
}

TEST_CASE("Fock moments match the Langevin closed forms and Wick") {
  for (auto [w, e] : {std::pair{0.2, 0.45}, std::pair{1.0, 0.9}}) {
    const System p = System::make(w, e);
    const auto run = lindblad_evolve(p, fock_vacuum(60), 10.0, small(60));
    for (const auto& s : run) {
      const FockMoments f = fock_moments(s.rho);
      const auto lg = langevin_moments(p, s.t);
      CHECK(std::abs(f.n - lg.n) < 1e-8);
      CHECK(std::abs(f.a2 - lg.a2) < 1e-8);
      const auto wk = wick_fourth_moments(f.n, f.a2, std::conj(f.a2));
      CHECK(std::abs(f.nn - wk.nn) < 1e-6);
      CHECK(std::abs(f.adag3a - wk.adag3a) < 1e-6);
      CHECK(std::abs(f.adaga3 - wk.adaga3) < 1e-6);
    }
  }
}

TEST_CASE("doubling the truncation leaves the moments unchanged") {
  const System p = System::make(0.5, 0.45);
  const auto a = lindblad_evolve(p, fock_vacuum(40), 6.0, small(40)).back();
  const auto b = lindblad_evolve(p, fock_vacuum(80), 6.0, small(80)).back();
  const FockMoments ma = fock_moments(a.rho), mb = fock_moments(b.rho);
  CHECK(std::abs(ma.n - mb.n) < 1e-8);
  CHECK(std::abs(ma.a2 - mb.a2) < 1e-8);
  CHECK(std::abs(ma.nn - mb.nn) < 1e-8);
}

TEST_CASE("an undersized space is reported") {
  const System p = System::near_boundary(0.3, 0.01);
  CHECK_THROWS_AS(lindblad_evolve(p, fock_vacuum(12), 30.0, small(12)), Error);
}

TEST_CASE("generalized evolution: fidelity is symmetric, bounded, unity on the diagonal") {
  const System p = System::make(0.5, 0.45);
  const auto o = small(40);
  const auto d = generalized_me_fidelity(p, 0.5, 0.5, 5.0, o);
  for (double v : d.abs_trace) CHECK(v == doctest::Approx(1.0).epsilon(1e-10));
  const auto ab = generalized_me_fidelity(p, 0.52, 0.48, 5.0, o);
  const auto ba = generalized_me_fidelity(p, 0.48, 0.52, 5.0, o);
  for (std::size_t i = 0; i < ab.t.size(); ++i) {
    CHECK(ab.abs_trace[i] == doctest::Approx(ba.abs_trace[i]).epsilon(1e-12));
    CHECK(ab.abs_trace[i] <= 1 + 1e-12);
    if (i) CHECK(ab.abs_trace[i] <= ab.abs_trace[i - 1] + 1e-12);
  }
}

TEST_CASE("first derivative of the trace is -i times the integrated occupation") {
  const System p = System::make(0.5, 0.45);
  const double h = 1e-5;
  // d/dw1 Tr mu at w1 = w2 = w, by central difference through the generator.
  auto tr = [&](double w1) {
    FockMatrix mu = fock_vacuum(40);
    auto rhs = [&](double, const FockMatrix& m) { return generalized_generator(m, w1, 0.5, 0.45, 1.0); };
    for (int k = 0; k < 600; ++k) mu = rk4_step(rhs, 0.0, mu, 5e-3);
    return mu.trace();
  };
  const cd d = (tr(0.5 + h) - tr(0.5 - h)) / (2 * h);
  const cd expect = -cd(0, 1) * integrated_occupation(p, 3.0);
  CHECK(std::abs(d - expect) < 1e-6);
}

TEST_CASE("finite-difference QFI slope matches the analytic rate") {
  const System p = System::make(1.0, 0.9);
  FockOptions o;
  o.dim = 50;
  o.dt = 1e-2;
  o.sample_every = 100;
  const auto r = qfi_finite_difference(p, 1e-3, 40.0, o, 1);
  const double kG = qfi_rate_analytic(p).k_G;
  CHECK(r.slope == doctest::Approx(kG).epsilon(5e-3));
  CHECK(r.slope_half == doctest::Approx(kG).epsilon(5e-3));
  CHECK(r.I_G.front() == 0.0);
}
