#include "gdyne/moments.hpp"

#include <cmath>

namespace gdyne {

MomentSet& MomentSet::operator+=(const MomentSet& o) {
  Sigma += o.Sigma;
  dSigma += o.dSigma;
  Err += o.Err;
  Edrr += o.Edrr;
  Edrdr += o.Edrdr;
  Ery += o.Ery;
  Eyy += o.Eyy;
  return *this;
}

MomentSet operator+(MomentSet a, const MomentSet& b) { return a += b; }

MomentSet operator*(double h, MomentSet a) {
  a.Sigma *= h;
  a.dSigma *= h;
  a.Err *= h;
  a.Edrr *= h;
  a.Edrdr *= h;
  a.Ery *= h;
  a.Eyy *= h;
  return a;
}

MomentSet moment_rhs(const Mat2& A, const Mat2& D, const Coupling& c, const MomentSet& y) {
  const Mat2 I = Mat2::Identity();
  const Mat2 dA = drift_derivative();
  const double ek = c.eta * c.kappa;
  const Mat2 SmI = y.Sigma - I;
  const Mat2 At = A - ek * SmI * c.B2;
  const Mat2 dSB2 = y.dSigma * c.B2;

  MomentSet d;
  d.Sigma = A * y.Sigma + y.Sigma * A.transpose() + D - ek * SmI * c.B2 * SmI;
  d.dSigma = At * y.dSigma + y.dSigma * At.transpose() + dA * y.Sigma + y.Sigma * dA.transpose();
  d.Err = A * y.Err + y.Err * A.transpose() + 0.5 * ek * SmI * c.B2 * SmI;
  d.Edrr = dA * y.Err + At * y.Edrr + y.Edrr * A.transpose() + 0.5 * ek * dSB2 * SmI;
  d.Edrdr = dA * y.Edrr.transpose() + At * y.Edrdr + y.Edrr * dA.transpose() +
            y.Edrdr * At.transpose() + 0.5 * ek * dSB2 * y.dSigma;
  d.Ery = A * y.Ery + c.signal_gain() * y.Err * c.B + c.noise_gain() * SmI * c.B;
  d.Eyy = 2 * c.signal_gain() * (c.B * y.Ery).trace() + 2;
  return d;
}

void advance_moments(const Mat2& A, const Mat2& D, const Coupling& c, MomentSet& y,
                     std::size_t steps, double dt) {
  auto rhs = [&](double, const MomentSet& s) { return moment_rhs(A, D, c, s); };
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = y.t;
    y = rk4_step(rhs, t, y, dt);
    y.t = t + dt;
    y.Sigma = symmetrized(y.Sigma);
    y.dSigma = symmetrized(y.dSigma);
    y.Err = symmetrized(y.Err);
    y.Edrdr = symmetrized(y.Edrdr);
    if (!y.Sigma.allFinite() || !y.Edrdr.allFinite() || !std::isfinite(y.Eyy))
      throw Error(ErrorKind::StepTooLarge, "moment integration produced non-finite values");
  }
}

std::vector<MomentSet> evolve_moments(const System& p, const Measurement& m, double t_end,
                                      double dt, std::size_t sample_every) {
  if (!(dt > 0) || !(t_end >= 0)) throw Error(ErrorKind::InvalidParameter, "need dt > 0, t_end >= 0");
  require_normal_phase(p);
  if (sample_every == 0) sample_every = 1;
  const Mat2 A = drift_matrix(p), D = diffusion_matrix(p);
  const Coupling c = Coupling::from(p, m);
  const auto steps = static_cast<std::size_t>(std::llround(t_end / dt));

  std::vector<MomentSet> out;
  MomentSet y;
  out.push_back(y);
  std::size_t done = 0;
  while (done < steps) {
    const std::size_t n = std::min(sample_every, steps - done);
    advance_moments(A, D, c, y, n, dt);
    y.t = (done + n) * dt;
    done += n;
    out.push_back(y);
  }
  return out;
}

VarianceProfile photocurrent_variance_profile(const std::vector<double>& omegas, double deps,
                                              const Measurement& m, double t_probe, double kappa,
                                              double dt, int threads) {
  if (omegas.empty()) throw Error(ErrorKind::InvalidParameter, "empty omega grid");
  VarianceProfile prof;
  prof.omega = omegas;
  prof.Eyy.assign(omegas.size(), 0.0);
  parallel_for(omegas.size(), resolve_threads(threads), [&](std::size_t i) {
    const System p = System::near_boundary(omegas[i], deps, kappa);
    const auto steps = static_cast<std::size_t>(std::llround(t_probe / dt));
    MomentSet y;
    advance_moments(drift_matrix(p), diffusion_matrix(p), Coupling::from(p, m), y, steps, dt);
    prof.Eyy[i] = y.Eyy;
  });
  prof.omega_min = parabolic_argmin(prof.omega, prof.Eyy, &prof.index_min);
  return prof;
}

}  // namespace gdyne
