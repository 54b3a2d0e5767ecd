#include "gdyne/qfi.hpp"

#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace gdyne {

namespace {

constexpr cd I1{0.0, 1.0};

void check_spectrum(const SystemParams<double>& p) {
  p.validate();
  if (std::abs(p.epsilon - p.omega) < 1e-9 * p.kappa)
    throw Error(ErrorKind::DegenerateSpectrum, "epsilon == omega (lambda_+ == lambda_-)");
}

// (1 - e^{-z t}) / z and (z t - 1 + e^{-z t}) / z^2 with their z -> 0 limits.
cd phi1(cd z, double t) {
  return std::abs(z * t) < 1e-8 ? cd(t) : (1.0 - std::exp(-z * t)) / z;
}
cd phi2(cd z, double t) {
  return std::abs(z * t) < 1e-5 ? cd(0.5 * t * t) : (z * t - 1.0 + std::exp(-z * t)) / (z * z);
}

struct Pieces {
  double P, Q, intP, intQ;  // n = |g|^2 (P + kappa Q)
  cd U, V;                  // a2 = g (U + kappa V)
};

Pieces pieces(const LangevinCoefficients& c, double t) {
  const cd lm = c.lambda_minus, lp = c.lambda_plus;
  const double rm = 2 * lm.real(), rp = 2 * lp.real();
  const cd z = lm + std::conj(lp);
  Pieces q;
  q.P = std::exp(-rm * t) + std::exp(-rp * t) - 2 * std::exp(-z * t).real();
  q.Q = phi1(rm, t).real() + phi1(rp, t).real() - 2 * phi1(z, t).real();
  q.intP = q.Q;
  q.intQ = phi2(rm, t).real() + phi2(rp, t).real() - 2 * phi2(z, t).real();
  const cd a = c.alpha_c, b = c.beta_c;
  q.U = a * std::exp(-2.0 * lm * t) - b * std::exp(-2.0 * lp * t) - (a - b) * std::exp(-(lm + lp) * t);
  q.V = a * phi1(2.0 * lm, t) - b * phi1(2.0 * lp, t) - (a - b) * phi1(lm + lp, t);
  return q;
}

}  // namespace

LangevinCoefficients langevin_coefficients(const SystemParams<double>& p) {
  check_spectrum(p);
  LangevinCoefficients c;
  c.root = std::sqrt(cd(p.epsilon * p.epsilon - p.omega * p.omega));
  c.lambda_minus = p.kappa / 2 - c.root;
  c.lambda_plus = p.kappa / 2 + c.root;
  c.alpha_c = 0.5 - I1 * p.omega / (2.0 * c.root);
  c.beta_c = 0.5 + I1 * p.omega / (2.0 * c.root);
  c.gamma_c = -I1 * p.epsilon / (2.0 * c.root);
  return c;
}

LangevinMoments langevin_moments(const SystemParams<double>& p, double t) {
  const LangevinCoefficients c = langevin_coefficients(p);
  const Pieces q = pieces(c, t);
  const double g2 = std::norm(c.gamma_c);
  return {g2 * (q.P + p.kappa * q.Q), c.gamma_c * (q.U + p.kappa * q.V)};
}

double integrated_occupation(const SystemParams<double>& p, double t) {
  const LangevinCoefficients c = langevin_coefficients(p);
  const Pieces q = pieces(c, t);
  return std::norm(c.gamma_c) * (q.intP + p.kappa * q.intQ);
}

WickMoments wick_fourth_moments(double n, cd a2, cd adag2) {
  return {2 * n * n + n + (adag2 * a2).real(), 3.0 * n * adag2, 3.0 * n * a2};
}

Eigen::Vector3cd qfi_source(const SystemParams<double>& p, double t) {
  const LangevinMoments mo = langevin_moments(p, t);
  const cd ad2 = std::conj(mo.a2);
  const WickMoments w = wick_fourth_moments(mo.n, mo.a2, ad2);
  const cd tr_dmu = 2.0 * I1 * integrated_occupation(p, t);
  return {cd(w.nn), w.adag3a + w.adaga3 + ad2 + mo.a2,
          w.adag3a - w.adaga3 + ad2 - mo.a2 + p.epsilon * tr_dmu};
}

KgComponents qfi_rate_analytic(const SystemParams<double>& p) {
  p.validate();
  if (!(p.epsilon < critical_amplitude(p.omega, p.kappa) * (1 - 1e-12)))
    throw Error(ErrorKind::OnBoundary, "k_G requires epsilon < epsilon_c");
  const LangevinCoefficients c = langevin_coefficients(p);
  const double k = p.kappa, w = p.omega, e = p.epsilon;
  const cd lm = c.lambda_minus, lp = c.lambda_plus, r = c.root;
  const cd a = c.alpha_c, b = c.beta_c, g = c.gamma_c;
  const double g2 = std::norm(g);
  const double E = e * e - w * w;
  const cd kp = k + 2.0 * r, km = k - 2.0 * r;

  KgComponents out;
  const cd z = lm + std::conj(lp), zc = std::conj(lm) + lp;
  out.Lambda1 = 1.0 / (2 * lm.real()) + 1.0 / (2 * lp.real()) - 1.0 / z - 1.0 / zc;
  out.Lambda2 = a / (2.0 * lm) - b / (2.0 * lp) - (a - b) / (lm + lp);
  out.Lambda3 = 1.0 / (4 * lm.real() * lm.real()) + 1.0 / (4 * lp.real() * lp.real()) -
                1.0 / (z * z) - 1.0 / (zc * zc);
  const cd L1 = out.Lambda1, L3 = out.Lambda3, gL2 = g * out.Lambda2;

  // Printed form corrected: |gamma|^4 on the Lambda1^2 term, no kappa on the
  // second kG2 term (both checked against the truncated-Fock slope).
  out.kG1 = 4 * g2 * g2 / E * (4 * w * w * k - 2 * e * e * k * k / kp - 2 * e * e * k * k / km) * L1 * L1 +
            4 * g2 / E * (2 * w * w - e * e * k / kp - e * e * k / km) * L1 +
            4 * g2 / E * (2 * w * w * k - e * e * k * k / kp - e * e * k * k / km) * std::norm(out.Lambda2);
  out.kG2 = 4 * w * e * k * g2 / E * (6.0 - 3 * k / kp - 3 * k / km) * L1 * gL2.real() +
            4 * w * e / E * (2.0 - k / kp - k / km) * gL2.real();
  out.kG3 = -12 * e * k * k * g2 / r * (1.0 / kp - 1.0 / km) * L1 * gL2.imag() -
            4 * e * k / r * (1.0 / kp - 1.0 / km) * gL2.imag() +
            4 * e * e * g2 / r * (1.0 / kp - 1.0 / km) * (L1 - k * L3) -
            4 * e * e * k * g2 / r * (1.0 / (kp * kp) - 1.0 / (km * km)) * L1;
  out.kG4 = -8 * k * g2 * g2 * (L1 - k * L3) * L1;
  const cd total = -out.kG1 - out.kG2 - out.kG3 + out.kG4;
  if (std::abs(total.imag()) > 1e-8 * std::abs(total.real()) + 1e-14)
    throw Error(ErrorKind::ImaginaryResidue, "k_G has a non-negligible imaginary part");
  out.k_G = total.real();
  return out;
}

QfiSeries qfi_time_domain(const SystemParams<double>& p, const std::vector<double>& times,
                          double tol) {
  if (!(p.epsilon < critical_amplitude(p.omega, p.kappa) * (1 - 1e-12)))
    throw Error(ErrorKind::OnBoundary, "I_G requires epsilon < epsilon_c");
  const LangevinCoefficients c = langevin_coefficients(p);
  const double k = p.kappa, w = p.omega, e = p.epsilon;
  Eigen::Matrix3cd M;
  M << -k, 0, -I1 * e, 0, -k, 2.0 * I1 * w, 4.0 * I1 * e, 2.0 * I1 * w, -k;
  const Eigen::Matrix3cd N = M + k * Eigen::Matrix3cd::Identity();
  const Eigen::Matrix3cd N2 = N * N;
  const Eigen::RowVector3cd m0 = M.inverse().row(0);
  const cd r = c.root, E = e * e - w * w;

  // Row 0 of M^{-1}(e^{Mx} - I); e^{Nx} = I + sinh(2rx)/(2r) N + (cosh(2rx)-1)/(4E) N^2.
  auto kernel = [&](double x) -> Eigen::RowVector3cd {
    const cd sh = std::sinh(2.0 * r * x) / (2.0 * r);
    const cd ch = (std::cosh(2.0 * r * x) - 1.0) / (4.0 * E);
    const Eigen::Matrix3cd eMx =
        std::exp(-k * x) * (Eigen::Matrix3cd::Identity() + sh * N + ch * N2);
    return m0 * (eMx - Eigen::Matrix3cd::Identity());
  };

  QfiSeries out;
  for (double t : times) {
    double re = 0, err_total = 0, l1 = 0;
    auto integrand = [&](double tau) { return (kernel(t - tau) * qfi_source(p, tau)).value().real(); };
    const int segments = std::max(1, static_cast<int>(std::ceil(t / 5.0)));
    for (int s = 0; s < segments && t > 0; ++s) {
      const double lo = t * s / segments, hi = t * (s + 1) / segments;
      double err = 0, L1 = 0;
      re += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, lo, hi, 15,
                                                                          tol, &err, &L1);
      err_total += err;
      l1 += L1;
    }
    if (err_total > 1e-8 * std::max(l1, 1e-300) && err_total > 1e-12)
      throw Error(ErrorKind::QuadratureError, "adaptive quadrature missed its tolerance");
    const double tr2_re = -8 * re;
    const double n_int = integrated_occupation(p, t);
    out.t.push_back(t);
    out.I_G.push_back(-tr2_re - 4 * n_int * n_int);
  }
  return out;
}

}  // namespace gdyne
