#pragma once

#include <complex>
#include <vector>

#include "gdyne/model.hpp"

namespace gdyne {

using cd = std::complex<double>;

struct LangevinCoefficients {
  cd root;  // sqrt(eps^2 - omega^2), principal branch
  cd lambda_minus, lambda_plus;
  cd alpha_c, beta_c, gamma_c;
};

LangevinCoefficients langevin_coefficients(const SystemParams<double>& p);

struct LangevinMoments {
  double n = 0;  // <a^dag a>
  cd a2;         // <a^2>
};

// Closed forms for the vacuum-evolved unconditional state.
LangevinMoments langevin_moments(const SystemParams<double>& p, double t);

// Integral of <a^dag a> over [0, t], so that Tr[d mu] = 2i * this.
double integrated_occupation(const SystemParams<double>& p, double t);

struct WickMoments {
  double nn = 0;   // <(a^dag a)^2>
  cd adag3a;       // <a^dag^3 a>
  cd adaga3;       // <a^dag a^3>
};

WickMoments wick_fourth_moments(double n, cd a2, cd adag2);

// Source vector f(t) of the d mu moment equations.
Eigen::Vector3cd qfi_source(const SystemParams<double>& p, double t);

struct KgComponents {
  cd Lambda1, Lambda2, Lambda3;
  cd kG1, kG2, kG3, kG4;
  double k_G = 0;
};

KgComponents qfi_rate_analytic(const SystemParams<double>& p);

struct QfiSeries {
  std::vector<double> t;
  std::vector<double> I_G;
};

// I_G(t) = -Re(Tr d^2 mu - (Tr d mu)^2) on the requested times.
QfiSeries qfi_time_domain(const SystemParams<double>& p, const std::vector<double>& times,
                          double tol = 1e-10);

}  // namespace gdyne
