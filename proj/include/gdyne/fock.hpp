#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "gdyne/model.hpp"

namespace gdyne {

using FockMatrix = Eigen::MatrixXcd;

FockMatrix fock_vacuum(int dim);

struct FockOptions {
  int dim = 60;
  double dt = 5e-3;
  std::size_t sample_every = 20;
  double truncation_tol = 1e-8;  // population of the top two levels
};

struct FockSample {
  double t;
  FockMatrix rho;
};

// d mu/dt = -i(H1 mu - mu H2) + kappa D[a] mu with H = omega a^dag a + eps/2 (a^2 + a^dag^2).
FockMatrix generalized_generator(const FockMatrix& mu, double omega1, double omega2,
                                 double epsilon, double kappa);

std::vector<FockSample> lindblad_evolve(const SystemParams<double>& p, const FockMatrix& rho0,
                                        double t_end, const FockOptions& opt = {});

struct FockMoments {
  double n = 0;
  std::complex<double> a2;
  double nn = 0;
  std::complex<double> adag3a, adaga3;
};

FockMoments fock_moments(const FockMatrix& rho);

struct FidelitySeries {
  std::vector<double> t;
  std::vector<double> abs_trace;
};

FidelitySeries generalized_me_fidelity(const SystemParams<double>& p, double omega1, double omega2,
                                       double t_end, const FockOptions& opt = {});

struct FdQfiResult {
  std::vector<double> t;
  std::vector<double> I_G;       // step h
  std::vector<double> I_G_half;  // step h/2
  double slope = 0, slope_half = 0, r2 = 0;
};

// 4 d_{w1} d_{w2} ln|Tr mu| by the four-point stencil at steps h and h/2.
FdQfiResult qfi_finite_difference(const SystemParams<double>& p, double h, double t_end,
                                  const FockOptions& opt = {}, int threads = 0);

}  // namespace gdyne
