#pragma once

#include <vector>

#include "gdyne/conditional.hpp"

namespace gdyne {

struct MomentSet {
  double t = 0;
  Mat2 Sigma = Mat2::Identity();
  Mat2 dSigma = Mat2::Zero();
  Mat2 Err = Mat2::Zero();
  Mat2 Edrr = Mat2::Zero();  // E[(d_omega r) r^T], not symmetric
  Mat2 Edrdr = Mat2::Zero();
  Mat2 Ery = Mat2::Zero();
  double Eyy = 0;

  MomentSet& operator+=(const MomentSet& o);
};

MomentSet operator+(MomentSet a, const MomentSet& b);
MomentSet operator*(double h, MomentSet a);

// Right-hand side of the coupled block (Riccati, d Sigma / d omega, moment ODEs).
MomentSet moment_rhs(const Mat2& A, const Mat2& D, const Coupling& c, const MomentSet& y);

// Integrates from vacuum, returning every `sample_every`-th state (and the last).
std::vector<MomentSet> evolve_moments(const System& p, const Measurement& m, double t_end,
                                      double dt = 1e-3, std::size_t sample_every = 1);

// Advances a moment state in place by `steps` RK4 steps of size dt.
void advance_moments(const Mat2& A, const Mat2& D, const Coupling& c, MomentSet& y,
                     std::size_t steps, double dt);

struct VarianceProfile {
  std::vector<double> omega;
  std::vector<double> Eyy;
  double omega_min = 0;      // parabolic refinement
  std::size_t index_min = 0; // grid argmin
};

// E[y^T y](t_probe) along omega at fixed distance deps below the boundary.
VarianceProfile photocurrent_variance_profile(const std::vector<double>& omegas, double deps,
                                              const Measurement& m, double t_probe,
                                              double kappa = 1, double dt = 1e-3,
                                              int threads = 0);

}  // namespace gdyne
