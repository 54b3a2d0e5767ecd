#pragma once

#include <string>
#include <vector>

#include "gdyne/moments.hpp"

namespace gdyne {

struct FisherOptions {
  double dt = 5e-3;
  double t_end = 200;        // span of the returned F(t) series
  double rel_tol = 1e-8;     // per unit kappa t, on tr(B^2 Edrdr)
  double t_max = 20000;      // horizon for the stationarity search
  std::size_t sample_every = 20;
};

struct FisherResult {
  std::vector<double> t;
  std::vector<double> F;
  double k_F = 0;           // 2 eta kappa tr(B^2 Edrdr_ss)
  double k_F_fit = 0;       // late-window slope of F(t)
  double fit_r2 = 0;
  double fit_t_lo = 0, fit_t_hi = 0;
  double t_converged = 0;
  bool converged = false;
};

FisherResult fisher_information(const System& p, const Measurement& m,
                                const FisherOptions& opt = {});

// Growth rate only; NotConverged is raised if stationarity is not reached.
double fisher_rate(const System& p, const Measurement& m, const FisherOptions& opt = {});

struct TracePoint {
  double s, phi, k_F;
  bool simplex;  // false for grid cells
};

struct OptimizeOptions {
  int grid_phi = 25;
  int grid_s = 11;
  double phi_lo = 0;  // open end of the search box
  double phi_hi = 0;  // 0 means pi/4
  int budget = 200;
  int threads = 0;
  FisherOptions fisher;
};

struct OptimizationResult {
  double s_opt = 0, phi_opt = 0, k_F_opt = 0;
  bool s_at_clamp = false;
  std::vector<TracePoint> trace;
};

OptimizationResult optimize_measurement(const System& p, double eta,
                                        const OptimizeOptions& opt = {});

struct LandscapeCell {
  double omega, epsilon, k_F;
  bool ok;
  std::string status;
};

// Row-major over (eps index, omega index).
std::vector<LandscapeCell> kf_landscape(const std::vector<double>& omegas,
                                        const std::vector<double>& epsilons,
                                        const Measurement& m, double kappa = 1,
                                        const FisherOptions& opt = {}, int threads = 0);

}  // namespace gdyne
