#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "gdyne/model.hpp"

namespace gdyne {

using System = SystemParams<double>;
using Measurement = MeasurementParams<double>;

struct GaussianState {
  Vec2 r = Vec2::Zero();
  Mat2 sigma = Mat2::Identity();
  double t = 0;
};

// Measurement coupling with the eta = 0 case folded in (all gains vanish).
struct Coupling {
  Mat2 B = Mat2::Zero();
  Mat2 B2 = Mat2::Zero();
  double eta = 0;
  double kappa = 1;

  static Coupling from(const System& p, const Measurement& m);
  double noise_gain() const;   // sqrt(eta kappa / 2)
  double signal_gain() const;  // sqrt(2 kappa eta)
};

// Uniformly sampled Sigma(t) and d Sigma / d omega, read-only after construction.
struct CovarianceTable {
  double dt = 0;
  std::vector<Mat2> sigma;
  std::vector<Mat2> dsigma;

  double t_end() const { return dt * (sigma.size() - 1); }
  Mat2 sigma_at(double t) const;
  Mat2 dsigma_at(double t) const;
};

Mat2 riccati_rhs(const Mat2& A, const Mat2& D, const Coupling& c, const Mat2& S);

CovarianceTable integrate_covariance(const System& p, const Measurement& m, const Mat2& sigma0,
                                     double t_end, double dt = 1e-3);

enum class SteadyStatus { Converged, Diverged, NotConverged };
const char* to_string(SteadyStatus s);

struct SteadyResult {
  Mat2 sigma = Mat2::Identity();
  SteadyStatus status = SteadyStatus::NotConverged;
  double t = 0;  // integration time used
};

struct SteadyOptions {
  double tol = 1e-10;      // relative change per unit kappa t
  double dt = 5e-3;
  double t_max = 4000;     // in units of 1/kappa
  double blowup = 1e6;     // Sigma_p threshold
};

SteadyResult steady_covariance(const System& p, const Measurement& m,
                               const SteadyOptions& opt = {});

// Index of the scan point where [Sigma]_p peaks. Diverged points rank above
// finite ones; a grid rarely lands exactly on the divergence, so the peak of
// the finite values is the locator in practice.
std::size_t divergence_peak(const std::vector<SteadyResult>& scan);

struct Sample {
  double t;
  Vec2 r;
  Vec2 y;
  Vec2 dr;  // d r / d omega along the same record, zero unless requested
};

struct Trajectory {
  std::uint64_t seed = 0;
  double dt = 0;
  std::vector<Sample> samples;
};

struct TrajectoryOptions {
  double dt = 1e-3;
  std::size_t sample_every = 1;
  bool tangent = false;
};

// Euler-Maruyama on dr = A r dt + sqrt(eta kappa/2)(Sigma - I) B dw, with
// dy = sqrt(2 kappa eta) B r dt + dw on the same increments.
Trajectory simulate_trajectory(const System& p, const Measurement& m, const CovarianceTable& table,
                               const Vec2& r0, double t_end, std::uint64_t seed,
                               const TrajectoryOptions& opt = {});

Trajectory simulate_trajectory(const System& p, const Measurement& m, const GaussianState& state0,
                               double t_end, std::uint64_t seed, const TrajectoryOptions& opt = {});

struct EnsemblePoint {
  double t = 0;
  Vec2 mean_r = Vec2::Zero(), se_r = Vec2::Zero();
  Mat2 Err = Mat2::Zero(), se_Err = Mat2::Zero();
  Mat2 Edrr = Mat2::Zero(), se_Edrr = Mat2::Zero();
  Mat2 Edrdr = Mat2::Zero(), se_Edrdr = Mat2::Zero();
  Mat2 Ery = Mat2::Zero(), se_Ery = Mat2::Zero();
  double Eyy = 0, se_Eyy = 0;
};

struct EnsembleOptions {
  double dt = 1e-3;
  bool tangent = true;
  int threads = 0;
};

// Trajectory i uses seed base_seed + i; the reduction runs in index order, so
// results do not depend on the thread count.
std::vector<EnsemblePoint> ensemble_statistics(const System& p, const Measurement& m,
                                               const std::vector<double>& probe_times,
                                               std::size_t n_traj, std::uint64_t base_seed,
                                               const EnsembleOptions& opt = {});

}  // namespace gdyne
