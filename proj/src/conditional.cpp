#include "gdyne/conditional.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace gdyne {

Coupling Coupling::from(const System& p, const Measurement& m) {
  Coupling c;
  c.eta = m.eta;
  c.kappa = p.kappa;
  if (m.eta > 0) {
    c.B = measurement_matrix_B(m);
    c.B2 = c.B * c.B;
  }
  return c;
}

double Coupling::noise_gain() const { return std::sqrt(eta * kappa / 2); }
double Coupling::signal_gain() const { return std::sqrt(2 * kappa * eta); }

namespace {

std::pair<std::size_t, double> locate(const CovarianceTable& tab, double t) {
  const double u = std::clamp(t / tab.dt, 0.0, double(tab.sigma.size() - 1));
  std::size_t i = static_cast<std::size_t>(u);
  if (i + 1 >= tab.sigma.size()) return {tab.sigma.size() - 1, 0.0};
  return {i, u - i};
}

struct SigmaPair {
  Mat2 S, dS;
};
SigmaPair operator+(const SigmaPair& a, const SigmaPair& b) { return {a.S + b.S, a.dS + b.dS}; }
SigmaPair operator*(double h, const SigmaPair& a) { return {h * a.S, h * a.dS}; }

}  // namespace

Mat2 CovarianceTable::sigma_at(double t) const {
  auto [i, w] = locate(*this, t);
  return w == 0 ? sigma[i] : Mat2((1 - w) * sigma[i] + w * sigma[i + 1]);
}

Mat2 CovarianceTable::dsigma_at(double t) const {
  auto [i, w] = locate(*this, t);
  return w == 0 ? dsigma[i] : Mat2((1 - w) * dsigma[i] + w * dsigma[i + 1]);
}

Mat2 riccati_rhs(const Mat2& A, const Mat2& D, const Coupling& c, const Mat2& S) {
  const Mat2 SmI = S - Mat2::Identity();
  return A * S + S * A.transpose() + D - c.eta * c.kappa * SmI * c.B2 * SmI;
}

CovarianceTable integrate_covariance(const System& p, const Measurement& m, const Mat2& sigma0,
                                     double t_end, double dt) {
  if (!(dt > 0) || !(t_end >= 0)) throw Error(ErrorKind::InvalidParameter, "need dt > 0, t_end >= 0");
  const Mat2 A = drift_matrix(p), D = diffusion_matrix(p), dA = drift_derivative();
  const Coupling c = Coupling::from(p, m);
  const Mat2 I = Mat2::Identity();

  auto rhs = [&](double, const SigmaPair& y) {
    const Mat2 At = A - c.eta * c.kappa * (y.S - I) * c.B2;
    return SigmaPair{riccati_rhs(A, D, c, y.S),
                     At * y.dS + y.dS * At.transpose() + dA * y.S + y.S * dA.transpose()};
  };

  const auto steps = static_cast<std::size_t>(std::llround(t_end / dt));
  CovarianceTable tab;
  tab.dt = dt;
  tab.sigma.reserve(steps + 1);
  tab.dsigma.reserve(steps + 1);
  SigmaPair y{symmetrized(sigma0), Mat2::Zero()};
  tab.sigma.push_back(y.S);
  tab.dsigma.push_back(y.dS);
  for (std::size_t k = 0; k < steps; ++k) {
    y = rk4_step(rhs, k * dt, y, dt);
    y.S = symmetrized(y.S);
    y.dS = symmetrized(y.dS);
    if (!(y.S.determinant() > 0) || !y.S.allFinite())
      throw Error(ErrorKind::StepTooLarge, "covariance lost positivity");
    tab.sigma.push_back(y.S);
    tab.dsigma.push_back(y.dS);
  }
  return tab;
}

const char* to_string(SteadyStatus s) {
  switch (s) {
    case SteadyStatus::Converged: return "converged";
    case SteadyStatus::Diverged: return "diverged";
    case SteadyStatus::NotConverged: return "not_converged";
  }
  return "unknown";
}

std::size_t divergence_peak(const std::vector<SteadyResult>& scan) {
  if (scan.empty()) throw Error(ErrorKind::InvalidParameter, "empty scan");
  auto key = [](const SteadyResult& r) {
    const double v = r.sigma(1, 1);
    return std::pair{r.status == SteadyStatus::Diverged, std::isfinite(v) ? v : 0.0};
  };
  std::size_t best = 0;
  for (std::size_t i = 1; i < scan.size(); ++i)
    if (key(scan[i]) > key(scan[best])) best = i;
  return best;
}

SteadyResult steady_covariance(const System& p, const Measurement& m, const SteadyOptions& opt) {
  if (p.epsilon > critical_amplitude(p.omega, p.kappa) * (1 + 1e-12))
    throw Error(ErrorKind::OutsidePhase, "epsilon above epsilon_c");
  const Mat2 A = drift_matrix(p), D = diffusion_matrix(p);
  const Coupling c = Coupling::from(p, m);
  auto rhs = [&](double, const Mat2& S) -> Mat2 { return riccati_rhs(A, D, c, S); };

  const double unit = 1.0 / p.kappa;
  const auto per_unit = static_cast<std::size_t>(std::max(1.0, std::round(unit / opt.dt)));
  const double h = unit / per_unit;
  const auto units = static_cast<std::size_t>(std::ceil(opt.t_max / unit));

  SteadyResult res;
  Mat2 S = Mat2::Identity();
  std::vector<double> sp{S(1, 1)};
  for (std::size_t u = 1; u <= units; ++u) {
    const Mat2 prev = S;
    for (std::size_t k = 0; k < per_unit; ++k) {
      S = symmetrized(rk4_step(rhs, 0.0, S, h));
      if (!(S.determinant() > 0) || !S.allFinite())
        throw Error(ErrorKind::StepTooLarge, "covariance lost positivity");
    }
    sp.push_back(S(1, 1));
    res.sigma = S;
    res.t = u * unit;
    if ((S - prev).norm() < opt.tol * S.norm()) {
      res.status = SteadyStatus::Converged;
      return res;
    }
    if (S(1, 1) > opt.blowup) {
      res.status = SteadyStatus::Diverged;
      return res;
    }
  }
  // Sustained growth test over the last 20% of the window.
  const std::size_t n = sp.size() - 1, w = std::max<std::size_t>(2, n / 5);
  const double d1 = sp[n - w / 2] - sp[n - w];
  const double d2 = sp[n] - sp[n - w / 2];
  res.status = (d1 > 0 && d2 > 0 && d2 >= 0.5 * d1) ? SteadyStatus::Diverged
                                                     : SteadyStatus::NotConverged;
  return res;
}

Trajectory simulate_trajectory(const System& p, const Measurement& m, const CovarianceTable& table,
                               const Vec2& r0, double t_end, std::uint64_t seed,
                               const TrajectoryOptions& opt) {
  if (!(m.eta > 0)) throw Error(ErrorKind::EtaZero, "trajectories need eta > 0");
  const Coupling c = Coupling::from(p, m);
  const Mat2 A = drift_matrix(p), dA = drift_derivative(), I = Mat2::Identity();
  const double dt = opt.dt, sq = std::sqrt(dt);
  const double gn = c.noise_gain(), gs = c.signal_gain();
  const bool aligned = std::abs(table.dt - dt) < 1e-15 * dt;
  const auto steps = static_cast<std::size_t>(std::llround(t_end / dt));
  if (table.t_end() < t_end - 0.5 * dt)
    throw Error(ErrorKind::InvalidParameter, "covariance table shorter than trajectory");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;

  Trajectory tr;
  tr.seed = seed;
  tr.dt = dt;
  tr.samples.reserve(steps / std::max<std::size_t>(1, opt.sample_every) + 2);
  Vec2 r = r0, y = Vec2::Zero(), dr = Vec2::Zero();
  tr.samples.push_back({0.0, r, y, dr});
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = k * dt;
    const Mat2 S = aligned ? table.sigma[k] : table.sigma_at(t);
    const Vec2 dw(sq * normal(rng), sq * normal(rng));
    const Mat2 K = gn * (S - I) * c.B;
    Vec2 r_next = r + A * r * dt + K * dw;
    if (opt.tangent) {
      const Mat2 dS = aligned ? table.dsigma[k] : table.dsigma_at(t);
      const Mat2 At = A - c.eta * c.kappa * (S - I) * c.B2;
      dr = dr + (dA * r + At * dr) * dt + gn * dS * c.B * dw;
    }
    y += gs * c.B * r * dt + dw;
    r = r_next;
    if ((k + 1) % opt.sample_every == 0 || k + 1 == steps)
      tr.samples.push_back({(k + 1) * dt, r, y, dr});
  }
  return tr;
}

Trajectory simulate_trajectory(const System& p, const Measurement& m, const GaussianState& state0,
                               double t_end, std::uint64_t seed, const TrajectoryOptions& opt) {
  if (!(m.eta > 0)) throw Error(ErrorKind::EtaZero, "trajectories need eta > 0");
  const CovarianceTable tab = integrate_covariance(p, m, state0.sigma, t_end, opt.dt);
  return simulate_trajectory(p, m, tab, state0.r, t_end, seed, opt);
}

std::vector<EnsemblePoint> ensemble_statistics(const System& p, const Measurement& m,
                                               const std::vector<double>& probe_times,
                                               std::size_t n_traj, std::uint64_t base_seed,
                                               const EnsembleOptions& opt) {
  if (n_traj < 2) throw Error(ErrorKind::InvalidParameter, "ensemble needs >= 2 trajectories");
  if (probe_times.empty()) throw Error(ErrorKind::InvalidParameter, "no probe times");
  const double t_end = *std::max_element(probe_times.begin(), probe_times.end());
  const CovarianceTable tab = integrate_covariance(p, m, Mat2::Identity(), t_end, opt.dt);

  std::vector<std::size_t> idx;
  for (double t : probe_times) idx.push_back(static_cast<std::size_t>(std::llround(t / opt.dt)));

  // per trajectory, per probe: r(2) rr(4) drr(4) drdr(4) ry(4) yy(1)
  constexpr int W = 19;
  const std::size_t P = probe_times.size();
  std::vector<double> rows(n_traj * P * W);
  TrajectoryOptions to;
  to.dt = opt.dt;
  to.tangent = opt.tangent;
  parallel_for(n_traj, resolve_threads(opt.threads), [&](std::size_t i) {
    const Trajectory tr = simulate_trajectory(p, m, tab, Vec2::Zero(), t_end, base_seed + i, to);
    for (std::size_t j = 0; j < P; ++j) {
      const Sample& s = tr.samples[std::min(idx[j], tr.samples.size() - 1)];
      double* out = &rows[(i * P + j) * W];
      const Mat2 rr = s.r * s.r.transpose(), drr = s.dr * s.r.transpose();
      const Mat2 dd = s.dr * s.dr.transpose(), ry = s.r * s.y.transpose();
      out[0] = s.r(0);
      out[1] = s.r(1);
      for (int q = 0; q < 4; ++q) {
        out[2 + q] = rr(q);
        out[6 + q] = drr(q);
        out[10 + q] = dd(q);
        out[14 + q] = ry(q);
      }
      out[18] = s.y.squaredNorm();
    }
  });

  std::vector<EnsemblePoint> pts(P);
  const double N = static_cast<double>(n_traj);
  for (std::size_t j = 0; j < P; ++j) {
    double mean[W] = {0}, sq[W] = {0};
    for (std::size_t i = 0; i < n_traj; ++i) {
      const double* v = &rows[(i * P + j) * W];
      for (int q = 0; q < W; ++q) mean[q] += v[q];
    }
    for (int q = 0; q < W; ++q) mean[q] /= N;
    for (std::size_t i = 0; i < n_traj; ++i) {
      const double* v = &rows[(i * P + j) * W];
      for (int q = 0; q < W; ++q) sq[q] += (v[q] - mean[q]) * (v[q] - mean[q]);
    }
    double se[W];
    for (int q = 0; q < W; ++q) se[q] = std::sqrt(sq[q] / (N - 1) / N);
    EnsemblePoint& e = pts[j];
    e.t = idx[j] * opt.dt;
    e.mean_r = Vec2(mean[0], mean[1]);
    e.se_r = Vec2(se[0], se[1]);
    for (int q = 0; q < 4; ++q) {
      e.Err(q) = mean[2 + q];
      e.se_Err(q) = se[2 + q];
      e.Edrr(q) = mean[6 + q];
      e.se_Edrr(q) = se[6 + q];
      e.Edrdr(q) = mean[10 + q];
      e.se_Edrdr(q) = se[10 + q];
      e.Ery(q) = mean[14 + q];
      e.se_Ery(q) = se[14 + q];
    }
    e.Eyy = mean[18];
    e.se_Eyy = se[18];
  }
  return pts;
}

}  // namespace gdyne
