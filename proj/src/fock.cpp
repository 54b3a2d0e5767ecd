#include "gdyne/fock.hpp"

#include <cmath>

namespace gdyne {

namespace {

constexpr std::complex<double> kI{0.0, 1.0};

void check_truncation(const FockMatrix& mu, double tol) {
  const int N = static_cast<int>(mu.rows());
  const double top = std::abs(mu(N - 1, N - 1)) + std::abs(mu(N - 2, N - 2));
  if (!(top < tol)) throw Error(ErrorKind::TruncationError, "top Fock levels populated; raise dim");
}

template <typename Sink>
void integrate(const FockMatrix& mu0, double w1, double w2, double eps, double kappa, double t_end,
               const FockOptions& opt, Sink&& sink) {
  if (opt.dim < 2) throw Error(ErrorKind::InvalidParameter, "Fock dimension must be >= 2");
  auto rhs = [&](double, const FockMatrix& m) { return generalized_generator(m, w1, w2, eps, kappa); };
  const auto steps = static_cast<std::size_t>(std::llround(t_end / opt.dt));
  const std::size_t every = std::max<std::size_t>(1, opt.sample_every);
  FockMatrix mu = mu0;
  sink(0.0, mu);
  for (std::size_t k = 1; k <= steps; ++k) {
    mu = rk4_step(rhs, 0.0, mu, opt.dt);
    if (k % every == 0 || k == steps) {
      check_truncation(mu, opt.truncation_tol);
      sink(k * opt.dt, mu);
    }
  }
}

}  // namespace

FockMatrix fock_vacuum(int dim) {
  FockMatrix v = FockMatrix::Zero(dim, dim);
  v(0, 0) = 1;
  return v;
}

FockMatrix generalized_generator(const FockMatrix& mu, double w1, double w2, double eps,
                                 double kappa) {
  const int N = static_cast<int>(mu.rows());
  std::vector<double> sq(N + 2);
  for (int j = 0; j < N + 2; ++j) sq[j] = std::sqrt(double(j));
  FockMatrix out(N, N);
  const double he = 0.5 * eps;
  for (int k = 0; k < N; ++k) {
    for (int j = 0; j < N; ++j) {
      const std::complex<double> m = mu(j, k);
      // (H1 mu)_jk
      std::complex<double> h1 = w1 * j * m;
      if (j + 2 < N) h1 += he * sq[j + 1] * sq[j + 2] * mu(j + 2, k);
      if (j >= 2) h1 += he * sq[j] * sq[j - 1] * mu(j - 2, k);
      // (mu H2)_jk
      std::complex<double> h2 = w2 * k * m;
      if (k >= 2) h2 += he * sq[k] * sq[k - 1] * mu(j, k - 2);
      if (k + 2 < N) h2 += he * sq[k + 1] * sq[k + 2] * mu(j, k + 2);
      std::complex<double> d = -0.5 * (j + k) * m;
      if (j + 1 < N && k + 1 < N) d += sq[j + 1] * sq[k + 1] * mu(j + 1, k + 1);
      out(j, k) = -kI * (h1 - h2) + kappa * d;
    }
  }
  return out;
}

std::vector<FockSample> lindblad_evolve(const SystemParams<double>& p, const FockMatrix& rho0,
                                        double t_end, const FockOptions& opt) {
  p.validate();
  if (rho0.rows() != opt.dim || rho0.cols() != opt.dim)
    throw Error(ErrorKind::InvalidParameter, "rho0 does not match the Fock dimension");
  std::vector<FockSample> out;
  integrate(rho0, p.omega, p.omega, p.epsilon, p.kappa, t_end, opt,
            [&](double t, const FockMatrix& m) { out.push_back({t, m}); });
  return out;
}

FockMoments fock_moments(const FockMatrix& rho) {
  const int N = static_cast<int>(rho.rows());
  FockMoments m;
  // <O> = Tr(O rho) = sum_{j,k} O_kj rho_jk
  for (int j = 0; j < N; ++j) {
    m.n += j * rho(j, j).real();
    m.nn += double(j) * j * rho(j, j).real();
    if (j + 2 < N) {
      const double c = std::sqrt(double(j + 1) * (j + 2));  // <j|a^2|j+2>
      m.a2 += c * rho(j + 2, j);
      m.adaga3 += double(j) * c * rho(j + 2, j);  // a^dag a^3 = n a^2
      m.adag3a += double(j) * c * rho(j, j + 2);
    }
  }
  return m;
}

FidelitySeries generalized_me_fidelity(const SystemParams<double>& p, double omega1, double omega2,
                                       double t_end, const FockOptions& opt) {
  p.validate();
  FidelitySeries out;
  integrate(fock_vacuum(opt.dim), omega1, omega2, p.epsilon, p.kappa, t_end, opt,
            [&](double t, const FockMatrix& m) {
              out.t.push_back(t);
              out.abs_trace.push_back(std::abs(m.trace()));
            });
  return out;
}

FdQfiResult qfi_finite_difference(const SystemParams<double>& p, double h, double t_end,
                                  const FockOptions& opt, int threads) {
  p.validate();
  if (!(h > 0)) throw Error(ErrorKind::InvalidParameter, "stencil step must be positive");
  const double w = p.omega;
  // (w1, w2) offsets for the two stencils: ++, +-, -+, --
  const double sign[4][2] = {{1, 1}, {1, -1}, {-1, 1}, {-1, -1}};
  std::vector<FidelitySeries> runs(8);
  parallel_for(8, resolve_threads(threads), [&](std::size_t i) {
    const double hh = i < 4 ? h : 0.5 * h;
    const auto& sg = sign[i % 4];
    runs[i] = generalized_me_fidelity(p, w + sg[0] * hh, w + sg[1] * hh, t_end, opt);
  });
  FdQfiResult res;
  res.t = runs[0].t;
  for (std::size_t k = 0; k < res.t.size(); ++k) {
    auto stencil = [&](int off, double hh) {
      const double l = std::log(runs[off + 0].abs_trace[k]) - std::log(runs[off + 1].abs_trace[k]) -
                       std::log(runs[off + 2].abs_trace[k]) + std::log(runs[off + 3].abs_trace[k]);
      return 4 * l / (4 * hh * hh);
    };
    res.I_G.push_back(stencil(0, h));
    res.I_G_half.push_back(stencil(4, 0.5 * h));
  }
  const LinearFit f = late_window_fit(res.t, res.I_G, 0.25);
  const LinearFit fh = late_window_fit(res.t, res.I_G_half, 0.25);
  res.slope = f.slope;
  res.slope_half = fh.slope;
  res.r2 = f.r2;
  const double a = res.I_G.back(), b = res.I_G_half.back();
  if (std::abs(a - b) > 0.01 * std::abs(a))
    throw Error(ErrorKind::StencilUnstable, "halving the stencil step moved I_G by more than 1%");
  return res;
}

}  // namespace gdyne
