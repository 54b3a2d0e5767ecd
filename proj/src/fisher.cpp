#include "gdyne/fisher.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

namespace gdyne {

namespace {

struct RateTracker {
  double rel_tol;
  double last_unit = std::numeric_limits<double>::quiet_NaN();
  int streak = 0;

  // Called once per unit of kappa t with the current integrand.
  bool update(double k) {
    const bool ok = std::isfinite(last_unit) &&
                    std::abs(k - last_unit) <= rel_tol * std::max(std::abs(k), 1e-300);
    const bool both_zero = last_unit == 0 && k == 0;
    streak = (ok || both_zero) ? streak + 1 : 0;
    last_unit = k;
    return streak >= 2;
  }
};

}  // namespace

FisherResult fisher_information(const System& p, const Measurement& m, const FisherOptions& opt) {
  require_normal_phase(p);
  const Mat2 A = drift_matrix(p), D = diffusion_matrix(p);
  const Coupling c = Coupling::from(p, m);
  const double pref = 2 * c.eta * c.kappa;
  const double unit = 1.0 / p.kappa;
  const auto per_unit = static_cast<std::size_t>(std::max(1.0, std::round(unit / opt.dt)));
  const double h = unit / per_unit;
  const std::size_t every = std::max<std::size_t>(1, opt.sample_every);

  FisherResult res;
  MomentSet y;
  double F = 0, g = 0;
  res.t.push_back(0);
  res.F.push_back(0);
  RateTracker tracker{opt.rel_tol};
  std::size_t k = 0;
  const auto t_end_steps = static_cast<std::size_t>(std::llround(opt.t_end / h));
  const auto max_steps = static_cast<std::size_t>(std::llround(std::max(opt.t_max, opt.t_end) / h));
  while (k < max_steps) {
    advance_moments(A, D, c, y, 1, h);
    ++k;
    const double g_new = pref * (c.B2 * y.Edrdr).trace();
    F += 0.5 * h * (g + g_new);
    g = g_new;
    if (k % every == 0) {
      res.t.push_back(k * h);
      res.F.push_back(F);
    }
    if (k % per_unit == 0 && !res.converged && tracker.update(g)) {
      res.converged = true;
      res.t_converged = k * h;
      res.k_F = g;
    }
    if (res.converged && k >= t_end_steps && k % every == 0) break;
  }
  if (!res.converged) res.k_F = g;
  const LinearFit fit = late_window_fit(res.t, res.F, 0.25);
  res.k_F_fit = fit.slope;
  res.fit_r2 = fit.r2;
  res.fit_t_lo = fit.t_lo;
  res.fit_t_hi = fit.t_hi;
  return res;
}

double fisher_rate(const System& p, const Measurement& m, const FisherOptions& opt) {
  require_normal_phase(p);
  const Mat2 A = drift_matrix(p), D = diffusion_matrix(p);
  const Coupling c = Coupling::from(p, m);
  const double pref = 2 * c.eta * c.kappa;
  const double unit = 1.0 / p.kappa;
  const auto per_unit = static_cast<std::size_t>(std::max(1.0, std::round(unit / opt.dt)));
  const auto units = static_cast<std::size_t>(std::ceil(opt.t_max / unit));
  MomentSet y;
  RateTracker tracker{opt.rel_tol};
  for (std::size_t u = 0; u < units; ++u) {
    advance_moments(A, D, c, y, per_unit, unit / per_unit);
    const double g = pref * (c.B2 * y.Edrdr).trace();
    if (tracker.update(g)) return g;
  }
  throw Error(ErrorKind::NotConverged, "Edrdr did not become stationary before t_max");
}

namespace {

struct Box {
  double phi_lo, phi_hi;
  std::array<double, 2> clamp(std::array<double, 2> x) const {
    x[0] = std::clamp(x[0], phi_lo, phi_hi);
    x[1] = std::clamp(x[1], 0.0, 1.0);
    return x;
  }
};

}  // namespace

OptimizationResult optimize_measurement(const System& p, double eta, const OptimizeOptions& opt) {
  require_normal_phase(p);
  const double phi_hi = opt.phi_hi > 0 ? opt.phi_hi : std::numbers::pi / 4;
  const double span = phi_hi - opt.phi_lo;
  const Box box{opt.phi_lo + 1e-9 * span, phi_hi};
  const int gp = std::max(2, opt.grid_phi), gs = std::max(2, opt.grid_s);

  auto eval = [&](double phi, double s) {
    try {
      return fisher_rate(p, Measurement::make(s, phi, eta), opt.fisher);
    } catch (const Error&) {
      return -std::numeric_limits<double>::infinity();
    }
  };

  OptimizationResult res;
  const std::size_t ncell = static_cast<std::size_t>(gp) * gs;
  std::vector<TracePoint> grid(ncell);
  parallel_for(ncell, resolve_threads(opt.threads), [&](std::size_t i) {
    const int ip = static_cast<int>(i) / gs, is = static_cast<int>(i) % gs;
    const double phi = opt.phi_lo + span * (ip + 1) / gp;  // (lo, hi]
    const double s = double(is) / (gs - 1);
    grid[i] = {s, phi, eval(phi, s), false};
  });
  res.trace = grid;
  const auto best = std::max_element(grid.begin(), grid.end(),
                                     [](const TracePoint& a, const TracePoint& b) { return a.k_F < b.k_F; });

  // Nelder-Mead (maximize) with reflection 1, expansion 2, contraction 0.5, shrink 0.5.
  using P2 = std::array<double, 2>;
  auto f = [&](const P2& x) {
    const double k = eval(x[0], x[1]);
    res.trace.push_back({x[1], x[0], k, true});
    return k;
  };
  const double dphi = span / gp, ds = 1.0 / (gs - 1);
  std::array<P2, 3> v;
  v[0] = {best->phi, best->s};
  v[1] = box.clamp({best->phi + (best->phi + 0.5 * dphi <= box.phi_hi ? 0.5 : -0.5) * dphi, best->s});
  v[2] = box.clamp({best->phi, best->s + (best->s + 0.5 * ds <= 1.0 ? 0.5 : -0.5) * ds});
  std::array<double, 3> fv{best->k_F, 0, 0};
  fv[1] = f(v[1]);
  fv[2] = f(v[2]);
  int evals = 2;
  auto lerp = [](const P2& a, const P2& b, double t) { return P2{a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])}; };
  while (evals < opt.budget) {
    std::array<int, 3> o{0, 1, 2};
    std::sort(o.begin(), o.end(), [&](int a, int b) { return fv[a] > fv[b]; });
    const P2 xb = v[o[0]], xm = v[o[1]], xw = v[o[2]];
    const double fb = fv[o[0]], fm = fv[o[1]], fw = fv[o[2]];
    const double size = std::max(std::hypot(xm[0] - xb[0], xm[1] - xb[1]),
                                 std::hypot(xw[0] - xb[0], xw[1] - xb[1]));
    if (size < 1e-7) break;
    const P2 cen = lerp(xb, xm, 0.5);
    const P2 xr = box.clamp(lerp(xw, cen, 2.0));
    const double fr = f(xr);
    ++evals;
    if (fr > fb) {
      const P2 xe = box.clamp(lerp(xw, cen, 3.0));
      const double fe = f(xe);
      ++evals;
      if (fe > fr) {
        v[o[2]] = xe;
        fv[o[2]] = fe;
      } else {
        v[o[2]] = xr;
        fv[o[2]] = fr;
      }
      continue;
    }
    if (fr > fm) {
      v[o[2]] = xr;
      fv[o[2]] = fr;
      continue;
    }
    const bool outside = fr > fw;
    const P2 xc = box.clamp(outside ? lerp(cen, xr, 0.5) : lerp(cen, xw, 0.5));
    const double fc = f(xc);
    ++evals;
    if (fc > std::max(fr, fw) || (!outside && fc > fw)) {
      v[o[2]] = xc;
      fv[o[2]] = fc;
      continue;
    }
    for (int j : {o[1], o[2]}) {
      if (evals >= opt.budget) break;
      v[j] = lerp(xb, v[j], 0.5);
      fv[j] = f(v[j]);
      ++evals;
    }
  }

  const auto top = std::max_element(res.trace.begin(), res.trace.end(),
                                    [](const TracePoint& a, const TracePoint& b) { return a.k_F < b.k_F; });
  res.s_opt = top->s;
  res.phi_opt = top->phi;
  res.k_F_opt = top->k_F;
  res.s_at_clamp = res.s_opt <= 0.0 || res.s_opt >= 1.0;
  return res;
}

std::vector<LandscapeCell> kf_landscape(const std::vector<double>& omegas,
                                        const std::vector<double>& epsilons, const Measurement& m,
                                        double kappa, const FisherOptions& opt, int threads) {
  std::vector<LandscapeCell> out(omegas.size() * epsilons.size());
  parallel_for(out.size(), resolve_threads(threads), [&](std::size_t i) {
    const double w = omegas[i % omegas.size()], e = epsilons[i / omegas.size()];
    LandscapeCell cell{w, e, 0.0, false, "ok"};
    try {
      cell.k_F = fisher_rate(System::make(w, e, kappa), m, opt);
      cell.ok = true;
    } catch (const Error& err) {
      cell.k_F = std::numeric_limits<double>::quiet_NaN();
      cell.status = to_string(err.kind());
    }
    out[i] = cell;
  });
  return out;
}

}  // namespace gdyne
