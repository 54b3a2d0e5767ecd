#pragma once

#include <cmath>
#include <numbers>
#include <utility>

#include <Eigen/Dense>

#include "gdyne/errors.hpp"
#include "gdyne/numeric.hpp"

namespace gdyne {

template <typename Scalar>
using Mat2T = Eigen::Matrix<Scalar, 2, 2>;
template <typename Scalar>
using Vec2T = Eigen::Matrix<Scalar, 2, 1>;

using Mat2 = Mat2T<double>;
using Vec2 = Vec2T<double>;

template <typename Scalar = double>
struct SystemParams {
  Scalar omega = 0;
  Scalar epsilon = 0;
  Scalar kappa = 1;
  Scalar chi = 0;  // scaling limit only

  static SystemParams make(Scalar omega, Scalar epsilon, Scalar kappa = 1, Scalar chi = 0) {
    SystemParams p{omega, epsilon, kappa, chi};
    p.validate();
    return p;
  }

  // Point at distance deps below the boundary, eps = eps_c - deps.
  static SystemParams near_boundary(Scalar omega, Scalar deps, Scalar kappa = 1) {
    using std::sqrt;
    return make(omega, sqrt(omega * omega + kappa * kappa / 4) - deps, kappa);
  }

  void validate() const {
    if (!(kappa > 0)) throw Error(ErrorKind::InvalidParameter, "kappa must be positive");
    if (!(omega > 0)) throw Error(ErrorKind::InvalidParameter, "omega must be positive");
    if (!(epsilon >= 0)) throw Error(ErrorKind::InvalidParameter, "epsilon must be non-negative");
    if (chi != 0) throw Error(ErrorKind::InvalidParameter, "chi must be 0 in the scaling limit");
  }
};

template <typename Scalar = double>
struct MeasurementParams {
  Scalar s = 0;
  Scalar phi = 0;
  Scalar eta = 1;

  static MeasurementParams make(Scalar s, Scalar phi, Scalar eta) {
    MeasurementParams m{s, phi, eta};
    m.validate();
    return m;
  }

  void validate() const {
    if (!(s >= 0 && s <= 1)) throw Error(ErrorKind::InvalidParameter, "s must lie in [0,1]");
    if (!(eta >= 0 && eta <= 1)) throw Error(ErrorKind::InvalidParameter, "eta must lie in [0,1]");
    if (!(phi >= -std::numbers::pi && phi <= std::numbers::pi))
      throw Error(ErrorKind::InvalidParameter, "phi must lie in [-pi,pi]");
  }
};

template <typename Scalar>
struct PhaseGeometry {
  Scalar epsilon_c;
  Scalar delta_epsilon;
  Scalar theta0;
};

template <typename Scalar>
Scalar critical_amplitude(Scalar omega, Scalar kappa) {
  using std::sqrt;
  return sqrt(omega * omega + kappa * kappa / 4);
}

template <typename Scalar>
Mat2T<Scalar> rotation(Scalar theta) {
  using std::cos;
  using std::sin;
  Mat2T<Scalar> R;
  R << cos(theta), sin(theta), -sin(theta), cos(theta);
  return R;
}

template <typename Scalar>
Mat2T<Scalar> drift_matrix(const SystemParams<Scalar>& p) {
  Mat2T<Scalar> A;
  A << -p.kappa / 2, p.omega - p.epsilon, -p.omega - p.epsilon, -p.kappa / 2;
  return A;
}

template <typename Scalar>
Mat2T<Scalar> diffusion_matrix(const SystemParams<Scalar>& p) {
  return p.kappa * Mat2T<Scalar>::Identity();
}

template <typename Scalar = double>
Mat2T<Scalar> drift_derivative() {
  Mat2T<Scalar> dA;
  dA << 0, 1, -1, 0;
  return dA;
}

// B = (I + sigma_m)^(-1/2), built in the frame rotated by phi where sigma_m is
// diagonal. The second entry sqrt(s/(1+s)) is the analytic s -> 0 limit.
template <typename Scalar>
Mat2T<Scalar> measurement_matrix_B(const MeasurementParams<Scalar>& m) {
  using std::sqrt;
  if (m.eta == 0) throw Error(ErrorKind::EtaZero, "B is undefined for eta = 0");
  const Mat2T<Scalar> R = rotation(m.phi);
  Mat2T<Scalar> d = Mat2T<Scalar>::Zero();
  d(0, 0) = 1 / sqrt(1 + m.s);
  d(1, 1) = sqrt(m.s / (1 + m.s));
  return R.transpose() * d * R;
}

template <typename Scalar>
PhaseGeometry<Scalar> phase_geometry(const SystemParams<Scalar>& p) {
  using std::atan;
  const Scalar ec = critical_amplitude(p.omega, p.kappa);
  return {ec, ec - p.epsilon, atan(p.kappa / (2 * p.omega)) / 2};
}

template <typename Scalar>
Scalar squeezing_angle(const SystemParams<Scalar>& p) {
  using std::atan;
  if (!(p.omega > 0)) throw Error(ErrorKind::InvalidParameter, "omega must be positive");
  return atan(p.kappa / (2 * p.omega)) / 2;
}

template <typename Scalar>
void require_normal_phase(const SystemParams<Scalar>& p) {
  if (!(p.epsilon < critical_amplitude(p.omega, p.kappa)))
    throw Error(ErrorKind::OutsidePhase, "epsilon must be below epsilon_c");
}

template <typename Scalar>
Mat2T<Scalar> unconditional_steady_covariance(const SystemParams<Scalar>& p) {
  require_normal_phase(p);
  const Scalar ec2 = p.omega * p.omega + p.kappa * p.kappa / 4;
  const Scalar e = p.epsilon;
  Mat2T<Scalar> S;
  S << ec2 - p.omega * e, -p.kappa * e / 2, -p.kappa * e / 2, ec2 + p.omega * e;
  return S / (ec2 - e * e);
}

template <typename Scalar>
std::pair<Scalar, Scalar> becp_from_angle(Scalar phi, Scalar kappa = 1) {
  using std::sin;
  using std::tan;
  if (!(phi > 0 && phi < std::numbers::pi / 4))
    throw Error(ErrorKind::AngleOutOfRange, "phi must lie in (0, pi/4)");
  return {kappa / (2 * tan(2 * phi)), kappa / (2 * sin(2 * phi))};
}

// Homodyne backaction (Sigma0 - I) B^2 (Sigma0 - I) in the theta0 frame, closed form.
template <typename Scalar>
Mat2T<Scalar> backaction_functional(const SystemParams<Scalar>& p, Scalar phi) {
  using std::cos;
  using std::sin;
  require_normal_phase(p);
  const auto g = phase_geometry(p);
  const Scalar ec = g.epsilon_c, e = p.epsilon, d = g.theta0 - phi;
  const Scalar e2 = e * e;
  const Scalar off = e2 * sin(2 * d) / (2 * (ec * ec - e2));
  Mat2T<Scalar> out;
  out << e2 * cos(d) * cos(d) / ((ec + e) * (ec + e)), off,
         off, e2 * sin(d) * sin(d) / ((ec - e) * (ec - e));
  return out;
}

// First-order-in-eta correction to the rotated steady covariance (homodyne):
// Abar X + X Abar^T = kappa * backaction_functional.
template <typename Scalar>
Mat2T<Scalar> first_order_correction(const SystemParams<Scalar>& p, Scalar phi) {
  const Mat2T<Scalar> R = rotation(squeezing_angle(p));
  const Mat2T<Scalar> Abar = R * drift_matrix(p) * R.transpose();
  return lyapunov_sym2<Scalar>(Abar, p.kappa * backaction_functional(p, phi));
}

}  // namespace gdyne
