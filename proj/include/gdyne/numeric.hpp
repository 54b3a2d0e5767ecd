#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "gdyne/errors.hpp"

namespace gdyne {

// Classical fourth-order Runge-Kutta step for any vector-space-like state.
template <typename State, typename F>
State rk4_step(F&& f, double t, const State& y, double h) {
  const State k1 = f(t, y);
  const State k2 = f(t + 0.5 * h, y + (0.5 * h) * k1);
  const State k3 = f(t + 0.5 * h, y + (0.5 * h) * k2);
  const State k4 = f(t + h, y + h * k3);
  return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// Solves A X + X B = C for 2x2 blocks through the Kronecker form.
template <typename Scalar>
Eigen::Matrix<Scalar, 2, 2> sylvester2(const Eigen::Matrix<Scalar, 2, 2>& A,
                                       const Eigen::Matrix<Scalar, 2, 2>& B,
                                       const Eigen::Matrix<Scalar, 2, 2>& C) {
  using M4 = Eigen::Matrix<Scalar, 4, 4>;
  using M2 = Eigen::Matrix<Scalar, 2, 2>;
  const M2 I = M2::Identity();
  // column-major vec: vec(AX) = (I kron A) vec X, vec(XB) = (B^T kron I) vec X
  M4 K;
  for (int bi = 0; bi < 2; ++bi)
    for (int bj = 0; bj < 2; ++bj)
      K.template block<2, 2>(2 * bi, 2 * bj) = B(bj, bi) * I + (bi == bj ? A : M2::Zero());
  Eigen::FullPivLU<M4> lu(K);
  if (!lu.isInvertible()) throw Error(ErrorKind::SingularSylvester, "A and -B share an eigenvalue");
  Eigen::Matrix<Scalar, 4, 1> c(C(0, 0), C(1, 0), C(0, 1), C(1, 1));
  Eigen::Matrix<Scalar, 4, 1> x = lu.solve(c);
  M2 X;
  X << x(0), x(2), x(1), x(3);
  return X;
}

// Symmetric solution of A X + X A^T = C, vectorized over (x11, x12, x22).
// The 3x3 determinant equals 4 tr(A) det(A).
template <typename Scalar>
Eigen::Matrix<Scalar, 2, 2> lyapunov_sym2(const Eigen::Matrix<Scalar, 2, 2>& A,
                                          const Eigen::Matrix<Scalar, 2, 2>& C) {
  Eigen::Matrix<Scalar, 3, 3> K;
  K << 2 * A(0, 0), 2 * A(0, 1), 0,
       A(1, 0), A(0, 0) + A(1, 1), A(0, 1),
       0, 2 * A(1, 0), 2 * A(1, 1);
  const Scalar det = 4 * A.trace() * A.determinant();
  using std::abs;
  if (abs(det) <= Scalar(1e-14) * (1 + A.squaredNorm()) * (1 + A.norm()))
    throw Error(ErrorKind::SingularSylvester, "tr(A) det(A) vanishes");
  Eigen::Matrix<Scalar, 3, 1> c(C(0, 0), Scalar(0.5) * (C(0, 1) + C(1, 0)), C(1, 1));
  Eigen::Matrix<Scalar, 3, 1> x = K.partialPivLu().solve(c);
  Eigen::Matrix<Scalar, 2, 2> X;
  X << x(0), x(1), x(1), x(2);
  return X;
}

template <typename Derived>
typename Derived::PlainObject symmetrized(const Eigen::MatrixBase<Derived>& m) {
  return 0.5 * (m + m.transpose());
}

struct LinearFit {
  double slope = 0;
  double intercept = 0;
  double r2 = 0;
  double t_lo = 0;
  double t_hi = 0;
};

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

// Least squares over the last `fraction` of the samples.
LinearFit late_window_fit(const std::vector<double>& t, const std::vector<double>& y,
                          double fraction = 0.25);

std::vector<double> cumulative_trapezoid(const std::vector<double>& t,
                                         const std::vector<double>& f);

// Parabolic refinement of a sampled minimum; falls back to the grid point at edges.
double parabolic_argmin(const std::vector<double>& x, const std::vector<double>& y,
                        std::size_t* index = nullptr);

// Threads: explicit request > GDYNE_THREADS > hardware concurrency.
int resolve_threads(int requested);

// Static block partition; fn(i) must only write slot i of its output.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace gdyne
