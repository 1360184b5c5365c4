#include "svint/geometry.hpp"

#include <cmath>
#include <numbers>

namespace svint {

namespace {
constexpr double kPi = std::numbers::pi;
// Angle margin around pi inside which the principal log is reported singular.
constexpr double kPiMargin = 1e-8;
} // namespace

double Rotation::orthogonality_defect() const {
  return (m.transpose() * m - Mat3::Identity()).norm();
}

bool Rotation::is_valid(double tol) const {
  return orthogonality_defect() <= tol && std::abs(m.determinant() - 1.0) <= tol;
}

Mat3 hat(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
      -v.y(), v.x(), 0.0;
  return m;
}

Vec3 vee(const Mat3& m, double tol) {
  const double scale = 1.0 + m.cwiseAbs().maxCoeff();
  if ((m + m.transpose()).cwiseAbs().maxCoeff() > tol * scale)
    throw NonSkewInput("vee: matrix is not antisymmetric");
  return Vec3(0.5 * (m(2, 1) - m(1, 2)),
              0.5 * (m(0, 2) - m(2, 0)),
              0.5 * (m(1, 0) - m(0, 1)));
}

Rotation tau(Retraction kind, const Vec3& xi) {
  const double th2 = xi.squaredNorm();
  const Mat3 X = hat(xi);
  if (kind == Retraction::Cayley) {
    // (I - X/2)^-1 (I + X/2) in closed form.
    return Rotation(Mat3::Identity() + (4.0 / (4.0 + th2)) * (X + 0.5 * X * X));
  }
  const double th = std::sqrt(th2);
  double a, b; // sin(th)/th, (1-cos(th))/th^2
  if (th < 1e-4) {
    a = 1.0 - th2 / 6.0 + th2 * th2 / 120.0;
    b = 0.5 - th2 / 24.0 + th2 * th2 / 720.0;
  } else {
    a = std::sin(th) / th;
    b = (1.0 - std::cos(th)) / th2;
  }
  return Rotation(Mat3::Identity() + a * X + b * X * X);
}

Vec3 tau_inv(Retraction kind, const Rotation& R) {
  const Mat3& m = R.m;
  // 2*s_vec = vee(R - R^T) without the skewness check.
  const Vec3 s_vec(0.5 * (m(2, 1) - m(1, 2)),
                   0.5 * (m(0, 2) - m(2, 0)),
                   0.5 * (m(1, 0) - m(0, 1)));
  const double tr = m.trace();
  if (kind == Retraction::Cayley) {
    const double denom = 1.0 + tr;
    if (std::abs(denom) < 1e-8)
      throw OutOfDomain("tau_inv(Cayley): trace(R) = -1 is outside the chart");
    return (4.0 / denom) * s_vec;
  }
  const double s = s_vec.norm();              // |sin(theta)|
  const double c = 0.5 * (tr - 1.0);          // cos(theta)
  const double th = std::atan2(s, c);
  if (th >= kPi - kPiMargin)
    throw OutOfDomain("tau_inv(Exponential): rotation angle within 1e-8 of pi");
  if (th < 1e-4) {
    // theta/sin(theta) * s_vec, series in theta^2
    return (1.0 + th * th / 6.0 + 7.0 * th * th * th * th / 360.0) * s_vec;
  }
  if (th < 2.9)
    return (th / s) * s_vec;
  // Near pi the antisymmetric part cancels; recover the axis from the
  // symmetric part n n^T = (R + R^T - 2c I) / (2 (1 - c)).
  const Mat3 nnT = (m + m.transpose() - 2.0 * c * Mat3::Identity()) / (2.0 * (1.0 - c));
  int i = 0;
  nnT.diagonal().maxCoeff(&i);
  Vec3 n = nnT.col(i) / std::sqrt(nnT(i, i));
  if (n.dot(s_vec) < 0.0) n = -n;
  return th * n;
}

Mat3 dtau_inv_matrix(Retraction kind, const Vec3& xi) {
  const Mat3 X = hat(xi);
  if (kind == Retraction::Cayley)
    return Mat3::Identity() - 0.5 * X + 0.25 * xi * xi.transpose();
  const double th2 = xi.squaredNorm();
  const double th = std::sqrt(th2);
  double c2; // (1 - (th/2) cot(th/2)) / th^2
  if (th < 0.25) {
    // Wide series branch: the closed form loses ~th^-4 digits to cancellation,
    // which is enough to stall Newton solves that difference this matrix.
    c2 = 1.0 / 12.0 +
         th2 * (1.0 / 720.0 +
                th2 * (1.0 / 30240.0 +
                       th2 * (1.0 / 1209600.0 + th2 / 47900160.0)));
  } else {
    const double y = 0.5 * th;
    c2 = (1.0 - y * std::cos(y) / std::sin(y)) / th2;
  }
  return Mat3::Identity() - 0.5 * X + c2 * X * X;
}

Vec3 dtau_inv_apply(Retraction kind, const Vec3& xi, const Vec3& eta) {
  return dtau_inv_matrix(kind, xi) * eta;
}

Vec3 dtau_inv_dual(Retraction kind, const Vec3& xi, const Vec3& mu) {
  return dtau_inv_matrix(kind, xi).transpose() * mu;
}

Rotation polar_project(const Rotation& R) {
  Eigen::JacobiSVD<Mat3> svd(R.m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 U = svd.matrixU();
  const Mat3 V = svd.matrixV();
  if ((U * V.transpose()).determinant() < 0.0) U.col(2) *= -1.0;
  return Rotation(U * V.transpose());
}

} // namespace svint
