#pragma once

#include <Eigen/Dense>

#include "svint/errors.hpp"

namespace svint {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

// Which local coordinate chart tau: so(3) -> SO(3) the group updates use.
enum class Retraction { Exponential, Cayley };

// Proper rotation. The matrix is kept orthonormal by construction (tau returns
// exact rotations up to roundoff); is_valid / orthogonality_defect exist for
// monitoring long products.
struct Rotation {
  Mat3 m = Mat3::Identity();

  Rotation() = default;
  explicit Rotation(const Mat3& mm) : m(mm) {}

  Rotation operator*(const Rotation& o) const { return Rotation(m * o.m); }
  Vec3 operator*(const Vec3& v) const { return m * v; }
  Rotation transposed() const { return Rotation(m.transpose()); }

  double orthogonality_defect() const;       // ||R^T R - I||_F
  bool is_valid(double tol = 1e-10) const;   // defect and det within tol
};

Mat3 hat(const Vec3& v);
// Inverse of hat. Throws NonSkewInput if the matrix is not antisymmetric to tol.
Vec3 vee(const Mat3& m, double tol = 1e-10);

Rotation tau(Retraction kind, const Vec3& xi);
// Principal-branch inverse. Exponential kind throws OutOfDomain within 1e-8 of
// angle pi; Cayley kind throws at trace(R) = -1.
Vec3 tau_inv(Retraction kind, const Rotation& R);

// Matrix of the right-trivialized tangent inverse d(tau^-1) at xi.
Mat3 dtau_inv_matrix(Retraction kind, const Vec3& xi);
Vec3 dtau_inv_apply(Retraction kind, const Vec3& xi, const Vec3& eta);
// Dual map (transpose in the R^3 pairing), the workhorse of the momentum updates.
Vec3 dtau_inv_dual(Retraction kind, const Vec3& xi, const Vec3& mu);

// Closest rotation in Frobenius norm (SVD polar factor). Used only as the
// long-horizon safety net, never inside a step.
Rotation polar_project(const Rotation& R);

} // namespace svint
