/*
 Copyright 2026 trajtopo contributors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#include "trajtopo/dynamics.hpp"

#include <cmath>
#include <stdexcept>

namespace trajtopo {

Rk4Model::Rk4Model(double dt, Eigen::VectorXd u_lo, Eigen::VectorXd u_hi)
    : dt_(dt), u_lo_(std::move(u_lo)), u_hi_(std::move(u_hi)) {
  if (dt_ <= 0.0) throw std::invalid_argument("dt must be positive");
  if (u_lo_.size() != u_hi_.size() || (u_lo_.array() > u_hi_.array()).any())
    throw std::invalid_argument("invalid control bounds");
}

Eigen::VectorXd Rk4Model::step(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const {
  const double h = dt_;
  const Eigen::VectorXd k1 = dynamics(x, u);
  const Eigen::VectorXd k2 = dynamics(x + 0.5 * h * k1, u);
  const Eigen::VectorXd k3 = dynamics(x + 0.5 * h * k2, u);
  const Eigen::VectorXd k4 = dynamics(x + h * k3, u);
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

void Rk4Model::step_derivatives(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                                Eigen::MatrixXd& fx, Eigen::MatrixXd& fu) const {
  const double h = dt_;
  const int n = state_dim();
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);

  Eigen::MatrixXd A1, A2, A3, A4, B1, B2, B3, B4;
  const Eigen::VectorXd k1 = dynamics(x, u);
  dynamics_jacobians(x, u, A1, B1);
  const Eigen::VectorXd x2 = x + 0.5 * h * k1;
  const Eigen::VectorXd k2 = dynamics(x2, u);
  dynamics_jacobians(x2, u, A2, B2);
  const Eigen::VectorXd x3 = x + 0.5 * h * k2;
  const Eigen::VectorXd k3 = dynamics(x3, u);
  dynamics_jacobians(x3, u, A3, B3);
  const Eigen::VectorXd x4 = x + h * k3;
  dynamics_jacobians(x4, u, A4, B4);

  const Eigen::MatrixXd dk1 = A1;
  const Eigen::MatrixXd dk2 = A2 * (eye + 0.5 * h * dk1);
  const Eigen::MatrixXd dk3 = A3 * (eye + 0.5 * h * dk2);
  const Eigen::MatrixXd dk4 = A4 * (eye + h * dk3);
  fx = eye + (h / 6.0) * (dk1 + 2.0 * dk2 + 2.0 * dk3 + dk4);

  const Eigen::MatrixXd du1 = B1;
  const Eigen::MatrixXd du2 = B2 + 0.5 * h * A2 * du1;
  const Eigen::MatrixXd du3 = B3 + 0.5 * h * A3 * du2;
  const Eigen::MatrixXd du4 = B4 + h * A4 * du3;
  fu = (h / 6.0) * (du1 + 2.0 * du2 + 2.0 * du3 + du4);
}

CartpoleModel::CartpoleModel(const CartpoleParams& params)
    : Rk4Model(params.dt, Eigen::VectorXd::Constant(1, -params.force_limit),
               Eigen::VectorXd::Constant(1, params.force_limit)),
      params_(params) {}

Eigen::VectorXd CartpoleModel::dynamics(const Eigen::VectorXd& x,
                                        const Eigen::VectorXd& u) const {
  const double mc = params_.cart_mass, mp = params_.pole_mass, l = params_.pole_length;
  const double g = params_.gravity;
  const double s = std::sin(x(1)), c = std::cos(x(1));
  const double td = x(3), f = u(0);
  const double denom = mc + mp * s * s;

  Eigen::VectorXd dx(4);
  dx(0) = x(2);
  dx(1) = td;
  dx(2) = (f + mp * s * (l * td * td + g * c)) / denom;
  dx(3) = (-f * c - mp * l * td * td * c * s - (mc + mp) * g * s) / (l * denom);
  return dx;
}

void CartpoleModel::dynamics_jacobians(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                                       Eigen::MatrixXd& A, Eigen::MatrixXd& B) const {
  const double mc = params_.cart_mass, mp = params_.pole_mass, l = params_.pole_length;
  const double g = params_.gravity;
  const double s = std::sin(x(1)), c = std::cos(x(1));
  const double td = x(3), f = u(0);
  const double denom = mc + mp * s * s;
  const double ddenom = 2.0 * mp * s * c;  // d(denom)/dtheta

  A = Eigen::MatrixXd::Zero(4, 4);
  B = Eigen::MatrixXd::Zero(4, 1);
  A(0, 2) = 1.0;
  A(1, 3) = 1.0;

  const double n1 = f + mp * s * (l * td * td + g * c);
  const double dn1 = mp * c * l * td * td + mp * g * (c * c - s * s);
  A(2, 1) = (dn1 * denom - n1 * ddenom) / (denom * denom);
  A(2, 3) = 2.0 * mp * l * s * td / denom;
  B(2, 0) = 1.0 / denom;

  const double n2 = -f * c - mp * l * td * td * c * s - (mc + mp) * g * s;
  const double dn2 = f * s - mp * l * td * td * (c * c - s * s) - (mc + mp) * g * c;
  A(3, 1) = (dn2 * denom - n2 * ddenom) / (l * denom * denom);
  A(3, 3) = -2.0 * mp * td * c * s / denom;
  B(3, 0) = -c / (l * denom);
}

QuadrotorModel::QuadrotorModel(const QuadrotorParams& params)
    : Rk4Model(params.dt, Eigen::VectorXd::Constant(4, params.rotor_min),
               Eigen::VectorXd::Constant(4, params.rotor_max)),
      params_(params) {}

namespace {

Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d m;
  m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return m;
}

}  // namespace

Eigen::VectorXd QuadrotorModel::dynamics(const Eigen::VectorXd& x,
                                         const Eigen::VectorXd& u) const {
  const double m = params_.mass, L = params_.arm_length, kt = params_.torque_coefficient;
  const double g = params_.gravity;
  const Eigen::Vector3d inertia = params_.inertia;

  const double cphi = std::cos(x(3)), sphi = std::sin(x(3));
  const double cth = std::cos(x(4)), sth = std::sin(x(4));
  const double cpsi = std::cos(x(5)), spsi = std::sin(x(5));
  const double tth = sth / cth;
  const Eigen::Vector3d v = x.segment<3>(6);
  const Eigen::Vector3d w = x.segment<3>(9);

  const double thrust = u.sum();
  const Eigen::Vector3d tau(L * (u(1) - u(3)), L * (u(2) - u(0)),
                            kt * (u(0) - u(1) + u(2) - u(3)));

  // body z-axis in world coordinates (ZYX Euler)
  const Eigen::Vector3d re3(cphi * sth * cpsi + sphi * spsi, cphi * sth * spsi - sphi * cpsi,
                            cphi * cth);

  Eigen::Matrix3d angular_map;  // body rates -> Euler-angle rates
  angular_map << 1, sphi * tth, cphi * tth, 0, cphi, -sphi, 0, sphi / cth, cphi / cth;

  Eigen::VectorXd dx(12);
  dx.segment<3>(0) = v;
  dx.segment<3>(3) = angular_map * w;
  dx.segment<3>(6) = (thrust / m) * re3 - Eigen::Vector3d(0, 0, g);
  dx.segment<3>(9) =
      (tau - w.cross(inertia.asDiagonal() * w)).cwiseQuotient(inertia);
  return dx;
}

void QuadrotorModel::dynamics_jacobians(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                                        Eigen::MatrixXd& A, Eigen::MatrixXd& B) const {
  const double m = params_.mass, L = params_.arm_length, kt = params_.torque_coefficient;
  const Eigen::Vector3d inertia = params_.inertia;

  const double cphi = std::cos(x(3)), sphi = std::sin(x(3));
  const double cth = std::cos(x(4)), sth = std::sin(x(4));
  const double cpsi = std::cos(x(5)), spsi = std::sin(x(5));
  const double tth = sth / cth;
  const Eigen::Vector3d w = x.segment<3>(9);
  const double thrust = u.sum();

  A = Eigen::MatrixXd::Zero(12, 12);
  B = Eigen::MatrixXd::Zero(12, 4);

  A.block<3, 3>(0, 6).setIdentity();

  Eigen::Matrix3d angular_map;
  angular_map << 1, sphi * tth, cphi * tth, 0, cphi, -sphi, 0, sphi / cth, cphi / cth;
  Eigen::Matrix3d dmap_dphi;
  dmap_dphi << 0, cphi * tth, -sphi * tth, 0, -sphi, -cphi, 0, cphi / cth, -sphi / cth;
  Eigen::Matrix3d dmap_dth;
  dmap_dth << 0, sphi / (cth * cth), cphi / (cth * cth), 0, 0, 0, 0, sphi * tth / cth,
      cphi * tth / cth;
  A.block<3, 1>(3, 3) = dmap_dphi * w;
  A.block<3, 1>(3, 4) = dmap_dth * w;
  A.block<3, 3>(3, 9) = angular_map;

  const Eigen::Vector3d re3(cphi * sth * cpsi + sphi * spsi, cphi * sth * spsi - sphi * cpsi,
                            cphi * cth);
  const Eigen::Vector3d dre3_dphi(-sphi * sth * cpsi + cphi * spsi,
                                  -sphi * sth * spsi - cphi * cpsi, -sphi * cth);
  const Eigen::Vector3d dre3_dth(cphi * cth * cpsi, cphi * cth * spsi, -cphi * sth);
  const Eigen::Vector3d dre3_dpsi(-cphi * sth * spsi + sphi * cpsi,
                                  cphi * sth * cpsi + sphi * spsi, 0.0);
  A.block<3, 1>(6, 3) = (thrust / m) * dre3_dphi;
  A.block<3, 1>(6, 4) = (thrust / m) * dre3_dth;
  A.block<3, 1>(6, 5) = (thrust / m) * dre3_dpsi;

  const Eigen::Matrix3d inertia_mat = inertia.asDiagonal();
  A.block<3, 3>(9, 9) =
      inertia.cwiseInverse().asDiagonal() * (skew(inertia_mat * w) - skew(w) * inertia_mat);

  B.block<3, 1>(6, 0) = re3 / m;
  B.block<3, 1>(6, 1) = re3 / m;
  B.block<3, 1>(6, 2) = re3 / m;
  B.block<3, 1>(6, 3) = re3 / m;

  Eigen::Matrix<double, 3, 4> mix;
  mix << 0, L, 0, -L, -L, 0, L, 0, kt, -kt, kt, -kt;
  B.block<3, 4>(9, 0) = inertia.cwiseInverse().asDiagonal() * mix;
}

LinearSystem::LinearSystem(Eigen::MatrixXd A, Eigen::MatrixXd B, double dt, Eigen::VectorXd u_lo,
                           Eigen::VectorXd u_hi)
    : A_(std::move(A)), B_(std::move(B)), dt_(dt), u_lo_(std::move(u_lo)),
      u_hi_(std::move(u_hi)) {
  if (A_.rows() != A_.cols() || B_.rows() != A_.rows())
    throw std::invalid_argument("inconsistent A/B shapes");
  if (dt_ <= 0.0) throw std::invalid_argument("dt must be positive");
  if (u_lo_.size() != B_.cols() || u_hi_.size() != B_.cols())
    throw std::invalid_argument("bounds must match control dimension");
}

Eigen::VectorXd LinearSystem::step(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const {
  return x + dt_ * (A_ * x + B_ * u);
}

void LinearSystem::step_derivatives(const Eigen::VectorXd&, const Eigen::VectorXd&,
                                    Eigen::MatrixXd& fx, Eigen::MatrixXd& fu) const {
  fx = Eigen::MatrixXd::Identity(A_.rows(), A_.cols()) + dt_ * A_;
  fu = dt_ * B_;
}

std::shared_ptr<LinearSystem> make_double_integrator(double dt, double u_limit) {
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(4, 4);
  A(0, 2) = 1.0;
  A(1, 3) = 1.0;
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(4, 2);
  B(2, 0) = 1.0;
  B(3, 1) = 1.0;
  return std::make_shared<LinearSystem>(A, B, dt, Eigen::VectorXd::Constant(2, -u_limit),
                                        Eigen::VectorXd::Constant(2, u_limit));
}

}  // namespace trajtopo
