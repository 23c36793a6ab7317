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

#ifndef TRAJTOPO_DYNAMICS_HPP
#define TRAJTOPO_DYNAMICS_HPP

#include <Eigen/Dense>
#include <memory>

namespace trajtopo {

/// Discrete-time dynamics x' = f(x, u) with Jacobians and control bounds.
/// Implementations are pure functions of (x, u) and safe to call from
/// multiple threads.
class DynamicsModel {
 public:
  virtual ~DynamicsModel() = default;

  virtual int state_dim() const = 0;
  virtual int control_dim() const = 0;
  virtual double dt() const = 0;
  virtual const Eigen::VectorXd& control_lower() const = 0;
  virtual const Eigen::VectorXd& control_upper() const = 0;

  virtual Eigen::VectorXd step(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const = 0;

  /// Jacobians of the discrete step: fx is state_dim x state_dim, fu is
  /// state_dim x control_dim.
  virtual void step_derivatives(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                                Eigen::MatrixXd& fx, Eigen::MatrixXd& fu) const = 0;

  Eigen::VectorXd clamp_control(const Eigen::VectorXd& u) const {
    return u.cwiseMax(control_lower()).cwiseMin(control_upper());
  }
};

/// Base for models defined by a continuous-time vector field, discretized
/// with one fixed-step RK4 stage per dt. Discrete Jacobians chain the
/// analytic continuous Jacobians through the four stages.
class Rk4Model : public DynamicsModel {
 public:
  Rk4Model(double dt, Eigen::VectorXd u_lo, Eigen::VectorXd u_hi);

  double dt() const final { return dt_; }
  const Eigen::VectorXd& control_lower() const final { return u_lo_; }
  const Eigen::VectorXd& control_upper() const final { return u_hi_; }

  Eigen::VectorXd step(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const final;
  void step_derivatives(const Eigen::VectorXd& x, const Eigen::VectorXd& u, Eigen::MatrixXd& fx,
                        Eigen::MatrixXd& fu) const final;

  /// Continuous vector field dx/dt.
  virtual Eigen::VectorXd dynamics(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const = 0;

  /// Continuous Jacobians d(dx/dt)/dx and d(dx/dt)/du.
  virtual void dynamics_jacobians(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                                  Eigen::MatrixXd& A, Eigen::MatrixXd& B) const = 0;

 private:
  double dt_;
  Eigen::VectorXd u_lo_, u_hi_;
};

struct CartpoleParams {
  double cart_mass = 1.0;   // kg
  double pole_mass = 0.5;   // kg
  double pole_length = 0.5; // m
  double gravity = 9.81;    // m/s^2
  double dt = 0.02;         // s
  double force_limit = 10.0;  // N, symmetric
};

/// Cart with an unactuated pole, state (x, theta, xdot, thetadot); theta = 0
/// hangs down, theta = pi is upright.
class CartpoleModel : public Rk4Model {
 public:
  explicit CartpoleModel(const CartpoleParams& params = {});

  int state_dim() const override { return 4; }
  int control_dim() const override { return 1; }
  const CartpoleParams& params() const { return params_; }

  Eigen::VectorXd dynamics(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const override;
  void dynamics_jacobians(const Eigen::VectorXd& x, const Eigen::VectorXd& u, Eigen::MatrixXd& A,
                          Eigen::MatrixXd& B) const override;

 private:
  CartpoleParams params_;
};

struct QuadrotorParams {
  double mass = 1.0;       // kg
  double arm_length = 0.2; // m
  Eigen::Vector3d inertia{0.01, 0.01, 0.02};  // kg m^2, body-diagonal
  double torque_coefficient = 0.016;          // m (yaw torque per thrust)
  double gravity = 9.81;
  double dt = 0.05;
  double rotor_min = 0.0;  // N per rotor
  double rotor_max = 5.0;
};

/// Rigid-body quadrotor with Euler-angle attitude, state
/// (position, roll/pitch/yaw, world linear velocity, body angular velocity),
/// controlled by four rotor thrusts. No aerodynamic drag.
class QuadrotorModel : public Rk4Model {
 public:
  explicit QuadrotorModel(const QuadrotorParams& params = {});

  int state_dim() const override { return 12; }
  int control_dim() const override { return 4; }
  const QuadrotorParams& params() const { return params_; }

  /// Per-rotor thrust holding the vehicle level: mg/4.
  double hover_thrust() const { return params_.mass * params_.gravity / 4.0; }

  Eigen::VectorXd dynamics(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const override;
  void dynamics_jacobians(const Eigen::VectorXd& x, const Eigen::VectorXd& u, Eigen::MatrixXd& A,
                          Eigen::MatrixXd& B) const override;

 private:
  QuadrotorParams params_;
};

/// x' = (I + dt A) x + dt B u, i.e. an explicit-Euler discretization taken
/// as the model definition, so step_derivatives are exact.
class LinearSystem : public DynamicsModel {
 public:
  LinearSystem(Eigen::MatrixXd A, Eigen::MatrixXd B, double dt, Eigen::VectorXd u_lo,
               Eigen::VectorXd u_hi);

  int state_dim() const override { return static_cast<int>(A_.rows()); }
  int control_dim() const override { return static_cast<int>(B_.cols()); }
  double dt() const override { return dt_; }
  const Eigen::VectorXd& control_lower() const override { return u_lo_; }
  const Eigen::VectorXd& control_upper() const override { return u_hi_; }

  Eigen::VectorXd step(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const override;
  void step_derivatives(const Eigen::VectorXd& x, const Eigen::VectorXd& u, Eigen::MatrixXd& fx,
                        Eigen::MatrixXd& fu) const override;

 private:
  Eigen::MatrixXd A_, B_;
  double dt_;
  Eigen::VectorXd u_lo_, u_hi_;
};

/// Two decoupled double integrators (position/velocity in the plane),
/// a convenient small test system.
std::shared_ptr<LinearSystem> make_double_integrator(double dt = 0.1, double u_limit = 1e3);

}  // namespace trajtopo

#endif  // TRAJTOPO_DYNAMICS_HPP
