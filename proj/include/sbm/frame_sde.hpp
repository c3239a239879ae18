#pragma once

#include <Eigen/Dense>

#include "sbm/charts.hpp"

namespace sbm {

// Stratonovich frame-bundle SDE driven by a flat 2D Brownian increment db:
//   dx^i   = e^i_a  db^a
//   de^i_a = -Gamma^i_{kl}(x) dx^k e^l_a
// Heun: full-step predictor, trapezoidal corrector.
// EulerHeun: half-step predictor, full step with midpoint coefficients.
enum class FrameScheme { Heun, EulerHeun };

// One integrator step followed by any pending chart switch.  Throws
// std::runtime_error if the frame condition number exceeds 1e6 or the
// point leaves the atlas coverage.
FramePoint frame_sde_step(const Surface& surf, const FramePoint& p,
                          const Eigen::Vector2d& db, FrameScheme scheme);

// Odd path variables riding on the frame: xi^i = e^i_a theta^a and
// pi_i = g_ij e^j_a rho^a, stored as the rotations applied to the flat
// fermion slot pair (theta, rho).  Canonically paired:
// pi_rotation^T xi_rotation = I.
struct OddFiber {
  Eigen::Matrix2d xi_rotation;
  Eigen::Matrix2d pi_rotation;
};

OddFiber odd_fiber(const Surface& surf, const FramePoint& p);

}  // namespace sbm
