#pragma once

#include <Eigen/Dense>
#include <array>
#include <stdexcept>
#include <utility>

namespace ersecov {

// One paired rotation: the indices of the rotated columns, the projections
// onto the uniform vector, the chosen angle and its implied shrinkage
// weight gamma = cos^2(theta), plus the deviation-degree and eigenvalue
// images of the step. The total deviation of the pair and the sum of its
// eigenvalues are both conserved.
struct RotationStep {
  int index_low = -1;   // column raised to the threshold
  int index_high = -1;  // accompanying column, largest deviation
  double s1 = 0.0;      // 1' q1 before rotation
  double s2 = 0.0;      // 1' q2 before rotation
  double theta = 0.0;   // radians, in [-pi/2, pi/2]
  double gamma = 0.0;   // cos^2(theta), in [0, 1]
  std::array<double, 2> t_before{};
  std::array<double, 2> t_after{};
  std::array<double, 2> lambda_before{};
  std::array<double, 2> lambda_after{};
};

struct PerResult {
  Eigen::VectorXd q1_hat;
  Eigen::VectorXd q2_hat;
  RotationStep step;
};

// Raised when a candidate pair cannot lift the low vector to the threshold
// while keeping the partner at or above it (T1 + T2 < 2*delta).
class InfeasiblePairError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Solves (s1 cos(theta) + s2 sin(theta))^2 = delta for the two angles in
// [-pi/2, pi/2]. The quadratic in tan(theta) is solved in its cancellation-
// free form, so s2^2 == delta is handled without division (the boundary
// root degenerates to +-pi/2). Throws std::invalid_argument when
// s1^2 > delta (the low vector already satisfies the constraint) or when
// delta > s1^2 + s2^2 (no real angle exists), reporting which inequality
// failed; both checks carry 1e-12 slack.
std::pair<double, double> solve_rotation_angles(double s1, double s2,
                                                double delta);

// The angle of smaller magnitude; an exact tie is broken toward the
// positive angle for reproducibility.
double select_angle(double theta_a, double theta_b);

// q1_hat = cos(theta) q1 + sin(theta) q2, q2_hat = -sin(theta) q1 +
// cos(theta) q2. Inputs must be orthonormal within 1e-8.
std::pair<Eigen::VectorXd, Eigen::VectorXd> apply_rotation(
    const Eigen::Ref<const Eigen::VectorXd>& q1,
    const Eigen::Ref<const Eigen::VectorXd>& q2, double theta);

// Full operator: solve, select the minimal-magnitude angle, rotate, and
// report the step including the eigenvalue images
// lambda_hat = (gamma l1 + (1-gamma) l2, (1-gamma) l1 + gamma l2).
// index_low/index_high are carried through for the caller's bookkeeping.
PerResult per(const Eigen::Ref<const Eigen::VectorXd>& q1,
              const Eigen::Ref<const Eigen::VectorXd>& q2, double delta,
              double lambda1, double lambda2, int index_low = -1,
              int index_high = -1);

}  // namespace ersecov
