#include "ersecov/per_rotation.hpp"

#include <cmath>
#include <string>

namespace ersecov {

namespace {
constexpr double kHalfPi = 1.57079632679489661923;
constexpr double kSlack = 1e-12;
}  // namespace

std::pair<double, double> solve_rotation_angles(double s1, double s2,
                                                double delta) {
  if (delta < 0.0)
    throw std::invalid_argument("solve_rotation_angles: delta must be >= 0");
  const double t1 = s1 * s1;  // T(q1)
  const double t2 = s2 * s2;  // T(q2)
  if (t1 > delta + kSlack)
    throw std::invalid_argument(
        "solve_rotation_angles: precondition s1^2 < delta failed (s1^2 = " +
        std::to_string(t1) + ", delta = " + std::to_string(delta) + ")");
  double disc = delta * (t1 + t2 - delta);
  if (disc < -kSlack * std::max(1.0, t1 + t2))
    throw std::invalid_argument(
        "solve_rotation_angles: delta exceeds s1^2 + s2^2, no real angle "
        "(s1^2 + s2^2 = " + std::to_string(t1 + t2) + ", delta = " +
        std::to_string(delta) + ")");
  disc = std::max(disc, 0.0);

  // tan(theta) satisfies (s2^2 - delta) t^2 + 2 s1 s2 t + (s1^2 - delta) = 0.
  const double a = t2 - delta;
  const double half_b = s1 * s2;
  const double c = t1 - delta;
  const double root = std::sqrt(disc);

  if (a == 0.0 && half_b == 0.0) {
    // s1 = 0 and s2^2 = delta: only the quarter-turn swap reaches delta.
    return {kHalfPi, -kHalfPi};
  }

  // Cancellation-free root pair: the numerically large numerator first,
  // its partner via Vieta. a == 0 degrades gracefully to +-pi/2 through
  // the atan of an infinite tangent.
  const double n_big = -(half_b + std::copysign(root, half_b));
  if (n_big == 0.0) return {0.0, 0.0};  // double root at theta = 0
  const double theta_a = std::atan(n_big / a);
  const double theta_b = std::atan(c / n_big);
  return {theta_a, theta_b};
}

double select_angle(double theta_a, double theta_b) {
  const double ma = std::abs(theta_a);
  const double mb = std::abs(theta_b);
  if (ma == mb) return std::max(theta_a, theta_b);
  return ma < mb ? theta_a : theta_b;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> apply_rotation(
    const Eigen::Ref<const Eigen::VectorXd>& q1,
    const Eigen::Ref<const Eigen::VectorXd>& q2, double theta) {
  if (q1.size() != q2.size())
    throw std::invalid_argument("apply_rotation: size mismatch");
  if (std::abs(q1.norm() - 1.0) > 1e-8 || std::abs(q2.norm() - 1.0) > 1e-8)
    throw std::invalid_argument("apply_rotation: inputs must be unit vectors");
  if (std::abs(q1.dot(q2)) > 1e-8)
    throw std::invalid_argument("apply_rotation: inputs must be orthogonal");
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  return {c * q1 + s * q2, -s * q1 + c * q2};
}

PerResult per(const Eigen::Ref<const Eigen::VectorXd>& q1,
              const Eigen::Ref<const Eigen::VectorXd>& q2, double delta,
              double lambda1, double lambda2, int index_low, int index_high) {
  const double s1 = q1.sum();
  const double s2 = q2.sum();
  const double t1 = s1 * s1;
  const double t2 = s2 * s2;
  if (t2 < delta - kSlack)
    throw std::invalid_argument(
        "per: precondition delta < T(q2) failed (T(q2) = " +
        std::to_string(t2) + ", delta = " + std::to_string(delta) + ")");
  if (t1 + t2 < 2.0 * delta - kSlack)
    throw InfeasiblePairError(
        "per: infeasible pair, T(q1) + T(q2) <= 2*delta (" +
        std::to_string(t1) + " + " + std::to_string(t2) + " vs 2*" +
        std::to_string(delta) + ")");

  const auto [theta_a, theta_b] = solve_rotation_angles(s1, s2, delta);
  const double theta = select_angle(theta_a, theta_b);
  auto [q1_hat, q2_hat] = apply_rotation(q1, q2, theta);

  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const double s1_hat = s1 * c + s2 * s;
  const double s2_hat = -s1 * s + s2 * c;
  const double gamma = c * c;

  PerResult result;
  result.q1_hat = std::move(q1_hat);
  result.q2_hat = std::move(q2_hat);
  result.step.index_low = index_low;
  result.step.index_high = index_high;
  result.step.s1 = s1;
  result.step.s2 = s2;
  result.step.theta = theta;
  result.step.gamma = gamma;
  result.step.t_before = {t1, t2};
  result.step.t_after = {s1_hat * s1_hat, s2_hat * s2_hat};
  result.step.lambda_before = {lambda1, lambda2};
  result.step.lambda_after = {gamma * lambda1 + (1.0 - gamma) * lambda2,
                              (1.0 - gamma) * lambda1 + gamma * lambda2};
  return result;
}

}  // namespace ersecov
