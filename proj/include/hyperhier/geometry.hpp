#pragma once

#include <span>
#include <vector>

#include "hyperhier/vec.hpp"

namespace hyperhier {

// Poincare ball of curvature -c: points x with c*|x|^2 < 1. All kernels below
// take the curvature magnitude c (> 0) through BallConfig. boundary_eps sets
// the numerical shell: points produced by the kernels are pulled back to
// radius (1 - boundary_eps)/sqrt(c) so that conformal factors and distances
// stay finite.
struct BallConfig {
  double c = 1.0;
  double boundary_eps = 1e-5;

  double max_radius() const;
  void validate() const;  // throws std::invalid_argument
};

struct BallPoint {
  Vec coords;
};

// Tangent vector (an ordinary Euclidean vector attached to a base point).
struct Tangent {
  Vec coords;
};

// lambda(x) = 2 / (1 - c|x|^2), the conformal scale of the ball metric at x.
double conformal_factor(std::span<const double> x, const BallConfig& cfg);
inline double conformal_factor(const BallPoint& x, const BallConfig& cfg) {
  return conformal_factor(x.coords, cfg);
}

// Clamp x into the ball: rescale to radius (1 - boundary_eps)/sqrt(c) when it
// lies outside that shell. Non-finite input throws std::domain_error.
BallPoint project_to_ball(std::span<const double> x, const BallConfig& cfg);

// Mobius addition
//   v (+) w = [(1 + 2c<v,w> + c|w|^2) v + (1 - c|v|^2) w]
//             / (1 + 2c<v,w> + c^2 |v|^2 |w|^2),
// the ball's noncommutative translation. Result is clamped into the shell.
BallPoint mobius_add(const BallPoint& v, const BallPoint& w, const BallConfig& cfg);

// Exponential map at the origin: x |-> tanh(sqrt(c)|x|) x / (sqrt(c)|x|).
// Zero maps to zero.
BallPoint exp_map_origin(const Tangent& x, const BallConfig& cfg);

// Exponential map at base point v:
//   Exp_v(x) = v (+) tanh(sqrt(c) lambda(v) |x| / 2) x / (sqrt(c)|x|).
// Zero tangent returns v unchanged.
BallPoint exp_map(const BallPoint& v, const Tangent& x, const BallConfig& cfg);

// Geodesic distance,
//   d(x, z) = (1/sqrt(c)) arcosh(1 + 2c|x-z|^2 / ((1 - c|x|^2)(1 - c|z|^2))).
double hyperbolic_distance(const BallPoint& x, const BallPoint& z, const BallConfig& cfg);
double hyperbolic_distance(std::span<const double> x, std::span<const double> z,
                           const BallConfig& cfg);

// Derivative of the unit-ball (c = 1) geodesic distance between two points
// with fixed norms n1, n2 with respect to their Euclidean distance e:
//   d'(e) = 2 / (sqrt(A) sqrt(1 + e^2/A)),  A = (1 - n1^2)(1 - n2^2).
// Strictly decreasing in e: the hyperbolic metric is concave in the
// Euclidean one, so near the boundary large Euclidean gaps are compressed.
double hyperbolic_distance_derivative(double euclidean_dist, double n1, double n2);

}  // namespace hyperhier
