#include "hyperhier/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hyperhier {

double BallConfig::max_radius() const { return (1.0 - boundary_eps) / std::sqrt(c); }

void BallConfig::validate() const {
  if (!(c > 0.0) || !std::isfinite(c)) throw std::invalid_argument("curvature must be positive and finite");
  if (!(boundary_eps > 0.0 && boundary_eps < 1.0))
    throw std::invalid_argument("boundary_eps must lie in (0, 1)");
}

double conformal_factor(std::span<const double> x, const BallConfig& cfg) {
  const double cq = cfg.c * squared_norm(x);
  if (cq >= 1.0) throw std::domain_error("conformal_factor: point outside the ball");
  return 2.0 / (1.0 - cq);
}

BallPoint project_to_ball(std::span<const double> x, const BallConfig& cfg) {
  if (!all_finite(x)) throw std::domain_error("project_to_ball: non-finite coordinates");
  BallPoint p{Vec(x.begin(), x.end())};
  const double r = norm(x);
  const double rmax = cfg.max_radius();
  if (r > rmax) {
    const double s = rmax / r;
    for (double& v : p.coords) v *= s;
  }
  return p;
}

BallPoint mobius_add(const BallPoint& v, const BallPoint& w, const BallConfig& cfg) {
  const std::size_t n = v.coords.size();
  if (w.coords.size() != n) throw std::invalid_argument("mobius_add: dimension mismatch");
  const double c = cfg.c;
  const double vw = dot(v.coords, w.coords);
  const double vv = squared_norm(v.coords);
  const double ww = squared_norm(w.coords);
  if (c * vv >= 1.0 || c * ww >= 1.0) throw std::domain_error("mobius_add: point outside the ball");
  const double coef_v = 1.0 + 2.0 * c * vw + c * ww;
  const double coef_w = 1.0 - c * vv;
  const double denom = 1.0 + 2.0 * c * vw + c * c * vv * ww;
  Vec out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = (coef_v * v.coords[i] + coef_w * w.coords[i]) / denom;
  return project_to_ball(out, cfg);
}

BallPoint exp_map_origin(const Tangent& x, const BallConfig& cfg) {
  if (!all_finite(x.coords)) throw std::domain_error("exp_map_origin: non-finite tangent");
  const double nx = norm(x.coords);
  if (nx == 0.0) return BallPoint{Vec(x.coords.size(), 0.0)};
  const double rc = std::sqrt(cfg.c);
  const double s = std::tanh(rc * nx) / (rc * nx);
  return project_to_ball(scaled(x.coords, s), cfg);
}

BallPoint exp_map(const BallPoint& v, const Tangent& x, const BallConfig& cfg) {
  if (x.coords.size() != v.coords.size()) throw std::invalid_argument("exp_map: dimension mismatch");
  if (!all_finite(x.coords)) throw std::domain_error("exp_map: non-finite tangent");
  const double nx = norm(x.coords);
  if (nx == 0.0) return v;
  const double rc = std::sqrt(cfg.c);
  const double lam = conformal_factor(v.coords, cfg);
  const double s = std::tanh(rc * lam * nx / 2.0) / (rc * nx);
  return mobius_add(v, project_to_ball(scaled(x.coords, s), cfg), cfg);
}

double hyperbolic_distance(std::span<const double> x, std::span<const double> z,
                           const BallConfig& cfg) {
  if (x.size() != z.size()) throw std::invalid_argument("hyperbolic_distance: dimension mismatch");
  const double qx = cfg.c * squared_norm(x);
  const double qz = cfg.c * squared_norm(z);
  if (qx >= 1.0 || qz >= 1.0) throw std::domain_error("hyperbolic_distance: point outside the ball");
  const double arg = 1.0 + 2.0 * cfg.c * squared_distance(x, z) / ((1.0 - qx) * (1.0 - qz));
  // rounding can push the argument a hair below 1 for coincident points
  return std::acosh(std::max(arg, 1.0)) / std::sqrt(cfg.c);
}

double hyperbolic_distance(const BallPoint& x, const BallPoint& z, const BallConfig& cfg) {
  return hyperbolic_distance(std::span<const double>(x.coords), std::span<const double>(z.coords),
                             cfg);
}

double hyperbolic_distance_derivative(double euclidean_dist, double n1, double n2) {
  if (!(euclidean_dist >= 0.0)) throw std::domain_error("distance derivative: negative distance");
  if (!(n1 >= 0.0 && n1 < 1.0 && n2 >= 0.0 && n2 < 1.0))
    throw std::domain_error("distance derivative: norms must lie in [0, 1)");
  const double a = (1.0 - n1 * n1) * (1.0 - n2 * n2);
  return 2.0 / (std::sqrt(a) * std::sqrt(1.0 + euclidean_dist * euclidean_dist / a));
}

}  // namespace hyperhier
