#include "hyperhier/mlr.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hyperhier {

namespace {

// Intermediates shared by the distance, the logit and the backward pass at
// one (point, gyroplane) pair.
struct PlaneFrame {
  Vec z;            // (-offset) (+) h
  double s = 0.0;   // <z, normal>
  double q = 0.0;   // |z|^2
  double nw = 0.0;  // |normal|
  double u = 0.0;   // arcsinh argument
  double lam = 0.0; // conformal factor at the offset
};

PlaneFrame make_frame(std::span<const double> h, const Gyroplane& plane, const BallConfig& cfg) {
  if (h.size() != plane.offset.coords.size() || h.size() != plane.normal.coords.size())
    throw std::invalid_argument("gyroplane: dimension mismatch");
  PlaneFrame f;
  f.nw = norm(plane.normal.coords);
  if (f.nw == 0.0) throw std::invalid_argument("gyroplane: zero normal");
  const BallPoint neg{scaled(plane.offset.coords, -1.0)};
  f.z = mobius_add(neg, project_to_ball(h, cfg), cfg).coords;
  f.s = dot(f.z, plane.normal.coords);
  f.q = squared_norm(f.z);
  f.lam = conformal_factor(plane.offset.coords, cfg);
  const double rc = std::sqrt(cfg.c);
  f.u = 2.0 * rc * f.s / ((1.0 - cfg.c * f.q) * f.nw);
  return f;
}

}  // namespace

std::size_t FlatModel::dim() const {
  if (geometry == Geometry::hyperbolic)
    return planes.empty() ? 0 : planes.front().offset.coords.size();
  return weights.empty() ? 0 : weights.front().coords.size();
}

void FlatModel::validate() const {
  ball.validate();
  if (classes() < 2) throw std::invalid_argument("model: need at least two classes");
  const std::size_t n = dim();
  if (n == 0) throw std::invalid_argument("model: zero dimension");
  if (geometry == Geometry::hyperbolic) {
    if (!weights.empty() || !biases.empty())
      throw std::invalid_argument("model: euclidean parameters on a hyperbolic model");
    for (const Gyroplane& p : planes) {
      if (p.offset.coords.size() != n || p.normal.coords.size() != n)
        throw std::invalid_argument("model: inconsistent plane dimensions");
      if (ball.c * squared_norm(p.offset.coords) >= 1.0)
        throw std::invalid_argument("model: plane offset outside the ball");
      if (norm(p.normal.coords) == 0.0) throw std::invalid_argument("model: zero plane normal");
    }
  } else {
    if (!planes.empty()) throw std::invalid_argument("model: gyroplanes on a euclidean model");
    if (biases.size() != weights.size()) throw std::invalid_argument("model: bias count mismatch");
    for (const Tangent& w : weights)
      if (w.coords.size() != n) throw std::invalid_argument("model: inconsistent weight dimensions");
  }
}

double gyroplane_distance(std::span<const double> h, const Gyroplane& plane, const BallConfig& cfg) {
  const PlaneFrame f = make_frame(h, plane, cfg);
  return std::asinh(std::fabs(f.u)) / std::sqrt(cfg.c);
}

double hyperbolic_logit(std::span<const double> h, const Gyroplane& plane, const BallConfig& cfg) {
  const PlaneFrame f = make_frame(h, plane, cfg);
  return f.lam * f.nw * std::asinh(f.u) / std::sqrt(cfg.c);
}

std::vector<double> hyperbolic_logits(std::span<const double> h,
                                      const std::vector<Gyroplane>& planes, const BallConfig& cfg) {
  std::vector<double> out(planes.size());
  for (std::size_t k = 0; k < planes.size(); ++k) out[k] = hyperbolic_logit(h, planes[k], cfg);
  return out;
}

std::vector<double> softmax(std::span<const double> logits) {
  if (logits.empty()) throw std::invalid_argument("softmax: empty logits");
  const double m = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = std::exp(logits[i] - m);
    sum += p[i];
  }
  for (double& v : p) v /= sum;
  return p;
}

std::vector<double> hyperbolic_posteriors(std::span<const double> h,
                                          const std::vector<Gyroplane>& planes,
                                          const BallConfig& cfg) {
  const std::vector<double> l = hyperbolic_logits(h, planes, cfg);
  return softmax(l);
}

std::vector<double> euclidean_logits(std::span<const double> x, const std::vector<Tangent>& weights,
                                     std::span<const double> biases) {
  if (weights.size() != biases.size()) throw std::invalid_argument("euclidean_logits: bias count");
  std::vector<double> out(weights.size());
  for (std::size_t k = 0; k < weights.size(); ++k) out[k] = dot(x, weights[k].coords) + biases[k];
  return out;
}

std::vector<double> euclidean_posteriors(std::span<const double> x,
                                         const std::vector<Tangent>& weights,
                                         std::span<const double> biases) {
  const std::vector<double> l = euclidean_logits(x, weights, biases);
  return softmax(l);
}

double cross_entropy_loss(std::span<const double> posteriors, std::size_t true_class) {
  if (true_class >= posteriors.size()) throw std::out_of_range("cross_entropy_loss: class index");
  return -std::log(posteriors[true_class]);
}

std::vector<double> model_posteriors(const FlatModel& model, std::span<const double> raw) {
  if (model.geometry == Geometry::hyperbolic) {
    const BallPoint h = exp_map_origin(Tangent{Vec(raw.begin(), raw.end())}, model.ball);
    return hyperbolic_posteriors(h.coords, model.planes, model.ball);
  }
  return euclidean_posteriors(raw, model.weights, model.biases);
}

static std::vector<double> posterior_batch_impl(const FlatModel& model,
                                                const LabeledEmbeddings& raw, bool parallel) {
  raw.validate();
  if (raw.dim != model.dim()) throw std::invalid_argument("posterior_batch: dimension mismatch");
  const std::size_t count = raw.count();
  const std::size_t k = model.classes();
  std::vector<double> out(count * k);
  if (parallel) {
#pragma omp parallel for schedule(static)
    for (long i = 0; i < static_cast<long>(count); ++i) {
      const std::vector<double> p = model_posteriors(model, raw.sample(i));
      std::copy(p.begin(), p.end(), out.begin() + i * k);
    }
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      const std::vector<double> p = model_posteriors(model, raw.sample(i));
      std::copy(p.begin(), p.end(), out.begin() + i * k);
    }
  }
  return out;
}

std::vector<double> posterior_batch(const FlatModel& model, const LabeledEmbeddings& raw) {
  return posterior_batch_impl(model, raw, true);
}

std::vector<double> posterior_batch_serial(const FlatModel& model, const LabeledEmbeddings& raw) {
  return posterior_batch_impl(model, raw, false);
}

namespace {

// Pullback through v (+) w at fixed output gradient g, returning gradients
// with respect to both arguments. Derived by differentiating the quotient
// form of the addition; T1/T2/T3 are the inner products the product rule
// produces.
void mobius_add_backward(std::span<const double> a, std::span<const double> b,
                         std::span<const double> added, std::span<const double> g, double c,
                         Vec& ga, Vec& gb) {
  const std::size_t n = a.size();
  const double ab = dot(a, b);
  const double aa = squared_norm(a);
  const double bb = squared_norm(b);
  const double alpha = 1.0 + 2.0 * c * ab + c * bb;
  const double beta = 1.0 - c * aa;
  const double denom = 1.0 + 2.0 * c * ab + c * c * aa * bb;
  const double t1 = dot(a, g);
  const double t2 = dot(b, g);
  const double t3 = dot(added, g);
  ga.assign(n, 0.0);
  gb.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    ga[i] = (alpha * g[i] + 2.0 * c * t1 * b[i] - 2.0 * c * t2 * a[i] -
             t3 * (2.0 * c * b[i] + 2.0 * c * c * bb * a[i])) /
            denom;
    gb[i] = (beta * g[i] + 2.0 * c * t1 * (a[i] + b[i]) -
             t3 * (2.0 * c * a[i] + 2.0 * c * c * aa * b[i])) /
            denom;
  }
}

}  // namespace

HyperbolicGradients grad_hyperbolic(std::span<const double> h,
                                    const std::vector<Gyroplane>& planes, const BallConfig& cfg,
                                    std::size_t true_class) {
  const std::size_t k = planes.size();
  const std::size_t n = h.size();
  if (true_class >= k) throw std::out_of_range("grad_hyperbolic: class index");
  const double c = cfg.c;
  const double rc = std::sqrt(c);

  std::vector<PlaneFrame> frames(k);
  std::vector<double> logits(k);
  for (std::size_t j = 0; j < k; ++j) {
    frames[j] = make_frame(h, planes[j], cfg);
    logits[j] = frames[j].lam * frames[j].nw * std::asinh(frames[j].u) / rc;
  }
  const std::vector<double> p = softmax(logits);

  HyperbolicGradients g;
  g.offsets.assign(k, Vec(n, 0.0));
  g.normals.assign(k, Vec(n, 0.0));
  g.input.assign(n, 0.0);
  const double m = *std::max_element(logits.begin(), logits.end());
  double lse = 0.0;
  for (double l : logits) lse += std::exp(l - m);
  g.loss = std::log(lse) + m - logits[true_class];

  Vec ga(n), gb(n), gz(n);
  for (std::size_t j = 0; j < k; ++j) {
    const PlaneFrame& f = frames[j];
    const double up = p[j] - (j == true_class ? 1.0 : 0.0);
    const double asl = std::asinh(f.u);
    const double inv_hyp = 1.0 / std::sqrt(1.0 + f.u * f.u);
    const double den = (1.0 - c * f.q) * f.nw;

    const double g_arc = up * f.lam * f.nw / rc;
    const double g_u = g_arc * inv_hyp;
    const double g_s = g_u * 2.0 * rc / den;
    const double g_q = g_u * 2.0 * rc * f.s * c / ((1.0 - c * f.q) * (1.0 - c * f.q) * f.nw);
    const double g_nw = up * (f.lam / rc) * (asl - f.u * inv_hyp);

    // normal: through <z, w> and through |w|
    Vec& gw = g.normals[j];
    for (std::size_t i = 0; i < n; ++i)
      gw[i] = g_s * f.z[i] + g_nw * planes[j].normal.coords[i] / f.nw;

    // pull the z gradient back through the addition
    for (std::size_t i = 0; i < n; ++i) gz[i] = g_s * planes[j].normal.coords[i] + 2.0 * g_q * f.z[i];
    const Vec neg = scaled(planes[j].offset.coords, -1.0);
    mobius_add_backward(neg, h, f.z, gz, c, ga, gb);

    // offset: sign flip from a = -offset, plus the conformal-factor path
    Vec& gr = g.offsets[j];
    const double g_lam = up * f.nw * asl / rc;
    const double dlam = c * f.lam * f.lam;  // dlambda/dr = c lambda^2 r
    for (std::size_t i = 0; i < n; ++i)
      gr[i] = -ga[i] + g_lam * dlam * planes[j].offset.coords[i];
    for (std::size_t i = 0; i < n; ++i) g.input[i] += gb[i];
  }
  return g;
}

EuclideanGradients grad_euclidean(std::span<const double> x, const std::vector<Tangent>& weights,
                                  std::span<const double> biases, std::size_t true_class) {
  const std::size_t k = weights.size();
  const std::size_t n = x.size();
  if (true_class >= k) throw std::out_of_range("grad_euclidean: class index");
  const std::vector<double> logits = euclidean_logits(x, weights, biases);
  const std::vector<double> p = softmax(logits);

  EuclideanGradients g;
  g.weights.assign(k, Vec(n, 0.0));
  g.biases.assign(k, 0.0);
  g.input.assign(n, 0.0);
  const double m = *std::max_element(logits.begin(), logits.end());
  double lse = 0.0;
  for (double l : logits) lse += std::exp(l - m);
  g.loss = std::log(lse) + m - logits[true_class];

  for (std::size_t j = 0; j < k; ++j) {
    const double up = p[j] - (j == true_class ? 1.0 : 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      g.weights[j][i] = up * x[i];
      g.input[i] += up * weights[j].coords[i];
    }
    g.biases[j] = up;
  }
  return g;
}

}  // namespace hyperhier
