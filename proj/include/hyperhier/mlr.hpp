#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "hyperhier/embeddings.hpp"
#include "hyperhier/geometry.hpp"
#include "hyperhier/vec.hpp"

namespace hyperhier {

// Decision surface for one class in the ball: the set of points h with
// <(-offset) (+) h, normal> = 0, i.e. the union of geodesics through `offset`
// orthogonal to `normal`.
struct Gyroplane {
  BallPoint offset;
  Tangent normal;
};

// Flat multinomial classifier over K classes in either geometry. The
// euclidean arm holds per-class (weight, bias) scoring rows; the hyperbolic
// arm holds one gyroplane per class. Exactly one arm is populated.
struct FlatModel {
  Geometry geometry = Geometry::euclidean;
  BallConfig ball;
  std::vector<Gyroplane> planes;   // hyperbolic parameters
  std::vector<Tangent> weights;    // euclidean parameters
  std::vector<double> biases;

  std::size_t classes() const {
    return geometry == Geometry::hyperbolic ? planes.size() : weights.size();
  }
  std::size_t dim() const;
  void validate() const;  // throws std::invalid_argument
};

// Geodesic distance from a point to a gyroplane:
//   (1/sqrt(c)) arcsinh( 2 sqrt(c) |<z, w>| / ((1 - c|z|^2) |w|) ),
// with z = (-offset) (+) h.
double gyroplane_distance(std::span<const double> h, const Gyroplane& plane, const BallConfig& cfg);

// Class score whose sign says which side of the gyroplane h falls on and
// whose magnitude is lambda(offset) |w| times the distance to it:
//   lambda(offset) |w| / sqrt(c) * arcsinh( 2 sqrt(c) <z, w> / ((1 - c|z|^2) |w|) ).
double hyperbolic_logit(std::span<const double> h, const Gyroplane& plane, const BallConfig& cfg);

std::vector<double> hyperbolic_logits(std::span<const double> h,
                                      const std::vector<Gyroplane>& planes, const BallConfig& cfg);

// softmax with max-subtraction; result sums to 1
std::vector<double> softmax(std::span<const double> logits);

std::vector<double> hyperbolic_posteriors(std::span<const double> h,
                                          const std::vector<Gyroplane>& planes,
                                          const BallConfig& cfg);

std::vector<double> euclidean_logits(std::span<const double> x, const std::vector<Tangent>& weights,
                                     std::span<const double> biases);
std::vector<double> euclidean_posteriors(std::span<const double> x,
                                         const std::vector<Tangent>& weights,
                                         std::span<const double> biases);

// -log p[true_class]; 0 iff the true class gets probability 1
double cross_entropy_loss(std::span<const double> posteriors, std::size_t true_class);

// Posteriors for one raw feature row: hyperbolic models first lift the row
// into the ball through the origin exponential map.
std::vector<double> model_posteriors(const FlatModel& model, std::span<const double> raw);

// Posteriors for every row of `raw`, concatenated (count x K, row-major).
// The parallel kernel writes disjoint rows, so its output is identical to the
// serial reference for any thread count.
std::vector<double> posterior_batch(const FlatModel& model, const LabeledEmbeddings& raw);
std::vector<double> posterior_batch_serial(const FlatModel& model, const LabeledEmbeddings& raw);

// Cross-entropy gradients for a single sample, exact (no finite differences).
// `input` is the gradient with respect to the ball point h itself.
struct HyperbolicGradients {
  std::vector<Vec> offsets;
  std::vector<Vec> normals;
  Vec input;
  double loss = 0.0;
};
HyperbolicGradients grad_hyperbolic(std::span<const double> h,
                                    const std::vector<Gyroplane>& planes, const BallConfig& cfg,
                                    std::size_t true_class);

struct EuclideanGradients {
  std::vector<Vec> weights;
  Vec biases;
  Vec input;
  double loss = 0.0;
};
EuclideanGradients grad_euclidean(std::span<const double> x, const std::vector<Tangent>& weights,
                                  std::span<const double> biases, std::size_t true_class);

}  // namespace hyperhier
