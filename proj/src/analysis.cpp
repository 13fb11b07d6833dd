#include "hyperhier/analysis.hpp"

#include <cassert>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>

#include "hyperhier/errors.hpp"
#include "hyperhier/rng.hpp"

namespace hyperhier {

namespace {

std::vector<std::vector<std::uint32_t>> indices_by_class(const LabeledEmbeddings& data,
                                                         std::size_t classes) {
  std::vector<std::vector<std::uint32_t>> by_class(classes);
  for (std::size_t i = 0; i < data.count(); ++i) {
    const std::uint32_t y = data.labels[i];
    if (y == kIgnoreLabel) continue;
    if (y >= classes)
      throw std::invalid_argument("analysis: label " + std::to_string(y) + " out of range");
    by_class[y].push_back(static_cast<std::uint32_t>(i));
  }
  return by_class;
}

CvStat cv_from_moments(double sum, double sumsq, std::size_t n) {
  assert(n > 0);
  CvStat st;
  st.pairs = n;
  const double mean = sum / static_cast<double>(n);
  if (mean == 0.0) {
    st.degenerate = true;
    return st;
  }
  const double var = std::max(sumsq / static_cast<double>(n) - mean * mean, 0.0);
  st.cv = std::sqrt(var) / mean;
  return st;
}

// Pair list between two classes: exhaustive in anchor-major order when it
// fits under the cap, otherwise `cap` seeded draws with replacement. Either
// way the list is a pure function of (seed, anchor, other).
std::vector<std::pair<std::uint32_t, std::uint32_t>> make_pairs(
    const std::vector<std::uint32_t>& anchor_rows, const std::vector<std::uint32_t>& other_rows,
    std::uint64_t stream, const CvOptions& options) {
  const std::uint64_t total =
      static_cast<std::uint64_t>(anchor_rows.size()) * other_rows.size();
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
  if (total <= options.pair_cap) {
    pairs.reserve(total);
    for (std::uint32_t a : anchor_rows)
      for (std::uint32_t b : other_rows) pairs.emplace_back(a, b);
  } else {
    CounterRng rng = CounterRng::keyed(options.seed, stream);
    pairs.reserve(options.pair_cap);
    for (std::size_t p = 0; p < options.pair_cap; ++p)
      pairs.emplace_back(anchor_rows[rng.below(anchor_rows.size())],
                         other_rows[rng.below(other_rows.size())]);
  }
  return pairs;
}

double pair_distance(const LabeledEmbeddings& data, std::uint32_t a, std::uint32_t b,
                     const BallConfig& ball) {
  if (data.geometry == Geometry::hyperbolic)
    return hyperbolic_distance(data.sample(a), data.sample(b), ball);
  return std::sqrt(squared_distance(data.sample(a), data.sample(b)));
}

void check_cv_inputs(const LabeledEmbeddings& data, std::size_t anchor, std::size_t classes,
                     const std::vector<std::vector<std::uint32_t>>& by_class,
                     const BallConfig& ball) {
  if (classes < 2) throw std::invalid_argument("distance cv: need at least two classes");
  if (anchor >= classes) throw std::invalid_argument("distance cv: anchor class out of range");
  data.validate();
  for (std::size_t k = 0; k < classes; ++k)
    if (by_class[k].size() < 2)
      throw std::invalid_argument("distance cv: class " + std::to_string(k) +
                                  " has fewer than two samples");
  // the distance kernels run inside parallel regions where a throw would
  // terminate, so the ball invariant is enforced up front
  if (data.geometry == Geometry::hyperbolic)
    for (std::size_t i = 0; i < data.count(); ++i)
      if (ball.c * squared_norm(data.sample(i)) >= 1.0)
        throw std::invalid_argument("distance cv: sample outside the ball");
}

}  // namespace

NormStats class_norm_stats(const LabeledEmbeddings& data, std::size_t classes) {
  if (classes == 0) throw std::invalid_argument("class_norm_stats: zero classes");
  data.validate();
  std::vector<double> sum(classes, 0.0), sumsq(classes, 0.0);
  std::vector<std::size_t> n(classes, 0);
  for (std::size_t i = 0; i < data.count(); ++i) {
    const std::uint32_t y = data.labels[i];
    if (y == kIgnoreLabel) continue;
    if (y >= classes)
      throw std::invalid_argument("class_norm_stats: label " + std::to_string(y) +
                                  " out of range");
    const double r = norm(data.sample(i));
    sum[y] += r;
    sumsq[y] += r * r;
    n[y]++;
  }
  NormStats stats;
  stats.mean.resize(classes);
  stats.stddev.resize(classes);
  for (std::size_t k = 0; k < classes; ++k) {
    if (n[k] == 0)
      throw std::invalid_argument("class_norm_stats: class " + std::to_string(k) + " is empty");
    const double mean = sum[k] / static_cast<double>(n[k]);
    stats.mean[k] = mean;
    stats.stddev[k] = std::sqrt(std::max(sumsq[k] / static_cast<double>(n[k]) - mean * mean, 0.0));
  }
  return stats;
}

std::vector<CvStat> interclass_distance_cv(const LabeledEmbeddings& data, std::size_t anchor,
                                           std::size_t classes, const CvOptions& options) {
  const auto by_class = indices_by_class(data, classes);
  check_cv_inputs(data, anchor, classes, by_class, options.ball);
  std::vector<CvStat> out(classes);
  for (std::size_t other = 0; other < classes; ++other) {
    if (other == anchor) continue;
    const auto pairs = make_pairs(by_class[anchor], by_class[other],
                                  streams::pair_sample_base + anchor * classes + other, options);
    // fixed-size blocks merged in index order: the result depends on the
    // block layout, never on the thread count
    constexpr std::size_t kBlock = 1024;
    const std::size_t nblocks = (pairs.size() + kBlock - 1) / kBlock;
    std::vector<double> bsum(nblocks, 0.0), bsumsq(nblocks, 0.0);
#pragma omp parallel for schedule(static)
    for (long blk = 0; blk < static_cast<long>(nblocks); ++blk) {
      const std::size_t lo = static_cast<std::size_t>(blk) * kBlock;
      const std::size_t hi = std::min(lo + kBlock, pairs.size());
      double s = 0.0, s2 = 0.0;
      for (std::size_t p = lo; p < hi; ++p) {
        const double d = pair_distance(data, pairs[p].first, pairs[p].second, options.ball);
        s += d;
        s2 += d * d;
      }
      bsum[blk] = s;
      bsumsq[blk] = s2;
    }
    double sum = 0.0, sumsq = 0.0;
    for (std::size_t blk = 0; blk < nblocks; ++blk) {
      sum += bsum[blk];
      sumsq += bsumsq[blk];
    }
    out[other] = cv_from_moments(sum, sumsq, pairs.size());
  }
  return out;
}

std::vector<CvStat> interclass_distance_cv_serial(const LabeledEmbeddings& data, std::size_t anchor,
                                                  std::size_t classes, const CvOptions& options) {
  const auto by_class = indices_by_class(data, classes);
  check_cv_inputs(data, anchor, classes, by_class, options.ball);
  std::vector<CvStat> out(classes);
  for (std::size_t other = 0; other < classes; ++other) {
    if (other == anchor) continue;
    const auto pairs = make_pairs(by_class[anchor], by_class[other],
                                  streams::pair_sample_base + anchor * classes + other, options);
    double sum = 0.0, sumsq = 0.0;
    for (const auto& [a, b] : pairs) {
      const double d = pair_distance(data, a, b, options.ball);
      sum += d;
      sumsq += d * d;
    }
    out[other] = cv_from_moments(sum, sumsq, pairs.size());
  }
  return out;
}

std::vector<CvStat> plane_distance_cv(const LabeledEmbeddings& data, const FlatModel& model,
                                      std::size_t anchor) {
  model.validate();
  data.validate();
  if (model.geometry != data.geometry)
    throw std::invalid_argument("plane_distance_cv: model and data geometry differ");
  if (model.dim() != data.dim)
    throw std::invalid_argument("plane_distance_cv: model and data dimension differ");
  const std::size_t classes = model.classes();
  const auto by_class = indices_by_class(data, classes);
  if (anchor >= classes) throw std::invalid_argument("plane_distance_cv: anchor class out of range");
  if (by_class[anchor].empty())
    throw std::invalid_argument("plane_distance_cv: anchor class is empty");
  std::vector<CvStat> out(classes);
  for (std::size_t other = 0; other < classes; ++other) {
    if (other == anchor) continue;
    double sum = 0.0, sumsq = 0.0;
    for (std::uint32_t row : by_class[anchor]) {
      double d;
      if (model.geometry == Geometry::hyperbolic) {
        d = gyroplane_distance(data.sample(row), model.planes[other], model.ball);
      } else {
        const double nw = norm(model.weights[other].coords);
        if (nw == 0.0) throw std::invalid_argument("plane_distance_cv: zero weight vector");
        d = std::abs(dot(data.sample(row), model.weights[other].coords) + model.biases[other]) / nw;
      }
      sum += d;
      sumsq += d * d;
    }
    out[other] = cv_from_moments(sum, sumsq, by_class[anchor].size());
  }
  return out;
}

std::vector<ConcavityRow> concavity_scan(double norm1, double norm2,
                                         const std::vector<double>& grid) {
  if (!(norm1 >= 0.0) || norm1 >= 1.0 || !(norm2 >= 0.0) || norm2 >= 1.0)
    throw std::domain_error("concavity_scan: norms must lie in [0, 1)");
  if (grid.empty()) throw std::invalid_argument("concavity_scan: empty grid");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!std::isfinite(grid[i]) || grid[i] < 0.0)
      throw std::invalid_argument("concavity_scan: grid entries must be finite and nonnegative");
    if (i > 0 && grid[i] <= grid[i - 1])
      throw std::invalid_argument("concavity_scan: grid must be strictly ascending");
  }
  const double A = (1.0 - norm1 * norm1) * (1.0 - norm2 * norm2);
  // acosh(1 + x) written as log1p(x + sqrt(x(x + 2))) so that tiny euclidean
  // steps keep full precision instead of rounding away inside 1 + x
  const auto dball = [A](double e) {
    const double x = 2.0 * e * e / A;
    return std::log1p(x + std::sqrt(x * (x + 2.0)));
  };
  std::vector<ConcavityRow> rows;
  rows.reserve(grid.size());
  for (double e : grid) {
    ConcavityRow row;
    row.euclidean = e;
    row.hyperbolic = dball(e);
    row.derivative = hyperbolic_distance_derivative(e, norm1, norm2);
    const double h = 1e-6 * std::max(1.0, e);
    row.finite_diff = e > h ? (dball(e + h) - dball(e - h)) / (2.0 * h)
                            : (dball(e + h) - dball(e)) / h;
    if (std::abs(row.finite_diff - row.derivative) > 1e-5 * std::abs(row.derivative))
      throw InvariantViolation("concavity_scan: slope check failed at e = " + std::to_string(e));
    if (!rows.empty() && row.derivative >= rows.back().derivative)
      throw InvariantViolation("concavity_scan: slope failed to decrease at e = " +
                               std::to_string(e));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace hyperhier
