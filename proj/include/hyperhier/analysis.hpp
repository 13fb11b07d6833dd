#pragma once

#include <cstdint>
#include <vector>

#include "hyperhier/embeddings.hpp"
#include "hyperhier/mlr.hpp"

namespace hyperhier {

// Per-class first and second moments of the embedding norm. `stddev` is the
// population deviation (divide by the class size, not size-1).
struct NormStats {
  std::vector<double> mean;
  std::vector<double> stddev;
};

// Every class in [0, classes) must appear in the data; ignore-labeled rows
// are skipped. Throws std::invalid_argument on an empty class.
NormStats class_norm_stats(const LabeledEmbeddings& data, std::size_t classes);

struct CvOptions {
  std::size_t pair_cap = 100000;  // exhaustive below the cap, seeded resample above
  std::uint64_t seed = 0;
  BallConfig ball;  // curvature for ball-tagged data; unused for euclidean
};

// Spread-over-scale of one distance sample set. `pairs == 0` marks a slot
// that was never compared (the anchor against itself); `degenerate` flags a
// zero mean, where dividing by it would be meaningless.
struct CvStat {
  double cv = 0.0;
  std::size_t pairs = 0;
  bool degenerate = false;
};

// For each class other than `anchor`, the coefficient of variation of the
// point-to-point distances between the anchor class and that class, measured
// in the space the data is tagged with. Above the pair cap the pair list is
// resampled with a counter-based draw, so results depend only on the seed.
// The parallel kernel reduces fixed-size blocks in index order; the serial
// twin walks the same pair list directly. Both need every compared class to
// hold at least two samples.
std::vector<CvStat> interclass_distance_cv(const LabeledEmbeddings& data, std::size_t anchor,
                                           std::size_t classes, const CvOptions& options = {});
std::vector<CvStat> interclass_distance_cv_serial(const LabeledEmbeddings& data, std::size_t anchor,
                                                  std::size_t classes, const CvOptions& options = {});

// For each class other than `anchor`, the coefficient of variation of the
// distances from the anchor class's points to that class's decision surface.
// Hyperbolic models use the gyroplane distance, euclidean models the usual
// |w.x + b| / |w| point-to-hyperplane distance. The model's geometry must
// match the data tag.
std::vector<CvStat> plane_distance_cv(const LabeledEmbeddings& data, const FlatModel& model,
                                      std::size_t anchor);

// One grid point of the euclidean-vs-ball distance comparison at unit
// curvature: d_ball = acosh(1 + 2 e^2 / A) with A = (1 - norm1^2)(1 - norm2^2).
struct ConcavityRow {
  double euclidean;
  double hyperbolic;
  double derivative;   // closed-form d(d_ball)/d(e)
  double finite_diff;  // central/forward difference of the same map
};

// Tabulates d_ball and its slope over a strictly ascending grid of
// nonnegative euclidean distances. The slope column is cross-checked against
// a finite difference (1e-5 relative) and must fall strictly along the grid;
// either failure throws InvariantViolation.
std::vector<ConcavityRow> concavity_scan(double norm1, double norm2,
                                         const std::vector<double>& grid);

}  // namespace hyperhier
