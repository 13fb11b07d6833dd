#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hyperhier/embeddings.hpp"

namespace hyperhier {

// Square count matrix indexed [true][predicted]. Mergeable by elementwise
// addition, which is what the parallel accumulator relies on.
struct ConfusionMatrix {
  std::size_t classes = 0;
  std::vector<std::uint64_t> counts;

  explicit ConfusionMatrix(std::size_t k) : classes(k), counts(k * k, 0) {}
  std::uint64_t& at(std::size_t truth, std::size_t pred) { return counts[truth * classes + pred]; }
  std::uint64_t at(std::size_t truth, std::size_t pred) const {
    return counts[truth * classes + pred];
  }
  std::uint64_t total() const;
  void merge(const ConfusionMatrix& other);
};

// Per-class confidence histogram over M bins partitioning (0, 1] right-
// inclusively: bin m covers (m/M, (m+1)/M], except bin 0 which also takes
// p = 0. Tracks, per (class, bin): sample count, summed confidence and hit
// count, plus per-class true-label counts and the evaluated total.
struct CalibrationBins {
  std::size_t classes = 0;
  std::size_t bins = 0;
  std::vector<std::uint64_t> count;     // classes x bins
  std::vector<std::uint64_t> hits;      // classes x bins
  std::vector<double> conf_sum;         // classes x bins
  std::vector<std::uint64_t> true_count;  // per class
  std::uint64_t samples = 0;

  CalibrationBins(std::size_t k, std::size_t m)
      : classes(k), bins(m), count(k * m, 0), hits(k * m, 0), conf_sum(k * m, 0.0), true_count(k, 0) {}
  std::size_t bin_index(double p) const;
  void merge(const CalibrationBins& other);
};

// Posterior rows paired with ground-truth labels; rows with label
// kIgnoreLabel are skipped by the accumulators.
struct PredictionBatch {
  std::size_t classes = 0;
  std::vector<double> posteriors;       // count x classes, row-major
  std::vector<std::uint32_t> labels;

  std::size_t count() const { return labels.size(); }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(posteriors).subspan(i * classes, classes);
  }
  void validate() const;
};

// Fold a batch into the two accumulators. The parallel version reduces over
// fixed-size blocks merged in block index order, so its result never depends
// on the thread count or schedule: all integer counts match the serial
// reference bitwise, and the block-merged confidence sums are reproducible
// (bitwise equal to serial up to one block, within rounding beyond).
void accumulate(const PredictionBatch& batch, ConfusionMatrix& cm, CalibrationBins& cb);
void accumulate_parallel(const PredictionBatch& batch, ConfusionMatrix& cm, CalibrationBins& cb);

// Mean over present classes (true count > 0) of tp / (tp + fp + fn).
double miou(const ConfusionMatrix& cm);
// Mean over present classes of tp / (tp + fn).
double macc(const ConfusionMatrix& cm);
// trace / total.
double aacc(const ConfusionMatrix& cm);
// Per-class tp / (tp + fp + fn); NaN for classes that never appear in truth
// or prediction.
std::vector<double> per_class_iou(const ConfusionMatrix& cm);

// Denominator convention for the class-wise calibration error: weight each
// (class, bin) cell by its count over the evaluated total, or over the
// class's true-label count (classes never seen in truth then contribute 0).
enum class CweceNorm { total_samples, true_class };

// Class-wise expected calibration error: mean over classes of the per-bin
// |accuracy - confidence| gaps, each weighted by the chosen denominator.
double cwece(const CalibrationBins& cb, CweceNorm mode = CweceNorm::total_samples);

}  // namespace hyperhier
