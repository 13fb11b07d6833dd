#include "hyperhier/metrics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace hyperhier {

std::uint64_t ConfusionMatrix::total() const {
  std::uint64_t t = 0;
  for (std::uint64_t v : counts) t += v;
  return t;
}

void ConfusionMatrix::merge(const ConfusionMatrix& other) {
  if (other.classes != classes) throw std::invalid_argument("confusion merge: class count");
  for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += other.counts[i];
}

std::size_t CalibrationBins::bin_index(double p) const {
  long idx = static_cast<long>(std::ceil(p * static_cast<double>(bins))) - 1;
  if (idx < 0) idx = 0;
  if (idx >= static_cast<long>(bins)) idx = static_cast<long>(bins) - 1;
  return static_cast<std::size_t>(idx);
}

void CalibrationBins::merge(const CalibrationBins& other) {
  if (other.classes != classes || other.bins != bins)
    throw std::invalid_argument("calibration merge: shape mismatch");
  for (std::size_t i = 0; i < count.size(); ++i) {
    count[i] += other.count[i];
    hits[i] += other.hits[i];
    conf_sum[i] += other.conf_sum[i];
  }
  for (std::size_t y = 0; y < classes; ++y) true_count[y] += other.true_count[y];
  samples += other.samples;
}

void PredictionBatch::validate() const {
  if (classes == 0) throw std::invalid_argument("prediction batch: zero classes");
  if (posteriors.size() != labels.size() * classes)
    throw std::invalid_argument("prediction batch: posterior/label size mismatch");
  for (std::uint32_t l : labels)
    if (l != kIgnoreLabel && l >= classes)
      throw std::out_of_range("prediction batch: label out of range");
}

namespace {

void accumulate_range(const PredictionBatch& batch, std::size_t begin, std::size_t end,
                      ConfusionMatrix& cm, CalibrationBins& cb) {
  for (std::size_t i = begin; i < end; ++i) {
    const std::uint32_t label = batch.labels[i];
    if (label == kIgnoreLabel) continue;
    const auto p = batch.row(i);
    cm.at(label, argmax(p)) += 1;
    for (std::size_t y = 0; y < batch.classes; ++y) {
      const std::size_t slot = y * cb.bins + cb.bin_index(p[y]);
      cb.count[slot] += 1;
      cb.conf_sum[slot] += p[y];
      if (label == y) cb.hits[slot] += 1;
    }
    cb.true_count[label] += 1;
    cb.samples += 1;
  }
}

// Accumulation block size. Fixed independently of the thread count so the
// merged result is the same no matter how the blocks were scheduled.
constexpr std::size_t kBlock = 1024;

}  // namespace

void accumulate(const PredictionBatch& batch, ConfusionMatrix& cm, CalibrationBins& cb) {
  batch.validate();
  if (cm.classes != batch.classes || cb.classes != batch.classes)
    throw std::invalid_argument("accumulate: accumulator class count mismatch");
  accumulate_range(batch, 0, batch.count(), cm, cb);
}

void accumulate_parallel(const PredictionBatch& batch, ConfusionMatrix& cm, CalibrationBins& cb) {
  batch.validate();
  if (cm.classes != batch.classes || cb.classes != batch.classes)
    throw std::invalid_argument("accumulate: accumulator class count mismatch");
  const std::size_t n = batch.count();
  const std::size_t nblocks = (n + kBlock - 1) / kBlock;
  std::vector<ConfusionMatrix> cms(nblocks, ConfusionMatrix(batch.classes));
  std::vector<CalibrationBins> cbs(nblocks, CalibrationBins(batch.classes, cb.bins));
#pragma omp parallel for schedule(static)
  for (long b = 0; b < static_cast<long>(nblocks); ++b) {
    const std::size_t begin = static_cast<std::size_t>(b) * kBlock;
    accumulate_range(batch, begin, std::min(begin + kBlock, n), cms[b], cbs[b]);
  }
  for (std::size_t b = 0; b < nblocks; ++b) {
    cm.merge(cms[b]);
    cb.merge(cbs[b]);
  }
}

namespace {

struct ClassCounts {
  std::uint64_t tp = 0, row = 0, col = 0;  // row = truth count, col = prediction count
};

std::vector<ClassCounts> class_counts(const ConfusionMatrix& cm) {
  std::vector<ClassCounts> out(cm.classes);
  for (std::size_t t = 0; t < cm.classes; ++t)
    for (std::size_t p = 0; p < cm.classes; ++p) {
      const std::uint64_t v = cm.at(t, p);
      out[t].row += v;
      out[p].col += v;
      if (t == p) out[t].tp += v;
    }
  return out;
}

}  // namespace

double miou(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw std::invalid_argument("miou: empty confusion matrix");
  const auto counts = class_counts(cm);
  double sum = 0.0;
  std::size_t present = 0;
  for (const ClassCounts& c : counts) {
    if (c.row == 0) continue;
    sum += static_cast<double>(c.tp) / static_cast<double>(c.row + c.col - c.tp);
    ++present;
  }
  return sum / static_cast<double>(present);
}

double macc(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw std::invalid_argument("macc: empty confusion matrix");
  const auto counts = class_counts(cm);
  double sum = 0.0;
  std::size_t present = 0;
  for (const ClassCounts& c : counts) {
    if (c.row == 0) continue;
    sum += static_cast<double>(c.tp) / static_cast<double>(c.row);
    ++present;
  }
  return sum / static_cast<double>(present);
}

double aacc(const ConfusionMatrix& cm) {
  const std::uint64_t total = cm.total();
  if (total == 0) throw std::invalid_argument("aacc: empty confusion matrix");
  std::uint64_t diag = 0;
  for (std::size_t k = 0; k < cm.classes; ++k) diag += cm.at(k, k);
  return static_cast<double>(diag) / static_cast<double>(total);
}

std::vector<double> per_class_iou(const ConfusionMatrix& cm) {
  const auto counts = class_counts(cm);
  std::vector<double> out(cm.classes);
  for (std::size_t k = 0; k < cm.classes; ++k) {
    const std::uint64_t denom = counts[k].row + counts[k].col - counts[k].tp;
    out[k] = denom == 0 ? std::numeric_limits<double>::quiet_NaN()
                        : static_cast<double>(counts[k].tp) / static_cast<double>(denom);
  }
  return out;
}

double cwece(const CalibrationBins& cb, CweceNorm mode) {
  if (cb.samples == 0) throw std::invalid_argument("cwece: no evaluated samples");
  double total = 0.0;
  for (std::size_t y = 0; y < cb.classes; ++y) {
    const double denom = mode == CweceNorm::total_samples ? static_cast<double>(cb.samples)
                                                          : static_cast<double>(cb.true_count[y]);
    if (denom == 0.0) continue;
    for (std::size_t m = 0; m < cb.bins; ++m) {
      const std::uint64_t n = cb.count[y * cb.bins + m];
      if (n == 0) continue;
      const double conf = cb.conf_sum[y * cb.bins + m] / static_cast<double>(n);
      const double acc =
          static_cast<double>(cb.hits[y * cb.bins + m]) / static_cast<double>(n);
      total += static_cast<double>(n) / denom * std::fabs(acc - conf);
    }
  }
  return total / static_cast<double>(cb.classes);
}

}  // namespace hyperhier
