#include <doctest.h>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <cmath>

#include "hyperhier/metrics.hpp"
#include "hyperhier/rng.hpp"

using namespace hyperhier;

namespace {

// Brute-force metric oracle: direct per-class counting over the raw
// (posterior, label) pairs, no shared accumulator machinery. Bin indices use
// the contracted formula ceil(p*M)-1 clamped into [0, M); everything else is
// recomputed from scratch.
struct BruteForce {
  std::size_t classes;
  std::size_t bins;
  const PredictionBatch& batch;

  std::size_t predict(std::size_t i) const {
    const auto row = batch.row(i);
    std::size_t best = 0;
    for (std::size_t k = 1; k < classes; ++k)
      if (row[k] > row[best]) best = k;
    return best;
  }

  std::size_t bin_of(double p) const {
    long b = static_cast<long>(std::ceil(p * static_cast<double>(bins))) - 1;
    if (b < 0) b = 0;
    if (b >= static_cast<long>(bins)) b = static_cast<long>(bins) - 1;
    return static_cast<std::size_t>(b);
  }

  void tally(std::size_t k, std::uint64_t& tp, std::uint64_t& fp, std::uint64_t& fn) const {
    tp = fp = fn = 0;
    for (std::size_t i = 0; i < batch.count(); ++i) {
      if (batch.labels[i] == kIgnoreLabel) continue;
      const bool truth = batch.labels[i] == k;
      const bool pred = predict(i) == k;
      if (truth && pred) ++tp;
      if (!truth && pred) ++fp;
      if (truth && !pred) ++fn;
    }
  }

  std::uint64_t evaluated() const {
    std::uint64_t n = 0;
    for (std::uint32_t l : batch.labels)
      if (l != kIgnoreLabel) ++n;
    return n;
  }

  double miou() const {
    double sum = 0.0;
    std::size_t present = 0;
    for (std::size_t k = 0; k < classes; ++k) {
      std::uint64_t tp, fp, fn;
      tally(k, tp, fp, fn);
      if (tp + fn == 0) continue;
      sum += static_cast<double>(tp) / static_cast<double>(tp + fp + fn);
      ++present;
    }
    return sum / static_cast<double>(present);
  }

  double macc() const {
    double sum = 0.0;
    std::size_t present = 0;
    for (std::size_t k = 0; k < classes; ++k) {
      std::uint64_t tp, fp, fn;
      tally(k, tp, fp, fn);
      if (tp + fn == 0) continue;
      sum += static_cast<double>(tp) / static_cast<double>(tp + fn);
      ++present;
    }
    return sum / static_cast<double>(present);
  }

  double aacc() const {
    std::uint64_t hit = 0, n = 0;
    for (std::size_t i = 0; i < batch.count(); ++i) {
      if (batch.labels[i] == kIgnoreLabel) continue;
      ++n;
      if (predict(i) == batch.labels[i]) ++hit;
    }
    return static_cast<double>(hit) / static_cast<double>(n);
  }

  double cwece(CweceNorm mode) const {
    const std::uint64_t n_total = evaluated();
    double total = 0.0;
    for (std::size_t y = 0; y < classes; ++y) {
      std::uint64_t n_y = 0;
      for (std::size_t i = 0; i < batch.count(); ++i)
        if (batch.labels[i] == y) ++n_y;
      const double denom = mode == CweceNorm::total_samples ? static_cast<double>(n_total)
                                                            : static_cast<double>(n_y);
      if (denom == 0.0) continue;
      for (std::size_t m = 0; m < bins; ++m) {
        std::uint64_t cnt = 0, hit = 0;
        double conf = 0.0;
        for (std::size_t i = 0; i < batch.count(); ++i) {
          if (batch.labels[i] == kIgnoreLabel) continue;
          const double p = batch.row(i)[y];
          if (bin_of(p) != m) continue;
          ++cnt;
          conf += p;
          if (batch.labels[i] == y) ++hit;
        }
        if (cnt == 0) continue;
        const double acc = static_cast<double>(hit) / static_cast<double>(cnt);
        total += static_cast<double>(cnt) / denom * std::fabs(acc - conf / static_cast<double>(cnt));
      }
    }
    return total / static_cast<double>(classes);
  }
};

PredictionBatch random_batch(CounterRng& rng, std::size_t k, std::size_t max_count) {
  PredictionBatch b;
  b.classes = k;
  const std::size_t n = 1 + rng.below(max_count);
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    std::vector<double> p(k);
    for (double& v : p) {
      v = -std::log(rng.uniform_pos());
      sum += v;
    }
    for (double v : p) b.posteriors.push_back(v / sum);
    // mostly real labels, some ignored, labels sometimes drawn from a subset
    // so that absent classes occur
    if (rng.below(8) == 0 && i > 0)
      b.labels.push_back(kIgnoreLabel);
    else
      b.labels.push_back(static_cast<std::uint32_t>(rng.below(rng.below(2) ? k : (k + 1) / 2)));
  }
  if (b.labels[0] == kIgnoreLabel) b.labels[0] = 0;  // keep at least one evaluated sample
  return b;
}

const PredictionBatch kHandBatch{
    .classes = 2,
    .posteriors = {0.1, 0.9, 0.2, 0.8, 0.8, 0.2, 0.9, 0.1},
    .labels = {1, 0, 0, 1},
};

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("segmentation scores on the 2x2 hand case are exact") {
  ConfusionMatrix cm(2);
  cm.at(0, 0) = 2;
  cm.at(0, 1) = 1;
  cm.at(1, 0) = 1;
  cm.at(1, 1) = 2;
  CHECK(miou(cm) == 0.5);
  CHECK(macc(cm) == 2.0 / 3.0);
  CHECK(aacc(cm) == 2.0 / 3.0);
  const std::vector<double> iou = per_class_iou(cm);
  CHECK(iou[0] == 0.5);
  CHECK(iou[1] == 0.5);
}

TEST_CASE("calibration error on the 4-sample hand case") {
  ConfusionMatrix cm(2);
  CalibrationBins cb(2, 2);
  accumulate(kHandBatch, cm, cb);
  CHECK(std::fabs(cwece(cb) - 0.35) < 1e-12);
  // per-true-class normalization doubles every weight here
  CHECK(std::fabs(cwece(cb, CweceNorm::true_class) - 0.7) < 1e-12);
}

TEST_CASE("one-hot predictions: calibration error equals 1 - accuracy") {
  PredictionBatch onehot = kHandBatch;
  for (double& v : onehot.posteriors) v = v > 0.5 ? 1.0 : 0.0;
  ConfusionMatrix cm(2);
  CalibrationBins cb(2, 2);
  accumulate(onehot, cm, cb);
  CHECK(cwece(cb) == 1.0 - aacc(cm));
  CHECK(aacc(cm) == 0.5);
}

TEST_CASE("bin edges are right-inclusive") {
  CalibrationBins cb15(1, 15);
  CHECK(cb15.bin_index(0.0) == 0);
  CHECK(cb15.bin_index(1.0 / 15.0) == 0);
  CHECK(cb15.bin_index(1.0 / 15.0 + 1e-9) == 1);
  CHECK(cb15.bin_index(1.0) == 14);
  CHECK(cb15.bin_index(0.5) == 7);

  CalibrationBins cb2(1, 2);
  CHECK(cb2.bin_index(0.5) == 0);
  CHECK(cb2.bin_index(0.5 + 1e-9) == 1);
  CHECK(cb2.bin_index(1.0) == 1);
}

TEST_CASE("accumulated metrics agree exactly with brute-force enumeration") {
  CounterRng rng = CounterRng::keyed(47, 400);
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t k = rng.below(2) ? 2 : 5;
    const std::size_t m = rng.below(2) ? 2 : 15;
    const PredictionBatch batch = random_batch(rng, k, 20);

    ConfusionMatrix cm(k);
    CalibrationBins cb(k, m);
    accumulate(batch, cm, cb);
    const BruteForce oracle{k, m, batch};

    CHECK(miou(cm) == oracle.miou());
    CHECK(macc(cm) == oracle.macc());
    CHECK(aacc(cm) == oracle.aacc());
    CHECK(cwece(cb, CweceNorm::total_samples) == oracle.cwece(CweceNorm::total_samples));
    CHECK(cwece(cb, CweceNorm::true_class) == oracle.cwece(CweceNorm::true_class));
  }
}

TEST_CASE("ignored labels are excluded everywhere") {
  PredictionBatch b;
  b.classes = 2;
  b.posteriors = {0.9, 0.1, 0.3, 0.7, 0.6, 0.4};
  b.labels = {0, kIgnoreLabel, 1};
  ConfusionMatrix cm(2);
  CalibrationBins cb(2, 4);
  accumulate(b, cm, cb);
  CHECK(cm.total() == 2);
  CHECK(cb.samples == 2);
  CHECK(cb.true_count[0] == 1);
  CHECK(cb.true_count[1] == 1);
}

TEST_CASE("absent classes: NaN per-class IoU, skipped by means") {
  PredictionBatch b;
  b.classes = 3;
  b.posteriors = {0.8, 0.1, 0.1, 0.2, 0.7, 0.1};
  b.labels = {0, 1};
  ConfusionMatrix cm(3);
  CalibrationBins cb(3, 4);
  accumulate(b, cm, cb);
  const std::vector<double> iou = per_class_iou(cm);
  CHECK(iou[0] == 1.0);
  CHECK(iou[1] == 1.0);
  CHECK(std::isnan(iou[2]));
  CHECK(miou(cm) == 1.0);
}

TEST_CASE("merging partial accumulators matches one pass") {
  CounterRng rng = CounterRng::keyed(47, 401);
  const PredictionBatch whole = random_batch(rng, 5, 200);

  ConfusionMatrix cm_all(5);
  CalibrationBins cb_all(5, 15);
  accumulate(whole, cm_all, cb_all);

  const std::size_t cut = whole.count() / 2;
  PredictionBatch first{5, {}, {}}, second{5, {}, {}};
  first.posteriors.assign(whole.posteriors.begin(), whole.posteriors.begin() + cut * 5);
  first.labels.assign(whole.labels.begin(), whole.labels.begin() + cut);
  second.posteriors.assign(whole.posteriors.begin() + cut * 5, whole.posteriors.end());
  second.labels.assign(whole.labels.begin() + cut, whole.labels.end());

  ConfusionMatrix cm(5);
  CalibrationBins cb(5, 15);
  ConfusionMatrix cm2(5);
  CalibrationBins cb2(5, 15);
  accumulate(first, cm, cb);
  accumulate(second, cm2, cb2);
  cm.merge(cm2);
  cb.merge(cb2);

  CHECK(cm.counts == cm_all.counts);
  CHECK(cb.count == cb_all.count);
  CHECK(cb.hits == cb_all.hits);
  CHECK(cb.true_count == cb_all.true_count);
  CHECK(cb.samples == cb_all.samples);
  for (std::size_t i = 0; i < cb.conf_sum.size(); ++i)
    CHECK(std::fabs(cb.conf_sum[i] - cb_all.conf_sum[i]) < 1e-12);
}

TEST_CASE("parallel accumulation is independent of the thread count") {
  CounterRng rng = CounterRng::keyed(47, 402);
  PredictionBatch big = random_batch(rng, 5, 20);
  // grow past several blocks
  while (big.count() < 5000) {
    const PredictionBatch extra = random_batch(rng, 5, 20);
    big.posteriors.insert(big.posteriors.end(), extra.posteriors.begin(), extra.posteriors.end());
    big.labels.insert(big.labels.end(), extra.labels.begin(), extra.labels.end());
  }

  ConfusionMatrix cm_serial(5);
  CalibrationBins cb_serial(5, 15);
  accumulate(big, cm_serial, cb_serial);

  auto run_parallel = [&](int threads) {
#ifdef _OPENMP
    omp_set_num_threads(threads);
#else
    (void)threads;
#endif
    ConfusionMatrix cm(5);
    CalibrationBins cb(5, 15);
    accumulate_parallel(big, cm, cb);
    return std::make_pair(cm, cb);
  };

  const auto [cm1, cb1] = run_parallel(1);
  const auto [cm3, cb3] = run_parallel(3);
#ifdef _OPENMP
  omp_set_num_threads(omp_get_num_procs());
#endif

  // bitwise reproducible across thread counts
  CHECK(cm1.counts == cm3.counts);
  CHECK(cb1.count == cb3.count);
  CHECK(cb1.hits == cb3.hits);
  CHECK(cb1.conf_sum == cb3.conf_sum);
  CHECK(cb1.samples == cb3.samples);

  // counts match the serial reference bitwise; block-merged sums to rounding
  CHECK(cm1.counts == cm_serial.counts);
  CHECK(cb1.count == cb_serial.count);
  CHECK(cb1.hits == cb_serial.hits);
  for (std::size_t i = 0; i < cb1.conf_sum.size(); ++i)
    CHECK(std::fabs(cb1.conf_sum[i] - cb_serial.conf_sum[i]) < 1e-12);
  CHECK(std::fabs(cwece(cb1) - cwece(cb_serial)) < 1e-12);

  // a batch inside one block reduces identically to the serial pass
  const PredictionBatch small = random_batch(rng, 3, 20);
  ConfusionMatrix cms(3), cmp(3);
  CalibrationBins cbs(3, 15), cbp(3, 15);
  accumulate(small, cms, cbs);
  accumulate_parallel(small, cmp, cbp);
  CHECK(cms.counts == cmp.counts);
  CHECK(cbs.conf_sum == cbp.conf_sum);
}

TEST_CASE("validation rejects malformed batches and empty accumulators") {
  PredictionBatch bad;
  bad.classes = 2;
  bad.posteriors = {0.5, 0.5};
  bad.labels = {7};
  ConfusionMatrix cm(2);
  CalibrationBins cb(2, 4);
  CHECK_THROWS_AS(accumulate(bad, cm, cb), std::out_of_range);

  PredictionBatch ok;
  ok.classes = 2;
  ok.posteriors = {0.5, 0.5};
  ok.labels = {0};
  ConfusionMatrix wrong(3);
  CHECK_THROWS_AS(accumulate(ok, wrong, cb), std::invalid_argument);

  ConfusionMatrix empty(2);
  CalibrationBins none(2, 4);
  CHECK_THROWS_AS(miou(empty), std::invalid_argument);
  CHECK_THROWS_AS(aacc(empty), std::invalid_argument);
  CHECK_THROWS_AS(cwece(none), std::invalid_argument);
}

}  // TEST_SUITE
