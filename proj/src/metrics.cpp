#include "textclf/metrics.hpp"

#include <stdexcept>

namespace textclf {

ConfusionTally& ConfusionTally::operator+=(const ConfusionTally& other) {
  if (tp.size() != other.tp.size())
    throw std::invalid_argument("tally merge: class-count mismatch");
  for (std::size_t c = 0; c < tp.size(); ++c) {
    tp[c] += other.tp[c];
    fp[c] += other.fp[c];
    fn[c] += other.fn[c];
    tn[c] += other.tn[c];
  }
  n += other.n;
  return *this;
}

ConfusionTally tally(const std::vector<std::int32_t>& preds,
                     const std::vector<std::int32_t>& labels,
                     std::size_t n_classes) {
  if (preds.size() != labels.size())
    throw std::invalid_argument("tally: length mismatch");
  ConfusionTally t;
  t.tp.assign(n_classes, 0);
  t.fp.assign(n_classes, 0);
  t.fn.assign(n_classes, 0);
  t.tn.assign(n_classes, 0);
  t.n = preds.size();
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const auto p = preds[i];
    const auto y = labels[i];
    if (p < 0 || y < 0 || static_cast<std::size_t>(p) >= n_classes ||
        static_cast<std::size_t>(y) >= n_classes)
      throw std::out_of_range("tally: class index out of range");
    for (std::size_t c = 0; c < n_classes; ++c) {
      const bool pc = static_cast<std::size_t>(p) == c;
      const bool yc = static_cast<std::size_t>(y) == c;
      if (pc && yc)
        ++t.tp[c];
      else if (pc && !yc)
        ++t.fp[c];
      else if (!pc && yc)
        ++t.fn[c];
      else
        ++t.tn[c];
    }
  }
  return t;
}

double micro_f1(const ConfusionTally& t) {
  if (t.n == 0) throw std::invalid_argument("micro_f1: empty tally");
  std::uint64_t tp = 0, fp = 0, fn = 0;
  for (std::size_t c = 0; c < t.tp.size(); ++c) {
    tp += t.tp[c];
    fp += t.fp[c];
    fn += t.fn[c];
  }
  if (tp == 0) return 0.0;
  return 2.0 * static_cast<double>(tp) /
         static_cast<double>(2 * tp + fp + fn);
}

double accuracy(const std::vector<std::int32_t>& preds,
                const std::vector<std::int32_t>& labels) {
  if (preds.size() != labels.size())
    throw std::invalid_argument("accuracy: length mismatch");
  if (preds.empty()) throw std::invalid_argument("accuracy: empty input");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < preds.size(); ++i)
    correct += preds[i] == labels[i] ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(preds.size());
}

}  // namespace textclf
