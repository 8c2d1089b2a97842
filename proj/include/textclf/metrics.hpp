#pragma once

#include <cstdint>
#include <vector>

namespace textclf {

struct ConfusionTally {
  std::vector<std::uint64_t> tp, fp, fn, tn;  // one slot per class
  std::uint64_t n = 0;                        // predictions counted

  ConfusionTally& operator+=(const ConfusionTally& other);
};

ConfusionTally tally(const std::vector<std::int32_t>& preds,
                     const std::vector<std::int32_t>& labels,
                     std::size_t n_classes);

// 2*sum(TP) / (2*sum(TP) + sum(FP) + sum(FN)); 0 for a zero numerator.
double micro_f1(const ConfusionTally& t);

double accuracy(const std::vector<std::int32_t>& preds,
                const std::vector<std::int32_t>& labels);

}  // namespace textclf
