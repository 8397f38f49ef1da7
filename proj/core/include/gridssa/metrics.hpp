#pragma once

#include <optional>
#include <vector>

namespace gridssa {

/// Confusion counts plus derived ratios. A ratio whose denominator is zero
/// is reported as absent, never as 0. Positive class = secure (label 1).
struct Metrics {
  long tp = 0, tn = 0, fp = 0, fn = 0;
  std::optional<double> accuracy;
  std::optional<double> recall;       // TP / (TP + FN), secure class
  std::optional<double> specificity;  // TN / (TN + FP), insecure class
};

Metrics compute_metrics(const std::vector<int>& predictions,
                        const std::vector<int>& labels);

}  // namespace gridssa
