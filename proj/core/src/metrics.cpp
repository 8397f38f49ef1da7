#include "gridssa/metrics.hpp"

#include "gridssa/errors.hpp"

namespace gridssa {

Metrics compute_metrics(const std::vector<int>& predictions,
                        const std::vector<int>& labels) {
  if (predictions.empty()) throw ValidationError("metrics on empty input");
  if (predictions.size() != labels.size())
    throw ValidationError("metrics length mismatch");

  Metrics m;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const bool pred = predictions[i] != 0;
    const bool truth = labels[i] != 0;
    if (pred && truth) ++m.tp;
    else if (!pred && !truth) ++m.tn;
    else if (pred && !truth) ++m.fp;
    else ++m.fn;
  }
  const long total = m.tp + m.tn + m.fp + m.fn;
  m.accuracy = static_cast<double>(m.tp + m.tn) / static_cast<double>(total);
  if (m.tp + m.fn > 0)
    m.recall = static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn);
  if (m.tn + m.fp > 0)
    m.specificity =
        static_cast<double>(m.tn) / static_cast<double>(m.tn + m.fp);
  return m;
}

}  // namespace gridssa
