#pragma once

#include <vector>

namespace icrenyi::experiments {

/// Area under the ROC curve for scores where larger means "positive":
/// P(S+ > S-) + P(S+ = S-)/2, computed from mid-ranks in O(n log n).
/// Throws std::invalid_argument if either list is empty or has NaN.
double auc_rank(const std::vector<double>& positives, const std::vector<double>& negatives);

}  // namespace icrenyi::experiments
