#include "icrenyi/experiments/auc.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace icrenyi::experiments {

double auc_rank(const std::vector<double>& positives, const std::vector<double>& negatives) {
  if (positives.empty() || negatives.empty()) throw std::invalid_argument("auc needs both positives and negatives");
  std::vector<std::pair<double, bool>> all;
  all.reserve(positives.size() + negatives.size());
  for (double s : positives) all.emplace_back(s, true);
  for (double s : negatives) all.emplace_back(s, false);
  for (const auto& [s, pos] : all)
    if (std::isnan(s)) throw std::invalid_argument("auc scores must not be NaN");
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

  // Sum of mid-ranks (1-based) of the positives.
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < all.size();) {
    std::size_t j = i;
    while (j < all.size() && all[j].first == all[i].first) ++j;
    const double mid = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k)
      if (all[k].second) rank_sum += mid;
    i = j;
  }
  const auto np = static_cast<double>(positives.size());
  const auto nn = static_cast<double>(negatives.size());
  return (rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

}  // namespace icrenyi::experiments
