#pragma once

// Qn robust scale estimator: c(Phi) times an order statistic of the pairwise
// distances |x_i - x_j|, selected exactly in O(n log n) time and O(n) space.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "qnacf/errors.hpp"
#include "qnacf/normal.hpp"
#include "qnacf/time_series.hpp"

namespace qnacf {

/// Which pair set / rank defines Qn.
enum class QnVariant {
  /// k = floor(n^2/4) over all n^2 ordered pairs, diagonal zeros included.
  quartile,
  /// k = floor(n(n-1)/4) over the n(n-1) ordered pairs with i != j.
  off_diagonal,
  /// k = C(h, 2), h = floor(n/2) + 1, over the n(n-1)/2 pairs with i < j.
  rousseeuw_croux,
};

enum class ScaleEstimator { robust_qn, classical_std };

struct ScaleEstimate {
  double value = 0.0;
  ScaleEstimator estimator = ScaleEstimator::robust_qn;
  std::size_t n = 0;
  double constant = 1.0;
  /// Set when the selected rank falls inside the diagonal zeros (n = 3, 4 under
  /// QnVariant::quartile), so the value is identically 0 whatever the data.
  bool degenerate = false;
};

namespace detail {

template <typename T>
T weighted_median(std::vector<std::pair<T, std::int64_t>>& items) {
  std::int64_t total = 0;
  for (const auto& it : items) total += it.second;
  std::int64_t target = (total + 1) / 2;
  auto first = items.begin();
  auto last = items.end();
  const auto by_value = [](const auto& a, const auto& b) { return a.first < b.first; };
  while (true) {
    auto mid = first + (last - first) / 2;
    std::nth_element(first, mid, last, by_value);
    std::int64_t below = 0;
    for (auto it = first; it != mid; ++it) below += it->second;
    if (target <= below) {
      last = mid;
    } else if (target <= below + mid->second) {
      return mid->first;
    } else {
      target -= below + mid->second;
      first = mid + 1;
    }
  }
}

/// k-th smallest (1-based) of {s[j] - s[i] : i < j} for ascending `s`.
///
/// Each row i of the implicit matrix s[j] - s[i], j > i, is sorted, so a
/// candidate interval [lo_i, hi_i) per row is enough. The pivot is the
/// row-size-weighted median of row midpoints, which discards at least a quarter
/// of the remaining candidates per O(n) counting pass.
template <typename T>
T kth_sorted_pair_difference(std::span<const T> s, std::int64_t k) {
  const auto n = static_cast<std::int64_t>(s.size());
  std::vector<std::int64_t> lo(static_cast<std::size_t>(n));
  std::vector<std::int64_t> hi(static_cast<std::size_t>(n), n);
  for (std::int64_t i = 0; i < n; ++i) lo[static_cast<std::size_t>(i)] = i + 1;

  std::int64_t remaining = n * (n - 1) / 2;
  std::int64_t below = 0;  // pairs already discarded as smaller than the answer
  std::vector<std::pair<T, std::int64_t>> mids;
  std::vector<std::int64_t> first_ge(static_cast<std::size_t>(n));
  std::vector<std::int64_t> first_gt(static_cast<std::size_t>(n));
  mids.reserve(static_cast<std::size_t>(n));

  while (remaining > n) {
    mids.clear();
    for (std::int64_t i = 0; i < n; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      if (lo[ui] < hi[ui]) {
        const std::int64_t m = lo[ui] + (hi[ui] - lo[ui] - 1) / 2;
        mids.emplace_back(s[static_cast<std::size_t>(m)] - s[ui], hi[ui] - lo[ui]);
      }
    }
    const T pivot = weighted_median(mids);

    // Global two-pointer counts, clamped to each row's candidate interval.
    std::int64_t count_lt = below;
    std::int64_t count_le = below;
    std::int64_t jl = 1;
    std::int64_t jg = 1;
    for (std::int64_t i = 0; i < n; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      jl = std::max(jl, i + 1);
      jg = std::max(jg, i + 1);
      while (jl < n && s[static_cast<std::size_t>(jl)] - s[ui] < pivot) ++jl;
      while (jg < n && !(pivot < s[static_cast<std::size_t>(jg)] - s[ui])) ++jg;
      first_ge[ui] = std::clamp(jl, lo[ui], hi[ui]);
      first_gt[ui] = std::clamp(jg, lo[ui], hi[ui]);
      count_lt += first_ge[ui] - lo[ui];
      count_le += first_gt[ui] - lo[ui];
    }

    if (k <= count_lt) {
      hi.swap(first_ge);
    } else if (k > count_le) {
      lo.swap(first_gt);
      below = count_le;
    } else {
      return pivot;
    }
    remaining = 0;
    for (std::int64_t i = 0; i < n; ++i) {
      remaining += hi[static_cast<std::size_t>(i)] - lo[static_cast<std::size_t>(i)];
    }
  }

  std::vector<T> candidates;
  candidates.reserve(static_cast<std::size_t>(remaining));
  for (std::int64_t i = 0; i < n; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    for (std::int64_t j = lo[ui]; j < hi[ui]; ++j) {
      candidates.push_back(s[static_cast<std::size_t>(j)] - s[ui]);
    }
  }
  const auto nth = candidates.begin() + (k - below - 1);
  std::nth_element(candidates.begin(), nth, candidates.end());
  return *nth;
}

template <typename Derived>
std::vector<typename Derived::Scalar> sorted_copy(const Eigen::DenseBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  std::vector<Scalar> s(static_cast<std::size_t>(x.size()));
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const Scalar v = x.derived().coeff(i);
    if (!std::isfinite(v)) throw ValidationError("pairwise distances: non-finite input");
    s[static_cast<std::size_t>(i)] = v;
  }
  std::sort(s.begin(), s.end());
  return s;
}

}  // namespace detail

/// k-th smallest (1-based, counting multiplicity) of {|x_i - x_j|} over all n^2
/// ordered pairs when `include_diagonal`, else over the n(n-1) pairs with i != j.
/// The result is bit-identical to sorting the full multiset.
template <typename Derived>
typename Derived::Scalar pairwise_kth_statistic(const Eigen::DenseBase<Derived>& x, std::int64_t k,
                                                bool include_diagonal = true) {
  using Scalar = typename Derived::Scalar;
  static_assert(std::is_floating_point_v<Scalar>, "pairwise_kth_statistic needs a real scalar");
  const auto n = static_cast<std::int64_t>(x.size());
  const std::int64_t total = include_diagonal ? n * n : n * (n - 1);
  if (k < 1 || k > total) {
    throw RangeError("pairwise_kth_statistic: rank " + std::to_string(k) + " outside [1, " +
                     std::to_string(total) + "]");
  }
  const std::vector<Scalar> s = detail::sorted_copy(x);
  std::int64_t rank = k;
  if (include_diagonal) {
    if (k <= n) return Scalar(0);
    rank = k - n;
  }
  // Each i < j distance appears twice among ordered pairs.
  return detail::kth_sorted_pair_difference<Scalar>(std::span<const Scalar>(s), (rank + 1) / 2);
}

/// Rank selected by `variant` for a sample of size n (n >= 3).
std::int64_t qn_rank(std::size_t n, QnVariant variant);

/// Raw Qn value for any real Eigen expression, e.g. `qn(x.head(m) + x.tail(m))`.
template <typename Derived>
typename Derived::Scalar qn(const Eigen::DenseBase<Derived>& x, QnVariant variant = QnVariant::quartile) {
  using Scalar = typename Derived::Scalar;
  const auto n = static_cast<std::size_t>(x.size());
  if (n < 3) throw DegenerateSampleError("Qn needs at least 3 observations");
  const std::int64_t k = qn_rank(n, variant);
  Scalar kth{};
  switch (variant) {
    case QnVariant::quartile:
      kth = pairwise_kth_statistic(x, k, true);
      break;
    case QnVariant::off_diagonal:
      kth = pairwise_kth_statistic(x, k, false);
      break;
    case QnVariant::rousseeuw_croux: {
      const std::vector<Scalar> s = detail::sorted_copy(x);
      kth = detail::kth_sorted_pair_difference<Scalar>(std::span<const Scalar>(s), k);
      break;
    }
  }
  return static_cast<Scalar>(gaussian_consistency_constant()) * kth;
}

ScaleEstimate qn_scale(const TimeSeries& x, QnVariant variant = QnVariant::quartile);

/// Square root of the unbiased sample variance. Requires n >= 2.
ScaleEstimate sample_std(const TimeSeries& x);

}  // namespace qnacf
