#pragma once

// Brute-force reference values for the rank tests: enumeration for
// Mann-Whitney and Monte Carlo permutation for Kruskal-Wallis.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

namespace testsupport {

// Pairs with a > b, ties counted half.
inline double pair_count_u(const std::vector<double>& a, const std::vector<double>& b) {
  double u = 0.0;
  for (double x : a) {
    for (double y : b) u += x > y ? 1.0 : (x == y ? 0.5 : 0.0);
  }
  return u;
}

// Two-sided exact p of min(U_a, U_b) by listing every split of the pooled
// ranks 1..m+n into groups of size m and n.
inline double enumerate_mw_p(std::size_t m, std::size_t n, double u_observed) {
  const std::size_t total = m + n;
  std::vector<int> mask(total, 0);
  std::fill(mask.begin(), mask.begin() + static_cast<long>(m), 1);
  std::sort(mask.begin(), mask.end());
  std::uint64_t count = 0, extreme = 0;
  do {
    double rank_sum = 0.0;
    for (std::size_t i = 0; i < total; ++i) {
      if (mask[i]) rank_sum += static_cast<double>(i + 1);
    }
    const double ua = rank_sum - static_cast<double>(m * (m + 1)) / 2.0;
    const double u = std::min(ua, static_cast<double>(m * n) - ua);
    ++count;
    if (u <= u_observed + 1e-9) ++extreme;
  } while (std::next_permutation(mask.begin(), mask.end()));
  return std::min(1.0, static_cast<double>(extreme) / static_cast<double>(count));
}

// H without tie correction; callers use tie-free data.
inline double kw_statistic(const std::vector<double>& pooled, const std::vector<int>& labels,
                           int k) {
  const std::size_t n = pooled.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto i, auto j) { return pooled[i] < pooled[j]; });
  std::vector<double> rank_sum(k, 0.0);
  std::vector<int> size(k, 0);
  for (std::size_t r = 0; r < n; ++r) {
    rank_sum[labels[order[r]]] += static_cast<double>(r + 1);
    ++size[labels[order[r]]];
  }
  double s = 0.0;
  for (int g = 0; g < k; ++g) s += rank_sum[g] * rank_sum[g] / size[g];
  const double nn = static_cast<double>(n);
  return 12.0 / (nn * (nn + 1.0)) * s - 3.0 * (nn + 1.0);
}

// Share of label shuffles whose H reaches the observed H.
inline double kw_permutation_p(const std::vector<std::vector<double>>& groups, int shuffles,
                               std::mt19937_64& rng) {
  std::vector<double> pooled;
  std::vector<int> labels;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (double v : groups[g]) {
      pooled.push_back(v);
      labels.push_back(static_cast<int>(g));
    }
  }
  const int k = static_cast<int>(groups.size());
  const double observed = kw_statistic(pooled, labels, k);
  int hits = 0;
  for (int i = 0; i < shuffles; ++i) {
    std::shuffle(labels.begin(), labels.end(), rng);
    if (kw_statistic(pooled, labels, k) >= observed - 1e-9) ++hits;
  }
  return static_cast<double>(hits) / shuffles;
}

// Two-sided permutation p for a difference in mean ranks between two samples.
inline double mw_permutation_p(const std::vector<double>& a, const std::vector<double>& b,
                               int shuffles, std::mt19937_64& rng) {
  std::vector<double> pooled(a);
  pooled.insert(pooled.end(), b.begin(), b.end());
  const double center = static_cast<double>(a.size() * b.size()) / 2.0;
  const double observed = std::abs(pair_count_u(a, b) - center);
  int hits = 0;
  for (int i = 0; i < shuffles; ++i) {
    std::shuffle(pooled.begin(), pooled.end(), rng);
    std::vector<double> x(pooled.begin(), pooled.begin() + static_cast<long>(a.size()));
    std::vector<double> y(pooled.begin() + static_cast<long>(a.size()), pooled.end());
    if (std::abs(pair_count_u(x, y) - center) >= observed - 1e-9) ++hits;
  }
  return static_cast<double>(hits) / shuffles;
}

}  // namespace testsupport
