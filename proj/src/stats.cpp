#include "sadiv/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sadiv/errors.hpp"

namespace sadiv {

double mean(std::span<const double> x) {
  if (x.empty()) throw InvalidInput("mean of an empty sample");
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double median(std::span<const double> x) {
  if (x.empty()) throw InvalidInput("median of an empty sample");
  std::vector<double> s(x.begin(), x.end());
  const auto mid = s.size() / 2;
  std::nth_element(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(mid), s.end());
  double m = s[mid];
  if (s.size() % 2 == 0) {
    m = (m + *std::max_element(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(mid))) / 2.0;
  }
  return m;
}

double pearson_r(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidInput("correlation inputs differ in length");
  if (x.size() < 2) throw InvalidInput("correlation needs at least two points");
  const double mx = mean(x);
  const double my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

namespace {

// Number of inversions in y, counted by merge sort.
std::uint64_t count_inversions(std::vector<double>& y, std::vector<double>& tmp,
                               std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::uint64_t inv = count_inversions(y, tmp, lo, mid) +
                      count_inversions(y, tmp, mid, hi);
  std::size_t a = lo, b = mid, out = lo;
  while (a < mid && b < hi) {
    if (y[b] < y[a]) {
      inv += mid - a;
      tmp[out++] = y[b++];
    } else {
      tmp[out++] = y[a++];
    }
  }
  while (a < mid) tmp[out++] = y[a++];
  while (b < hi) tmp[out++] = y[b++];
  std::copy(tmp.begin() + static_cast<std::ptrdiff_t>(lo),
            tmp.begin() + static_cast<std::ptrdiff_t>(hi),
            y.begin() + static_cast<std::ptrdiff_t>(lo));
  return inv;
}

// Sum over tie groups of t*(t-1)/2 for consecutive equal keys.
std::uint64_t tie_pairs(const std::vector<double>& sorted) {
  std::uint64_t total = 0;
  std::size_t run = 1;
  for (std::size_t i = 1; i <= sorted.size(); ++i) {
    if (i < sorted.size() && sorted[i] == sorted[i - 1]) {
      ++run;
    } else {
      total += static_cast<std::uint64_t>(run) * (run - 1) / 2;
      run = 1;
    }
  }
  return total;
}

}  // namespace

double kendall_tau(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidInput("correlation inputs differ in length");
  const std::size_t n = x.size();
  if (n < 2) throw InvalidInput("correlation needs at least two points");

  // Knight's algorithm: sort by (x, y), count ties, then count y-inversions.
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (x[a] != x[b]) return x[a] < x[b];
    return y[a] < y[b];
  });

  std::vector<double> xs(n), ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = x[idx[i]];
    ys[i] = y[idx[i]];
  }

  const std::uint64_t total = static_cast<std::uint64_t>(n) * (n - 1) / 2;
  const std::uint64_t ties_x = tie_pairs(xs);

  // Pairs tied in both x and y.
  std::uint64_t ties_xy = 0;
  {
    std::size_t run = 1;
    for (std::size_t i = 1; i <= n; ++i) {
      if (i < n && xs[i] == xs[i - 1] && ys[i] == ys[i - 1]) {
        ++run;
      } else {
        ties_xy += static_cast<std::uint64_t>(run) * (run - 1) / 2;
        run = 1;
      }
    }
  }

  std::vector<double> ys_sorted = ys;
  std::sort(ys_sorted.begin(), ys_sorted.end());
  const std::uint64_t ties_y = tie_pairs(ys_sorted);

  std::vector<double> tmp(n);
  const std::uint64_t discordant = count_inversions(ys, tmp, 0, n);

  // Inversions within x-tie runs are not discordant; with the (x, y) sort they
  // are zero because tied-x blocks are y-sorted.
  const double concordant_plus = static_cast<double>(total - ties_x - ties_y + ties_xy);
  const double num = concordant_plus - 2.0 * static_cast<double>(discordant);
  const double den = std::sqrt(static_cast<double>(total - ties_x) *
                               static_cast<double>(total - ties_y));
  if (den == 0.0) return 0.0;
  return num / den;
}

double percentile_below(std::span<const double> sample, double value) {
  if (sample.empty()) throw InvalidInput("percentile of an empty sample");
  std::size_t below = 0;
  for (double s : sample) {
    if (s < value) ++below;
  }
  return 100.0 * static_cast<double>(below) / static_cast<double>(sample.size());
}

}  // namespace sadiv
