#pragma once

// Independent reference computations used to cross-check the library.
// They are written from the formulas directly and favour obviousness over
// speed, so they only suit tiny inputs.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace oracle {

using Vec = std::vector<double>;

// Annotation propensity written out as one expression.
inline double propensity(double prior, double n, double a = 0.55, double b = 1.5) {
  return 1.0 / (1.0 + (std::log(n) - 1.0) * std::pow(b + 1.0, a) *
                          std::exp(-a * std::log(n * prior + b)));
}

// Smallest within-cluster sum of squares over every assignment of the points
// to exactly k non-empty clusters.
inline double min_partition_inertia(const std::vector<Vec>& points, std::size_t k) {
  const std::size_t n = points.size();
  const std::size_t dim = points.front().size();
  std::vector<std::size_t> label(n, 0);
  double best = std::numeric_limits<double>::infinity();
  while (true) {
    std::vector<std::size_t> sizes(k, 0);
    for (std::size_t l : label) ++sizes[l];
    if (std::all_of(sizes.begin(), sizes.end(), [](std::size_t s) { return s > 0; })) {
      std::vector<Vec> mean(k, Vec(dim, 0.0));
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t d = 0; d < dim; ++d) mean[label[i]][d] += points[i][d];
      }
      for (std::size_t c = 0; c < k; ++c) {
        for (double& x : mean[c]) x /= static_cast<double>(sizes[c]);
      }
      double total = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t d = 0; d < dim; ++d) {
          const double diff = points[i][d] - mean[label[i]][d];
          total += diff * diff;
        }
      }
      best = std::min(best, total);
    }
    // Odometer increment in base k.
    std::size_t pos = 0;
    while (pos < n && ++label[pos] == k) label[pos++] = 0;
    if (pos == n) break;
  }
  return best;
}

// Central finite difference of f at coordinate i of x.
inline double central_difference(const std::function<double(const Vec&)>& f, Vec x,
                                 std::size_t i, double h = 1e-5) {
  const double x0 = x[i];
  x[i] = x0 + h;
  const double up = f(x);
  x[i] = x0 - h;
  const double down = f(x);
  return (up - down) / (2.0 * h);
}

// Propensity-scored precision: weighted hits over the best weight any
// ranking of the same length can collect, found by trying every subset of
// the reference of that size.
inline double psp(const std::vector<std::string>& ranked, const std::set<std::string>& ref,
                  const std::map<std::string, double>& propensity) {
  double gained = 0.0;
  for (const auto& y : ranked) {
    if (ref.count(y)) gained += 1.0 / propensity.at(y);
  }
  const std::vector<std::string> r(ref.begin(), ref.end());
  const std::size_t take = std::min(ranked.size(), r.size());
  double best = 0.0;
  for (unsigned mask = 0; mask < (1u << r.size()); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcount(mask)) != take) continue;
    double w = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (mask & (1u << i)) w += 1.0 / propensity.at(r[i]);
    }
    best = std::max(best, w);
  }
  return best > 0.0 ? gained / best : 0.0;
}

inline double precision(const std::vector<std::string>& pred, const std::set<std::string>& ref) {
  if (pred.empty()) return 0.0;
  std::size_t hits = 0;
  for (const auto& y : pred) hits += ref.count(y);
  return static_cast<double>(hits) / static_cast<double>(pred.size());
}

// Population coefficient of variation, zero counts included.
inline double coefficient_of_variation(const std::vector<double>& counts) {
  double mean = 0.0;
  for (double c : counts) mean += c;
  mean /= static_cast<double>(counts.size());
  double var = 0.0;
  for (double c : counts) var += (c - mean) * (c - mean);
  var /= static_cast<double>(counts.size());
  return std::sqrt(var) / mean;
}

inline double cosine(const Vec& u, const Vec& v) {
  double uv = 0.0, uu = 0.0, vv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    uv += u[i] * v[i];
    uu += u[i] * u[i];
    vv += v[i] * v[i];
  }
  return uv / std::sqrt(uu * vv);
}

}  // namespace oracle
