#include "diva/kmeans.hpp"

#include <limits>

#include <spdlog/spdlog.h>

#include "diva/error.hpp"

namespace diva {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

double inertia(std::span<const Vector> points, std::span<const Vector> centers,
               std::span<const std::size_t> assignments) {
  double total = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    total += squared_distance(points[i], centers[assignments[i]]);
  }
  return total;
}

KMeansResult kmeans(std::span<const Vector> points, std::size_t k, std::size_t max_rounds,
                    Rng& rng) {
  if (points.empty()) throw ValidationError("k-means needs at least one point");
  if (k == 0) throw ValidationError("k-means needs k >= 1");
  if (k > points.size()) {
    spdlog::warn("k-means: k={} exceeds {} points; using k={}", k, points.size(),
                 points.size());
    k = points.size();
  }
  const std::size_t dim = points.front().size();

  KMeansResult result;
  for (std::size_t i : rng.sample_indices(points.size(), k)) {
    result.centers.push_back(points[i]);
  }
  result.assignments.assign(points.size(), k);  // k marks "unassigned"

  std::vector<double> distance(points.size());
  std::vector<std::size_t> sizes(k);
  bool stale = false;  // centers moved after the last assignment step
  for (std::size_t round = 0; round < std::max<std::size_t>(max_rounds, 1); ++round) {
    bool changed = false;
    double total = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      std::size_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < k; ++c) {
        const double d = squared_distance(points[i], result.centers[c]);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      changed |= result.assignments[i] != best;
      result.assignments[i] = best;
      distance[i] = best_d;
      total += best_d;
    }
    result.inertia_history.push_back(total);
    result.inertia = total;
    result.rounds = round + 1;
    stale = false;
    if (!changed) break;
    stale = true;

    // Update step.
    std::fill(sizes.begin(), sizes.end(), 0);
    std::vector<Vector> sums(k, Vector(dim, 0.0));
    for (std::size_t i = 0; i < points.size(); ++i) {
      const std::size_t c = result.assignments[i];
      ++sizes[c];
      for (std::size_t d = 0; d < dim; ++d) sums[c][d] += points[i][d];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (sizes[c] == 0) {
        // Re-seed at the point currently worst served.
        std::size_t far = 0;
        for (std::size_t i = 1; i < points.size(); ++i) {
          if (distance[i] > distance[far]) far = i;
        }
        result.centers[c] = points[far];
        distance[far] = 0.0;
        continue;
      }
      for (std::size_t d = 0; d < dim; ++d) {
        result.centers[c][d] = sums[c][d] / static_cast<double>(sizes[c]);
      }
    }
  }
  if (stale) result.inertia = inertia(points, result.centers, result.assignments);
  return result;
}

KMeansResult kmeans_best_of(std::span<const Vector> points, std::size_t k,
                            std::size_t max_rounds, std::size_t restarts, Rng& rng) {
  KMeansResult best;
  bool have = false;
  for (std::size_t r = 0; r < std::max<std::size_t>(restarts, 1); ++r) {
    KMeansResult candidate = kmeans(points, k, max_rounds, rng);
    if (!have || candidate.inertia < best.inertia) {
      best = std::move(candidate);
      have = true;
    }
  }
  return best;
}

}  // namespace diva
