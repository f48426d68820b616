#pragma once

#include <span>
#include <vector>

#include "diva/embedding.hpp"
#include "diva/rng.hpp"

namespace diva {

struct KMeansResult {
  std::vector<Vector> centers;
  std::vector<std::size_t> assignments;
  // Inertia after each assignment step; non-increasing.
  std::vector<double> inertia_history;
  double inertia = 0.0;
  std::size_t rounds = 0;
};

double squared_distance(std::span<const double> a, std::span<const double> b);

// Sum of squared distances from each point to its assigned center.
double inertia(std::span<const Vector> points, std::span<const Vector> centers,
               std::span<const std::size_t> assignments);

// Lloyd iteration from k distinct points chosen uniformly at random. Stops
// after max_rounds rounds or once assignments no longer change. A cluster
// left empty is re-seeded at the point farthest from its current center.
// k is lowered to the number of points when it exceeds it.
KMeansResult kmeans(std::span<const Vector> points, std::size_t k, std::size_t max_rounds,
                    Rng& rng);

// Lowest-inertia result over independent restarts.
KMeansResult kmeans_best_of(std::span<const Vector> points, std::size_t k,
                            std::size_t max_rounds, std::size_t restarts, Rng& rng);

}  // namespace diva
