#pragma once

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

namespace psrl {

struct GridWeight {
  std::size_t index;
  double weight;
};

/// Regular grid on the belief simplex: every point (n_1/g, ..., n_S/g) with
/// non-negative integers summing to g. Points are enumerated with the first
/// coordinate descending, so point 0 is the vertex e_0 and, for g = 1, point s
/// is e_s.
///
/// Off-grid beliefs are projected onto the vertices of the enclosing simplex
/// of the Freudenthal triangulation; the interpolation weights are the
/// barycentric coordinates in that simplex.
class BeliefGrid {
 public:
  BeliefGrid(int num_states, int resolution);

  int num_states() const { return num_states_; }
  int resolution() const { return resolution_; }
  std::size_t size() const { return counts_.size() / static_cast<std::size_t>(num_states_); }

  /// Integer composition of grid point i.
  std::span<const int> composition(std::size_t i) const {
    return {counts_.data() + i * static_cast<std::size_t>(num_states_),
            static_cast<std::size_t>(num_states_)};
  }
  std::span<const double> point(std::size_t i) const {
    return {points_.data() + i * static_cast<std::size_t>(num_states_),
            static_cast<std::size_t>(num_states_)};
  }

  /// Convex interpolation weights (non-negative, summing to 1, zero weights
  /// dropped) over at most S grid points.
  std::vector<GridWeight> project(std::span<const double> belief) const;

  /// sum_i weight_i * values[index_i] for the projection of `belief`.
  double interpolate(std::span<const double> values, std::span<const double> belief) const;

  /// Index of the grid point with exactly this composition.
  std::size_t index_of(std::span<const int> composition) const;

 private:
  std::uint64_t key(std::span<const int> composition) const;

  int num_states_;
  int resolution_;
  std::vector<int> counts_;
  std::vector<double> points_;
  std::unordered_map<std::uint64_t, std::size_t> index_;
};

}  // namespace psrl
