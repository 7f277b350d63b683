#include "psrl/belief_grid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace psrl {
namespace {

void enumerate(int remaining, int position, int num_states, std::vector<int>& current,
               std::vector<int>& out) {
  if (position == num_states - 1) {
    current[static_cast<std::size_t>(position)] = remaining;
    out.insert(out.end(), current.begin(), current.end());
    return;
  }
  for (int n = remaining; n >= 0; --n) {
    current[static_cast<std::size_t>(position)] = n;
    enumerate(remaining - n, position + 1, num_states, current, out);
  }
}

}  // namespace

BeliefGrid::BeliefGrid(int num_states, int resolution)
    : num_states_(num_states), resolution_(resolution) {
  if (num_states <= 0 || resolution <= 0)
    throw std::invalid_argument("BeliefGrid needs positive state count and resolution");
  if (std::pow(static_cast<double>(resolution + 1), num_states) > 1.8e19)
    throw std::invalid_argument("BeliefGrid too large to index");
  std::vector<int> current(static_cast<std::size_t>(num_states));
  enumerate(resolution, 0, num_states, current, counts_);
  points_.resize(counts_.size());
  for (std::size_t i = 0; i < counts_.size(); ++i)
    points_[i] = static_cast<double>(counts_[i]) / resolution;
  const std::size_t n = size();
  index_.reserve(n);
  for (std::size_t i = 0; i < n; ++i) index_.emplace(key(composition(i)), i);
}

std::uint64_t BeliefGrid::key(std::span<const int> composition) const {
  std::uint64_t k = 0;
  for (int c : composition) k = k * static_cast<std::uint64_t>(resolution_ + 1) + static_cast<std::uint64_t>(c);
  return k;
}

std::size_t BeliefGrid::index_of(std::span<const int> composition) const {
  auto it = index_.find(key(composition));
  if (it == index_.end()) throw std::out_of_range("composition is not a grid point");
  return it->second;
}

std::vector<GridWeight> BeliefGrid::project(std::span<const double> belief) const {
  const auto S = static_cast<std::size_t>(num_states_);
  const double g = resolution_;

  // Cumulative coordinates x_i = g * sum_{j >= i} b_j, so g = x_0 >= x_1 >= ... >= 0.
  std::vector<double> x(S);
  double tail = 0.0;
  for (std::size_t i = S; i-- > 0;) {
    tail += belief[i];
    x[i] = g * tail;
  }
  x[0] = g;
  for (std::size_t i = 1; i < S; ++i) x[i] = std::clamp(x[i], 0.0, x[i - 1]);

  std::vector<int> base(S);
  std::vector<double> frac(S);
  for (std::size_t i = 0; i < S; ++i) {
    base[i] = static_cast<int>(std::floor(x[i]));
    if (base[i] > resolution_) base[i] = resolution_;
    frac[i] = x[i] - base[i];
  }
  frac[0] = 0.0;

  // Walk from the base vertex adding unit steps in order of decreasing
  // fractional part; ties keep the lower coordinate first, which keeps every
  // visited vertex inside the simplex.
  std::vector<std::size_t> order(S - 1);
  std::iota(order.begin(), order.end(), std::size_t{1});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });

  std::vector<GridWeight> out;
  out.reserve(S);
  std::vector<int> vertex_x = base;
  std::vector<int> comp(S);
  auto emit = [&](double w) {
    if (!(w > 0.0)) return;
    for (std::size_t i = 0; i + 1 < S; ++i) comp[i] = vertex_x[i] - vertex_x[i + 1];
    comp[S - 1] = vertex_x[S - 1];
    out.push_back({index_of(comp), w});
  };

  double prev = 1.0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const double d = frac[order[k]];
    emit(prev - d);
    prev = d;
    ++vertex_x[order[k]];
  }
  emit(prev);

  double total = 0.0;
  for (const auto& gw : out) total += gw.weight;
  for (auto& gw : out) gw.weight /= total;
  return out;
}

double BeliefGrid::interpolate(std::span<const double> values,
                               std::span<const double> belief) const {
  double v = 0.0;
  for (const auto& gw : project(belief)) v += gw.weight * values[gw.index];
  return v;
}

}  // namespace psrl
