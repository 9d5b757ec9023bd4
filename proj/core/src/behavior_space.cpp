#include "rsbg/behavior_space.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace rsbg {

BehaviorSpace::BehaviorSpace(std::vector<BehaviorDim> dims)
    : dims_(std::move(dims)) {
  if (dims_.empty()) {
    throw std::invalid_argument("behavior space needs at least one dimension");
  }
  for (const auto& d : dims_) {
    if (!(d.lower < d.upper)) {
      throw std::invalid_argument("behavior dimension '" + d.name +
                                  "' is degenerate: lower must be < upper");
    }
  }
}

double BehaviorSpace::volume() const {
  double v = 1.0;
  for (const auto& d : dims_) v *= d.upper - d.lower;
  return v;
}

bool BehaviorSpace::contains(const BehaviorState& x) const {
  if (static_cast<int>(x.size()) != dim()) return false;
  for (int d = 0; d < dim(); ++d) {
    if (x[d] < dims_[d].lower || x[d] > dims_[d].upper) return false;
  }
  return true;
}

BehaviorState BehaviorSpace::sample_state(Rng& rng) const {
  BehaviorState x(dims_.size());
  for (std::size_t d = 0; d < dims_.size(); ++d) {
    x[d] = rng.uniform(dims_[d].lower, dims_[d].upper);
  }
  return x;
}

BehaviorSpace make_interval_space(std::string name, double lower, double upper,
                                  std::string unit) {
  return BehaviorSpace(
      {BehaviorDim{std::move(name), lower, upper, std::move(unit)}});
}

double Hypothesis::sample_action(const HistorySlice& history, int agent,
                                 Rng& rng) const {
  return policy->act(history, agent, cell.sample_state(rng));
}

double Hypothesis::action_likelihood(const HistorySlice& history, int agent,
                                     double observed, int m_samples,
                                     double tolerance, Rng& rng) const {
  if (m_samples < 1) {
    throw std::invalid_argument("action_likelihood: m_samples must be >= 1");
  }
  if (!(tolerance > 0.0)) {
    throw std::invalid_argument("action_likelihood: tolerance must be > 0");
  }
  int hits = 0;
  for (int i = 0; i < m_samples; ++i) {
    const double a = policy->act(history, agent, cell.sample_state(rng));
    if (std::abs(a - observed) <= tolerance) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(m_samples);
}

namespace {

// Per-dimension slice index of x, under the half-open convention.
int slice_index(double value, const BehaviorDim& dim, int n) {
  const double width = (dim.upper - dim.lower) / n;
  int idx = static_cast<int>(std::floor((value - dim.lower) / width));
  if (idx < 0) idx = 0;
  if (idx > n - 1) idx = n - 1;
  return idx;
}

}  // namespace

int Partition::cell_index(const BehaviorState& x) const {
  if (static_cast<int>(x.size()) != parent_.dim()) {
    throw std::invalid_argument("cell_index: dimension mismatch");
  }
  int flat = 0;
  for (int d = 0; d < parent_.dim(); ++d) {
    flat = flat * cells_per_dim_[d] +
           slice_index(x[d], parent_.dims()[d], cells_per_dim_[d]);
  }
  return flat;
}

bool Partition::cell_contains(int cell, const BehaviorState& x) const {
  if (cell < 0 || cell >= size()) return false;
  if (static_cast<int>(x.size()) != parent_.dim()) return false;
  // Decode the per-dimension slice of this cell (last dimension fastest).
  int rem = cell;
  std::vector<int> slice(parent_.dim());
  for (int d = parent_.dim() - 1; d >= 0; --d) {
    slice[d] = rem % cells_per_dim_[d];
    rem /= cells_per_dim_[d];
  }
  for (int d = 0; d < parent_.dim(); ++d) {
    const auto& cd = cells_[cell].dims()[d];
    const bool last = slice[d] == cells_per_dim_[d] - 1;
    if (x[d] < cd.lower) return false;
    if (last ? x[d] > cd.upper : x[d] >= cd.upper) return false;
  }
  return true;
}

std::vector<Hypothesis> Partition::hypotheses(
    std::shared_ptr<const HypotheticalPolicy> policy) const {
  std::vector<Hypothesis> out;
  out.reserve(cells_.size());
  for (int k = 0; k < size(); ++k) {
    out.push_back(Hypothesis{cells_[k], policy, k + 1});
  }
  return out;
}

Partition partition_equal(const BehaviorSpace& space,
                          std::span<const int> cells_per_dim) {
  if (static_cast<int>(cells_per_dim.size()) != space.dim()) {
    throw std::invalid_argument(
        "partition_equal: cells_per_dim length must equal the space "
        "dimension");
  }
  for (int n : cells_per_dim) {
    if (n < 1) {
      throw std::invalid_argument(
          "partition_equal: every cell count must be >= 1");
    }
  }

  long long total = 1;
  for (int n : cells_per_dim) total *= n;

  std::vector<int> slice(space.dim(), 0);
  std::vector<BehaviorSpace> cells;
  cells.reserve(static_cast<std::size_t>(total));
  for (long long flat = 0; flat < total; ++flat) {
    std::vector<BehaviorDim> dims = space.dims();
    for (int d = 0; d < space.dim(); ++d) {
      const auto& pd = space.dims()[d];
      const int n = cells_per_dim[d];
      const double w = (pd.upper - pd.lower) / n;
      dims[d].lower = pd.lower + slice[d] * w;
      // The last slice ends exactly at the parent bound.
      dims[d].upper =
          slice[d] == n - 1 ? pd.upper : pd.lower + (slice[d] + 1) * w;
    }
    cells.emplace_back(std::move(dims));
    // Increment mixed-radix counter, last dimension fastest.
    for (int d = space.dim() - 1; d >= 0; --d) {
      if (++slice[d] < cells_per_dim[d]) break;
      slice[d] = 0;
    }
  }
  return Partition(space,
                   std::vector<int>(cells_per_dim.begin(), cells_per_dim.end()),
                   std::move(cells));
}

}  // namespace rsbg
