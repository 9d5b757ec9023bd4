#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "rsbg/rng.hpp"

namespace rsbg {

// One axis of a behavior space: a closed interval of a physically
// interpretable driver/agent parameter.
struct BehaviorDim {
  std::string name;
  double lower = 0.0;
  double upper = 0.0;
  std::string unit;
};

// A point in a behavior space, one value per dimension.
using BehaviorState = std::vector<double>;

// Axis-aligned box of behavior parameters. Immutable after construction.
class BehaviorSpace {
 public:
  // Throws std::invalid_argument on an empty dimension list or any
  // dimension with lower >= upper.
  explicit BehaviorSpace(std::vector<BehaviorDim> dims);

  int dim() const { return static_cast<int>(dims_.size()); }
  const std::vector<BehaviorDim>& dims() const { return dims_; }
  double volume() const;

  // Closed containment on every axis.
  bool contains(const BehaviorState& x) const;

  // Component-wise uniform draw.
  BehaviorState sample_state(Rng& rng) const;

 private:
  std::vector<BehaviorDim> dims_;
};

// Convenience for 1-D spaces.
BehaviorSpace make_interval_space(std::string name, double lower, double upper,
                                  std::string unit = {});

// Opaque view of the observation history a hypothetical policy may condition
// on. Domains derive a concrete slice type; policies of the same domain cast
// it back.
class HistorySlice {
 public:
  virtual ~HistorySlice() = default;
};

// Deterministic map (history, acting agent, behavior state) -> action.
// Identical inputs must yield identical actions.
class HypotheticalPolicy {
 public:
  virtual ~HypotheticalPolicy() = default;
  virtual double act(const HistorySlice& history, int agent,
                     std::span<const double> beta) const = 0;
};

// One cell of a behavior-space partition plus the shared hypothetical policy.
// Induces a distribution over actions: beta ~ Uniform(cell), a = policy(beta).
struct Hypothesis {
  BehaviorSpace cell;
  std::shared_ptr<const HypotheticalPolicy> policy;
  int id = 0;  // 1-based index within its partition

  // Draws beta uniformly from the cell and evaluates the policy.
  double sample_action(const HistorySlice& history, int agent, Rng& rng) const;

  // Monte-Carlo preimage estimate of the induced action distribution at
  // `observed`: the fraction of m_samples cell draws whose action lands
  // within `tolerance` of the observation. Unnormalized mass in [0, 1];
  // may be exactly 0. Throws std::invalid_argument on m_samples < 1 or
  // tolerance <= 0.
  double action_likelihood(const HistorySlice& history, int agent,
                           double observed, int m_samples, double tolerance,
                           Rng& rng) const;
};

// Equal-volume grid partition of a behavior space. Cells follow a half-open
// convention per axis: [lower + i*w, lower + (i+1)*w), with the last cell
// closed on the right, so membership is a total function.
class Partition {
 public:
  const BehaviorSpace& parent() const { return parent_; }
  const std::vector<BehaviorSpace>& cells() const { return cells_; }
  const std::vector<int>& cells_per_dim() const { return cells_per_dim_; }
  int size() const { return static_cast<int>(cells_.size()); }

  // Index of the unique cell containing x under the boundary convention.
  // x must lie in the parent space.
  int cell_index(const BehaviorState& x) const;

  // Literal membership test for one cell (half-open, last cell closed).
  bool cell_contains(int cell, const BehaviorState& x) const;

  // All K hypotheses over this partition, sharing one policy. Ids are 1..K.
  std::vector<Hypothesis> hypotheses(
      std::shared_ptr<const HypotheticalPolicy> policy) const;

 private:
  friend Partition partition_equal(const BehaviorSpace&, std::span<const int>);
  Partition(BehaviorSpace parent, std::vector<int> cells_per_dim,
            std::vector<BehaviorSpace> cells)
      : parent_(std::move(parent)),
        cells_per_dim_(std::move(cells_per_dim)),
        cells_(std::move(cells)) {}

  BehaviorSpace parent_;
  std::vector<int> cells_per_dim_;
  std::vector<BehaviorSpace> cells_;
};

// Splits each dimension d into cells_per_dim[d] equal slices. Cell order is
// row-major with the last dimension varying fastest. Throws
// std::invalid_argument on a dimension-count mismatch or nonpositive counts.
Partition partition_equal(const BehaviorSpace& space,
                          std::span<const int> cells_per_dim);

}  // namespace rsbg
