#ifndef SSCOPE_INFERENCE_HPP
#define SSCOPE_INFERENCE_HPP

#include <optional>
#include <vector>

#include "sscope/hilbert.hpp"

namespace sscope {

enum class TailPolicy { clip_to_edge_bins, drop };

/// Discretization of a continuous outcome axis for the B measurement.
struct BinningSpec {
  double lo = 0.0;
  double hi = 0.0;
  int bin_count = 1;
  TailPolicy tail_policy = TailPolicy::clip_to_edge_bins;
  double zero_prob_threshold = 1e-10;
};

/// Marginal-adapted default for quadrature-like B observables: mean +- 6
/// standard deviations of the B marginal, 200 bins, tails clipped into the
/// edge bins. Gaussian-like marginals keep under 1e-8 of their mass outside
/// that range.
BinningSpec default_quadrature_binning(const AnyState& state,
                                       const Observable& b_observable,
                                       int a_modes = -1);

struct ConditionalBin {
  double outcome;       // probability-weighted representative B outcome
  double probability;   // renormalized over stored bins
  DensityMatrix state;  // conditional A-state given this outcome
};

/// Immutable conditional decomposition of a bipartite state over binned
/// outcomes of one B observable. Reads are thread-safe.
class ConditionalTable {
 public:
  ConditionalTable(SpaceDescriptor a_space, std::vector<ConditionalBin> bins,
                   double dropped_mass);

  const SpaceDescriptor& a_space() const { return a_space_; }
  const std::vector<ConditionalBin>& bins() const { return bins_; }

  /// Probability mass removed by the drop tail policy plus bins under the
  /// zero-probability threshold; stored bins are renormalized over the rest.
  double dropped_mass() const { return dropped_mass_; }

 private:
  SpaceDescriptor a_space_;
  std::vector<ConditionalBin> bins_;
  double dropped_mass_;
};

/// Spectral-decomposes b_observable (given on the B subsystem space),
/// merges degenerate eigenvalues into single outcomes, groups outcomes into
/// bins, and conditions the state once per bin. Without a BinningSpec each
/// merged eigenvalue is its own bin. Throws NumericalError when nothing
/// survives, std::invalid_argument on space mismatches or bad binning.
ConditionalTable conditional_table(const AnyState& state,
                                   const Observable& b_observable,
                                   const std::optional<BinningSpec>& binning,
                                   int a_modes = -1);

/// Average conditional variance sum_b P(b) var(A | b): how well the A
/// observable is pinned down once the B outcome is known.
double inferred_variance(const ConditionalTable& table,
                         const Observable& a_observable);

/// Average conditional mean modulus sum_b P(b) |<C | b>|. Dominates the
/// unconditional |<C>|.
double inferred_mean_modulus(const ConditionalTable& table,
                             const Observable& c_observable);

}  // namespace sscope

#endif
