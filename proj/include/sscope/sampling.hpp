#ifndef SSCOPE_SAMPLING_HPP
#define SSCOPE_SAMPLING_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sscope/criteria.hpp"

namespace sscope {

/// Additive Gaussian detection noise applied to outcomes, one sigma per side.
struct NoiseSpec {
  double sigma_a = 0.0;
  double sigma_b = 0.0;
};

/// One synthetic measurement run: n outcome pairs drawn i.i.d. from the joint
/// spectral distribution of one A-side and one B-side observable.
/// Reproducible: the record is a pure function of
/// (state, observables, n, seed, noise).
struct SampleRecord {
  std::string setting;
  std::uint64_t seed = 0;
  NoiseSpec noise;
  std::vector<double> a;
  std::vector<double> b;

  std::size_t n() const { return a.size(); }
};

/// Draws n outcome pairs. The observables must live on the A and B subsystem
/// spaces of the given bipartition; anything else throws invalid_argument.
SampleRecord sample_joint(const AnyState& state, const Observable& a_observable,
                          const Observable& b_observable, std::size_t n,
                          std::uint64_t seed, NoiseSpec noise = {},
                          int a_modes = -1);

/// Columnar text format. Header lines: setting, seed, n, noise (two sigmas);
/// then n rows of "O^A O^B" in round-trip decimal.
std::string serialize(const SampleRecord& record);
SampleRecord parse_sample_record(const std::string& text);

struct VarianceEstimate {
  double value = 0.0;
  double ci = 0.0;            // bootstrap standard error (200 resamples)
  double dropped_mass = 0.0;  // fraction of samples in bins with < 2 entries
  std::size_t bins_used = 0;
  double bin_width = 0.0;     // width actually applied
};

/// Bins the B column at bin_width, averages unbiased within-bin variances of
/// the A column with bin-frequency weights (renormalized over kept bins).
/// Bins holding fewer than two samples are dropped and reported as
/// dropped_mass. Without an explicit width the default policy applies:
/// (sample B range)/sqrt(n), widened so every bin expects at least 50
/// samples; records with n < 50 are rejected under that policy.
/// Throws NumericalError when every bin is underpopulated.
VarianceEstimate estimate_inferred_variance(
    const SampleRecord& record,
    std::optional<double> bin_width = std::nullopt);

struct EstimateOptions {
  std::optional<double> bin_width;  // shared by every binned statistic
  double bound_d = 0.0;             // epr_sum_spin bound D
  double extent_s = 0.0;            // mr_bound extent S
};

/// Re-evaluates a criterion from finite records instead of the analytic
/// state. Records are positional; the role each position plays is fixed per
/// criterion id (see the implementation table). Missing or surplus records
/// throw invalid_argument naming the statistic. The report carries
/// method = sampled and ci = bootstrap standard error of (lhs - rhs).
CriterionReport estimate_criterion(const std::vector<SampleRecord>& records,
                                   CriterionId id,
                                   const EstimateOptions& options = {});

}  // namespace sscope

#endif
