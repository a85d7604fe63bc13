#include "sscope/inference.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace sscope {

namespace {

void validate_binning(const BinningSpec& binning) {
  if (!(binning.lo < binning.hi)) {
    throw std::invalid_argument("binning range must satisfy lo < hi");
  }
  if (binning.bin_count < 1) {
    throw std::invalid_argument("binning needs at least one bin");
  }
  if (binning.zero_prob_threshold < 0.0) {
    throw std::invalid_argument("zero-probability threshold must be nonnegative");
  }
}

struct OutcomeGroup {
  double eigenvalue;                 // mean of the merged eigenvalues
  std::vector<Index> eigenvectors;   // column indices into the eigenbasis
  double probability;
};

// Consecutive eigenvalues within 1e-9 (relative to the spectral scale) are
// one physical outcome; an experimenter cannot tell them apart.
std::vector<OutcomeGroup> merge_outcomes(const Eigen::VectorXd& eigenvalues) {
  const double scale = std::max(std::abs(eigenvalues(0)),
                                std::abs(eigenvalues(eigenvalues.size() - 1)));
  const double tol = 1e-9 * std::max(1.0, scale);
  std::vector<OutcomeGroup> groups;
  for (Index k = 0; k < eigenvalues.size(); ++k) {
    if (groups.empty() || eigenvalues(k) - groups.back().eigenvalue > tol) {
      groups.push_back({eigenvalues(k), {k}, 0.0});
    } else {
      auto& g = groups.back();
      g.eigenvalue = (g.eigenvalue * g.eigenvectors.size() + eigenvalues(k)) /
                     (g.eigenvectors.size() + 1);
      g.eigenvectors.push_back(k);
    }
  }
  return groups;
}

}  // namespace

ConditionalTable::ConditionalTable(SpaceDescriptor a_space,
                                   std::vector<ConditionalBin> bins,
                                   double dropped_mass)
    : a_space_(std::move(a_space)), bins_(std::move(bins)),
      dropped_mass_(dropped_mass) {}

BinningSpec default_quadrature_binning(const AnyState& state,
                                       const Observable& b_observable,
                                       int a_modes) {
  const DensityMatrix rho_b = reduce_to_subsystem(state, Subsystem::b, a_modes);
  if (b_observable.space() != rho_b.space()) {
    throw std::invalid_argument(
        "default_quadrature_binning: observable does not act on subsystem B");
  }
  const double mean = expectation(rho_b, b_observable);
  const double sd = std::sqrt(variance(rho_b, b_observable));
  if (!(sd > 0.0)) {
    throw NumericalError("default_quadrature_binning: degenerate B marginal");
  }
  BinningSpec binning;
  binning.lo = mean - 6.0 * sd;
  binning.hi = mean + 6.0 * sd;
  binning.bin_count = 200;
  binning.tail_policy = TailPolicy::clip_to_edge_bins;
  return binning;
}

ConditionalTable conditional_table(const AnyState& state,
                                   const Observable& b_observable,
                                   const std::optional<BinningSpec>& binning,
                                   int a_modes) {
  const SpaceDescriptor& space = space_of(state);
  const SpaceDescriptor b_space = subsystem_space(space, Subsystem::b, a_modes);
  if (b_observable.space() != b_space) {
    throw std::invalid_argument(
        "conditional_table: observable does not act on subsystem B");
  }
  if (binning) validate_binning(*binning);
  const double threshold = binning ? binning->zero_prob_threshold : 1e-10;

  Eigen::SelfAdjointEigenSolver<Matrix> es(b_observable.matrix());
  if (es.info() != Eigen::Success) {
    throw NumericalError("conditional_table: eigendecomposition of B failed");
  }
  const Matrix& basis = es.eigenvectors();

  // Per-outcome probabilities come cheaply from the B marginal.
  const DensityMatrix rho_b = reduce_to_subsystem(state, Subsystem::b, a_modes);
  std::vector<OutcomeGroup> groups = merge_outcomes(es.eigenvalues());
  for (auto& g : groups) {
    for (Index k : g.eigenvectors) {
      const Complex q = basis.col(k).adjoint() * rho_b.matrix() * basis.col(k);
      g.probability += std::max(0.0, q.real());
    }
  }

  // Route each merged outcome to a bin.
  struct BinAccumulator {
    std::vector<Index> eigenvectors;
    double probability = 0.0;
    double outcome_weighted = 0.0;
    double outcome_plain = 0.0;  // unweighted fallback for zero-mass bins
    int group_count = 0;
  };
  std::map<long, BinAccumulator> accumulators;
  double dropped_mass = 0.0;
  if (binning) {
    const double width = (binning->hi - binning->lo) / binning->bin_count;
    for (const auto& g : groups) {
      long idx = static_cast<long>(std::floor((g.eigenvalue - binning->lo) / width));
      if (idx < 0 || idx >= binning->bin_count) {
        if (binning->tail_policy == TailPolicy::drop) {
          dropped_mass += g.probability;
          continue;
        }
        idx = std::clamp<long>(idx, 0, binning->bin_count - 1);
      }
      auto& acc = accumulators[idx];
      acc.eigenvectors.insert(acc.eigenvectors.end(), g.eigenvectors.begin(),
                              g.eigenvectors.end());
      acc.probability += g.probability;
      acc.outcome_weighted += g.probability * g.eigenvalue;
      acc.outcome_plain += g.eigenvalue;
      acc.group_count += 1;
    }
  } else {
    long idx = 0;
    for (const auto& g : groups) {
      auto& acc = accumulators[idx++];
      acc.eigenvectors = g.eigenvectors;
      acc.probability = g.probability;
      acc.outcome_weighted = g.probability * g.eigenvalue;
      acc.outcome_plain = g.eigenvalue;
      acc.group_count = 1;
    }
  }

  const SpaceDescriptor a_space = subsystem_space(space, Subsystem::a, a_modes);
  std::vector<ConditionalBin> bins;
  bins.reserve(accumulators.size());
  double kept_mass = 0.0;
  for (const auto& [idx, acc] : accumulators) {
    (void)idx;
    if (acc.probability < threshold) {
      dropped_mass += acc.probability;
      continue;
    }
    Matrix projector = Matrix::Zero(b_space.total_dim(), b_space.total_dim());
    for (Index k : acc.eigenvectors) {
      projector += basis.col(k) * basis.col(k).adjoint();
    }
    projector = ((projector + projector.adjoint()) / 2.0).eval();
    const Conditioned cond =
        condition_on_projector(state, projector, a_modes, threshold);
    const double outcome = acc.probability > 0.0
                               ? acc.outcome_weighted / acc.probability
                               : acc.outcome_plain / acc.group_count;
    bins.push_back({outcome, cond.probability, cond.state});
    kept_mass += cond.probability;
  }
  if (bins.empty()) {
    std::ostringstream msg;
    msg << "conditional_table: no outcome bin reached probability " << threshold;
    throw NumericalError(msg.str());
  }
  for (auto& bin : bins) bin.probability /= kept_mass;
  return ConditionalTable(a_space, std::move(bins), dropped_mass);
}

namespace {

void require_a_space(const ConditionalTable& table, const Observable& obs,
                     const char* what) {
  if (obs.space() != table.a_space()) {
    throw std::invalid_argument(std::string(what) +
                                ": observable does not act on subsystem A");
  }
}

}  // namespace

double inferred_variance(const ConditionalTable& table,
                         const Observable& a_observable) {
  require_a_space(table, a_observable, "inferred_variance");
  double total = 0.0;
  for (const auto& bin : table.bins()) {
    total += bin.probability * variance(bin.state, a_observable);
  }
  return total;
}

double inferred_mean_modulus(const ConditionalTable& table,
                             const Observable& c_observable) {
  require_a_space(table, c_observable, "inferred_mean_modulus");
  double total = 0.0;
  for (const auto& bin : table.bins()) {
    total += bin.probability * std::abs(expectation(bin.state, c_observable));
  }
  return total;
}

}  // namespace sscope
