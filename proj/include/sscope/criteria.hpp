#ifndef SSCOPE_CRITERIA_HPP
#define SSCOPE_CRITERIA_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sscope/inference.hpp"

namespace sscope {

enum class CriterionId {
  cv_sscopic,
  spin_sscopic,
  cv_sscopic_inferred,
  spin_sscopic_inferred,
  theorem1_cv,
  theorem1_spin,
  epr_product_cv,
  epr_product_spin,
  epr_product_spin_uninf_rhs,
  epr_sum_spin,
  mr_bound,
};

const char* to_string(CriterionId id);
std::optional<CriterionId> criterion_id_from_string(const std::string& name);

enum class Method { analytic, sampled };

/// Outcome of one inequality evaluation. The inequality always reads
/// lhs >= rhs; `violated` is the CI-aware claim that it failed:
/// (rhs - lhs) > max(1e-9, 3*ci). For the superposition-size criteria the
/// interesting output is s_min, the smallest superposition extent the
/// observed statistics force.
struct CriterionReport {
  CriterionId criterion_id;
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;  // lhs/rhs; +infinity when rhs is 0 (serialized null)
  bool violated = false;
  std::optional<double> s_min;
  Method method = Method::analytic;
  double ci = 0.0;         // bootstrap half-width; 0 on the analytic path
  double tolerance = 0.0;  // violation tolerance actually applied
  std::map<std::string, std::string> metadata;
};

double violation_tolerance(double ci);

/// Assembles lhs/rhs/ratio/violated/tolerance under the shared rules.
CriterionReport make_report(CriterionId id, double lhs, double rhs,
                            Method method, double ci,
                            std::optional<double> s_min,
                            std::map<std::string, std::string> metadata);

/// Smallest superposition extent compatible with a momentum variance:
/// s_min = 2/sqrt(var). The benchmark rhs is the vacuum variance 1, so
/// `violated` marks statistics sharper than any coherent state (s_min > 2).
CriterionReport cv_superposition_size(double p_variance);

/// Spin analog: s_min = |<J_Z>|/sqrt(var J_Y). lhs = var J_Y, rhs = <J_Z>^2,
/// so `violated` marks s_min > 1. A zero mean gives s_min = 0 and the
/// "vacuous_bound" flag.
CriterionReport spin_superposition_size(double jy_variance, double jz_mean);

/// cv_superposition_size fed by the inferred variance of p on A given the B
/// measurement. Subsystem A must be a single Fock mode.
CriterionReport cv_superposition_size_inferred(
    const AnyState& state, const Observable& b_observable,
    const std::optional<BinningSpec>& binning, int a_modes = -1);

/// Spin version: s_min = |<J_Z^A>| / sqrt(inferred var J_Y^A), with the
/// unconditional mean on A. A is a spin ladder or a Schwinger mode pair.
/// When the inferred variance collapses to zero the bound exceeds every
/// superposition the space can hold; s_min is then capped at the spectral
/// extent of J_X^A and flagged "exceeds_spectrum".
CriterionReport spin_superposition_size_inferred(
    const AnyState& state, const Observable& b_observable,
    const std::optional<BinningSpec>& binning, int a_modes = -1);

/// Hybrid uncertainty relation: sqrt(var(A1) * inferred var(A2)) >=
/// |<C>|_inf / 2 with C = -i[A1, A2]. Holds for every quantum state; a
/// violation signals an implementation or truncation fault, not physics.
CriterionReport theorem1_report(const AnyState& state, const Observable& a_obs1,
                                const Observable& a_obs2,
                                const Observable& b_observable,
                                const std::optional<BinningSpec>& binning,
                                int a_modes = -1);

/// EPR product criterion: inferred var(A1 | B setting 1) * inferred
/// var(A2 | B setting 2) >= (|<C>|_inf)^2 / 4. A violation demonstrates the
/// EPR paradox. The modulus table uses c_setting when given, otherwise B
/// setting 1; `uninferred_rhs` selects the weaker unconditional |<C>|^2/4
/// variant (spin spaces only, reported under its own criterion id).
CriterionReport epr_product_report(const AnyState& state,
                                   const Observable& a_obs1,
                                   const Observable& a_obs2,
                                   const Observable& b_setting1,
                                   const Observable& b_setting2,
                                   const std::optional<BinningSpec>& binning,
                                   const std::optional<Observable>& c_setting =
                                       std::nullopt,
                                   bool uninferred_rhs = false,
                                   int a_modes = -1);

/// EPR sum criterion: sum_i inferred var(O_i | B setting i) >= D.
CriterionReport epr_sum_report(const AnyState& state,
                               const std::vector<Observable>& a_observables,
                               const std::vector<Observable>& b_settings,
                               double bound_d,
                               const std::optional<BinningSpec>& binning,
                               int a_modes = -1);

/// Sum-uncertainty bound for a pair of spin-j systems: D = j/2.
double spin_sum_bound(double j);

/// Minimum momentum variance any mixture of superpositions of extent <= S
/// can show: 4/S^2.
double mr_bound(double S);

/// mr_bound as a report: lhs = var(p) of a single-mode state, rhs = 4/S^2.
/// `violated` means the state's momentum is too sharp to be such a mixture,
/// certifying a superposition larger than S.
CriterionReport mr_bound_report(const AnyState& state, double S);

}  // namespace sscope

#endif
