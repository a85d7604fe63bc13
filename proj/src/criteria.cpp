#include "sscope/criteria.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace sscope {

namespace {

constexpr double kAnalyticTol = 1e-9;
constexpr double kZeroMeanTol = 1e-12;
constexpr double kZeroVarianceTol = 1e-12;

std::string cutoff_list(const SpaceDescriptor& space) {
  std::string out;
  for (std::size_t k = 0; k < space.mode_count(); ++k) {
    if (k) out += ",";
    out += std::to_string(space.mode_dims()[k] - 1);
  }
  return out;
}

std::string binning_descriptor(const std::optional<BinningSpec>& binning) {
  if (!binning) return "eigen";
  std::ostringstream out;
  out << format_double(binning->lo) << ":" << format_double(binning->hi) << ":"
      << binning->bin_count << ":"
      << (binning->tail_policy == TailPolicy::drop ? "drop" : "clip");
  return out.str();
}

void annotate_table(std::map<std::string, std::string>& metadata,
                    const ConditionalTable& table,
                    const std::optional<BinningSpec>& binning,
                    const std::string& prefix) {
  metadata[prefix + "bins"] = std::to_string(table.bins().size());
  metadata[prefix + "binning"] = binning_descriptor(binning);
  metadata[prefix + "dropped_mass"] = format_double(table.dropped_mass());
}

// Spin operators carried by an A subsystem: a single ladder, or a Schwinger
// mode pair when A consists of two Fock modes.
SpinOps a_spin_ops(const SpaceDescriptor& a_space) {
  if (a_space.kind() == SpaceKind::spin && a_space.mode_count() == 1) {
    const double j = (a_space.total_dim() - 1) / 2.0;
    return spin_ladder_ops(j);
  }
  if (a_space.kind() == SpaceKind::fock && a_space.mode_count() == 2) {
    return schwinger_spin_ops(a_space, 0, 1);
  }
  throw std::invalid_argument(
      "spin criteria need subsystem A to be one spin ladder or two Fock modes");
}

double spectral_extent(const Observable& obs) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(obs.matrix(), Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff() - es.eigenvalues().minCoeff();
}

void require_positive_variance(double v, const char* what) {
  if (!(v > 0.0)) {
    std::ostringstream msg;
    msg << what << ": variance must be positive, got " << v;
    throw std::invalid_argument(msg.str());
  }
}

}  // namespace

const char* to_string(CriterionId id) {
  switch (id) {
    case CriterionId::cv_sscopic: return "cv_sscopic";
    case CriterionId::spin_sscopic: return "spin_sscopic";
    case CriterionId::cv_sscopic_inferred: return "cv_sscopic_inferred";
    case CriterionId::spin_sscopic_inferred: return "spin_sscopic_inferred";
    case CriterionId::theorem1_cv: return "theorem1_cv";
    case CriterionId::theorem1_spin: return "theorem1_spin";
    case CriterionId::epr_product_cv: return "epr_product_cv";
    case CriterionId::epr_product_spin: return "epr_product_spin";
    case CriterionId::epr_product_spin_uninf_rhs:
      return "epr_product_spin_uninf_rhs";
    case CriterionId::epr_sum_spin: return "epr_sum_spin";
    case CriterionId::mr_bound: return "mr_bound";
  }
  return "unknown";
}

std::optional<CriterionId> criterion_id_from_string(const std::string& name) {
  static const std::map<std::string, CriterionId> lut = {
      {"cv_sscopic", CriterionId::cv_sscopic},
      {"spin_sscopic", CriterionId::spin_sscopic},
      {"cv_sscopic_inferred", CriterionId::cv_sscopic_inferred},
      {"spin_sscopic_inferred", CriterionId::spin_sscopic_inferred},
      {"theorem1_cv", CriterionId::theorem1_cv},
      {"theorem1_spin", CriterionId::theorem1_spin},
      {"epr_product_cv", CriterionId::epr_product_cv},
      {"epr_product_spin", CriterionId::epr_product_spin},
      {"epr_product_spin_uninf_rhs", CriterionId::epr_product_spin_uninf_rhs},
      {"epr_sum_spin", CriterionId::epr_sum_spin},
      {"mr_bound", CriterionId::mr_bound},
  };
  const auto it = lut.find(name);
  if (it == lut.end()) return std::nullopt;
  return it->second;
}

double violation_tolerance(double ci) { return std::max(kAnalyticTol, 3.0 * ci); }

CriterionReport make_report(CriterionId id, double lhs, double rhs,
                            Method method, double ci,
                            std::optional<double> s_min,
                            std::map<std::string, std::string> metadata) {
  CriterionReport report;
  report.criterion_id = id;
  report.lhs = lhs;
  report.rhs = rhs;
  report.ratio = rhs > 0.0 ? lhs / rhs : std::numeric_limits<double>::infinity();
  report.method = method;
  report.ci = ci;
  report.tolerance = violation_tolerance(ci);
  report.violated = (rhs - lhs) > report.tolerance;
  report.s_min = s_min;
  report.metadata = std::move(metadata);
  report.metadata["ci"] = format_double(ci);
  report.metadata["tolerance"] = format_double(report.tolerance);
  return report;
}

CriterionReport cv_superposition_size(double p_variance) {
  require_positive_variance(p_variance, "cv_superposition_size");
  const double s_min = 2.0 / std::sqrt(p_variance);
  std::map<std::string, std::string> metadata;
  metadata["benchmark"] = "vacuum variance 1, s_min 2";
  metadata["nontrivial_superposition"] = s_min > 2.0 ? "true" : "false";
  return make_report(CriterionId::cv_sscopic, p_variance, 1.0, Method::analytic,
                     0.0, s_min, std::move(metadata));
}

CriterionReport spin_superposition_size(double jy_variance, double jz_mean) {
  require_positive_variance(jy_variance, "spin_superposition_size");
  std::map<std::string, std::string> metadata;
  metadata["benchmark"] = "s_min 1";
  double s_min;
  double rhs;
  if (std::abs(jz_mean) <= kZeroMeanTol) {
    s_min = 0.0;
    rhs = 0.0;
    metadata["vacuous_bound"] = "true";
  } else {
    s_min = std::abs(jz_mean) / std::sqrt(jy_variance);
    rhs = jz_mean * jz_mean;
  }
  metadata["nontrivial_superposition"] = s_min > 1.0 ? "true" : "false";
  return make_report(CriterionId::spin_sscopic, jy_variance, rhs,
                     Method::analytic, 0.0, s_min, std::move(metadata));
}

CriterionReport cv_superposition_size_inferred(
    const AnyState& state, const Observable& b_observable,
    const std::optional<BinningSpec>& binning, int a_modes) {
  const SpaceDescriptor a_space =
      subsystem_space(space_of(state), Subsystem::a, a_modes);
  if (a_space.kind() != SpaceKind::fock || a_space.mode_count() != 1) {
    throw std::invalid_argument(
        "cv_superposition_size_inferred needs a single Fock mode on A");
  }
  const auto table = conditional_table(state, b_observable, binning, a_modes);
  const Observable pa = quadrature_op(a_space, 0, M_PI / 2.0);
  const double v_inf = inferred_variance(table, pa);

  CriterionReport report = cv_superposition_size(v_inf);
  report.criterion_id = CriterionId::cv_sscopic_inferred;
  report.metadata["cutoffs"] = cutoff_list(space_of(state));
  report.metadata["b_setting"] = b_observable.label();
  annotate_table(report.metadata, table, binning, "");
  return report;
}

CriterionReport spin_superposition_size_inferred(
    const AnyState& state, const Observable& b_observable,
    const std::optional<BinningSpec>& binning, int a_modes) {
  const SpaceDescriptor a_space =
      subsystem_space(space_of(state), Subsystem::a, a_modes);
  const SpinOps ops = a_spin_ops(a_space);
  const auto table = conditional_table(state, b_observable, binning, a_modes);
  const DensityMatrix reduced = reduce_to_subsystem(state, Subsystem::a, a_modes);
  const double jz_mean = expectation(reduced, ops.jz);
  const double v_inf = inferred_variance(table, ops.jy);

  std::map<std::string, std::string> metadata;
  metadata["cutoffs"] = cutoff_list(space_of(state));
  metadata["b_setting"] = b_observable.label();
  metadata["jz_mean"] = format_double(jz_mean);

  CriterionReport report;
  if (v_inf <= kZeroVarianceTol) {
    // Perfect inference: the bound outgrows anything the space can hold.
    const double extent = spectral_extent(ops.jx);
    const double rhs =
        std::abs(jz_mean) <= kZeroMeanTol ? 0.0 : jz_mean * jz_mean;
    metadata["exceeds_spectrum"] = "true";
    metadata["nontrivial_superposition"] = "true";
    report = make_report(CriterionId::spin_sscopic_inferred, v_inf, rhs,
                         Method::analytic, 0.0, extent, std::move(metadata));
  } else {
    report = spin_superposition_size(v_inf, jz_mean);
    report.criterion_id = CriterionId::spin_sscopic_inferred;
    for (auto& [key, value] : metadata) report.metadata[key] = value;
  }
  annotate_table(report.metadata, table, binning, "");
  return report;
}

CriterionReport theorem1_report(const AnyState& state, const Observable& a_obs1,
                                const Observable& a_obs2,
                                const Observable& b_observable,
                                const std::optional<BinningSpec>& binning,
                                int a_modes) {
  const DensityMatrix reduced = reduce_to_subsystem(state, Subsystem::a, a_modes);
  const double var1 = variance(reduced, a_obs1);
  const auto table = conditional_table(state, b_observable, binning, a_modes);
  const double v2_inf = inferred_variance(table, a_obs2);
  const auto c = hermitized_commutator(a_obs1, a_obs2);
  const double modulus = inferred_mean_modulus(table, c);

  const double lhs = std::sqrt(var1 * v2_inf);
  const double rhs = modulus / 2.0;
  std::map<std::string, std::string> metadata;
  metadata["cutoffs"] = cutoff_list(space_of(state));
  metadata["b_setting"] = b_observable.label();
  metadata["a_variance"] = format_double(var1);
  metadata["inferred_variance"] = format_double(v2_inf);
  metadata["inferred_modulus"] = format_double(modulus);
  const bool spin = !(space_of(state).kind() == SpaceKind::fock &&
                      subsystem_space(space_of(state), Subsystem::a, a_modes)
                              .mode_count() == 1);
  auto report = make_report(spin ? CriterionId::theorem1_spin
                                 : CriterionId::theorem1_cv,
                            lhs, rhs, Method::analytic, 0.0, std::nullopt,
                            std::move(metadata));
  annotate_table(report.metadata, table, binning, "");
  return report;
}

CriterionReport epr_product_report(const AnyState& state,
                                   const Observable& a_obs1,
                                   const Observable& a_obs2,
                                   const Observable& b_setting1,
                                   const Observable& b_setting2,
                                   const std::optional<BinningSpec>& binning,
                                   const std::optional<Observable>& c_setting,
                                   bool uninferred_rhs, int a_modes) {
  const SpaceDescriptor a_space =
      subsystem_space(space_of(state), Subsystem::a, a_modes);
  const bool cv =
      a_space.kind() == SpaceKind::fock && a_space.mode_count() == 1;
  if (uninferred_rhs && cv) {
    throw std::invalid_argument(
        "the uninferred-RHS variant is defined for spin subsystems");
  }
  const CriterionId id = uninferred_rhs
                             ? CriterionId::epr_product_spin_uninf_rhs
                             : (cv ? CriterionId::epr_product_cv
                                   : CriterionId::epr_product_spin);

  const auto table1 = conditional_table(state, b_setting1, binning, a_modes);
  const auto table2 = conditional_table(state, b_setting2, binning, a_modes);
  const double v1 = inferred_variance(table1, a_obs1);
  const double v2 = inferred_variance(table2, a_obs2);
  const auto c = hermitized_commutator(a_obs1, a_obs2);

  double modulus;
  std::map<std::string, std::string> metadata;
  if (uninferred_rhs) {
    const DensityMatrix reduced =
        reduce_to_subsystem(state, Subsystem::a, a_modes);
    modulus = std::abs(expectation(reduced, c));
    metadata["rhs_variant"] = "unconditional";
  } else if (c_setting) {
    const auto table_c = conditional_table(state, *c_setting, binning, a_modes);
    modulus = inferred_mean_modulus(table_c, c);
    metadata["c_setting"] = c_setting->label();
  } else {
    modulus = inferred_mean_modulus(table1, c);
    metadata["c_setting"] = b_setting1.label();
  }

  const double lhs = v1 * v2;
  const double rhs = modulus * modulus / 4.0;
  metadata["cutoffs"] = cutoff_list(space_of(state));
  metadata["b_setting_1"] = b_setting1.label();
  metadata["b_setting_2"] = b_setting2.label();
  metadata["inferred_variance_1"] = format_double(v1);
  metadata["inferred_variance_2"] = format_double(v2);
  metadata["inferred_modulus"] = format_double(modulus);
  auto report = make_report(id, lhs, rhs, Method::analytic, 0.0, std::nullopt,
                            std::move(metadata));
  annotate_table(report.metadata, table1, binning, "");
  return report;
}

CriterionReport epr_sum_report(const AnyState& state,
                               const std::vector<Observable>& a_observables,
                               const std::vector<Observable>& b_settings,
                               double bound_d,
                               const std::optional<BinningSpec>& binning,
                               int a_modes) {
  if (a_observables.empty() || a_observables.size() != b_settings.size()) {
    throw std::invalid_argument(
        "epr_sum_report needs matching nonempty observable and setting lists");
  }
  if (!(bound_d > 0.0)) {
    throw std::invalid_argument("epr_sum_report needs a positive bound D");
  }
  double lhs = 0.0;
  std::map<std::string, std::string> metadata;
  std::string terms;
  for (std::size_t i = 0; i < a_observables.size(); ++i) {
    const auto table = conditional_table(state, b_settings[i], binning, a_modes);
    const double v = inferred_variance(table, a_observables[i]);
    lhs += v;
    if (i) terms += ";";
    terms += format_double(v);
  }
  metadata["cutoffs"] = cutoff_list(space_of(state));
  metadata["terms"] = terms;
  metadata["binning"] = binning_descriptor(binning);
  return make_report(CriterionId::epr_sum_spin, lhs, bound_d, Method::analytic,
                     0.0, std::nullopt, std::move(metadata));
}

double spin_sum_bound(double j) {
  if (!(j > 0.0)) throw std::invalid_argument("spin_sum_bound needs j > 0");
  return j / 2.0;
}

double mr_bound(double S) {
  if (!(S > 0.0)) throw std::invalid_argument("mr_bound needs S > 0");
  return 4.0 / (S * S);
}

CriterionReport mr_bound_report(const AnyState& state, double S) {
  const SpaceDescriptor& space = space_of(state);
  if (space.kind() != SpaceKind::fock || space.mode_count() != 1) {
    throw std::invalid_argument("mr_bound_report needs a single-mode state");
  }
  const double vp = variance(state, quadrature_op(space, 0, M_PI / 2.0));
  std::map<std::string, std::string> metadata;
  metadata["S"] = format_double(S);
  metadata["cutoffs"] = cutoff_list(space);
  return make_report(CriterionId::mr_bound, vp, mr_bound(S), Method::analytic,
                     0.0, std::nullopt, std::move(metadata));
}

}  // namespace sscope
