#include "sscope/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "sscope/rng.hpp"

namespace sscope {

namespace {

constexpr std::uint64_t kOutcomeStream = 0;
constexpr std::uint64_t kNoiseStreamA = 1;
constexpr std::uint64_t kNoiseStreamB = 2;
constexpr std::uint64_t kBootstrapStreamBase = 1000;
constexpr int kBootstrapRounds = 200;
constexpr double kPmfTol = 1e-8;

using RowMajorMatrix =
    Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// --- joint distribution ------------------------------------------------------

// Joint outcome pmf over (A eigenvector, B eigenvector) pairs, flattened
// A-major, from the Born rule.
std::vector<double> joint_pmf(const AnyState& state, const Matrix& ua,
                              const Matrix& vb) {
  const Index na = ua.cols();
  const Index nb = vb.cols();
  std::vector<double> pmf(static_cast<std::size_t>(na * nb));
  if (is_pure(state)) {
    const StateVector& psi = std::get<StateVector>(state);
    Eigen::Map<const RowMajorMatrix> m(psi.amplitudes().data(), na, nb);
    const Matrix t = ua.adjoint() * m * vb.conjugate();
    for (Index i = 0; i < na; ++i)
      for (Index j = 0; j < nb; ++j)
        pmf[static_cast<std::size_t>(i * nb + j)] = std::norm(t(i, j));
  } else {
    const DensityMatrix& rho = std::get<DensityMatrix>(state);
    const Matrix w = kron(ua, vb);
    const Vector diag = (w.adjoint() * rho.matrix() * w).diagonal();
    for (std::size_t k = 0; k < pmf.size(); ++k) pmf[k] = diag(static_cast<Index>(k)).real();
  }
  double total = 0.0;
  for (double& p : pmf) {
    if (p < 0.0) p = 0.0;
    total += p;
  }
  if (std::abs(total - 1.0) > kPmfTol) {
    throw NumericalError("joint outcome distribution sums to " +
                         format_double(total) + ", expected 1");
  }
  for (double& p : pmf) p /= total;
  return pmf;
}

// --- binning -----------------------------------------------------------------

struct BinEdges {
  double lo = 0.0;
  double width = 0.0;  // 0 collapses everything into one bin
  std::size_t count = 1;
};

std::size_t bin_of(const BinEdges& edges, double value) {
  if (edges.count <= 1 || edges.width <= 0.0) return 0;
  const double t = std::floor((value - edges.lo) / edges.width);
  if (t <= 0.0) return 0;
  const std::size_t k = static_cast<std::size_t>(t);
  return k >= edges.count ? edges.count - 1 : k;
}

BinEdges make_edges(const std::vector<double>& b,
                    const std::optional<double>& bin_width) {
  const auto [mn_it, mx_it] = std::minmax_element(b.begin(), b.end());
  const double lo = *mn_it;
  const double range = *mx_it - lo;
  if (bin_width) {
    if (!(*bin_width > 0.0)) {
      throw std::invalid_argument("bin_width must be positive");
    }
    if (range <= 0.0) return {lo, 0.0, 1};
    const auto count =
        static_cast<std::size_t>(std::floor(range / *bin_width)) + 1;
    return {lo, *bin_width, count};
  }
  // Default policy: range/sqrt(n) bins, widened until every bin expects at
  // least 50 samples under a uniform split.
  const double n = static_cast<double>(b.size());
  const double target = std::floor(std::min(std::sqrt(n), n / 50.0));
  if (target < 1.0) {
    throw NumericalError(
        "default binning policy needs at least 50 samples, record has " +
        std::to_string(b.size()) + "; pass an explicit bin_width");
  }
  if (range <= 0.0) return {lo, 0.0, 1};
  return {lo, range / target, static_cast<std::size_t>(target)};
}

// --- single-pass accumulators --------------------------------------------------

struct BinAccum {
  std::size_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;
};

void accumulate(BinAccum& acc, double x) {
  ++acc.count;
  const double d = x - acc.mean;
  acc.mean += d / static_cast<double>(acc.count);
  acc.m2 += d * (x - acc.mean);
}

struct BinnedReduction {
  double value = 0.0;
  double dropped_mass = 0.0;
  std::size_t bins_used = 0;
};

// Frequency-weighted average of unbiased within-bin variances over bins with
// at least two samples, renormalized over the kept mass.
BinnedReduction reduce_inferred_variance(const std::vector<BinAccum>& bins,
                                         std::size_t total) {
  BinnedReduction out;
  std::size_t kept = 0;
  double acc = 0.0;
  std::size_t dropped = 0;
  for (const auto& bin : bins) {
    if (bin.count >= 2) {
      kept += bin.count;
      acc += static_cast<double>(bin.count) * bin.m2 /
             static_cast<double>(bin.count - 1);
      ++out.bins_used;
    } else {
      dropped += bin.count;
    }
  }
  if (kept == 0) {
    throw NumericalError(
        "every bin holds fewer than two samples; widen bin_width");
  }
  out.value = acc / static_cast<double>(kept);
  out.dropped_mass = static_cast<double>(dropped) / static_cast<double>(total);
  return out;
}

BinnedReduction reduce_inferred_modulus(const std::vector<BinAccum>& bins,
                                        std::size_t total) {
  BinnedReduction out;
  std::size_t kept = 0;
  double acc = 0.0;
  std::size_t dropped = 0;
  for (const auto& bin : bins) {
    if (bin.count >= 2) {
      kept += bin.count;
      acc += static_cast<double>(bin.count) * std::abs(bin.mean);
      ++out.bins_used;
    } else {
      dropped += bin.count;
    }
  }
  if (kept == 0) {
    throw NumericalError(
        "every bin holds fewer than two samples; widen bin_width");
  }
  out.value = acc / static_cast<double>(kept);
  out.dropped_mass = static_cast<double>(dropped) / static_cast<double>(total);
  return out;
}

enum class Role {
  inferred_variance,
  inferred_modulus,
  plain_variance,
  plain_mean,
};

bool is_binned(Role role) {
  return role == Role::inferred_variance || role == Role::inferred_modulus;
}

// One statistic from one record, optionally over a bootstrap resample.
double eval_role(Role role, const SampleRecord& record, const BinEdges& edges,
                 CounterRng* resampler, BinnedReduction* reduction) {
  const std::size_t n = record.n();
  std::vector<BinAccum> bins;
  BinAccum plain;
  if (is_binned(role)) bins.resize(edges.count);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t idx =
        resampler ? static_cast<std::size_t>(resampler->below(n)) : k;
    if (is_binned(role)) {
      accumulate(bins[bin_of(edges, record.b[idx])], record.a[idx]);
    } else {
      accumulate(plain, record.a[idx]);
    }
  }
  switch (role) {
    case Role::inferred_variance: {
      const auto red = reduce_inferred_variance(bins, n);
      if (reduction) *reduction = red;
      return red.value;
    }
    case Role::inferred_modulus: {
      const auto red = reduce_inferred_modulus(bins, n);
      if (reduction) *reduction = red;
      return red.value;
    }
    case Role::plain_variance:
      if (plain.count < 2) {
        throw NumericalError("variance needs at least two samples");
      }
      return plain.m2 / static_cast<double>(plain.count - 1);
    case Role::plain_mean:
      if (plain.count == 0) throw NumericalError("record is empty");
      return plain.mean;
  }
  return 0.0;
}

// --- per-criterion record layout ---------------------------------------------

struct RoleLayout {
  std::vector<Role> roles;
  const char* names;
};

RoleLayout role_layout(CriterionId id, std::size_t record_count) {
  using R = Role;
  switch (id) {
    case CriterionId::cv_sscopic:
      return {{R::plain_variance}, "[p variance record]"};
    case CriterionId::spin_sscopic:
      return {{R::plain_variance, R::plain_mean},
              "[J_Y variance record, J_Z mean record]"};
    case CriterionId::cv_sscopic_inferred:
      return {{R::inferred_variance}, "[B-conditioned p record]"};
    case CriterionId::spin_sscopic_inferred:
      return {{R::inferred_variance, R::plain_mean},
              "[B-conditioned J_Y record, J_Z mean record]"};
    case CriterionId::theorem1_cv:
      return {{R::plain_variance, R::inferred_variance},
              "[A1 variance record, B-conditioned A2 record]"};
    case CriterionId::theorem1_spin:
      return {{R::plain_variance, R::inferred_variance, R::inferred_modulus},
              "[A1 variance record, B-conditioned A2 record, B-conditioned "
              "commutator record]"};
    case CriterionId::epr_product_cv:
      return {{R::inferred_variance, R::inferred_variance},
              "[x inference record, p inference record]"};
    case CriterionId::epr_product_spin:
      return {{R::inferred_variance, R::inferred_variance,
               R::inferred_modulus},
              "[J_X inference record, J_Y inference record, commutator "
              "inference record]"};
    case CriterionId::epr_product_spin_uninf_rhs:
      return {{R::inferred_variance, R::inferred_variance, R::plain_mean},
              "[J_X inference record, J_Y inference record, commutator mean "
              "record]"};
    case CriterionId::epr_sum_spin:
      return {std::vector<Role>(std::max<std::size_t>(record_count, 1),
                                R::inferred_variance),
              "[one inference record per observable]"};
    case CriterionId::mr_bound:
      return {{R::plain_variance}, "[p variance record]"};
  }
  throw std::invalid_argument("unknown criterion id");
}

struct Combined {
  double lhs = 0.0;
  double rhs = 0.0;
  std::optional<double> s_min;
};

double size_from_variance(double numerator, double v) {
  return v > 0.0 ? numerator / std::sqrt(v)
                 : std::numeric_limits<double>::infinity();
}

Combined combine(CriterionId id, const std::vector<double>& x,
                 const EstimateOptions& options) {
  switch (id) {
    case CriterionId::cv_sscopic:
    case CriterionId::cv_sscopic_inferred:
      return {x[0], 1.0, size_from_variance(2.0, x[0])};
    case CriterionId::spin_sscopic:
    case CriterionId::spin_sscopic_inferred:
      return {x[0], x[1] * x[1],
              size_from_variance(std::abs(x[1]), x[0])};
    case CriterionId::theorem1_cv:
      return {std::sqrt(std::max(x[0], 0.0) * std::max(x[1], 0.0)), 1.0,
              std::nullopt};
    case CriterionId::theorem1_spin:
      return {std::sqrt(std::max(x[0], 0.0) * std::max(x[1], 0.0)), x[2] / 2.0,
              std::nullopt};
    case CriterionId::epr_product_cv:
      return {x[0] * x[1], 1.0, std::nullopt};
    case CriterionId::epr_product_spin:
    case CriterionId::epr_product_spin_uninf_rhs:
      return {x[0] * x[1], x[2] * x[2] / 4.0, std::nullopt};
    case CriterionId::epr_sum_spin: {
      double sum = 0.0;
      for (const double v : x) sum += v;
      return {sum, options.bound_d, std::nullopt};
    }
    case CriterionId::mr_bound:
      return {x[0], mr_bound(options.extent_s), std::nullopt};
  }
  throw std::invalid_argument("unknown criterion id");
}

}  // namespace

// --- sampling ------------------------------------------------------------------

SampleRecord sample_joint(const AnyState& state, const Observable& a_observable,
                          const Observable& b_observable, std::size_t n,
                          std::uint64_t seed, NoiseSpec noise, int a_modes) {
  if (n < 1) throw std::invalid_argument("sample_joint needs n >= 1");
  if (noise.sigma_a < 0.0 || noise.sigma_b < 0.0) {
    throw std::invalid_argument("noise sigmas must be nonnegative");
  }
  const SpaceDescriptor& space = space_of(state);
  const SpaceDescriptor a_space = subsystem_space(space, Subsystem::a, a_modes);
  const SpaceDescriptor b_space = subsystem_space(space, Subsystem::b, a_modes);
  if (a_observable.space() != a_space || b_observable.space() != b_space) {
    throw std::invalid_argument(
        "sample_joint observables must act on the disjoint A and B "
        "subsystem spaces");
  }

  Eigen::SelfAdjointEigenSolver<Matrix> es_a(a_observable.matrix());
  Eigen::SelfAdjointEigenSolver<Matrix> es_b(b_observable.matrix());
  const auto pmf = joint_pmf(state, es_a.eigenvectors(), es_b.eigenvectors());

  std::vector<double> cum(pmf.size());
  double running = 0.0;
  for (std::size_t k = 0; k < pmf.size(); ++k) {
    running += pmf[k];
    cum[k] = running;
  }
  cum.back() = 1.0;

  SampleRecord record;
  record.setting = a_observable.label() + " | " + b_observable.label();
  record.seed = seed;
  record.noise = noise;
  record.a.reserve(n);
  record.b.reserve(n);

  const Index nb = b_space.total_dim();
  CounterRng outcomes(seed, kOutcomeStream);
  CounterRng noise_a(seed, kNoiseStreamA);
  CounterRng noise_b(seed, kNoiseStreamB);
  for (std::size_t k = 0; k < n; ++k) {
    const double u = outcomes.uniform();
    const auto it = std::upper_bound(cum.begin(), cum.end(), u);
    const auto flat = static_cast<Index>(it - cum.begin());
    double oa = es_a.eigenvalues()(flat / nb);
    double ob = es_b.eigenvalues()(flat % nb);
    if (noise.sigma_a > 0.0) oa += noise.sigma_a * noise_a.normal();
    if (noise.sigma_b > 0.0) ob += noise.sigma_b * noise_b.normal();
    record.a.push_back(oa);
    record.b.push_back(ob);
  }
  return record;
}

// --- serialization ---------------------------------------------------------------

std::string serialize(const SampleRecord& record) {
  std::ostringstream out;
  out << "setting " << record.setting << "\n";
  out << "seed " << record.seed << "\n";
  out << "n " << record.n() << "\n";
  out << "noise " << format_double(record.noise.sigma_a) << " "
      << format_double(record.noise.sigma_b) << "\n";
  for (std::size_t k = 0; k < record.n(); ++k) {
    out << format_double(record.a[k]) << " " << format_double(record.b[k])
        << "\n";
  }
  return out.str();
}

SampleRecord parse_sample_record(const std::string& text) {
  const auto fail = [](const std::string& why) -> void {
    throw std::invalid_argument("sample record parse: " + why);
  };
  std::istringstream in(text);
  std::string line;
  SampleRecord record;

  if (!std::getline(in, line) || line.rfind("setting ", 0) != 0) {
    fail("missing 'setting' header");
  }
  record.setting = line.substr(8);

  if (!std::getline(in, line) || line.rfind("seed ", 0) != 0) {
    fail("missing 'seed' header");
  }
  std::size_t count = 0;
  try {
    record.seed = std::stoull(line.substr(5));
    if (!std::getline(in, line) || line.rfind("n ", 0) != 0) {
      fail("missing 'n' header");
    }
    count = std::stoull(line.substr(2));
  } catch (const std::invalid_argument&) {
    fail("malformed integer header");
  } catch (const std::out_of_range&) {
    fail("header value out of range");
  }
  if (count < 1) fail("n must be >= 1");

  if (!std::getline(in, line) || line.rfind("noise ", 0) != 0) {
    fail("missing 'noise' header");
  }
  {
    std::istringstream row(line.substr(6));
    if (!(row >> record.noise.sigma_a >> record.noise.sigma_b)) {
      fail("malformed noise header");
    }
  }

  record.a.reserve(count);
  record.b.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    if (!std::getline(in, line)) fail("fewer outcome rows than n");
    std::istringstream row(line);
    double oa = 0.0;
    double ob = 0.0;
    if (!(row >> oa >> ob)) fail("malformed outcome row");
    record.a.push_back(oa);
    record.b.push_back(ob);
  }
  return record;
}

// --- estimation -------------------------------------------------------------------

VarianceEstimate estimate_inferred_variance(const SampleRecord& record,
                                            std::optional<double> bin_width) {
  if (record.n() == 0) throw std::invalid_argument("record is empty");
  const BinEdges edges = make_edges(record.b, bin_width);

  VarianceEstimate out;
  BinnedReduction reduction;
  out.value =
      eval_role(Role::inferred_variance, record, edges, nullptr, &reduction);
  out.dropped_mass = reduction.dropped_mass;
  out.bins_used = reduction.bins_used;
  out.bin_width = edges.width;

  double sum = 0.0;
  double sum_sq = 0.0;
  int used = 0;
  for (int t = 0; t < kBootstrapRounds; ++t) {
    CounterRng resampler(record.seed, kBootstrapStreamBase + t);
    try {
      const double v =
          eval_role(Role::inferred_variance, record, edges, &resampler, nullptr);
      sum += v;
      sum_sq += v * v;
      ++used;
    } catch (const NumericalError&) {
      // A resample can starve every bin; skip the round.
    }
  }
  if (used >= 2) {
    const double mean = sum / used;
    out.ci = std::sqrt(std::max(0.0, (sum_sq - used * mean * mean) / (used - 1)));
  }
  return out;
}

CriterionReport estimate_criterion(const std::vector<SampleRecord>& records,
                                   CriterionId id,
                                   const EstimateOptions& options) {
  const RoleLayout layout = role_layout(id, records.size());
  if (records.size() != layout.roles.size()) {
    throw std::invalid_argument(
        std::string("estimate_criterion ") + to_string(id) +
        " missing statistic: needs records " + layout.names + ", got " +
        std::to_string(records.size()));
  }
  if (id == CriterionId::epr_sum_spin && !(options.bound_d > 0.0)) {
    throw std::invalid_argument(
        "estimate_criterion epr_sum_spin missing statistic: positive bound D "
        "(options.bound_d)");
  }
  if (id == CriterionId::mr_bound && !(options.extent_s > 0.0)) {
    throw std::invalid_argument(
        "estimate_criterion mr_bound missing statistic: positive extent S "
        "(options.extent_s)");
  }
  for (const auto& record : records) {
    if (record.n() == 0) throw std::invalid_argument("record is empty");
  }

  std::vector<BinEdges> edges(records.size());
  for (std::size_t r = 0; r < records.size(); ++r) {
    if (is_binned(layout.roles[r])) {
      edges[r] = make_edges(records[r].b, options.bin_width);
    }
  }

  std::map<std::string, std::string> metadata;
  std::vector<double> point(records.size());
  for (std::size_t r = 0; r < records.size(); ++r) {
    BinnedReduction reduction;
    point[r] = eval_role(layout.roles[r], records[r], edges[r], nullptr,
                         &reduction);
    const std::string suffix = "_" + std::to_string(r);
    metadata["setting" + suffix] = records[r].setting;
    metadata["n" + suffix] = std::to_string(records[r].n());
    if (is_binned(layout.roles[r])) {
      metadata["bin_width" + suffix] = format_double(edges[r].width);
      metadata["bins" + suffix] = std::to_string(reduction.bins_used);
      metadata["dropped_mass" + suffix] = format_double(reduction.dropped_mass);
    }
  }
  const Combined center = combine(id, point, options);

  double sum = 0.0;
  double sum_sq = 0.0;
  int used = 0;
  for (int t = 0; t < kBootstrapRounds; ++t) {
    try {
      std::vector<double> x(records.size());
      for (std::size_t r = 0; r < records.size(); ++r) {
        CounterRng resampler(records[r].seed, kBootstrapStreamBase + t);
        x[r] = eval_role(layout.roles[r], records[r], edges[r], &resampler,
                         nullptr);
      }
      const Combined round = combine(id, x, options);
      const double d = round.lhs - round.rhs;
      sum += d;
      sum_sq += d * d;
      ++used;
    } catch (const NumericalError&) {
    }
  }
  double ci = 0.0;
  if (used >= 2) {
    const double mean = sum / used;
    ci = std::sqrt(std::max(0.0, (sum_sq - used * mean * mean) / (used - 1)));
  }
  metadata["bootstrap_rounds"] = std::to_string(used);
  if (id == CriterionId::theorem1_cv || id == CriterionId::epr_product_cv) {
    metadata["rhs_source"] = "canonical commutator, modulus 2";
  }

  auto report = make_report(id, center.lhs, center.rhs, Method::sampled, ci,
                            center.s_min, std::move(metadata));
  return report;
}

}  // namespace sscope
