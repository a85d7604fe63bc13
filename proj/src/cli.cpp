#include "sscope/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sscope/criteria.hpp"
#include "sscope/oracles.hpp"
#include "sscope/sampling.hpp"
#include "sscope/states.hpp"

namespace sscope {
namespace {

using ordered_json = nlohmann::ordered_json;

// Fixed default seed for every stochastic subcommand; never time-based.
constexpr std::uint64_t kDefaultSeed = 12345;
constexpr int kSchemaVersion = 1;

// Relative agreement required between a criterion evaluated at the working
// cutoff and at 1.25x the cutoff before the analytic result is trusted.
// The state builder already caps the discarded amplitude mass at 1e-8; a
// criterion value can lag that by a factor of (cutoff + 1) through the
// truncated commutator, so the backstop gate sits at 1e-5.
constexpr double kTruncationGate = 1e-5;

// Shortest decimal round-trip representation; shared by CSV cells, report
// metadata and canonical state strings so reruns are byte-identical.
std::string num_str(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// --- state mini-language ------------------------------------------------------

// Intermediate form of a state spec: keeps the raw key/value pairs so sweeps
// can override one key before the StateSpec is assembled.
struct StateFields {
  std::string name;
  std::map<std::string, double> kv;
};

double parse_number_field(const std::string& key, const std::string& text) {
  double v = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  const auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc{} || res.ptr != end) {
    throw std::invalid_argument("state spec: key '" + key +
                                "' needs a number, got '" + text + "'");
  }
  return v;
}

StateFields parse_state_text(const std::string& text) {
  if (text.empty()) throw std::invalid_argument("empty state spec");
  StateFields fields;
  const auto colon = text.find(':');
  fields.name = text.substr(0, colon);
  if (colon == std::string::npos) return fields;

  std::string body = text.substr(colon + 1);
  std::stringstream stream(body);
  std::string item;
  while (std::getline(stream, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw std::invalid_argument("state spec: expected key=value, got '" +
                                  item + "'");
    }
    const std::string key = item.substr(0, eq);
    if (fields.kv.count(key)) {
      throw std::invalid_argument("state spec: duplicate key '" + key + "'");
    }
    fields.kv[key] = parse_number_field(key, item.substr(eq + 1));
  }
  return fields;
}

StateFields parse_state_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("state file not found: " + path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument("state file " + path + ": " + e.what());
  }
  if (!doc.is_object() || !doc.contains("name") || !doc["name"].is_string()) {
    throw std::invalid_argument("state file " + path +
                                ": expected {\"name\": ..., \"params\": {...}}");
  }
  StateFields fields;
  fields.name = doc["name"].get<std::string>();
  if (doc.contains("params")) {
    if (!doc["params"].is_object()) {
      throw std::invalid_argument("state file " + path +
                                  ": \"params\" must be an object of numbers");
    }
    for (const auto& [key, value] : doc["params"].items()) {
      if (!value.is_number()) {
        throw std::invalid_argument("state file " + path + ": param '" + key +
                                    "' must be a number");
      }
      fields.kv[key] = value.get<double>();
    }
  }
  return fields;
}

Index index_field(const std::string& name, double v, Index lo) {
  if (!std::isfinite(v) || v != std::floor(v) || v < static_cast<double>(lo)) {
    throw std::invalid_argument("state spec: '" + name +
                                "' must be an integer >= " + std::to_string(lo));
  }
  return static_cast<Index>(v);
}

// Builds the declarative spec, consuming exactly the keys the state kind
// understands and rejecting anything left over.
StateSpec spec_from_fields(const StateFields& fields) {
  std::map<std::string, double> kv = fields.kv;
  auto take = [&kv](const char* key) -> std::optional<double> {
    const auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    const double v = it->second;
    kv.erase(it);
    return v;
  };
  auto need = [&take, &fields](const char* key) {
    const auto v = take(key);
    if (!v) {
      throw std::invalid_argument("state '" + fields.name + "' needs " + key +
                                  "=<value>");
    }
    return *v;
  };

  StateSpec spec;
  bool fock_kind = true;
  if (fields.name == "vacuum") {
    spec = StateSpec::vacuum();
  } else if (fields.name == "coherent") {
    const double re = need("alpha");
    spec = StateSpec::coherent(Complex(re, take("alpha_im").value_or(0.0)));
  } else if (fields.name == "number") {
    spec = StateSpec::number(index_field("n", need("n"), 0));
  } else if (fields.name == "squeezed") {
    spec = StateSpec::squeezed(need("r"));
  } else if (fields.name == "tmss") {
    spec = StateSpec::tmss(need("r"));
  } else if (fields.name == "spin_coherent") {
    const double j = need("j");
    const double theta = take("theta").value_or(0.0);
    spec = StateSpec::spin_coherent(j, theta, take("phi").value_or(0.0));
    fock_kind = false;
  } else if (fields.name == "singlet") {
    spec = StateSpec::singlet();
    fock_kind = false;
  } else {
    throw std::invalid_argument(
        "unknown state '" + fields.name +
        "' (known: vacuum, coherent, number, squeezed, tmss, spin_coherent, "
        "singlet)");
  }

  if (fock_kind) {
    if (const auto c = take("cutoff")) {
      spec = spec.with_cutoff(index_field("cutoff", *c, 1));
    }
  }
  if (!kv.empty()) {
    throw std::invalid_argument("state spec: unknown key '" +
                                kv.begin()->first + "' for state '" +
                                fields.name + "'");
  }
  return spec;
}

std::string canonical_state(const StateFields& fields) {
  std::string text = fields.name;
  char sep = ':';
  for (const auto& [key, value] : fields.kv) {
    text += sep;
    text += key + "=" + num_str(value);
    sep = ',';
  }
  return text;
}

// --- per-criterion defaults -----------------------------------------------------

struct SpinPair {
  SpinOps a;
  SpinOps b;
  double j_a = 0.0;
};

SpinPair spin_pair_ops(const SpaceDescriptor& space) {
  if (space.kind() != SpaceKind::spin || space.mode_count() != 2) {
    throw std::invalid_argument(
        "this criterion needs a bipartite spin state (two ladders), e.g. "
        "singlet");
  }
  const SpaceDescriptor a_space = subsystem_space(space, Subsystem::a);
  const SpaceDescriptor b_space = subsystem_space(space, Subsystem::b);
  const double j_a = (a_space.total_dim() - 1) / 2.0;
  const double j_b = (b_space.total_dim() - 1) / 2.0;
  return {spin_ladder_ops(j_a), spin_ladder_ops(j_b), j_a};
}

// Spin operators for one unpartitioned system: a single ladder directly, a
// two-mode Fock space through the Schwinger construction.
SpinOps single_system_spin_ops(const SpaceDescriptor& space) {
  if (space.kind() == SpaceKind::spin && space.mode_count() == 1) {
    return spin_ladder_ops((space.total_dim() - 1) / 2.0);
  }
  if (space.kind() == SpaceKind::fock && space.mode_count() == 2) {
    return schwinger_spin_ops(space, 0, 1);
  }
  throw std::invalid_argument(
      "this criterion needs one spin ladder or one two-mode Fock system");
}

void require_single_fock(const SpaceDescriptor& space, const char* what) {
  if (space.kind() != SpaceKind::fock || space.mode_count() != 1) {
    throw std::invalid_argument(std::string(what) +
                                " needs a single-mode Fock state");
  }
}

// Pads a single-mode Fock state with an uncorrelated B-side vacuum so the
// bipartite machinery applies; inference then reduces to plain moments.
AnyState pad_with_vacuum_b(const AnyState& state) {
  const SpaceDescriptor& space = space_of(state);
  const Index d = space.mode_dims()[0];
  const SpaceDescriptor full = fock_space({d, d});
  if (is_pure(state)) {
    const auto& psi = std::get<StateVector>(state);
    Vector amp = Vector::Zero(d * d);
    for (Index i = 0; i < d; ++i) amp(i * d) = psi.amplitudes()(i);
    return StateVector(full, amp);
  }
  Matrix vac = Matrix::Zero(d, d);
  vac(0, 0) = 1.0;
  return DensityMatrix(full, kron(to_density(state).matrix(), vac));
}

AnyState ensure_cv_pair(AnyState state, bool* padded) {
  const SpaceDescriptor& space = space_of(state);
  if (space.kind() != SpaceKind::fock) {
    throw std::invalid_argument(
        "this criterion needs a continuous-variable (Fock) state");
  }
  if (space.mode_count() == 1) {
    if (padded) *padded = true;
    return pad_with_vacuum_b(state);
  }
  if (space.mode_count() != 2) {
    throw std::invalid_argument(
        "this criterion needs a one- or two-mode Fock state");
  }
  return state;
}

// bins_flag: <0 default (exact spectral outcomes), 0 forced spectral,
// >0 marginal-adapted bins of that count.
std::optional<BinningSpec> binning_for(const AnyState& state,
                                       const Observable& b_obs,
                                       int bins_flag) {
  if (bins_flag <= 0) return std::nullopt;
  BinningSpec spec = default_quadrature_binning(state, b_obs);
  spec.bin_count = bins_flag;
  return spec;
}

struct EvalOptions {
  int bins_flag = -1;
  double bound_d = 0.0;   // epr_sum_spin; <= 0 selects spin_sum_bound(j_A)
  double extent_s = 0.0;  // mr_bound target extent S
};

CriterionReport evaluate_with_defaults(const AnyState& input, CriterionId id,
                                       const EvalOptions& options,
                                       bool* padded = nullptr) {
  const SpaceDescriptor& space = space_of(input);
  switch (id) {
    case CriterionId::cv_sscopic: {
      require_single_fock(space, "cv_sscopic");
      const double v = variance(input, quadrature_op(space, 0, M_PI / 2.0));
      return cv_superposition_size(v);
    }
    case CriterionId::spin_sscopic: {
      const SpinOps ops = single_system_spin_ops(space);
      return spin_superposition_size(variance(input, ops.jy),
                                     expectation(input, ops.jz));
    }
    case CriterionId::cv_sscopic_inferred: {
      const AnyState state = ensure_cv_pair(input, padded);
      const SpaceDescriptor b_space =
          subsystem_space(space_of(state), Subsystem::b);
      const Observable p_b = quadrature_op(b_space, 0, M_PI / 2.0);
      return cv_superposition_size_inferred(
          state, p_b, binning_for(state, p_b, options.bins_flag));
    }
    case CriterionId::spin_sscopic_inferred: {
      const SpinPair pair = spin_pair_ops(space);
      return spin_superposition_size_inferred(
          input, pair.b.jy, binning_for(input, pair.b.jy, options.bins_flag));
    }
    case CriterionId::theorem1_cv: {
      const AnyState state = ensure_cv_pair(input, padded);
      const SpaceDescriptor a_space =
          subsystem_space(space_of(state), Subsystem::a);
      const SpaceDescriptor b_space =
          subsystem_space(space_of(state), Subsystem::b);
      const Observable p_b = quadrature_op(b_space, 0, M_PI / 2.0);
      return theorem1_report(state, quadrature_op(a_space, 0, 0.0),
                             quadrature_op(a_space, 0, M_PI / 2.0), p_b,
                             binning_for(state, p_b, options.bins_flag));
    }
    case CriterionId::theorem1_spin: {
      const SpinPair pair = spin_pair_ops(space);
      return theorem1_report(input, pair.a.jx, pair.a.jy, pair.b.jy,
                             binning_for(input, pair.b.jy, options.bins_flag));
    }
    case CriterionId::epr_product_cv: {
      const AnyState state = ensure_cv_pair(input, padded);
      const SpaceDescriptor a_space =
          subsystem_space(space_of(state), Subsystem::a);
      const SpaceDescriptor b_space =
          subsystem_space(space_of(state), Subsystem::b);
      const Observable x_b = quadrature_op(b_space, 0, 0.0);
      return epr_product_report(state, quadrature_op(a_space, 0, 0.0),
                                quadrature_op(a_space, 0, M_PI / 2.0), x_b,
                                quadrature_op(b_space, 0, M_PI / 2.0),
                                binning_for(state, x_b, options.bins_flag));
    }
    case CriterionId::epr_product_spin: {
      const SpinPair pair = spin_pair_ops(space);
      return epr_product_report(
          input, pair.a.jx, pair.a.jy, pair.b.jx, pair.b.jy,
          binning_for(input, pair.b.jx, options.bins_flag), pair.b.jz);
    }
    case CriterionId::epr_product_spin_uninf_rhs: {
      const SpinPair pair = spin_pair_ops(space);
      return epr_product_report(
          input, pair.a.jx, pair.a.jy, pair.b.jx, pair.b.jy,
          binning_for(input, pair.b.jx, options.bins_flag), std::nullopt,
          true);
    }
    case CriterionId::epr_sum_spin: {
      const SpinPair pair = spin_pair_ops(space);
      const double d =
          options.bound_d > 0.0 ? options.bound_d : spin_sum_bound(pair.j_a);
      return epr_sum_report(input, {pair.a.jx, pair.a.jy},
                            {pair.b.jx, pair.b.jy}, d,
                            binning_for(input, pair.b.jx, options.bins_flag));
    }
    case CriterionId::mr_bound: {
      if (options.extent_s <= 0.0) {
        throw std::invalid_argument("mr_bound needs --extent-s > 0");
      }
      require_single_fock(space, "mr_bound");
      return mr_bound_report(input, options.extent_s);
    }
  }
  throw std::invalid_argument("unknown criterion id");
}

double rel_diff(double a, double b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

// Re-evaluates the criterion at 1.25x the working cutoff (exact spectral
// conditioning both times, so only truncation can move the numbers) and
// rejects the run when lhs or rhs has not settled.
void check_truncation(const StateFields& fields, CriterionId id,
                      const EvalOptions& options, CriterionReport* report) {
  const StateSpec spec = spec_from_fields(fields);
  const Index base = resolved_cutoff(spec);
  const Index refined = std::max<Index>(
      base + 4, static_cast<Index>(std::ceil(1.25 * double(base))));

  EvalOptions exact = options;
  exact.bins_flag = 0;
  const CriterionReport coarse =
      evaluate_with_defaults(build(spec.with_cutoff(base)), id, exact);
  const CriterionReport fine =
      evaluate_with_defaults(build(spec.with_cutoff(refined)), id, exact);

  if (rel_diff(coarse.lhs, fine.lhs) > kTruncationGate ||
      rel_diff(coarse.rhs, fine.rhs) > kTruncationGate) {
    throw NumericalError(
        "truncation check failed: lhs " + num_str(coarse.lhs) + " / rhs " +
        num_str(coarse.rhs) + " at cutoff " + std::to_string(base) +
        " moved to lhs " + num_str(fine.lhs) + " / rhs " + num_str(fine.rhs) +
        " at cutoff " + std::to_string(refined) + "; raise the cutoff");
  }
  report->metadata["truncation_check"] =
      "cutoff " + std::to_string(base) + " vs " + std::to_string(refined);
}

CriterionReport evaluate_analytic(const StateFields& fields, CriterionId id,
                                  const EvalOptions& options) {
  const StateSpec spec = spec_from_fields(fields);
  const AnyState state = build(spec);
  bool padded = false;
  CriterionReport report = evaluate_with_defaults(state, id, options, &padded);
  if (space_of(state).kind() == SpaceKind::fock) {
    check_truncation(fields, id, options, &report);
  }
  if (padded) report.metadata["b_side"] = "padded vacuum mode";
  report.metadata["state"] = canonical_state(fields);
  return report;
}

// --- serialization ---------------------------------------------------------------

ordered_json report_to_json(const CriterionReport& report) {
  ordered_json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["criterion_id"] = to_string(report.criterion_id);
  doc["method"] = report.method == Method::analytic ? "analytic" : "sampled";
  doc["lhs"] = report.lhs;
  doc["rhs"] = report.rhs;
  if (std::isfinite(report.ratio)) {
    doc["ratio"] = report.ratio;
  } else {
    doc["ratio"] = nullptr;
  }
  doc["violated"] = report.violated;
  if (report.s_min) {
    doc["s_min"] = *report.s_min;
  } else {
    doc["s_min"] = nullptr;
  }
  doc["ci"] = report.ci;
  doc["tolerance"] = report.tolerance;
  doc["metadata"] = report.metadata;
  return doc;
}

int write_text(const std::string& text, const std::string& path,
               std::ostream& out, std::ostream& err) {
  if (path.empty()) {
    out << text;
    return 0;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) {
    err << "error: cannot open output file: " << path << "\n";
    return 1;
  }
  file << text;
  if (!file) {
    err << "error: short write to " << path << "\n";
    return 1;
  }
  return 0;
}

std::string csv_cell(double v) { return num_str(v); }

std::string sweep_row(double parameter, const CriterionReport& report) {
  std::string row = csv_cell(parameter);
  row += "," + csv_cell(report.lhs);
  row += "," + csv_cell(report.rhs);
  row += "," + csv_cell(report.ratio);
  row += ",";
  if (report.s_min) row += csv_cell(*report.s_min);
  row += report.violated ? ",true" : ",false";
  row += report.method == Method::analytic ? ",analytic" : ",sampled";
  return row + "\n";
}

// --- subcommand argument bags ------------------------------------------------------

struct CriterionArgs {
  std::string state_text;
  std::string state_file;
  std::string id_text;
  int bins = -1;
  double bound_d = 0.0;
  double extent_s = 0.0;
  std::string output;
};

struct SweepArgs {
  CriterionArgs base;
  std::string parameter;
  double from = 0.0;
  double to = 0.0;
  int steps = 1;
};

struct SimulateArgs {
  CriterionArgs base;
  std::uint64_t n = 0;
  std::uint64_t seed = kDefaultSeed;
  double noise_a = 0.0;
  double noise_b = 0.0;
  double bin_width = 0.0;
  std::string records_prefix = "samples";
};

struct OracleArgs {
  std::string id;
  double big_s = 0.0;
  double half_range = 0.0;
  int points = 1024;
  double j = 0.0;
  std::uint64_t n = 500;
  std::uint64_t seed = kDefaultSeed;
  std::string check = "cv";
  std::string output;
};

StateFields load_state(const CriterionArgs& args) {
  if (!args.state_text.empty()) return parse_state_text(args.state_text);
  if (!args.state_file.empty()) return parse_state_file(args.state_file);
  throw std::invalid_argument("one of --state or --state-file is required");
}

CriterionId parse_criterion_id(const std::string& text) {
  const auto id = criterion_id_from_string(text);
  if (!id) throw std::invalid_argument("unknown criterion id: " + text);
  return *id;
}

EvalOptions eval_options(const CriterionArgs& args) {
  EvalOptions options;
  options.bins_flag = args.bins;
  options.bound_d = args.bound_d;
  options.extent_s = args.extent_s;
  return options;
}

// --- subcommands ------------------------------------------------------------------

int cmd_criterion(const CriterionArgs& args, std::ostream& out,
                  std::ostream& err) {
  const StateFields fields = load_state(args);
  const CriterionId id = parse_criterion_id(args.id_text);
  const CriterionReport report =
      evaluate_analytic(fields, id, eval_options(args));
  return write_text(report_to_json(report).dump(2) + "\n", args.output, out,
                    err);
}

int cmd_sweep(const SweepArgs& args, std::ostream& out, std::ostream& err) {
  if (args.steps < 1) throw std::invalid_argument("--steps must be >= 1");
  if (args.parameter.empty()) {
    throw std::invalid_argument("--parameter is required");
  }
  const StateFields base = load_state(args.base);
  const CriterionId id = parse_criterion_id(args.base.id_text);
  const EvalOptions options = eval_options(args.base);

  std::string csv = "parameter,lhs,rhs,ratio,s_min,violated,method\n";
  for (int i = 0; i < args.steps; ++i) {
    const double value =
        args.steps == 1
            ? args.from
            : args.from + (args.to - args.from) * i / (args.steps - 1);
    StateFields fields = base;
    fields.kv[args.parameter] = value;
    csv += sweep_row(value, evaluate_analytic(fields, id, options));
  }
  return write_text(csv, args.base.output, out, err);
}

// One (A observable, B observable) pair per record the estimator expects,
// in the positional order of its per-criterion layout.
std::vector<std::pair<Observable, Observable>> record_plan(
    const AnyState& state, CriterionId id) {
  const SpaceDescriptor& space = space_of(state);
  if (space.kind() == SpaceKind::fock) {
    const SpaceDescriptor a_space = subsystem_space(space, Subsystem::a);
    const SpaceDescriptor b_space = subsystem_space(space, Subsystem::b);
    if (a_space.mode_count() != 1 || b_space.mode_count() != 1) {
      throw std::invalid_argument(
          "simulate needs a two-mode Fock state for this criterion");
    }
    const Observable x_a = quadrature_op(a_space, 0, 0.0);
    const Observable p_a = quadrature_op(a_space, 0, M_PI / 2.0);
    const Observable x_b = quadrature_op(b_space, 0, 0.0);
    const Observable p_b = quadrature_op(b_space, 0, M_PI / 2.0);
    switch (id) {
      case CriterionId::cv_sscopic:
      case CriterionId::mr_bound:
        return {{p_a, x_b}};
      case CriterionId::cv_sscopic_inferred:
        return {{p_a, p_b}};
      case CriterionId::theorem1_cv:
      case CriterionId::epr_product_cv:
        return {{x_a, x_b}, {p_a, p_b}};
      default:
        throw std::invalid_argument(
            "criterion does not apply to a continuous-variable state");
    }
  }

  const SpinPair pair = spin_pair_ops(space);
  switch (id) {
    case CriterionId::spin_sscopic:
    case CriterionId::spin_sscopic_inferred:
      return {{pair.a.jy, pair.b.jy}, {pair.a.jz, pair.b.jy}};
    case CriterionId::theorem1_spin:
      return {{pair.a.jx, pair.b.jy},
              {pair.a.jy, pair.b.jy},
              {pair.a.jz, pair.b.jy}};
    case CriterionId::epr_product_spin:
    case CriterionId::epr_product_spin_uninf_rhs:
      return {{pair.a.jx, pair.b.jx},
              {pair.a.jy, pair.b.jy},
              {pair.a.jz, pair.b.jz}};
    case CriterionId::epr_sum_spin:
      return {{pair.a.jx, pair.b.jx}, {pair.a.jy, pair.b.jy}};
    default:
      throw std::invalid_argument("criterion does not apply to a spin state");
  }
}

int cmd_simulate(const SimulateArgs& args, std::ostream& out,
                 std::ostream& err) {
  if (args.n == 0) throw std::invalid_argument("--n must be >= 1");
  const StateFields fields = load_state(args.base);
  const CriterionId id = parse_criterion_id(args.base.id_text);

  AnyState state = build(spec_from_fields(fields));
  bool padded = false;
  if (space_of(state).kind() == SpaceKind::fock &&
      space_of(state).mode_count() == 1) {
    state = pad_with_vacuum_b(state);
    padded = true;
  }

  const auto plan = record_plan(state, id);
  const NoiseSpec noise{args.noise_a, args.noise_b};
  std::vector<SampleRecord> records;
  records.reserve(plan.size());
  for (std::size_t k = 0; k < plan.size(); ++k) {
    records.push_back(sample_joint(state, plan[k].first, plan[k].second,
                                   args.n, args.seed + k, noise));
    const std::string path =
        args.records_prefix + "_" + std::to_string(k) + ".txt";
    const int rc = write_text(serialize(records.back()), path, out, err);
    if (rc != 0) return rc;
  }

  EstimateOptions options;
  if (args.bin_width > 0.0) options.bin_width = args.bin_width;
  if (id == CriterionId::epr_sum_spin) {
    options.bound_d = args.base.bound_d > 0.0
                          ? args.base.bound_d
                          : spin_sum_bound(spin_pair_ops(space_of(state)).j_a);
  }
  options.extent_s = args.base.extent_s;
  if (id == CriterionId::mr_bound && options.extent_s <= 0.0) {
    throw std::invalid_argument("mr_bound needs --extent-s > 0");
  }

  CriterionReport report = estimate_criterion(records, id, options);
  report.metadata["state"] = canonical_state(fields);
  report.metadata["seed"] = std::to_string(args.seed);
  report.metadata["n"] = std::to_string(args.n);
  report.metadata["records_prefix"] = args.records_prefix;
  report.metadata["records_written"] = std::to_string(plan.size());
  if (padded) report.metadata["b_side"] = "padded vacuum mode";
  return write_text(report_to_json(report).dump(2) + "\n", args.base.output,
                    out, err);
}

ordered_json oracle_json(const std::string& id, double value, double bound,
                         std::map<std::string, std::string> metadata) {
  ordered_json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["oracle_id"] = id;
  doc["value"] = value;
  doc["bound"] = bound;
  doc["pass"] = value >= bound;
  doc["metadata"] = metadata;
  return doc;
}

int cmd_oracle(const OracleArgs& args, std::ostream& out, std::ostream& err) {
  ordered_json doc;
  if (args.id == "support_min_p") {
    if (args.big_s <= 0.0) {
      throw std::invalid_argument("oracle support_min_p needs --S > 0");
    }
    const double half_range =
        args.half_range > 0.0 ? args.half_range : 2.0 * args.big_s;
    const SupportMinimum detail = min_p_variance_details(
        args.big_s, half_range, static_cast<Index>(args.points));
    doc = oracle_json(args.id, detail.value, mr_bound(args.big_s),
                      {{"S", num_str(args.big_s)},
                       {"coarse_value", num_str(detail.coarse_value)},
                       {"half_range", num_str(half_range)},
                       {"points", std::to_string(args.points)}});
  } else if (args.id == "theorem1_sweep") {
    SweepCheck check = SweepCheck::theorem1_cv;
    if (args.check == "spin") {
      check = SweepCheck::theorem1_spin;
    } else if (args.check == "robertson") {
      check = SweepCheck::robertson;
    } else if (args.check != "cv") {
      throw std::invalid_argument("--check must be cv, spin or robertson");
    }
    const double worst = random_state_sweep(args.n, args.seed, check);
    doc = oracle_json(args.id, worst, -1e-8,
                      {{"check", args.check},
                       {"n", std::to_string(args.n)},
                       {"seed", std::to_string(args.seed)}});
  } else if (args.id == "spin_window") {
    if (args.j <= 0.0) {
      throw std::invalid_argument("oracle spin_window needs --j > 0");
    }
    if (args.big_s < 0.0 || args.big_s != std::floor(args.big_s)) {
      throw std::invalid_argument(
          "oracle spin_window needs an integer --S >= 0");
    }
    const double value = min_spin_ratio_on_window(
        args.j, static_cast<int>(args.big_s), args.seed);
    doc = oracle_json(args.id, value, -1e-6,
                      {{"S", num_str(args.big_s)},
                       {"j", num_str(args.j)},
                       {"seed", std::to_string(args.seed)}});
  } else {
    throw std::invalid_argument(
        "unknown oracle id: " + args.id +
        " (known: support_min_p, theorem1_sweep, spin_window)");
  }
  return write_text(doc.dump(2) + "\n", args.output, out, err);
}

void add_state_flags(CLI::App* cmd, CriterionArgs* args) {
  auto* state = cmd->add_option("--state", args->state_text,
                                "inline state spec, name:key=value,...");
  auto* file = cmd->add_option("--state-file", args->state_file,
                               "JSON state spec {\"name\":..., \"params\":{}}");
  state->excludes(file);
  file->excludes(state);
}

void add_criterion_flags(CLI::App* cmd, CriterionArgs* args) {
  cmd->add_option("--id", args->id_text, "criterion id")->required();
  cmd->add_option("--bins", args->bins,
                  "condition on this many marginal-adapted B bins instead of "
                  "exact spectral outcomes");
  cmd->add_option("--bound-d", args->bound_d,
                  "epr_sum_spin bound D (default j_A/2)");
  cmd->add_option("--extent-s", args->extent_s,
                  "superposition extent S for mr_bound");
  cmd->add_option("--output", args->output, "write to file instead of stdout");
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err) {
  CLI::App app{
      "Uncertainty-relation toolkit: superposition-size and EPR criteria "
      "over truncated Fock and spin systems"};
  app.require_subcommand(1);
  app.footer(
      "Exit codes: 0 success (violation is data, not failure), 1 usage or "
      "state error, 2 numerical non-convergence.\n"
      "Default seed: 12345. Reruns of the same command are byte-identical.\n"
      "States: vacuum, coherent:alpha=..., number:n=..., squeezed:r=...,\n"
      "        tmss:r=..., spin_coherent:j=...,theta=...,phi=..., singlet\n"
      "        (Fock states accept cutoff=...; default is the smallest\n"
      "        cutoff keeping the discarded mass below 1e-8.)");

  CriterionArgs criterion_args;
  auto* criterion =
      app.add_subcommand("criterion", "evaluate one criterion analytically");
  add_state_flags(criterion, &criterion_args);
  add_criterion_flags(criterion, &criterion_args);

  SweepArgs sweep_args;
  auto* sweep = app.add_subcommand(
      "sweep", "evaluate one criterion across a state-parameter range (CSV)");
  add_state_flags(sweep, &sweep_args.base);
  add_criterion_flags(sweep, &sweep_args.base);
  sweep->add_option("--parameter", sweep_args.parameter,
                    "state-spec key to sweep")
      ->required();
  sweep->add_option("--from", sweep_args.from, "first value")->required();
  sweep->add_option("--to", sweep_args.to, "last value");
  sweep->add_option("--steps", sweep_args.steps, "number of points (>= 1)")
      ->required();

  SimulateArgs simulate_args;
  auto* simulate = app.add_subcommand(
      "simulate",
      "draw finite samples, write record files, estimate the criterion");
  add_state_flags(simulate, &simulate_args.base);
  add_criterion_flags(simulate, &simulate_args.base);
  simulate->add_option("--n", simulate_args.n, "samples per record")
      ->required();
  simulate->add_option("--seed", simulate_args.seed, "base RNG seed");
  simulate->add_option("--noise-a", simulate_args.noise_a,
                       "additive Gaussian noise sigma on the A outcomes");
  simulate->add_option("--noise-b", simulate_args.noise_b,
                       "additive Gaussian noise sigma on the B outcomes");
  simulate->add_option("--bin-width", simulate_args.bin_width,
                       "estimator bin width override");
  simulate->add_option("--records-out", simulate_args.records_prefix,
                       "record file prefix (writes <prefix>_<k>.txt)");

  OracleArgs oracle_args;
  auto* oracle = app.add_subcommand(
      "oracle", "brute-force bound checks independent of the criteria path");
  oracle->add_option("--id", oracle_args.id,
                     "support_min_p | theorem1_sweep | spin_window")
      ->required();
  oracle->add_option("--S", oracle_args.big_s, "support / window extent");
  oracle->add_option("--half-range", oracle_args.half_range,
                     "grid half-range (default 2S)");
  oracle->add_option("--points", oracle_args.points,
                     "grid points (even, >= 512; refined internally to 2x)");
  oracle->add_option("--j", oracle_args.j, "spin length");
  oracle->add_option("--n", oracle_args.n, "random states to sweep");
  oracle->add_option("--seed", oracle_args.seed, "RNG seed");
  oracle->add_option("--check", oracle_args.check,
                     "theorem1_sweep variant: cv | spin | robertson");
  oracle->add_option("--output", oracle_args.output,
                     "write to file instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (criterion->parsed()) return cmd_criterion(criterion_args, out, err);
    if (sweep->parsed()) return cmd_sweep(sweep_args, out, err);
    if (simulate->parsed()) return cmd_simulate(simulate_args, out, err);
    return cmd_oracle(oracle_args, out, err);
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace sscope
