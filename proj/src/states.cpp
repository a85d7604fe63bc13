#include "sscope/states.hpp"

#include <cmath>
#include <functional>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "sscope/rng.hpp"

namespace sscope {

namespace {

constexpr double kTailTol = 1e-8;
constexpr Index kHardCap = 4096;
constexpr Index kGaussianFloor = 30;

[[noreturn]] void throw_truncation_overflow(double tail, Index n_max) {
  std::ostringstream msg;
  msg << "truncation overflow: discarded amplitude mass " << tail
      << " at cutoff " << n_max << " exceeds tolerance " << kTailTol;
  throw NumericalError(msg.str());
}

void require_finite(double value, const char* what) {
  if (!std::isfinite(value)) {
    throw std::invalid_argument(std::string(what) + " must be finite");
  }
}

// |c_n|^2 of the coherent state, iterated in place. Returns the cumulative
// probability through n_max.
double coherent_mass_through(Complex alpha, Index n_max) {
  double p = std::exp(-std::norm(alpha));
  double cum = p;
  for (Index n = 1; n <= n_max; ++n) {
    p *= std::norm(alpha) / static_cast<double>(n);
    cum += p;
  }
  return cum;
}

// Squeezed-vacuum probability of level 2n follows the ratio
// |c_{2n}/c_{2n-2}|^2 = tanh^2 r (2n-1)/(2n).
double squeezed_mass_through(double r, Index n_max) {
  const double t2 = std::tanh(r) * std::tanh(r);
  double p = 1.0 / std::cosh(r);
  double cum = p;
  for (Index n = 1; 2 * n <= n_max; ++n) {
    p *= t2 * static_cast<double>(2 * n - 1) / static_cast<double>(2 * n);
    cum += p;
  }
  return cum;
}

Index smallest_cutoff(const std::function<double(Index)>& mass_through) {
  for (Index n_max = 1; n_max <= kHardCap; n_max = std::max(n_max + 1, n_max * 5 / 4)) {
    if (1.0 - mass_through(n_max) < kTailTol) {
      // walk back down to the exact threshold
      Index lo = n_max;
      while (lo > 1 && 1.0 - mass_through(lo - 1) < kTailTol) --lo;
      return lo;
    }
  }
  throw_truncation_overflow(1.0 - mass_through(kHardCap), kHardCap);
}

Vector coherent_amplitudes(Complex alpha, Index dim) {
  Vector v(dim);
  v(0) = std::exp(-std::norm(alpha) / 2.0);
  for (Index n = 1; n < dim; ++n) {
    v(n) = v(n - 1) * alpha / std::sqrt(static_cast<double>(n));
  }
  return v;
}

Vector squeezed_amplitudes(double r, Index dim) {
  Vector v = Vector::Zero(dim);
  v(0) = 1.0 / std::sqrt(std::cosh(r));
  const double t = std::tanh(r);
  for (Index n = 1; 2 * n < dim; ++n) {
    v(2 * n) = v(2 * n - 2) * t *
               std::sqrt(static_cast<double>(2 * n - 1) / static_cast<double>(2 * n));
  }
  return v;
}

// TMSS per-mode tail above n_max is exactly tanh(r)^{2(n_max+1)}.
Index tmss_default_cutoff(double r) {
  const double t = std::abs(std::tanh(r));
  if (t == 0.0) return 1;
  Index n_max = static_cast<Index>(std::floor(std::log(kTailTol) / (2.0 * std::log(t))));
  n_max = std::max<Index>(1, n_max);
  while (std::pow(t * t, static_cast<double>(n_max + 1)) >= kTailTol) ++n_max;
  return n_max;
}

StateVector checked_fock_state(Index n_max, Vector amps) {
  if (n_max < 1) throw std::invalid_argument("cutoff must be at least 1");
  const double mass = amps.squaredNorm();
  if (1.0 - mass >= kTailTol) throw_truncation_overflow(1.0 - mass, n_max);
  amps /= amps.norm();
  return StateVector(fock_space({n_max + 1}), std::move(amps));
}

// exp(i scale H) for Hermitian H, via eigendecomposition.
Matrix unitary_exp(const Matrix& hermitian, double scale) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian);
  if (es.info() != Eigen::Success) {
    throw NumericalError("eigendecomposition failed in unitary_exp");
  }
  Vector phases(es.eigenvalues().size());
  for (Index k = 0; k < phases.size(); ++k) {
    phases(k) = std::polar(1.0, scale * es.eigenvalues()(k));
  }
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

StateVector build_spin_coherent(const StateSpec& spec) {
  require_finite(spec.theta, "theta");
  require_finite(spec.phi, "phi");
  const SpinOps ops = spin_ladder_ops(spec.j);
  const Index dim = ops.jz.space().total_dim();
  Vector v = Vector::Zero(dim);
  v(dim - 1) = 1.0;  // |j, j>, basis ascending in m
  v = unitary_exp(ops.jy.matrix(), -spec.theta) * v;
  // J_Z is diagonal, so the azimuthal rotation is a phase per level
  for (Index k = 0; k < dim; ++k) {
    v(k) *= std::polar(1.0, -spec.phi * (-spec.j + static_cast<double>(k)));
  }
  v /= v.norm();
  return StateVector(ops.jz.space(), std::move(v));
}

StateVector build_singlet() {
  const auto space = spin_space({0.5, 0.5});
  Vector v = Vector::Zero(4);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  v(2) = inv_sqrt2;   // |up, down>
  v(1) = -inv_sqrt2;  // |down, up>
  return StateVector(space, v);
}

bool is_fock_kind(StateKind kind) {
  switch (kind) {
    case StateKind::vacuum:
    case StateKind::coherent:
    case StateKind::number:
    case StateKind::squeezed:
    case StateKind::tmss:
      return true;
    default:
      return false;
  }
}

AnyState build_mixture(const StateSpec& spec) {
  if (spec.components.empty()) {
    throw std::invalid_argument("mixture needs at least one component");
  }
  // Branches must end up on one shared space; for Fock branches that means
  // one shared cutoff, taken as the explicit override or the largest branch
  // requirement.
  std::optional<Index> shared = spec.cutoff;
  if (!shared) {
    for (const auto& [weight, branch] : spec.components) {
      (void)weight;
      if (is_fock_kind(branch.kind) || branch.kind == StateKind::mixture) {
        const Index need = resolved_cutoff(branch);
        shared = shared ? std::max(*shared, need) : need;
      }
    }
  }
  std::vector<double> weights;
  std::vector<DensityMatrix> parts;
  weights.reserve(spec.components.size());
  parts.reserve(spec.components.size());
  for (const auto& [weight, branch] : spec.components) {
    StateSpec resolved = branch;
    if (shared && (is_fock_kind(branch.kind) || branch.kind == StateKind::mixture)) {
      resolved.cutoff = *shared;
    }
    weights.push_back(weight);
    parts.push_back(to_density(build(resolved)));
  }
  for (std::size_t i = 1; i < parts.size(); ++i) {
    if (parts[i].space() != parts[0].space()) {
      throw std::invalid_argument("mixture branches resolve to different spaces");
    }
  }
  return DensityMatrix::convex_mixture(weights, parts);
}

}  // namespace

StateSpec StateSpec::vacuum() { return StateSpec{}; }

StateSpec StateSpec::coherent(Complex alpha) {
  StateSpec s;
  s.kind = StateKind::coherent;
  s.alpha = alpha;
  return s;
}

StateSpec StateSpec::number(Index n) {
  if (n < 0) throw std::invalid_argument("photon number must be nonnegative");
  StateSpec s;
  s.kind = StateKind::number;
  s.n = n;
  return s;
}

StateSpec StateSpec::squeezed(double r) {
  require_finite(r, "squeeze parameter r");
  StateSpec s;
  s.kind = StateKind::squeezed;
  s.r = r;
  return s;
}

StateSpec StateSpec::tmss(double r) {
  require_finite(r, "squeeze parameter r");
  StateSpec s;
  s.kind = StateKind::tmss;
  s.r = r;
  return s;
}

StateSpec StateSpec::spin_coherent(double j, double theta, double phi) {
  StateSpec s;
  s.kind = StateKind::spin_coherent;
  s.j = j;
  s.theta = theta;
  s.phi = phi;
  return s;
}

StateSpec StateSpec::singlet() {
  StateSpec s;
  s.kind = StateKind::singlet;
  return s;
}

StateSpec StateSpec::mixture(std::vector<std::pair<double, StateSpec>> components) {
  StateSpec s;
  s.kind = StateKind::mixture;
  s.components = std::move(components);
  return s;
}

StateSpec StateSpec::with_cutoff(Index n_max) const {
  if (n_max < 1) throw std::invalid_argument("cutoff must be at least 1");
  StateSpec copy = *this;
  copy.cutoff = n_max;
  return copy;
}

Index resolved_cutoff(const StateSpec& spec) {
  if (spec.cutoff) {
    if (!is_fock_kind(spec.kind) && spec.kind != StateKind::mixture) {
      throw std::invalid_argument("cutoff only applies to Fock-space specs");
    }
    return *spec.cutoff;
  }
  switch (spec.kind) {
    case StateKind::vacuum:
      return kGaussianFloor;
    case StateKind::number:
      return std::max(kGaussianFloor, spec.n);
    case StateKind::coherent:
      return std::max(kGaussianFloor, smallest_cutoff([&](Index n) {
               return coherent_mass_through(spec.alpha, n);
             }));
    case StateKind::squeezed:
      return std::max(kGaussianFloor, smallest_cutoff([&](Index n) {
               return squeezed_mass_through(spec.r, n);
             }));
    case StateKind::tmss:
      return tmss_default_cutoff(spec.r);
    case StateKind::spin_coherent:
      return spin_space({spec.j}).total_dim() - 1;
    case StateKind::singlet:
      return 1;
    case StateKind::mixture: {
      Index best = 1;
      for (const auto& [weight, branch] : spec.components) {
        (void)weight;
        best = std::max(best, resolved_cutoff(branch));
      }
      return best;
    }
  }
  throw std::logic_error("unreachable state kind");
}

AnyState build(const StateSpec& spec) {
  switch (spec.kind) {
    case StateKind::vacuum: {
      const Index n_max = resolved_cutoff(spec);
      Vector v = Vector::Zero(n_max + 1);
      v(0) = 1.0;
      return checked_fock_state(n_max, std::move(v));
    }
    case StateKind::number: {
      const Index n_max = resolved_cutoff(spec);
      if (spec.n > n_max) throw_truncation_overflow(1.0, n_max);
      Vector v = Vector::Zero(n_max + 1);
      v(spec.n) = 1.0;
      return checked_fock_state(n_max, std::move(v));
    }
    case StateKind::coherent: {
      require_finite(spec.alpha.real(), "alpha");
      require_finite(spec.alpha.imag(), "alpha");
      const Index n_max = resolved_cutoff(spec);
      return checked_fock_state(n_max, coherent_amplitudes(spec.alpha, n_max + 1));
    }
    case StateKind::squeezed: {
      require_finite(spec.r, "squeeze parameter r");
      const Index n_max = resolved_cutoff(spec);
      return checked_fock_state(n_max, squeezed_amplitudes(spec.r, n_max + 1));
    }
    case StateKind::tmss: {
      require_finite(spec.r, "squeeze parameter r");
      const Index n_max = std::max<Index>(1, resolved_cutoff(spec));
      const Index d = n_max + 1;
      const double t = std::tanh(spec.r);
      const double tail = std::pow(t * t, static_cast<double>(n_max + 1));
      if (tail >= kTailTol) throw_truncation_overflow(tail, n_max);
      Vector v = Vector::Zero(d * d);
      double amp = 1.0 / std::cosh(spec.r);
      for (Index n = 0; n < d; ++n) {
        v(n * d + n) = amp;
        amp *= t;
      }
      v /= v.norm();
      return StateVector(fock_space({d, d}), std::move(v));
    }
    case StateKind::spin_coherent:
      return build_spin_coherent(spec);
    case StateKind::singlet:
      return build_singlet();
    case StateKind::mixture:
      return build_mixture(spec);
  }
  throw std::logic_error("unreachable state kind");
}

DensityMatrix sscopic_mixture_fixture(double S, int count, std::uint64_t seed) {
  require_finite(S, "S");
  if (!(S > 0.0)) throw std::invalid_argument("S must be positive");
  if (count < 1) throw std::invalid_argument("count must be at least 1");

  // Component squeeze so the 4-sigma x-width equals S: var(x) = S^2/16.
  const double r = std::log(S / 4.0);
  const StateSpec base = StateSpec::squeezed(r);
  const Index n_max =
      resolved_cutoff(base) +
      static_cast<Index>(std::ceil(S * S / 8.0 + 2.0 * S)) + 10;
  const StateVector squeezed =
      std::get<StateVector>(build(base.with_cutoff(n_max)));
  const auto space = squeezed.space();

  // One eigenbasis of p serves every displacement exp(-i beta p / 2).
  const Observable p = quadrature_op(space, 0, M_PI / 2.0);
  Eigen::SelfAdjointEigenSolver<Matrix> es(p.matrix());
  if (es.info() != Eigen::Success) {
    throw NumericalError("eigendecomposition of p failed in fixture");
  }
  const Matrix modes = es.eigenvectors();
  const Vector in_p_basis = modes.adjoint() * squeezed.amplitudes();

  CounterRng rng(seed, 0);
  std::vector<double> weights(count);
  std::vector<DensityMatrix> parts;
  parts.reserve(count);
  double total = 0.0;
  for (int i = 0; i < count; ++i) {
    weights[i] = 0.5 + rng.uniform();
    total += weights[i];
  }
  for (auto& w : weights) w /= total;

  for (int i = 0; i < count; ++i) {
    const double beta = (i == 0) ? 0.0 : (rng.uniform() - 0.5) * S;
    Vector shifted(in_p_basis.size());
    for (Index k = 0; k < shifted.size(); ++k) {
      shifted(k) = in_p_basis(k) * std::polar(1.0, -0.5 * beta * es.eigenvalues()(k));
    }
    Vector v = modes * shifted;
    v /= v.norm();
    parts.push_back(DensityMatrix::from_pure(StateVector(space, std::move(v))));
  }
  return DensityMatrix::convex_mixture(weights, parts);
}

}  // namespace sscope
