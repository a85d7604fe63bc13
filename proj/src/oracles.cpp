#include "sscope/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include "sscope/criteria.hpp"
#include "sscope/rng.hpp"

namespace sscope {

namespace {

constexpr double kGridNormTol = 1e-10;
constexpr double kRefinementGate = 0.005;
constexpr int kSpinRestarts = 50;
constexpr double kSpreadGate = 1e-4;

// --- grid oracle ---------------------------------------------------------------

struct GridMinimum {
  double value = 0.0;
  Vector amplitudes;        // full grid, zero off the mask, sum |psi|^2 h = 1
  std::vector<char> mask;
};

// Smallest eigenvalue (and eigenvector) of p^2 = -4 d^2/dx^2 restricted to
// the centered width-S window of the periodic grid. The kernel is the
// spectral-differentiation matrix in position space, real and Toeplitz:
//   g[d] = (4 pi^2 / L^2 N) * sum_m m^2 cos(2 pi m d / N).
GridMinimum restricted_ground_state(double S, double L, Index N,
                                    bool want_vector) {
  const double h = 2.0 * L / static_cast<double>(N);
  std::vector<Index> masked;
  std::vector<char> mask(static_cast<std::size_t>(N), 0);
  for (Index i = 0; i < N; ++i) {
    const double x = -L + (static_cast<double>(i) + 0.5) * h;
    if (std::abs(x) <= S / 2.0) {
      masked.push_back(i);
      mask[static_cast<std::size_t>(i)] = 1;
    }
  }
  if (masked.size() < 2) {
    throw std::invalid_argument(
        "support window covers fewer than two grid points; refine the grid");
  }

  const Index span = masked.back() - masked.front();
  std::vector<double> g(static_cast<std::size_t>(span) + 1, 0.0);
  const double scale =
      4.0 * M_PI * M_PI / (L * L * static_cast<double>(N));
  for (Index d = 0; d <= span; ++d) {
    double acc = 0.0;
    for (Index m = -N / 2; m < N / 2; ++m) {
      const double mm = static_cast<double>(m);
      acc += mm * mm *
             std::cos(2.0 * M_PI * mm * static_cast<double>(d) /
                      static_cast<double>(N));
    }
    g[static_cast<std::size_t>(d)] = scale * acc;
  }

  const auto count = static_cast<Index>(masked.size());
  Eigen::MatrixXd kernel(count, count);
  for (Index a = 0; a < count; ++a) {
    for (Index b = 0; b < count; ++b) {
      kernel(a, b) = g[static_cast<std::size_t>(
          std::abs(masked[static_cast<std::size_t>(a)] -
                   masked[static_cast<std::size_t>(b)]))];
    }
  }

  GridMinimum out;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
      kernel, want_vector ? Eigen::ComputeEigenvectors
                          : Eigen::EigenvaluesOnly);
  out.value = es.eigenvalues()(0);
  if (want_vector) {
    out.amplitudes = Vector::Zero(N);
    const Eigen::VectorXd ground = es.eigenvectors().col(0);
    const double continuum_scale = 1.0 / std::sqrt(h);
    for (Index a = 0; a < count; ++a) {
      out.amplitudes(masked[static_cast<std::size_t>(a)]) =
          ground(a) * continuum_scale;
    }
    out.mask = std::move(mask);
  }
  return out;
}

void validate_grid_arguments(double S, double half_range, Index points) {
  if (!(S > 0.0) || !std::isfinite(S)) {
    throw std::invalid_argument("window extent S must be positive");
  }
  if (S > 2.0 * half_range) {
    throw std::invalid_argument("window extent S must not exceed the grid");
  }
  if (points < 512) {
    throw std::invalid_argument("grid oracle needs at least 512 points");
  }
  if (points % 2 != 0) {
    throw std::invalid_argument("grid oracle needs an even point count");
  }
}

// --- spin window oracle ----------------------------------------------------------

struct WindowObjective {
  const Matrix* jy;
  const Matrix* jy_sq;
  const Matrix* jz;
  int dim = 0;
  double extent = 0.0;
};

double window_objective(const gsl_vector* v, void* params) {
  const auto* ctx = static_cast<const WindowObjective*>(params);
  Vector c(ctx->dim);
  double norm_sq = 0.0;
  for (int i = 0; i < ctx->dim; ++i) {
    const double re = gsl_vector_get(v, 2 * i);
    const double im = gsl_vector_get(v, 2 * i + 1);
    c(i) = Complex(re, im);
    norm_sq += re * re + im * im;
  }
  if (norm_sq < 1e-12) return 1e6;  // steer away from the degenerate origin
  c /= std::sqrt(norm_sq);
  const double ey = std::real(c.dot(*ctx->jy * c));
  const double ey_sq = std::real(c.dot(*ctx->jy_sq * c));
  const double ez = std::real(c.dot(*ctx->jz * c));
  const double var = std::max(0.0, ey_sq - ey * ey);
  return ctx->extent * std::sqrt(var) - std::abs(ez);
}

double run_simplex(WindowObjective& ctx, CounterRng& rng) {
  const std::size_t nparams = 2 * static_cast<std::size_t>(ctx.dim);
  gsl_multimin_function f;
  f.f = &window_objective;
  f.n = nparams;
  f.params = &ctx;

  gsl_vector* x0 = gsl_vector_alloc(nparams);
  gsl_vector* step = gsl_vector_alloc(nparams);
  for (std::size_t k = 0; k < nparams; ++k) {
    gsl_vector_set(x0, k, rng.normal());
    gsl_vector_set(step, k, 0.25);
  }
  gsl_multimin_fminimizer* s = gsl_multimin_fminimizer_alloc(
      gsl_multimin_fminimizer_nmsimplex2, nparams);
  gsl_multimin_fminimizer_set(s, &f, x0, step);

  int status = GSL_CONTINUE;
  for (int iter = 0; status == GSL_CONTINUE && iter < 5000; ++iter) {
    if (gsl_multimin_fminimizer_iterate(s) != 0) break;
    status = gsl_multimin_test_size(gsl_multimin_fminimizer_size(s), 1e-9);
  }
  const double best = s->fval;
  gsl_multimin_fminimizer_free(s);
  gsl_vector_free(step);
  gsl_vector_free(x0);
  return best;
}

// --- random sweep helpers ---------------------------------------------------------

Vector random_amplitudes(Index dim, CounterRng& rng) {
  Vector v(dim);
  for (Index i = 0; i < dim; ++i) {
    v(i) = Complex(rng.normal(), rng.normal());
  }
  v /= v.norm();
  return v;
}

}  // namespace

// --- public API -------------------------------------------------------------------

std::pair<double, double> gaussian_tmss_moments(double r) {
  if (!std::isfinite(r)) {
    throw std::invalid_argument("squeezing parameter must be finite");
  }
  const double c = std::cosh(2.0 * r);
  return {c, 1.0 / c};
}

GridWavefunction::GridWavefunction(double half_range, Vector amplitudes,
                                   std::vector<char> mask)
    : half_range_(half_range),
      amplitudes_(std::move(amplitudes)),
      mask_(std::move(mask)) {
  if (!(half_range_ > 0.0)) {
    throw std::invalid_argument("grid half-range must be positive");
  }
  if (static_cast<Index>(mask_.size()) != amplitudes_.size()) {
    throw std::invalid_argument("mask and amplitude sizes differ");
  }
  double total = 0.0;
  for (Index i = 0; i < amplitudes_.size(); ++i) {
    if (!mask_[static_cast<std::size_t>(i)] &&
        amplitudes_(i) != Complex(0.0, 0.0)) {
      throw std::invalid_argument(
          "amplitudes must vanish outside the support mask");
    }
    total += std::norm(amplitudes_(i));
  }
  total *= spacing();
  if (std::abs(total - 1.0) > kGridNormTol) {
    throw NumericalError("grid wavefunction norm is " + format_double(total) +
                         ", expected 1");
  }
}

SupportMinimum min_p_variance_details(double S, double half_range,
                                      Index points) {
  validate_grid_arguments(S, half_range, points);
  const GridMinimum coarse =
      restricted_ground_state(S, half_range, points, false);
  GridMinimum fine =
      restricted_ground_state(S, half_range, 2 * points, true);
  const double gate = kRefinementGate * std::max(std::abs(fine.value), 1e-300);
  if (std::abs(fine.value - coarse.value) > gate) {
    std::ostringstream msg;
    msg << "grid oracle did not converge: value " << coarse.value << " at N="
        << points << " vs " << fine.value << " at N=" << 2 * points
        << " (gate 0.5%)";
    throw NumericalError(msg.str());
  }
  return SupportMinimum{
      fine.value, coarse.value,
      GridWavefunction(half_range, std::move(fine.amplitudes),
                       std::move(fine.mask))};
}

double min_p_variance_on_support(double S, double half_range, Index points) {
  return min_p_variance_details(S, half_range, points).value;
}

double min_spin_ratio_on_window(double j, int S, std::uint64_t seed) {
  gsl_set_error_handler_off();
  const SpinOps ops = spin_ladder_ops(j);
  const Index dim = ops.jx.matrix().rows();
  if (S < 0 || static_cast<Index>(S) > dim - 1) {
    throw std::invalid_argument(
        "window extent S must lie in [0, 2j] for a spin-j ladder");
  }

  Eigen::SelfAdjointEigenSolver<Matrix> es(ops.jx.matrix());
  const Matrix& u = es.eigenvectors();
  const Matrix my = u.adjoint() * ops.jy.matrix() * u;
  const Matrix my_sq = u.adjoint() * ops.jy.matrix() * ops.jy.matrix() * u;
  const Matrix mz = u.adjoint() * ops.jz.matrix() * u;

  double global = std::numeric_limits<double>::infinity();
  Index winning_window = 0;
  std::vector<double> winning_minima;
  const Index block = S + 1;
  for (Index w = 0; w + block <= dim; ++w) {
    const Matrix by = my.block(w, w, block, block);
    const Matrix by_sq = my_sq.block(w, w, block, block);
    const Matrix bz = mz.block(w, w, block, block);

    std::vector<double> minima;
    minima.reserve(kSpinRestarts);
    if (S == 0) {
      // A single J_X eigenstate: the objective is constant.
      minima.assign(kSpinRestarts, -std::abs(bz(0, 0).real()));
    } else {
      WindowObjective ctx{&by, &by_sq, &bz, static_cast<int>(block),
                          static_cast<double>(S)};
      for (int r = 0; r < kSpinRestarts; ++r) {
        CounterRng rng(seed, static_cast<std::uint64_t>(w) * 1000 +
                                 static_cast<std::uint64_t>(r) + 1);
        minima.push_back(run_simplex(ctx, rng));
      }
    }
    const double wmin = *std::min_element(minima.begin(), minima.end());
    if (wmin < global) {
      global = wmin;
      winning_window = w;
      winning_minima = std::move(minima);
    }
  }

  std::sort(winning_minima.begin(), winning_minima.end());
  const std::size_t quintile =
      std::max<std::size_t>(1, (winning_minima.size() + 4) / 5);
  const double spread = winning_minima[quintile - 1] - winning_minima[0];
  if (spread > kSpreadGate) {
    std::ostringstream msg;
    msg << "spin window oracle did not converge: j=" << j << " S=" << S
        << " window=" << winning_window << " best-quintile spread=" << spread;
    throw NumericalError(msg.str());
  }
  return global;
}

double random_state_sweep(std::size_t n, std::uint64_t seed,
                          SweepCheck check) {
  if (n < 1) throw std::invalid_argument("sweep needs n >= 1");
  static const std::vector<double> kSpins = {0.5, 1.0, 1.5, 2.0, 2.5, 3.0};
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < n; ++k) {
    CounterRng rng(seed, k + 1);
    double slack = 0.0;
    switch (check) {
      case SweepCheck::theorem1_cv: {
        const SpaceDescriptor space = fock_space({6, 6});
        const StateVector psi(space, random_amplitudes(36, rng));
        const SpaceDescriptor a = subsystem_space(space, Subsystem::a);
        const SpaceDescriptor b = subsystem_space(space, Subsystem::b);
        const auto report = theorem1_report(
            psi, quadrature_op(a, 0, 0.0), quadrature_op(a, 0, M_PI / 2.0),
            quadrature_op(b, 0, M_PI / 2.0), std::nullopt);
        slack = report.lhs - report.rhs;
        break;
      }
      case SweepCheck::theorem1_spin: {
        const double ja = kSpins[rng.below(kSpins.size())];
        const double jb = kSpins[rng.below(kSpins.size())];
        const SpaceDescriptor space = spin_space({ja, jb});
        const StateVector psi(space,
                              random_amplitudes(space.total_dim(), rng));
        const SpinOps a_ops = spin_ladder_ops(ja);
        const SpinOps b_ops = spin_ladder_ops(jb);
        const auto report =
            theorem1_report(psi, a_ops.jx, a_ops.jy, b_ops.jy, std::nullopt);
        slack = report.lhs - report.rhs;
        break;
      }
      case SweepCheck::robertson: {
        const SpaceDescriptor space = fock_space({6});
        const StateVector psi(space, random_amplitudes(6, rng));
        const Observable x = quadrature_op(space, 0, 0.0);
        const Observable p = quadrature_op(space, 0, M_PI / 2.0);
        const double vx = variance(psi, x);
        const double vp = variance(psi, p);
        const auto c = hermitized_commutator(x, p);
        slack = std::sqrt(vx * vp) - std::abs(expectation(psi, c)) / 2.0;
        break;
      }
    }
    worst = std::min(worst, slack);
  }
  return worst;
}

}  // namespace sscope
