#include "sscope/hilbert.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace sscope {

namespace {

Index checked_total_dim(const std::vector<Index>& dims) {
  if (dims.empty()) throw std::invalid_argument("space needs at least one mode");
  Index total = 1;
  for (Index d : dims) {
    if (d < 2) {
      std::ostringstream msg;
      msg << "every mode dimension must be >= 2, got " << d;
      throw std::invalid_argument(msg.str());
    }
    total *= d;
  }
  return total;
}

void require_fock(const SpaceDescriptor& space, const char* what) {
  if (space.kind() != SpaceKind::fock) {
    throw std::invalid_argument(std::string(what) + " requires a Fock space");
  }
}

void require_mode(const SpaceDescriptor& space, std::size_t mode, const char* what) {
  if (mode >= space.mode_count()) {
    std::ostringstream msg;
    msg << what << ": mode index " << mode << " out of range (space has "
        << space.mode_count() << " modes)";
    throw std::invalid_argument(msg.str());
  }
}

// Dense lowering matrix at one mode's cutoff.
Matrix lowering_matrix(Index dim) {
  Matrix a = Matrix::Zero(dim, dim);
  for (Index n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

// I_pre (x) M (x) I_post for a single-mode operator M.
Matrix on_mode(const SpaceDescriptor& space, std::size_t mode, const Matrix& m) {
  Matrix result = Matrix::Identity(1, 1);
  for (std::size_t k = 0; k < space.mode_count(); ++k) {
    const Index d = space.mode_dims()[k];
    result = (k == mode) ? kron(result, m)
                         : kron(result, Matrix::Identity(d, d));
  }
  return result;
}

double real_with_residue_check(Complex value, double scale, const char* what) {
  const double tol = 1e-10 * std::max(1.0, scale);
  if (std::abs(value.imag()) > tol) {
    std::ostringstream msg;
    msg << what << ": imaginary residue " << value.imag()
        << " exceeds tolerance " << tol;
    throw NumericalError(msg.str());
  }
  return value.real();
}

}  // namespace

SpaceDescriptor::SpaceDescriptor(SpaceKind kind, std::vector<Index> mode_dims)
    : kind_(kind),
      mode_dims_(std::move(mode_dims)),
      total_dim_(checked_total_dim(mode_dims_)) {}

SpaceDescriptor fock_space(std::vector<Index> mode_dims) {
  return SpaceDescriptor(SpaceKind::fock, std::move(mode_dims));
}

SpaceDescriptor spin_space(std::vector<double> js) {
  std::vector<Index> dims;
  dims.reserve(js.size());
  for (double j : js) {
    const double two_j = 2.0 * j;
    if (j < 0.5 || std::abs(two_j - std::round(two_j)) > 1e-12) {
      throw std::invalid_argument("spin j must be a positive half-integer");
    }
    dims.push_back(static_cast<Index>(std::llround(two_j)) + 1);
  }
  return SpaceDescriptor(SpaceKind::spin, std::move(dims));
}

Bipartition bipartition(const SpaceDescriptor& space, int a_modes) {
  const std::size_t modes = space.mode_count();
  if (modes < 2) throw std::invalid_argument("bipartition needs at least two modes");
  std::size_t na = (a_modes < 0) ? modes / 2 : static_cast<std::size_t>(a_modes);
  if (na == 0 || na >= modes) {
    throw std::invalid_argument("bipartition split must leave both sides nonempty");
  }
  Index da = 1, db = 1;
  for (std::size_t k = 0; k < modes; ++k) {
    if (k < na) da *= space.mode_dims()[k];
    else db *= space.mode_dims()[k];
  }
  return Bipartition{na, da, db};
}

SpaceDescriptor subsystem_space(const SpaceDescriptor& space, Subsystem which,
                                int a_modes) {
  const Bipartition bip = bipartition(space, a_modes);
  std::vector<Index> dims;
  if (which == Subsystem::a) {
    dims.assign(space.mode_dims().begin(), space.mode_dims().begin() + bip.a_modes);
  } else {
    dims.assign(space.mode_dims().begin() + bip.a_modes, space.mode_dims().end());
  }
  return SpaceDescriptor(space.kind(), std::move(dims));
}

LinearOperator::LinearOperator(SpaceDescriptor space, Matrix matrix,
                               std::string label)
    : space_(std::move(space)), matrix_(std::move(matrix)), label_(std::move(label)) {
  if (matrix_.rows() != matrix_.cols() || matrix_.rows() != space_.total_dim()) {
    std::ostringstream msg;
    msg << "operator '" << label_ << "' has shape " << matrix_.rows() << "x"
        << matrix_.cols() << ", space dimension is " << space_.total_dim();
    throw std::invalid_argument(msg.str());
  }
}

Observable::Observable(LinearOperator op) : op_(std::move(op)) {
  const double defect = max_abs(op_.matrix() - op_.matrix().adjoint());
  if (defect > kHermitianTol) {
    std::ostringstream msg;
    msg << "observable '" << op_.label() << "' is not Hermitian (defect "
        << defect << ")";
    throw std::invalid_argument(msg.str());
  }
}

Observable::Observable(SpaceDescriptor space, Matrix matrix, std::string label)
    : Observable(LinearOperator(std::move(space), std::move(matrix), std::move(label))) {}

StateVector::StateVector(SpaceDescriptor space, Vector amplitudes)
    : space_(std::move(space)), amplitudes_(std::move(amplitudes)) {
  if (amplitudes_.size() != space_.total_dim()) {
    throw std::invalid_argument("state vector length does not match space dimension");
  }
  const double norm = amplitudes_.norm();
  if (std::abs(norm - 1.0) > kNormTol) {
    std::ostringstream msg;
    msg << "state vector norm " << norm << " is not 1 within " << kNormTol;
    throw std::invalid_argument(msg.str());
  }
}

DensityMatrix::DensityMatrix(SpaceDescriptor space, Matrix matrix)
    : space_(std::move(space)), matrix_(std::move(matrix)) {
  if (matrix_.rows() != matrix_.cols() || matrix_.rows() != space_.total_dim()) {
    throw std::invalid_argument("density matrix shape does not match space dimension");
  }
  const double herm = max_abs(matrix_ - matrix_.adjoint());
  if (herm > kHermitianTol) {
    std::ostringstream msg;
    msg << "density matrix not Hermitian within " << kHermitianTol
        << " (defect " << herm << ")";
    throw std::invalid_argument(msg.str());
  }
  const double trace_err = std::abs(matrix_.trace().real() - 1.0) +
                           std::abs(matrix_.trace().imag());
  if (trace_err > kTraceTol) {
    std::ostringstream msg;
    msg << "density matrix trace deviates from 1 by " << trace_err;
    throw std::invalid_argument(msg.str());
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(matrix_, Eigen::EigenvaluesOnly);
  const double min_eig = es.eigenvalues().minCoeff();
  if (min_eig < -kPsdTol) {
    std::ostringstream msg;
    msg << "density matrix has negative eigenvalue " << min_eig;
    throw std::invalid_argument(msg.str());
  }
}

DensityMatrix::DensityMatrix(SpaceDescriptor space, Matrix matrix, Trusted)
    : space_(std::move(space)), matrix_(std::move(matrix)) {}

DensityMatrix DensityMatrix::from_pure(const StateVector& psi) {
  Matrix rho = psi.amplitudes() * psi.amplitudes().adjoint();
  return DensityMatrix(psi.space(), std::move(rho), Trusted{});
}

DensityMatrix DensityMatrix::convex_mixture(
    const std::vector<double>& weights, const std::vector<DensityMatrix>& parts) {
  if (parts.empty() || weights.size() != parts.size()) {
    throw std::invalid_argument("convex_mixture needs matching nonempty lists");
  }
  double total = 0.0;
  for (double w : weights) {
    if (!(w > 0.0)) throw std::invalid_argument("mixture weights must be positive");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    std::ostringstream msg;
    msg << "mixture weights sum to " << total << ", expected 1 within 1e-12";
    throw std::invalid_argument(msg.str());
  }
  const SpaceDescriptor& space = parts.front().space();
  Matrix rho = Matrix::Zero(space.total_dim(), space.total_dim());
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (parts[i].space() != space) {
      throw std::invalid_argument("mixture components live on different spaces");
    }
    rho += weights[i] * parts[i].matrix();
  }
  return DensityMatrix(space, std::move(rho), Trusted{});
}

double DensityMatrix::purity() const {
  return (matrix_ * matrix_).trace().real();
}

const SpaceDescriptor& space_of(const AnyState& state) {
  return std::visit([](const auto& s) -> const SpaceDescriptor& { return s.space(); },
                    state);
}

bool is_pure(const AnyState& state) {
  return std::holds_alternative<StateVector>(state);
}

DensityMatrix to_density(const AnyState& state) {
  if (const auto* psi = std::get_if<StateVector>(&state)) {
    return DensityMatrix::from_pure(*psi);
  }
  return std::get<DensityMatrix>(state);
}

LinearOperator annihilation_op(const SpaceDescriptor& space, std::size_t mode) {
  require_fock(space, "annihilation_op");
  require_mode(space, mode, "annihilation_op");
  const Index d = space.mode_dims()[mode];
  std::ostringstream label;
  label << "a[" << mode << "]";
  return LinearOperator(space, on_mode(space, mode, lowering_matrix(d)), label.str());
}

Observable number_op(const SpaceDescriptor& space, std::size_t mode) {
  require_fock(space, "number_op");
  require_mode(space, mode, "number_op");
  const Matrix a = lowering_matrix(space.mode_dims()[mode]);
  std::ostringstream label;
  label << "n[" << mode << "]";
  return Observable(space, on_mode(space, mode, a.adjoint() * a), label.str());
}

Observable quadrature_op(const SpaceDescriptor& space, std::size_t mode,
                         double theta) {
  require_fock(space, "quadrature_op");
  require_mode(space, mode, "quadrature_op");
  const Matrix a = lowering_matrix(space.mode_dims()[mode]);
  const Complex phase = std::polar(1.0, theta);
  Matrix x_theta = a * std::conj(phase) + a.adjoint() * phase;
  std::ostringstream label;
  label << "x_theta[" << mode << ", " << theta << "]";
  return Observable(space, on_mode(space, mode, x_theta), label.str());
}

SpinOps schwinger_spin_ops(const SpaceDescriptor& space, std::size_t mode_plus,
                           std::size_t mode_minus) {
  require_fock(space, "schwinger_spin_ops");
  require_mode(space, mode_plus, "schwinger_spin_ops");
  require_mode(space, mode_minus, "schwinger_spin_ops");
  if (mode_plus == mode_minus) {
    throw std::invalid_argument("schwinger_spin_ops needs two distinct modes");
  }
  const Matrix ap = on_mode(space, mode_plus,
                            lowering_matrix(space.mode_dims()[mode_plus]));
  const Matrix am = on_mode(space, mode_minus,
                            lowering_matrix(space.mode_dims()[mode_minus]));
  const Matrix jx = (am * ap.adjoint() + am.adjoint() * ap) / 2.0;
  const Matrix jy = (am * ap.adjoint() - am.adjoint() * ap) / Complex(0.0, 2.0);
  const Matrix jz = (ap.adjoint() * ap - am.adjoint() * am) / 2.0;
  return SpinOps{Observable(space, jx, "J_X"), Observable(space, jy, "J_Y"),
                 Observable(space, jz, "J_Z")};
}

Observable mode_mix_number_difference(const SpaceDescriptor& space, MixBasis basis) {
  require_fock(space, "mode_mix_number_difference");
  if (space.mode_count() != 2) {
    throw std::invalid_argument("mode_mix_number_difference needs a two-mode space");
  }
  const Matrix ap = on_mode(space, 0, lowering_matrix(space.mode_dims()[0]));
  const Matrix am = on_mode(space, 1, lowering_matrix(space.mode_dims()[1]));
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  Matrix mix_plus, mix_minus;
  if (basis == MixBasis::x) {
    mix_plus = (ap + am) * inv_sqrt2;
    mix_minus = (ap - am) * inv_sqrt2;
  } else {
    mix_plus = (ap - Complex(0, 1) * am) * inv_sqrt2;
    mix_minus = (ap + Complex(0, 1) * am) * inv_sqrt2;
  }
  Matrix diff = (mix_plus.adjoint() * mix_plus - mix_minus.adjoint() * mix_minus) / 2.0;
  // Tiny anti-Hermitian round-off from the matrix products is symmetrized away.
  diff = (diff + diff.adjoint().eval()) / 2.0;
  return Observable(space, diff,
                    basis == MixBasis::x ? "J_X(mixed)" : "J_Y(mixed)");
}

SpinOps spin_ladder_ops(double j) {
  const SpaceDescriptor space = spin_space({j});
  const Index dim = space.total_dim();
  Matrix jz = Matrix::Zero(dim, dim);
  Matrix jplus = Matrix::Zero(dim, dim);
  for (Index k = 0; k < dim; ++k) {
    const double m = -j + static_cast<double>(k);
    jz(k, k) = m;
    if (k + 1 < dim) {
      jplus(k + 1, k) = std::sqrt(j * (j + 1.0) - m * (m + 1.0));
    }
  }
  const Matrix jminus = jplus.adjoint();
  const Matrix jx = (jplus + jminus) / 2.0;
  const Matrix jy = (jplus - jminus) / Complex(0.0, 2.0);
  return SpinOps{Observable(space, jx, "J_X"), Observable(space, jy, "J_Y"),
                 Observable(space, jz, "J_Z")};
}

namespace {

void require_same_space(const SpaceDescriptor& a, const SpaceDescriptor& b,
                        const char* what) {
  if (!(a == b)) {
    throw std::invalid_argument(std::string(what) +
                                ": state and observable spaces differ");
  }
}

}  // namespace

double expectation(const StateVector& psi, const Observable& obs) {
  require_same_space(psi.space(), obs.space(), "expectation");
  const Complex value = (psi.amplitudes().adjoint() * (obs.matrix() * psi.amplitudes()))(0);
  return real_with_residue_check(value, max_abs(obs.matrix()), "expectation");
}

double expectation(const DensityMatrix& rho, const Observable& obs) {
  require_same_space(rho.space(), obs.space(), "expectation");
  const Complex value = (rho.matrix() * obs.matrix()).trace();
  return real_with_residue_check(value, max_abs(obs.matrix()), "expectation");
}

double expectation(const AnyState& state, const Observable& obs) {
  return std::visit([&](const auto& s) { return expectation(s, obs); }, state);
}

namespace {

double finish_variance(double second_moment, double mean) {
  double var = second_moment - mean * mean;
  const double floor = -1e-12 * std::max(1.0, std::abs(second_moment));
  if (var < floor) {
    std::ostringstream msg;
    msg << "variance " << var << " below numerical floor";
    throw NumericalError(msg.str());
  }
  return std::max(var, 0.0);
}

}  // namespace

double variance(const StateVector& psi, const Observable& obs) {
  require_same_space(psi.space(), obs.space(), "variance");
  const Vector applied = obs.matrix() * psi.amplitudes();
  const double second = applied.squaredNorm();
  const Complex mean = (psi.amplitudes().adjoint() * applied)(0);
  return finish_variance(second,
                         real_with_residue_check(mean, max_abs(obs.matrix()), "variance"));
}

double variance(const DensityMatrix& rho, const Observable& obs) {
  require_same_space(rho.space(), obs.space(), "variance");
  const Matrix rho_o = rho.matrix() * obs.matrix();
  const double mean = real_with_residue_check(rho_o.trace(), max_abs(obs.matrix()),
                                              "variance");
  const double second = real_with_residue_check(
      (rho_o * obs.matrix()).trace(), max_abs(obs.matrix()), "variance");
  return finish_variance(second, mean);
}

double variance(const AnyState& state, const Observable& obs) {
  return std::visit([&](const auto& s) { return variance(s, obs); }, state);
}

namespace {

void require_projector(const Matrix& p) {
  if (p.rows() != p.cols()) throw std::invalid_argument("projector must be square");
  if (max_abs(p - p.adjoint()) > 1e-10) {
    throw std::invalid_argument("projector is not Hermitian");
  }
  if (max_abs(p * p - p) > 1e-8) {
    throw std::invalid_argument("projector is not idempotent");
  }
}

// Reshape of a pure bipartite vector into a dA x dB coefficient matrix
// (A-major index ordering: full index = iA*dB + iB).
Matrix coefficient_matrix(const Vector& psi, const Bipartition& bip) {
  return Eigen::Map<const Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic,
                                        Eigen::RowMajor>>(psi.data(), bip.dim_a,
                                                          bip.dim_b);
}

}  // namespace

Conditioned condition_on_projector(const AnyState& state, const Matrix& b_projector,
                                   int a_modes, double zero_prob_threshold) {
  const SpaceDescriptor& space = space_of(state);
  const Bipartition bip = bipartition(space, a_modes);
  if (b_projector.rows() != bip.dim_b) {
    std::ostringstream msg;
    msg << "projector dimension " << b_projector.rows()
        << " does not match subsystem B dimension " << bip.dim_b;
    throw std::invalid_argument(msg.str());
  }
  require_projector(b_projector);
  const SpaceDescriptor a_space = subsystem_space(space, Subsystem::a, a_modes);

  double prob = 0.0;
  Matrix rho_a = Matrix::Zero(bip.dim_a, bip.dim_a);
  if (const auto* pure = std::get_if<StateVector>(&state)) {
    const Matrix m = coefficient_matrix(pure->amplitudes(), bip);
    // (1 x P)|psi> corresponds to M P^T on coefficient matrices.
    const Matrix projected = m * b_projector.transpose();
    prob = projected.squaredNorm();
    rho_a = projected * projected.adjoint();
  } else {
    const Matrix& rho = std::get<DensityMatrix>(state).matrix();
    for (Index i = 0; i < bip.dim_a; ++i) {
      for (Index j = 0; j < bip.dim_a; ++j) {
        const auto block = rho.block(i * bip.dim_b, j * bip.dim_b, bip.dim_b, bip.dim_b);
        rho_a(i, j) = (b_projector * block * b_projector).trace();
      }
    }
    prob = rho_a.trace().real();
  }

  if (prob < zero_prob_threshold) {
    std::ostringstream msg;
    msg << "empty branch: outcome probability " << prob << " below threshold "
        << zero_prob_threshold;
    throw EmptyBranchError(msg.str());
  }
  rho_a /= prob;
  rho_a = ((rho_a + rho_a.adjoint()) / 2.0).eval();
  return Conditioned{prob, DensityMatrix(a_space, std::move(rho_a))};
}

DensityMatrix reduce_to_subsystem(const AnyState& state, Subsystem which,
                                  int a_modes) {
  const SpaceDescriptor& space = space_of(state);
  const Bipartition bip = bipartition(space, a_modes);
  const SpaceDescriptor sub_space = subsystem_space(space, which, a_modes);

  Matrix reduced;
  if (const auto* pure = std::get_if<StateVector>(&state)) {
    const Matrix m = coefficient_matrix(pure->amplitudes(), bip);
    // rho_A = M M^dag; rho_B = (M^dag M)^T (entrywise conjugate, not adjoint).
    reduced = (which == Subsystem::a) ? Matrix(m * m.adjoint())
                                      : Matrix((m.adjoint() * m).transpose());
  } else {
    const Matrix& rho = std::get<DensityMatrix>(state).matrix();
    if (which == Subsystem::a) {
      reduced = Matrix::Zero(bip.dim_a, bip.dim_a);
      for (Index i = 0; i < bip.dim_a; ++i) {
        for (Index j = 0; j < bip.dim_a; ++j) {
          reduced(i, j) =
              rho.block(i * bip.dim_b, j * bip.dim_b, bip.dim_b, bip.dim_b).trace();
        }
      }
    } else {
      reduced = Matrix::Zero(bip.dim_b, bip.dim_b);
      for (Index i = 0; i < bip.dim_a; ++i) {
        reduced += rho.block(i * bip.dim_b, i * bip.dim_b, bip.dim_b, bip.dim_b);
      }
    }
  }
  reduced = ((reduced + reduced.adjoint()) / 2.0).eval();
  return DensityMatrix(sub_space, std::move(reduced));
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix result(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      result.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return result;
}

Matrix embed_on_subsystem(const Matrix& op, const SpaceDescriptor& space,
                          Subsystem which, int a_modes) {
  const Bipartition bip = bipartition(space, a_modes);
  const Index sub_dim = (which == Subsystem::a) ? bip.dim_a : bip.dim_b;
  if (op.rows() != sub_dim || op.cols() != sub_dim) {
    throw std::invalid_argument("embed_on_subsystem: operator dimension mismatch");
  }
  return (which == Subsystem::a)
             ? kron(op, Matrix::Identity(bip.dim_b, bip.dim_b))
             : kron(Matrix::Identity(bip.dim_a, bip.dim_a), op);
}

Observable hermitized_commutator(const Observable& a, const Observable& b) {
  require_same_space(a.space(), b.space(), "hermitized_commutator");
  Matrix c = Complex(0, -1) * commutator(a.matrix(), b.matrix());
  c = ((c + c.adjoint()) / 2.0).eval();
  return Observable(a.space(), std::move(c),
                    "-i[" + a.label() + "," + b.label() + "]");
}

}  // namespace sscope
