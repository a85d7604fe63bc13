#ifndef SSCOPE_HILBERT_HPP
#define SSCOPE_HILBERT_HPP

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "sscope/common.hpp"

namespace sscope {

enum class SpaceKind { fock, spin };

/// Truncated tensor-product Hilbert space. mode_dims holds the per-subsystem
/// dimension (Fock cutoff n_max+1, or 2j+1 for a spin ladder); the
/// tensor-product order is fixed, subsystem A first. Immutable.
class SpaceDescriptor {
 public:
  SpaceDescriptor(SpaceKind kind, std::vector<Index> mode_dims);

  SpaceKind kind() const { return kind_; }
  const std::vector<Index>& mode_dims() const { return mode_dims_; }
  std::size_t mode_count() const { return mode_dims_.size(); }
  Index total_dim() const { return total_dim_; }

  bool operator==(const SpaceDescriptor& other) const {
    return kind_ == other.kind_ && mode_dims_ == other.mode_dims_;
  }
  bool operator!=(const SpaceDescriptor& other) const { return !(*this == other); }

 private:
  SpaceKind kind_;
  std::vector<Index> mode_dims_;
  Index total_dim_;
};

SpaceDescriptor fock_space(std::vector<Index> mode_dims);
/// One spin ladder per entry; dimension 2j+1 (2j must be a positive integer).
SpaceDescriptor spin_space(std::vector<double> js);

enum class Subsystem { a, b };

/// Contiguous bipartition: the first a_modes subsystems form A, the rest B.
struct Bipartition {
  std::size_t a_modes;
  Index dim_a;
  Index dim_b;
};

/// a_modes < 0 selects the default split (half the modes).
Bipartition bipartition(const SpaceDescriptor& space, int a_modes = -1);
SpaceDescriptor subsystem_space(const SpaceDescriptor& space, Subsystem which,
                                int a_modes = -1);

class LinearOperator {
 public:
  LinearOperator(SpaceDescriptor space, Matrix matrix, std::string label);

  const SpaceDescriptor& space() const { return space_; }
  const Matrix& matrix() const { return matrix_; }
  const std::string& label() const { return label_; }

 private:
  SpaceDescriptor space_;
  Matrix matrix_;
  std::string label_;
};

/// A LinearOperator constrained Hermitian (max|M - M^dag| <= 1e-12).
class Observable {
 public:
  explicit Observable(LinearOperator op);
  Observable(SpaceDescriptor space, Matrix matrix, std::string label);

  const SpaceDescriptor& space() const { return op_.space(); }
  const Matrix& matrix() const { return op_.matrix(); }
  const std::string& label() const { return op_.label(); }

 private:
  LinearOperator op_;
};

class StateVector {
 public:
  StateVector(SpaceDescriptor space, Vector amplitudes);

  const SpaceDescriptor& space() const { return space_; }
  const Vector& amplitudes() const { return amplitudes_; }

 private:
  SpaceDescriptor space_;
  Vector amplitudes_;
};

class DensityMatrix {
 public:
  /// Validates Hermiticity (1e-12), unit trace (1e-10) and positivity
  /// (smallest eigenvalue >= -1e-10).
  DensityMatrix(SpaceDescriptor space, Matrix matrix);

  static DensityMatrix from_pure(const StateVector& psi);

  /// Convex combination of states on a shared space. Weights must be
  /// positive and sum to 1 within 1e-12. PSD by construction, so no
  /// spectral validation is run.
  static DensityMatrix convex_mixture(const std::vector<double>& weights,
                                      const std::vector<DensityMatrix>& parts);

  const SpaceDescriptor& space() const { return space_; }
  const Matrix& matrix() const { return matrix_; }

  double purity() const;

 private:
  struct Trusted {};
  DensityMatrix(SpaceDescriptor space, Matrix matrix, Trusted);

  SpaceDescriptor space_;
  Matrix matrix_;
};

using AnyState = std::variant<StateVector, DensityMatrix>;

const SpaceDescriptor& space_of(const AnyState& state);
bool is_pure(const AnyState& state);
DensityMatrix to_density(const AnyState& state);

// --- operator factories ---------------------------------------------------

/// Lowering operator on one mode: a|n> = sqrt(n)|n-1>, identity elsewhere.
/// The row feeding the discarded level |n_max+1> does not exist, so the top
/// row of the cutoff block is zero.
LinearOperator annihilation_op(const SpaceDescriptor& space, std::size_t mode);

/// Number operator a^dag a on one mode.
Observable number_op(const SpaceDescriptor& space, std::size_t mode);

/// x_theta = a e^{-i theta} + a^dag e^{i theta}. theta = 0 gives x,
/// theta = pi/2 gives p, with [x, p] = 2i and vacuum variances 1.
Observable quadrature_op(const SpaceDescriptor& space, std::size_t mode,
                         double theta);

struct SpinOps {
  Observable jx;
  Observable jy;
  Observable jz;
};

/// Two-mode Schwinger spin operators:
///   J_X = (a_- a_+^dag + a_-^dag a_+)/2,
///   J_Y = (a_- a_+^dag - a_-^dag a_+)/2i,
///   J_Z = (a_+^dag a_+ - a_-^dag a_-)/2.
SpinOps schwinger_spin_ops(const SpaceDescriptor& space, std::size_t mode_plus,
                           std::size_t mode_minus);

enum class MixBasis { x, y };

/// Half the photon-number difference of the mixed modes
/// a_{X+-} = (a_+ +- a_-)/sqrt(2) or a_{Y+-} = (a_+ -+ i a_-)/sqrt(2),
/// the beam-splitter realization of J_X / J_Y on a two-mode space.
Observable mode_mix_number_difference(const SpaceDescriptor& space,
                                      MixBasis basis);

/// Angular momentum matrices on a (2j+1)-dim ladder; [J_X, J_Y] = i J_Z holds
/// exactly (no truncation). Basis ordered by ascending m = -j..j.
SpinOps spin_ladder_ops(double j);

// --- moments and conditioning ----------------------------------------------

double expectation(const StateVector& psi, const Observable& obs);
double expectation(const DensityMatrix& rho, const Observable& obs);
double expectation(const AnyState& state, const Observable& obs);

double variance(const StateVector& psi, const Observable& obs);
double variance(const DensityMatrix& rho, const Observable& obs);
double variance(const AnyState& state, const Observable& obs);

struct Conditioned {
  double probability;
  DensityMatrix state;  // on the A subsystem
};

/// Projects subsystem B onto b_projector (a dB x dB orthogonal projector) and
/// returns the outcome probability together with the conditional A-state
/// Tr_B[(1 x P) rho (1 x P)] / probability. Throws EmptyBranchError when the
/// probability falls below zero_prob_threshold.
Conditioned condition_on_projector(const AnyState& state,
                                   const Matrix& b_projector, int a_modes = -1,
                                   double zero_prob_threshold = kZeroProbabilityTol);

DensityMatrix reduce_to_subsystem(const AnyState& state, Subsystem which,
                                  int a_modes = -1);

// --- helpers ----------------------------------------------------------------

Matrix kron(const Matrix& a, const Matrix& b);

/// Embeds a subsystem operator into the full space (O x 1 or 1 x O).
Matrix embed_on_subsystem(const Matrix& op, const SpaceDescriptor& space,
                          Subsystem which, int a_modes = -1);

inline Matrix commutator(const Matrix& a, const Matrix& b) {
  return a * b - b * a;
}

/// -i[A, B], Hermitian for Hermitian A, B. This is the C of the Robertson
/// relation Delta A Delta B >= |<[A,B]>|/2 = |<C>|/2.
Observable hermitized_commutator(const Observable& a, const Observable& b);

}  // namespace sscope

#endif
