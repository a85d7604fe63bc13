#ifndef SSCOPE_STATES_HPP
#define SSCOPE_STATES_HPP

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "sscope/hilbert.hpp"

namespace sscope {

enum class StateKind {
  vacuum,
  coherent,
  number,
  squeezed,
  tmss,
  spin_coherent,
  singlet,
  mixture,
};

/// Declarative state description. Build with the static factories, optionally
/// override the Fock cutoff with with_cutoff, then hand to build().
struct StateSpec {
  StateKind kind = StateKind::vacuum;
  Complex alpha{0.0, 0.0};         // coherent amplitude
  double r = 0.0;                  // squeeze parameter (squeezed, tmss)
  Index n = 0;                     // photon number (number)
  double j = 0.5;                  // spin length (spin_coherent)
  double theta = 0.0;              // polar angle (spin_coherent)
  double phi = 0.0;                // azimuthal angle (spin_coherent)
  std::optional<Index> cutoff;     // per-mode n_max override (Fock specs only)
  std::vector<std::pair<double, StateSpec>> components;  // mixture branches

  static StateSpec vacuum();
  static StateSpec coherent(Complex alpha);
  static StateSpec number(Index n);
  static StateSpec squeezed(double r);
  static StateSpec tmss(double r);
  static StateSpec spin_coherent(double j, double theta, double phi);
  static StateSpec singlet();
  static StateSpec mixture(std::vector<std::pair<double, StateSpec>> components);

  /// Copy with the per-mode cutoff pinned (propagates into mixture branches
  /// at build time).
  StateSpec with_cutoff(Index n_max) const;
};

/// Per-mode n_max the spec will be built at: the explicit override if set,
/// otherwise the smallest cutoff whose discarded amplitude mass is below
/// 1e-8 (floor 30 for the single-mode Gaussian family). Spin specs have no
/// Fock cutoff and report the ladder dimension minus one.
Index resolved_cutoff(const StateSpec& spec);

/// Materializes the spec. Pure specs yield a StateVector; mixtures yield a
/// DensityMatrix. Throws NumericalError ("truncation overflow") when the
/// requested cutoff would discard more than 1e-8 of amplitude mass, and
/// std::invalid_argument on malformed specs (bad weights, inconsistent
/// mixture spaces, non-finite parameters).
AnyState build(const StateSpec& spec);

/// Mixture of `count` x-displaced squeezed states whose individual 4-sigma
/// x-widths equal S, with component p-variance 16/S^2. Displacements and
/// weights are drawn deterministically from the seed; component 0 is always
/// undisplaced. Every output satisfies the size-S mixture bound
/// var(p) >= 4/S^2 with margin, so criteria evaluated on it must not flag a
/// superposition larger than S.
DensityMatrix sscopic_mixture_fixture(double S, int count, std::uint64_t seed);

}  // namespace sscope

#endif
