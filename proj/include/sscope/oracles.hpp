#ifndef SSCOPE_ORACLES_HPP
#define SSCOPE_ORACLES_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "sscope/hilbert.hpp"

namespace sscope {

/// Closed-form Gaussian conditioning moments of the two-mode squeezed state:
/// (var x = cosh 2r, inferred var p = 1/cosh 2r). Their product is exactly 1.
std::pair<double, double> gaussian_tmss_moments(double r);

/// Wavefunction on a uniform position grid x_i = -L + (i + 1/2) h over
/// [-L, L], h = 2L/N, with a hard support mask. Invariants: sum |psi_i|^2 h
/// = 1 within 1e-10 and amplitudes exactly zero off the mask.
class GridWavefunction {
 public:
  GridWavefunction(double half_range, Vector amplitudes,
                   std::vector<char> mask);

  double half_range() const { return half_range_; }
  Index points() const { return amplitudes_.size(); }
  double spacing() const {
    return 2.0 * half_range_ / static_cast<double>(points());
  }
  double x(Index i) const {
    return -half_range_ + (static_cast<double>(i) + 0.5) * spacing();
  }
  const Vector& amplitudes() const { return amplitudes_; }
  const std::vector<char>& mask() const { return mask_; }

 private:
  double half_range_;
  Vector amplitudes_;
  std::vector<char> mask_;
};

/// Brute-force minimum of var(p), p = -2i d/dx, over normalized wavefunctions
/// supported on the centered width-S window of a periodic grid (half-range L,
/// N points, N even and >= 512). Spectral differentiation; the minimum is the
/// smallest eigenvalue of the mask-restricted p^2 kernel, evaluated at N and
/// 2N. Throws NumericalError when the two resolutions disagree by more than
/// 0.5%. On adequate grids the value lands within 1% of the box ground
/// value 4 pi^2 / S^2, and it can never go below 4/S^2.
double min_p_variance_on_support(double S, double half_range, Index points);

struct SupportMinimum {
  double value = 0.0;         // fine-grid minimum (the oracle's answer)
  double coarse_value = 0.0;  // same quantity at half the resolution
  GridWavefunction minimizer;
};

/// As min_p_variance_on_support, but also returns the minimizing grid
/// wavefunction at the fine resolution.
SupportMinimum min_p_variance_details(double S, double half_range,
                                      Index points);

/// Brute-force minimum of S * (Delta J_Y) - |<J_Z>| over pure states
/// supported on S + 1 adjacent J_X eigenvalues of a spin-j ladder, scanning
/// every window position with >= 50 seeded simplex restarts each. Returns
/// the global minimum (expected >= -1e-6). Throws NumericalError when the
/// best-quintile restart spread in the winning window exceeds 1e-4.
double min_spin_ratio_on_window(double j, int S,
                                std::uint64_t seed = 0x53u);

enum class SweepCheck { theorem1_cv, theorem1_spin, robertson };

/// Draws n random pure states (complex-Gaussian amplitudes, normalized;
/// 6x6 Fock pairs, spin pairs with j <= 3, or single-mode dim-6 Fock for the
/// Robertson check), evaluates the named inequality on each, and returns the
/// most negative slack lhs - rhs. Contract: >= -1e-8 for all three checks.
double random_state_sweep(std::size_t n, std::uint64_t seed, SweepCheck check);

}  // namespace sscope

#endif
