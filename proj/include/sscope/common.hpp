#ifndef SSCOPE_COMMON_HPP
#define SSCOPE_COMMON_HPP

#include <complex>
#include <cstdio>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace sscope {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Index = Eigen::Index;

/// Numerical failure (truncation overflow, non-convergence, underpopulated
/// estimator bins). The CLI maps this to exit code 2; usage and contract
/// violations throw std::invalid_argument and map to exit code 1.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Conditioning on an outcome whose probability is below the
/// zero-probability threshold. Callers iterating over outcomes skip these.
struct EmptyBranchError : NumericalError {
  using NumericalError::NumericalError;
};

inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kNormTol = 1e-12;
inline constexpr double kTraceTol = 1e-10;
inline constexpr double kPsdTol = 1e-10;
inline constexpr double kZeroProbabilityTol = 1e-12;

inline double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

/// Round-trip-exact decimal rendering, used everywhere a double crosses a
/// text boundary so that reruns stay byte-identical.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace sscope

#endif
