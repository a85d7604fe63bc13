#include "doctest.h"

#include <cmath>

#include "sscope/states.hpp"

using namespace sscope;

namespace {

Observable x_on(const SpaceDescriptor& space, std::size_t mode = 0) {
  return quadrature_op(space, mode, 0.0);
}

Observable p_on(const SpaceDescriptor& space, std::size_t mode = 0) {
  return quadrature_op(space, mode, M_PI / 2.0);
}

}  // namespace

TEST_CASE("vacuum and zero squeezing coincide") {
  const auto vac = build(StateSpec::vacuum());
  CHECK(is_pure(vac));
  CHECK(space_of(vac).total_dim() == 31);  // default floor n_max = 30
  CHECK(variance(vac, x_on(space_of(vac))) == doctest::Approx(1.0).epsilon(1e-12));

  const auto sq0 = build(StateSpec::squeezed(0.0));
  const auto& psi = std::get<StateVector>(sq0);
  CHECK(std::abs(psi.amplitudes()(0) - Complex(1.0)) < 1e-12);
}

TEST_CASE("squeezed vacuum hits the target quadrature variances") {
  const auto spec = StateSpec::squeezed(0.5).with_cutoff(60);
  const auto psi = build(spec);
  const auto& space = space_of(psi);
  const double vx = variance(psi, x_on(space));
  const double vp = variance(psi, p_on(space));
  CHECK(vx == doctest::Approx(std::exp(1.0)).epsilon(1e-9));
  CHECK(vp == doctest::Approx(std::exp(-1.0)).epsilon(1e-9));
  CHECK(vx * vp == doctest::Approx(1.0).epsilon(1e-6));  // minimum uncertainty

  // negative r squeezes x instead
  const auto anti = build(StateSpec::squeezed(-0.3));
  CHECK(variance(anti, x_on(space_of(anti))) ==
        doctest::Approx(std::exp(-0.6)).epsilon(1e-9));
}

TEST_CASE("coherent states displace without changing the variances") {
  const Complex alpha(0.7, -0.4);
  const auto psi = build(StateSpec::coherent(alpha));
  const auto& space = space_of(psi);
  CHECK(expectation(psi, x_on(space)) == doctest::Approx(1.4).epsilon(1e-9));
  CHECK(expectation(psi, p_on(space)) == doctest::Approx(-0.8).epsilon(1e-9));
  CHECK(variance(psi, x_on(space)) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(variance(psi, p_on(space)) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("number states carry variance 2n + 1") {
  const auto three = build(StateSpec::number(3));
  CHECK(variance(three, x_on(space_of(three))) == doctest::Approx(7.0).epsilon(1e-12));
  CHECK(space_of(three).total_dim() == 31);
}

TEST_CASE("two-mode squeezed state matches its Schmidt profile") {
  const auto spec = StateSpec::tmss(0.8).with_cutoff(40);
  const auto psi = build(spec);
  const auto& joint = space_of(psi);
  CHECK(joint.mode_count() == 2);

  const auto& amps = std::get<StateVector>(psi).amplitudes();
  CHECK(std::abs(amps(0) - Complex(1.0 / std::cosh(0.8))) < 1e-6);
  const double ratio = (amps(1 * 41 + 1) / amps(0)).real();
  CHECK(ratio == doctest::Approx(std::tanh(0.8)).epsilon(1e-9));

  // reduced state is diagonal with the Schmidt weights
  const auto reduced = reduce_to_subsystem(psi, Subsystem::a);
  double off_diag = 0.0;
  double diag_sum = 0.0;
  for (Index i = 0; i < 41; ++i) {
    diag_sum += reduced.matrix()(i, i).real();
    for (Index j = 0; j < 41; ++j)
      if (i != j) off_diag = std::max(off_diag, std::abs(reduced.matrix()(i, j)));
  }
  CHECK(off_diag < 1e-12);
  CHECK(diag_sum == doctest::Approx(1.0).epsilon(1e-8));

  // marginal x variance on A grows as cosh(2r)
  CHECK(variance(psi, x_on(joint, 0)) ==
        doctest::Approx(std::cosh(1.6)).epsilon(1e-9));
}

TEST_CASE("insufficient cutoffs are rejected as truncation overflow") {
  CHECK_THROWS_WITH_AS(build(StateSpec::squeezed(1.0).with_cutoff(4)),
                       doctest::Contains("truncation overflow"), NumericalError);
  CHECK_THROWS_AS(build(StateSpec::number(10).with_cutoff(5)), NumericalError);
  CHECK_THROWS_AS(build(StateSpec::tmss(0.9).with_cutoff(3)), NumericalError);
  CHECK_THROWS_AS(build(StateSpec::coherent(Complex(5.0, 0.0)).with_cutoff(8)),
                  NumericalError);
}

TEST_CASE("default cutoffs are minimal above the floor") {
  const auto tmss_spec = StateSpec::tmss(0.8);
  const Index n_max = resolved_cutoff(tmss_spec);
  const double t2 = std::tanh(0.8) * std::tanh(0.8);
  CHECK(std::pow(t2, static_cast<double>(n_max + 1)) < 1e-8);
  CHECK(std::pow(t2, static_cast<double>(n_max)) >= 1e-8);

  CHECK(resolved_cutoff(StateSpec::vacuum()) == 30);
  CHECK(resolved_cutoff(StateSpec::number(45)) == 45);
  CHECK(resolved_cutoff(StateSpec::squeezed(2.0)) > 30);
  CHECK_THROWS_AS(resolved_cutoff(StateSpec::singlet().with_cutoff(5)),
                  std::invalid_argument);
}

TEST_CASE("spin coherent states point along the requested direction") {
  const double theta = M_PI / 3.0;
  const double phi = M_PI / 5.0;
  const auto psi = build(StateSpec::spin_coherent(1.5, theta, phi));
  const auto ops = spin_ladder_ops(1.5);
  CHECK(expectation(psi, ops.jz) == doctest::Approx(1.5 * std::cos(theta)).epsilon(1e-12));
  CHECK(expectation(psi, ops.jx) ==
        doctest::Approx(1.5 * std::sin(theta) * std::cos(phi)).epsilon(1e-12));
  CHECK(expectation(psi, ops.jy) ==
        doctest::Approx(1.5 * std::sin(theta) * std::sin(phi)).epsilon(1e-12));

  // theta = 0 leaves the top ladder state untouched
  const auto top = build(StateSpec::spin_coherent(2.0, 0.0, 0.0));
  CHECK(expectation(top, spin_ladder_ops(2.0).jz) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(variance(top, spin_ladder_ops(2.0).jy) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("singlet reduces to the maximally mixed qubit") {
  const auto psi = build(StateSpec::singlet());
  const auto reduced = reduce_to_subsystem(psi, Subsystem::a);
  CHECK(reduced.matrix()(0, 0).real() == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(reduced.matrix()(1, 1).real() == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(std::abs(reduced.matrix()(0, 1)) < 1e-12);
}

TEST_CASE("mixtures share a cutoff and obey the law of total variance") {
  const auto spec = StateSpec::mixture({{0.3, StateSpec::coherent(Complex(1.0, 0.0))},
                                        {0.7, StateSpec::squeezed(0.4)}});
  const auto rho = build(spec);
  CHECK(!is_pure(rho));
  const auto& space = space_of(rho);
  CHECK(space.total_dim() == 31);
  const double expected = 0.3 * 1.0 + 0.7 * std::exp(0.8) + 0.3 * 1.96 + 0.7 * 0.36;
  CHECK(variance(rho, x_on(space)) == doctest::Approx(expected).epsilon(1e-6));

  CHECK_THROWS_AS(build(StateSpec::mixture({{0.5, StateSpec::vacuum()}})),
                  std::invalid_argument);
  CHECK_THROWS_AS(build(StateSpec::mixture({{1.5, StateSpec::vacuum()},
                                            {-0.5, StateSpec::vacuum()}})),
                  std::invalid_argument);
  CHECK_THROWS_AS(build(StateSpec::mixture({{0.5, StateSpec::vacuum()},
                                            {0.5, StateSpec::singlet()}})),
                  std::invalid_argument);
}

TEST_CASE("localized-mixture fixture keeps the size-S momentum bound") {
  for (double S : {1.0, 2.0, 4.0, 8.0}) {
    const auto rho = sscopic_mixture_fixture(S, 4, 2026);
    const double vp = variance(rho, p_on(rho.space()));
    // component spread is pinned at 16/S^2, displacements leave p alone
    CHECK(vp == doctest::Approx(16.0 / (S * S)).epsilon(1e-6));
    CHECK(vp >= 4.0 / (S * S));
  }

  // a single undisplaced component is just the squeezed state
  const auto single = sscopic_mixture_fixture(4.0, 1, 99);
  CHECK(single.purity() == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(expectation(single, x_on(single.space())) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(variance(single, x_on(single.space())) == doctest::Approx(1.0).epsilon(1e-8));

  // reruns with one seed are bit-for-bit identical
  const auto again = sscopic_mixture_fixture(4.0, 4, 2026);
  const auto first = sscopic_mixture_fixture(4.0, 4, 2026);
  CHECK(max_abs(again.matrix() - first.matrix()) == 0.0);
}
