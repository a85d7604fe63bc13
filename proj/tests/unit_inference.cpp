#include "doctest.h"

#include <cmath>

#include "sscope/inference.hpp"
#include "sscope/rng.hpp"
#include "sscope/states.hpp"

using namespace sscope;

namespace {

StateVector random_state(const SpaceDescriptor& space, CounterRng& rng) {
  Vector v(space.total_dim());
  for (Index i = 0; i < v.size(); ++i) v(i) = Complex(rng.normal(), rng.normal());
  v /= v.norm();
  return StateVector(space, v);
}

Matrix random_hermitian(Index dim, CounterRng& rng) {
  Matrix m(dim, dim);
  for (Index i = 0; i < dim; ++i)
    for (Index j = 0; j < dim; ++j) m(i, j) = Complex(rng.normal(), rng.normal());
  return (m + m.adjoint()) / 2.0;
}

}  // namespace

TEST_CASE("conditioning a product state is vacuous") {
  const auto space = fock_space({6, 6});
  CounterRng rng(41, 0);
  const auto pa = random_state(fock_space({6}), rng);
  const auto pb = random_state(fock_space({6}), rng);
  Vector joint(36);
  for (Index i = 0; i < 6; ++i)
    for (Index j = 0; j < 6; ++j)
      joint(i * 6 + j) = pa.amplitudes()(i) * pb.amplitudes()(j);
  const StateVector psi(space, joint);

  const Observable xb = quadrature_op(fock_space({6}), 0, 0.0);
  const auto table = conditional_table(psi, xb, std::nullopt);

  const Matrix expected = pa.amplitudes() * pa.amplitudes().adjoint();
  for (const auto& bin : table.bins()) {
    CHECK(max_abs(bin.state.matrix() - expected) < 1e-9);
  }

  const Observable xa = quadrature_op(fock_space({6}), 0, 0.0);
  CHECK(inferred_variance(table, xa) ==
        doctest::Approx(variance(pa, xa)).epsilon(1e-9));
  const Observable pa_op = quadrature_op(fock_space({6}), 0, M_PI / 2.0);
  const auto c = hermitized_commutator(xa, pa_op);
  CHECK(inferred_mean_modulus(table, c) ==
        doctest::Approx(std::abs(expectation(pa, c))).epsilon(1e-9));
}

TEST_CASE("photon-number conditioning of a twin beam selects Fock levels") {
  const auto psi = build(StateSpec::tmss(0.6).with_cutoff(15));
  const Observable nb = number_op(fock_space({16}), 0);
  const auto table = conditional_table(psi, nb, std::nullopt);

  CHECK(table.bins().size() == 16);
  const double t2 = std::tanh(0.6) * std::tanh(0.6);
  for (std::size_t k = 0; k < table.bins().size(); ++k) {
    const auto& bin = table.bins()[k];
    CHECK(bin.outcome == doctest::Approx(static_cast<double>(k)).epsilon(1e-9));
    // conditional A-state is the matching Fock projector
    CHECK(bin.state.matrix()(k, k).real() == doctest::Approx(1.0).epsilon(1e-9));
    if (k > 0) {
      CHECK(bin.probability / table.bins()[k - 1].probability ==
            doctest::Approx(t2).epsilon(1e-6));
    }
  }
}

TEST_CASE("spin conditioning of the singlet gives two even branches") {
  const auto psi = build(StateSpec::singlet());
  const Observable jzb = spin_ladder_ops(0.5).jz;
  const auto table = conditional_table(psi, jzb, std::nullopt);

  REQUIRE(table.bins().size() == 2);
  CHECK(table.bins()[0].probability == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(table.bins()[1].probability == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(table.bins()[0].outcome == doctest::Approx(-0.5).epsilon(1e-9));
  CHECK(table.bins()[1].outcome == doctest::Approx(0.5).epsilon(1e-9));

  // perfect anticorrelation pins J_Z on A exactly
  CHECK(inferred_variance(table, spin_ladder_ops(0.5).jz) ==
        doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("quadrature inference on the twin beam reaches the squeezed level") {
  const auto psi = build(StateSpec::tmss(0.8).with_cutoff(40));
  const auto b_space = fock_space({41});
  const Observable pb = quadrature_op(b_space, 0, M_PI / 2.0);
  const auto binning = default_quadrature_binning(psi, pb);
  CHECK(binning.bin_count == 200);
  CHECK(binning.hi == doctest::Approx(6.0 * std::sqrt(std::cosh(1.6))).epsilon(1e-6));

  const auto table = conditional_table(psi, pb, binning);
  const Observable pa = quadrature_op(b_space, 0, M_PI / 2.0);
  const double inferred = inferred_variance(table, pa);
  const double target = 1.0 / std::cosh(1.6);
  CHECK(std::abs(inferred - target) / target < 0.02);

  // x on A keeps the anti-squeezed marginal variance
  const Observable xa = quadrature_op(b_space, 0, 0.0);
  const auto joint_x = quadrature_op(space_of(psi), 0, 0.0);
  CHECK(variance(psi, joint_x) == doctest::Approx(std::cosh(1.6)).epsilon(1e-9));
  CHECK(inferred_variance(table, xa) > 1.0);  // p-conditioning cannot pin x
}

TEST_CASE("refining the binning never increases the inferred variance") {
  const auto space = fock_space({5, 9});
  CounterRng rng(57, 0);
  const Observable xb = quadrature_op(fock_space({9}), 0, 0.0);
  const Observable xa = quadrature_op(fock_space({5}), 0, 0.0);
  for (int trial = 0; trial < 5; ++trial) {
    const auto psi = random_state(space, rng);
    double previous = -1.0;
    for (int count : {2, 4, 8, 16}) {
      BinningSpec binning{-6.0, 6.0, count, TailPolicy::clip_to_edge_bins, 1e-10};
      const double v = inferred_variance(conditional_table(psi, xb, binning), xa);
      if (previous >= 0.0) CHECK(v <= previous + 1e-8);
      previous = v;
    }
    // conditioning on any information never hurts on average
    CHECK(previous <= variance(psi, quadrature_op(space, 0, 0.0)) + 1e-10);
  }
}

TEST_CASE("average conditional modulus dominates the plain modulus") {
  const auto space = fock_space({5, 6});
  CounterRng rng(58, 0);
  for (int trial = 0; trial < 10; ++trial) {
    const auto psi = random_state(space, rng);
    const Observable b(fock_space({6}), random_hermitian(6, rng), "B");
    const Observable c(fock_space({5}), random_hermitian(5, rng), "C");
    const auto table = conditional_table(psi, b, std::nullopt);
    const Observable c_joint(space, embed_on_subsystem(c.matrix(), space, Subsystem::a),
                             "C_joint");
    CHECK(inferred_mean_modulus(table, c) >=
          std::abs(expectation(psi, c_joint)) - 1e-10);
  }
}

TEST_CASE("hybrid uncertainty chain holds link by link") {
  const auto space = fock_space({5, 7});
  const auto a_space = fock_space({5});
  CounterRng rng(59, 0);
  const Observable xa = quadrature_op(a_space, 0, 0.0);
  const Observable pa = quadrature_op(a_space, 0, M_PI / 2.0);
  const auto c = hermitized_commutator(xa, pa);
  const Observable x_joint = quadrature_op(space, 0, 0.0);

  for (int trial = 0; trial < 20; ++trial) {
    const auto psi = random_state(space, rng);
    const Observable b(fock_space({7}), random_hermitian(7, rng), "B");
    const auto table = conditional_table(psi, b, std::nullopt);

    const double var_x = variance(psi, x_joint);
    const double inf_x = inferred_variance(table, xa);
    CHECK(inf_x <= var_x + 1e-10);

    double cross = 0.0;
    for (const auto& bin : table.bins()) {
      cross += bin.probability * std::sqrt(variance(bin.state, xa)) *
               std::sqrt(variance(bin.state, pa));
    }
    const double inf_p = inferred_variance(table, pa);
    CHECK(var_x * inf_p >= cross * cross - 1e-8);

    const double modulus = inferred_mean_modulus(table, c);
    CHECK(cross * cross >= modulus * modulus / 4.0 - 1e-8);
  }
}

TEST_CASE("photon-difference conditioning matches the hand-computed average") {
  // two perfectly correlated qubit pairs shared across the A/B split
  const auto space = fock_space({2, 2, 2, 2});
  Vector amps = Vector::Zero(16);
  for (Index s = 0; s < 2; ++s)
    for (Index t = 0; t < 2; ++t) amps(s * 10 + t * 5) = 0.5;
  const StateVector psi(space, amps);

  const auto pair_space = fock_space({2, 2});
  const auto b_ops = schwinger_spin_ops(pair_space, 0, 1);
  const auto table = conditional_table(psi, b_ops.jz, std::nullopt);

  REQUIRE(table.bins().size() == 3);
  CHECK(table.bins()[0].probability == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(table.bins()[1].probability == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(table.bins()[2].probability == doctest::Approx(0.25).epsilon(1e-12));

  const auto a_ops = schwinger_spin_ops(pair_space, 0, 1);
  CHECK(inferred_mean_modulus(table, a_ops.jz) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(inferred_variance(table, a_ops.jz) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("drop policy reports removed mass and renormalizes the rest") {
  const auto space = fock_space({4, 6});
  CounterRng rng(61, 0);
  const auto psi = random_state(space, rng);
  const Observable xb = quadrature_op(fock_space({6}), 0, 0.0);

  BinningSpec narrow{-2.0, 2.0, 4, TailPolicy::drop, 1e-10};
  const auto table = conditional_table(psi, xb, narrow);
  CHECK(table.dropped_mass() > 0.01);
  double total = 0.0;
  for (const auto& bin : table.bins()) total += bin.probability;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

  // recombination against the reduced state, weighted by the kept mass
  const auto clipped = conditional_table(psi, xb,
      BinningSpec{-2.0, 2.0, 4, TailPolicy::clip_to_edge_bins, 1e-10});
  CHECK(clipped.dropped_mass() < 1e-12);
  Matrix recombined = Matrix::Zero(4, 4);
  for (const auto& bin : clipped.bins())
    recombined += bin.probability * bin.state.matrix();
  CHECK(max_abs(recombined - reduce_to_subsystem(psi, Subsystem::a).matrix()) < 1e-8);

  BinningSpec hopeless{10.0, 12.0, 3, TailPolicy::drop, 1e-10};
  CHECK_THROWS_AS(conditional_table(psi, xb, hopeless), NumericalError);

  BinningSpec inverted{2.0, -2.0, 4, TailPolicy::drop, 1e-10};
  CHECK_THROWS_AS(conditional_table(psi, xb, inverted), std::invalid_argument);
  CHECK_THROWS_AS(conditional_table(psi, quadrature_op(fock_space({4}), 0, 0.0),
                                    std::nullopt),
                  std::invalid_argument);
}
