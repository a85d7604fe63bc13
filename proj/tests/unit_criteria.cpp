#include <cmath>
#include <vector>

#include "doctest.h"
#include "sscope/criteria.hpp"
#include "sscope/states.hpp"

using namespace sscope;

namespace {

Observable quadrature_on(const SpaceDescriptor& space, double theta) {
  return quadrature_op(space, 0, theta);
}

StateVector two_spin_half_product_up() {
  // |up, up> on two spin-1/2 ladders; m ascending, so up is index 1 per mode.
  const SpaceDescriptor space = spin_space({0.5, 0.5});
  Vector v = Vector::Zero(4);
  v(3) = 1.0;
  return StateVector(space, v);
}

}  // namespace

TEST_CASE("criterion id names round-trip") {
  const std::vector<CriterionId> ids = {
      CriterionId::cv_sscopic,
      CriterionId::spin_sscopic,
      CriterionId::cv_sscopic_inferred,
      CriterionId::spin_sscopic_inferred,
      CriterionId::theorem1_cv,
      CriterionId::theorem1_spin,
      CriterionId::epr_product_cv,
      CriterionId::epr_product_spin,
      CriterionId::epr_product_spin_uninf_rhs,
      CriterionId::epr_sum_spin,
      CriterionId::mr_bound,
  };
  for (const auto id : ids) {
    const auto back = criterion_id_from_string(to_string(id));
    REQUIRE(back.has_value());
    CHECK(*back == id);
  }
  CHECK_FALSE(criterion_id_from_string("not_a_criterion").has_value());
}

TEST_CASE("violation rule uses max(1e-9, 3 ci)") {
  CHECK(violation_tolerance(0.0) == doctest::Approx(1e-9));
  CHECK(violation_tolerance(1e-3) == doctest::Approx(3e-3));

  // Deficit 0.02 clears the analytic tolerance but not 3 * 0.01.
  auto tight = make_report(CriterionId::mr_bound, 0.98, 1.0, Method::analytic,
                           0.0, std::nullopt, {});
  CHECK(tight.violated);
  auto loose = make_report(CriterionId::mr_bound, 0.98, 1.0, Method::sampled,
                           0.01, std::nullopt, {});
  CHECK_FALSE(loose.violated);
  CHECK(loose.tolerance == doctest::Approx(0.03));

  auto degenerate = make_report(CriterionId::mr_bound, 1.0, 0.0,
                                Method::analytic, 0.0, std::nullopt, {});
  CHECK(std::isinf(degenerate.ratio));
  CHECK_FALSE(degenerate.violated);
}

TEST_CASE("quadrature superposition size from a plain variance") {
  auto vacuum = cv_superposition_size(1.0);
  CHECK(*vacuum.s_min == doctest::Approx(2.0).epsilon(1e-12));
  CHECK_FALSE(vacuum.violated);
  CHECK(vacuum.ratio == doctest::Approx(1.0));
  CHECK(vacuum.metadata.at("nontrivial_superposition") == "false");

  auto sharp = cv_superposition_size(0.16);
  CHECK(*sharp.s_min == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(sharp.violated);

  // Inferred variance 0.49 certifies s_min = 2 / 0.7.
  auto inferred = cv_superposition_size(0.49);
  CHECK(*inferred.s_min == doctest::Approx(2.0 / 0.7).epsilon(1e-12));

  CHECK_THROWS_AS(cv_superposition_size(0.0), std::invalid_argument);
  CHECK_THROWS_AS(cv_superposition_size(-0.1), std::invalid_argument);
}

TEST_CASE("spin superposition size from polarized coherent states") {
  const SpinOps ops2 = spin_ladder_ops(2.0);
  const auto north = build(StateSpec::spin_coherent(2.0, 0.0, 0.0));
  const double var_y = variance(north, ops2.jy);
  const double mean_z = expectation(north, ops2.jz);
  CHECK(var_y == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(mean_z == doctest::Approx(2.0).epsilon(1e-9));

  auto report = spin_superposition_size(var_y, mean_z);
  CHECK(*report.s_min == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(report.violated);
  CHECK(report.metadata.at("nontrivial_superposition") == "true");

  const SpinOps ops10 = spin_ladder_ops(10.0);
  const auto big = build(StateSpec::spin_coherent(10.0, 0.0, 0.0));
  auto big_report = spin_superposition_size(variance(big, ops10.jy),
                                            expectation(big, ops10.jz));
  CHECK(*big_report.s_min == doctest::Approx(std::sqrt(20.0)).epsilon(1e-9));

  // Equatorial coherent state: <J_Z> = 0 makes the bound vacuous.
  const auto equator = build(StateSpec::spin_coherent(2.0, M_PI / 2.0, 0.0));
  auto flat = spin_superposition_size(variance(equator, ops2.jy),
                                      expectation(equator, ops2.jz));
  CHECK(*flat.s_min == 0.0);
  CHECK(flat.metadata.count("vacuous_bound") == 1);
  CHECK_FALSE(flat.violated);
  CHECK(std::isinf(flat.ratio));

  // Spin-1/2 pole sits exactly on the benchmark.
  auto pole = spin_superposition_size(0.25, 0.5);
  CHECK(*pole.s_min == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_FALSE(pole.violated);
}

TEST_CASE("inferred quadrature size on the two-mode squeezed state") {
  const auto state = build(StateSpec::tmss(0.8).with_cutoff(40));
  const SpaceDescriptor b_space =
      subsystem_space(space_of(state), Subsystem::b);
  const Observable p_b = quadrature_on(b_space, M_PI / 2.0);

  auto report = cv_superposition_size_inferred(state, p_b, std::nullopt);
  CHECK(report.criterion_id == CriterionId::cv_sscopic_inferred);
  CHECK(report.violated);
  CHECK(*report.s_min ==
        doctest::Approx(2.0 * std::sqrt(std::cosh(1.6))).epsilon(0.01));
  CHECK(report.metadata.at("cutoffs") == "40,40");

  // Shifting the B observable relabels outcomes but not conditional states.
  const Observable shifted(b_space,
                           p_b.matrix() +
                               3.0 * Matrix::Identity(b_space.total_dim(),
                                                      b_space.total_dim()),
                           "p_b_shifted");
  auto shifted_report =
      cv_superposition_size_inferred(state, shifted, std::nullopt);
  CHECK(*shifted_report.s_min ==
        doctest::Approx(*report.s_min).epsilon(1e-12));
}

TEST_CASE("inferred spin size caps at the spectral extent on the singlet") {
  const auto singlet = build(StateSpec::singlet());
  const SpinOps half = spin_ladder_ops(0.5);

  auto report = spin_superposition_size_inferred(singlet, half.jy, std::nullopt);
  CHECK(report.criterion_id == CriterionId::spin_sscopic_inferred);
  CHECK(report.lhs <= 1e-12);
  CHECK(*report.s_min == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(report.metadata.count("exceeds_spectrum") == 1);
  CHECK(report.metadata.count("vacuous_bound") == 0);
}

TEST_CASE("inferred spin size drives Schwinger operators on Fock pairs") {
  // sqrt(0.8)|10;10> + sqrt(0.2)|01;01> on four modes, A = modes {0, 1}.
  const SpaceDescriptor space = fock_space({2, 2, 2, 2});
  Vector v = Vector::Zero(16);
  v(10) = std::sqrt(0.8);
  v(5) = std::sqrt(0.2);
  const AnyState state = StateVector(space, v);

  const SpaceDescriptor b_space = subsystem_space(space, Subsystem::b);
  const SpinOps b_ops = schwinger_spin_ops(b_space, 0, 1);

  auto report = spin_superposition_size_inferred(state, b_ops.jz, std::nullopt);
  CHECK(report.criterion_id == CriterionId::spin_sscopic_inferred);
  CHECK(report.lhs == doctest::Approx(0.25).epsilon(1e-9));
  CHECK(report.rhs == doctest::Approx(0.09).epsilon(1e-9));
  CHECK(*report.s_min == doctest::Approx(0.6).epsilon(1e-9));
  CHECK_FALSE(report.violated);
}

TEST_CASE("hybrid relation saturates on uncorrelated vacuum") {
  const auto state = build(StateSpec::tmss(0.0).with_cutoff(12));
  const SpaceDescriptor a_space =
      subsystem_space(space_of(state), Subsystem::a);
  const SpaceDescriptor b_space =
      subsystem_space(space_of(state), Subsystem::b);

  auto report = theorem1_report(state, quadrature_on(a_space, 0.0),
                                quadrature_on(a_space, M_PI / 2.0),
                                quadrature_on(b_space, 0.0), std::nullopt);
  CHECK(report.criterion_id == CriterionId::theorem1_cv);
  CHECK(report.lhs == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(report.rhs == doctest::Approx(1.0).epsilon(1e-9));
  CHECK_FALSE(report.violated);
}

TEST_CASE("hybrid relation holds with slack on the two-mode squeezed state") {
  const auto state = build(StateSpec::tmss(0.8).with_cutoff(40));
  const SpaceDescriptor a_space =
      subsystem_space(space_of(state), Subsystem::a);
  const SpaceDescriptor b_space =
      subsystem_space(space_of(state), Subsystem::b);

  auto report = theorem1_report(state, quadrature_on(a_space, 0.0),
                                quadrature_on(a_space, M_PI / 2.0),
                                quadrature_on(b_space, M_PI / 2.0),
                                std::nullopt);
  // var(x_A) = cosh(1.6) while the inferred p variance is 1/cosh(1.6), so
  // the product sits at the vacuum level and the relation is saturated.
  CHECK(report.lhs == doctest::Approx(1.0).epsilon(0.01));
  CHECK(report.rhs == doctest::Approx(1.0).epsilon(0.01));
  CHECK_FALSE(report.violated);
  CHECK(std::stod(report.metadata.at("a_variance")) ==
        doctest::Approx(std::cosh(1.6)).epsilon(0.01));
}

TEST_CASE("hybrid relation never trips on the singlet even with zero rhs") {
  const auto singlet = build(StateSpec::singlet());
  const SpinOps half = spin_ladder_ops(0.5);
  auto report =
      theorem1_report(singlet, half.jx, half.jy, half.jy, std::nullopt);
  CHECK(report.criterion_id == CriterionId::theorem1_spin);
  CHECK(report.lhs <= 1e-9);
  CHECK(report.rhs <= 1e-9);
  CHECK_FALSE(report.violated);
}

TEST_CASE("EPR product criterion flags the two-mode squeezed state") {
  const auto state = build(StateSpec::tmss(0.8).with_cutoff(40));
  const SpaceDescriptor a_space =
      subsystem_space(space_of(state), Subsystem::a);
  const SpaceDescriptor b_space =
      subsystem_space(space_of(state), Subsystem::b);

  auto report = epr_product_report(
      state, quadrature_on(a_space, 0.0), quadrature_on(a_space, M_PI / 2.0),
      quadrature_on(b_space, 0.0), quadrature_on(b_space, M_PI / 2.0),
      std::nullopt);
  CHECK(report.criterion_id == CriterionId::epr_product_cv);
  const double expected = 1.0 / (std::cosh(1.6) * std::cosh(1.6));
  CHECK(report.lhs == doctest::Approx(expected).epsilon(0.01));
  CHECK(report.lhs == doctest::Approx(0.1505).epsilon(0.01));
  CHECK(report.rhs == doctest::Approx(1.0).epsilon(0.01));
  CHECK(report.violated);
}

TEST_CASE("EPR product ratio decreases strictly with squeezing") {
  double previous = 2.0;
  for (const double r : {0.2, 0.4, 0.6, 0.8, 1.0, 1.2}) {
    const auto state = build(StateSpec::tmss(r));
    const SpaceDescriptor a_space =
        subsystem_space(space_of(state), Subsystem::a);
    const SpaceDescriptor b_space =
        subsystem_space(space_of(state), Subsystem::b);
    auto report = epr_product_report(
        state, quadrature_on(a_space, 0.0), quadrature_on(a_space, M_PI / 2.0),
        quadrature_on(b_space, 0.0), quadrature_on(b_space, M_PI / 2.0),
        std::nullopt);
    CHECK(report.ratio < previous);
    previous = report.ratio;
  }
  CHECK(previous < 0.04);
}

TEST_CASE("EPR product criterion on the singlet") {
  const auto singlet = build(StateSpec::singlet());
  const SpinOps half = spin_ladder_ops(0.5);

  auto report = epr_product_report(singlet, half.jx, half.jy, half.jx,
                                   half.jy, std::nullopt, half.jz);
  CHECK(report.criterion_id == CriterionId::epr_product_spin);
  CHECK(report.lhs <= 1e-12);
  CHECK(report.rhs == doctest::Approx(0.0625).epsilon(1e-9));
  CHECK(report.violated);
  CHECK(report.metadata.at("c_setting") == half.jz.label());

  // The unconditional-RHS variant loses the singlet: <J_Z^A> = 0.
  auto weak = epr_product_report(singlet, half.jx, half.jy, half.jx, half.jy,
                                 std::nullopt, std::nullopt, true);
  CHECK(weak.criterion_id == CriterionId::epr_product_spin_uninf_rhs);
  CHECK(weak.rhs <= 1e-30);
  CHECK_FALSE(weak.violated);
  CHECK(weak.metadata.at("rhs_variant") == "unconditional");
}

TEST_CASE("unconditional RHS variant rejects quadrature subsystems") {
  const auto state = build(StateSpec::tmss(0.3).with_cutoff(8));
  const SpaceDescriptor a_space =
      subsystem_space(space_of(state), Subsystem::a);
  const SpaceDescriptor b_space =
      subsystem_space(space_of(state), Subsystem::b);
  CHECK_THROWS_AS(
      epr_product_report(state, quadrature_on(a_space, 0.0),
                         quadrature_on(a_space, M_PI / 2.0),
                         quadrature_on(b_space, 0.0),
                         quadrature_on(b_space, M_PI / 2.0), std::nullopt,
                         std::nullopt, true),
      std::invalid_argument);
}

TEST_CASE("EPR sum criterion separates singlet from product pairs") {
  const SpinOps half = spin_ladder_ops(0.5);
  const std::vector<Observable> a_obs = {half.jx, half.jy};
  const std::vector<Observable> b_set = {half.jx, half.jy};
  const double d = spin_sum_bound(0.5);
  CHECK(d == doctest::Approx(0.25));

  const auto singlet = build(StateSpec::singlet());
  auto flagged = epr_sum_report(singlet, a_obs, b_set, d, std::nullopt);
  CHECK(flagged.criterion_id == CriterionId::epr_sum_spin);
  CHECK(flagged.lhs <= 1e-12);
  CHECK(flagged.violated);

  const AnyState product = two_spin_half_product_up();
  auto clean = epr_sum_report(product, a_obs, b_set, d, std::nullopt);
  CHECK(clean.lhs == doctest::Approx(0.5).epsilon(1e-9));
  CHECK_FALSE(clean.violated);
  CHECK(clean.ratio == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("EPR sum criterion accepts longer observable lists") {
  const SpaceDescriptor space = spin_space({0.5, 0.5});
  const AnyState mixed =
      DensityMatrix(space, Matrix::Identity(4, 4) / 4.0);
  const SpinOps half = spin_ladder_ops(0.5);
  const std::vector<Observable> a_obs = {half.jx, half.jy, half.jz};

  auto report = epr_sum_report(mixed, a_obs, a_obs, 0.5, std::nullopt);
  CHECK(report.lhs == doctest::Approx(0.75).epsilon(1e-9));
  CHECK_FALSE(report.violated);

  CHECK_THROWS_AS(epr_sum_report(mixed, {}, {}, 0.5, std::nullopt),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      epr_sum_report(mixed, a_obs, {half.jx}, 0.5, std::nullopt),
      std::invalid_argument);
  CHECK_THROWS_AS(epr_sum_report(mixed, a_obs, a_obs, 0.0, std::nullopt),
                  std::invalid_argument);
}

TEST_CASE("mixture bound values and reports") {
  CHECK(mr_bound(2.0) == doctest::Approx(1.0));
  CHECK(mr_bound(4.0) == doctest::Approx(0.25));
  CHECK_THROWS_AS(mr_bound(0.0), std::invalid_argument);
  CHECK_THROWS_AS(mr_bound(-3.0), std::invalid_argument);

  // var(p) = exp(-2r) = 0.16, so S = 4 is excluded and S = 5 is the edge.
  // The generous cutoff keeps the truncated variance within ~1e-15 of the
  // analytic value; the boundary comparison below needs that headroom.
  const double r = 0.5 * std::log(1.0 / 0.16);
  const auto state = build(StateSpec::squeezed(r).with_cutoff(120));
  auto excluded = mr_bound_report(state, 4.0);
  CHECK(excluded.criterion_id == CriterionId::mr_bound);
  CHECK(excluded.lhs == doctest::Approx(0.16).epsilon(1e-6));
  CHECK(excluded.rhs == doctest::Approx(0.25));
  CHECK(excluded.violated);

  auto edge = mr_bound_report(state, 5.0);
  CHECK(edge.rhs == doctest::Approx(0.16));
  CHECK_FALSE(edge.violated);

  const auto pair = build(StateSpec::tmss(0.3).with_cutoff(8));
  CHECK_THROWS_AS(mr_bound_report(pair, 4.0), std::invalid_argument);
}
