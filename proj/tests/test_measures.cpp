#include "doctest.h"

#include "mixedmop/errors.hpp"
#include "mixedmop/measures.hpp"

using namespace mixedmop;

namespace {
bool near(const Real& a, const Real& b, const Real& tol) { return abs(a - b) <= tol; }
const Real tight("1e-60");
}  // namespace

TEST_CASE("integrate against Lebesgue on [-1,1]") {
    const WeightedMeasure wm(Measure::lebesgue(-1, 1, 40), {Weight()}, {Weight()});
    CHECK(near(integrate([](const Real&) { return Real(1); }, wm), 2, tight));
    CHECK(near(integrate([](const Real& x) { return x; }, wm), 0, tight));
    CHECK(near(integrate([](const Real& x) { return x * x; }, wm), Real(2) / 3, tight));
    CHECK_THROWS_AS(integrate([](const Real& x) { return x > 0 ? Real(1) / Real(0) : Real(0); }, wm), NonFinite);
}

TEST_CASE("Gauss-Legendre rule integrates polynomials exactly") {
    const Measure mu = Measure::lebesgue(0, 3, 25);
    for (int k = 0; k < 50; ++k)
        CHECK(near(integrate([k](const Real& x) { return pow(x, k); }, mu), pow(Real(3), k + 1) / (k + 1),
                   pow(Real(3), k) * Real("1e-80")));
}

TEST_CASE("evaluate_weight") {
    const Weight w = Weight::constant(Real("2.5"));
    CHECK(w(Real("0.3")) == Real("2.5"));
    const Weight t = Weight().with_times({Real("0.1")}, +1);
    CHECK(near(t(2), exp(Real("0.2")), tight));
    const Weight s = Weight().with_factor({WeightFactor::Kind::linear, Real(-2), 0, 1});
    CHECK(s(0) == 2);
    const Weight b = Weight().with_factor({WeightFactor::Kind::quadratic, 0, 1, 1});
    CHECK(near(b(Real("0.5")), Real("1.25"), tight));
}

TEST_CASE("pole and sign checks") {
    const Measure mu = Measure::lebesgue(-1, 1, 20);
    const Weight pole = Weight().with_factor({WeightFactor::Kind::linear, Real("0.5"), 0, -1});
    CHECK_THROWS_AS(WeightedMeasure(mu, {pole}, {Weight()}).validate(), PoleOnSupport);
    const Weight edge = Weight().with_factor({WeightFactor::Kind::linear, Real("1.0005"), 0, -1});
    CHECK_THROWS_AS(WeightedMeasure(mu, {edge}, {Weight()}).validate(), PoleOnSupport);
    const Weight zero = Weight().with_factor({WeightFactor::Kind::linear, Real("0.2"), 0, 1});
    CHECK_THROWS_AS(WeightedMeasure(mu, {zero}, {Weight()}).validate(), SignFlip);
    const Weight fine = Weight().with_factor({WeightFactor::Kind::linear, Real(-3), 0, -1});
    CHECK_NOTHROW(WeightedMeasure(mu, {fine}, {Weight::exponential(2)}).validate());
    // |x - lambda|^2 stays positive for complex lambda
    const Weight bin = Weight().with_factor({WeightFactor::Kind::quadratic, Real("0.1"), Real("0.3"), 1});
    CHECK_NOTHROW(WeightedMeasure(mu, {bin}, {Weight()}).validate());
}

TEST_CASE("elementary Schur polynomials") {
    const std::vector<Real> t{Real("0.3"), Real("-0.7"), Real("0.2")};
    const auto S = elementary_schur(t, 6);
    CHECK(S[0] == 1);
    CHECK(near(S[1], t[0], tight));
    CHECK(near(S[2], t[1] + t[0] * t[0] / 2, tight));
    // generating identity at z = 0.1
    const Real z("0.1");
    const auto S30 = elementary_schur(t, 30);
    Real lhs = exp(t[0] * z + t[1] * z * z + t[2] * z * z * z), rhs = 0;
    for (int j = 30; j >= 0; --j) rhs = rhs * z + S30[static_cast<std::size_t>(j)];
    CHECK(near(lhs, rhs, Real("1e-10")));
}

TEST_CASE("property: deformation additivity and Miwa factor") {
    const Weight base = Weight::exponential(Real("0.4"));
    const std::vector<Real> t1{Real("0.1"), Real("-0.2")}, t2{Real("0.05"), Real("0.3"), Real("0.01")};
    const std::vector<Real> sum{t1[0] + t2[0], t1[1] + t2[1], t2[2]};
    for (const Real x : {Real("-0.9"), Real("0.1"), Real("0.77")}) {
        const Real a = base.with_times(t1, 1).with_times(t2, 1)(x);
        const Real b = base.with_times(sum, 1)(x);
        CHECK(abs(a - b) <= Real("1e-12") * abs(b));
    }
    const Real z(3);
    const Weight via_times = base.with_times(miwa_times(z, 200), -1);
    const Weight via_factor = base.with_factor({WeightFactor::Kind::miwa, z, 0, 1});
    for (const Real x : {Real("-1"), Real("0.2"), Real("1")})
        CHECK(abs(via_times(x) - via_factor(x)) <= Real("1e-10") * abs(via_factor(x)));
}

TEST_CASE("Hausdorff check") {
    std::vector<Real> leb, alt, geo;
    for (int i = 0; i < 100; ++i) {
        leb.push_back(Real(1) / (i + 1));
        alt.push_back(i % 2 ? Real(-1) : Real(1));
        geo.push_back(pow(Real(2), -i));
    }
    CHECK(hausdorff_check(leb, 20, 20, false).verdict == HausdorffVerdict::solvable_positive);
    CHECK(hausdorff_check(alt, 20, 20, false).verdict == HausdorffVerdict::fails);
    const auto g = hausdorff_check(geo, 20, 20, true);
    CHECK(g.verdict == HausdorffVerdict::solvable_positive);
    CHECK(g.restricted_pass.value());
    CHECK_FALSE(hausdorff_check(leb, 20, 20, true).restricted_pass.value());
    std::vector<Real> neg;
    for (const Real& v : geo) neg.push_back(-v);
    CHECK(hausdorff_check(neg, 20, 20, false).verdict == HausdorffVerdict::solvable_negative);
    CHECK(hausdorff_check(std::vector<Real>(5, Real(1)), 20, 20, false).verdict == HausdorffVerdict::inconclusive);
}

TEST_CASE("property: atomic positive measures pass the Hausdorff test") {
    const std::vector<Measure> atoms = {
        Measure::atomic({Real("0.1"), Real("0.5"), Real("0.9")}, {Real(1), Real(2), Real("0.5")}),
        Measure::atomic({Real("-0.8"), Real("-0.2"), Real("0.3"), Real("0.95")}, {Real(1), Real(1), Real(3), Real(1)}),
        Measure::atomic({Real(-1), Real(0), Real(1)}, {Real("0.25"), Real("0.5"), Real("0.25")}),
    };
    for (const Measure& mu : atoms)
        CHECK(hausdorff_check(unit_interval_moments(mu, 60), 25, 25, false).verdict ==
              HausdorffVerdict::solvable_positive);
}

TEST_CASE("inverse Nikishin recursion") {
    CoefficientTable one{std::vector<Real>(80)};
    for (int i = 0; i < 80; ++i) one[0][static_cast<std::size_t>(i)] = pow(Real(3), -i);
    CHECK(nikishin_inverse(one, Real("1e-12")).success);

    CoefficientTable dup(2, std::vector<Real>(80));
    for (int i = 0; i < 80; ++i) dup[0][static_cast<std::size_t>(i)] = dup[1][static_cast<std::size_t>(i)] = pow(Real(2), -i);
    const NikishinReport rep = nikishin_inverse(dup, Real("1e-12"));
    REQUIRE(rep.success);
    const auto& th = rep.theta.at(1).at(1);
    CHECK(abs(th[0] - 1) < Real("1e-12"));
    for (std::size_t i = 1; i < th.size(); ++i) CHECK(abs(th[i]) < Real("1e-12"));
    CHECK(rep.max_residual < Real("1e-12"));

    CoefficientTable bad = dup;
    for (int i = 0; i < 80; ++i) bad[1][static_cast<std::size_t>(i)] = i % 2 ? Real(-1) : Real(1);
    const NikishinReport r2 = nikishin_inverse(bad, Real("1e-12"));
    CHECK_FALSE(r2.success);
    CHECK(r2.failure.find("C[2,1]") != std::string::npos);

    // admissible first column but no Hankel solution
    CoefficientTable inc(2, std::vector<Real>(80));
    for (int i = 0; i < 80; ++i) {
        inc[0][static_cast<std::size_t>(i)] = pow(Real(2), -i);
        inc[1][static_cast<std::size_t>(i)] = pow(Real(3), -i) + pow(Real(5), -i);
    }
    CHECK_THROWS_AS(nikishin_inverse(inc, Real("1e-12")), IncompatibleSystem);
}

TEST_CASE("M-Nikishin weights") {
    const Measure half = Measure::atomic({Real("0.5")}, {Real(1)});
    const Measure origin = Measure::atomic({Real(0)}, {Real(1)});
    const auto w = mnikishin_weights({half, origin});
    for (const Real x : {Real(-1), Real("0.3"), Real(1)}) {
        CHECK(abs(w[0](x) - 1 / (1 - x / 2)) < tight);
        CHECK(abs(w[1](x) - w[0](x)) < tight);
    }
    const Measure mixed = Measure::atomic({Real("0.2"), Real("0.7")}, {Real(2), Real(3)});
    const auto w2 = mnikishin_weights({mixed, half});
    CHECK(abs(w2[0](0) - 5) < tight);
    CHECK(abs(w2[1](0) - (2 / (1 - Real("0.1")) + 3 / (1 - Real("0.35")))) < tight);
    const WeightedMeasure wm(Measure::lebesgue(-1, 1, 30), w2, {Weight()});
    CHECK_NOTHROW(wm.validate());

    CHECK_THROWS_AS(mnikishin_weights({Measure::atomic({Real(1)}, {Real(1)})}), ConstraintViolated);
    CHECK_THROWS_AS(mnikishin_weights({Measure::lebesgue(0, 1, 200)}), ConstraintViolated);
}

TEST_CASE("Taylor table of generated weights feeds the inverse recursion") {
    const Measure half = Measure::atomic({Real("0.5")}, {Real(1)});
    const Measure origin = Measure::atomic({Real(0)}, {Real(1)});
    const Measure mixed = Measure::atomic({Real("0.2"), Real("0.7")}, {Real(2), Real(3)});
    const auto w = mnikishin_weights({mixed, half});
    const CoefficientTable tab = mnikishin_coefficients({mixed, half}, 200);
    const Real x("0.01");
    for (std::size_t j = 0; j < 2; ++j) {
        Real s = 0, xp = 1;
        for (const Real& c : tab[j]) {
            s += c * xp;
            xp *= x;
        }
        CHECK(abs(s - w[j](x)) < tight);
    }
    // sigma_2 = delta_0 has transform 1, so theta_{2,2} = (1, 0, 0, ...)
    const NikishinReport rep = nikishin_inverse(mnikishin_coefficients({mixed, origin}, 200), Real("1e-12"));
    INFO(rep.failure);
    REQUIRE(rep.success);
    const auto& th = rep.theta.at(1).at(1);
    CHECK(abs(th[0] - 1) < Real("1e-12"));
    for (std::size_t i = 1; i < th.size(); ++i) CHECK(abs(th[i]) < Real("1e-12"));
    // a finitely supported sigma_1 leaves the Hankel systems underdetermined; the minimal
    // solution for sigma_2 = delta_{1/2} is not a moment sequence
    const NikishinReport r2 = nikishin_inverse(tab, Real("1e-12"));
    CHECK(r2.max_residual < Real("1e-12"));
    CHECK_FALSE(r2.success);
}
