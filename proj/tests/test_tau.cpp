#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "mixedmop/errors.hpp"
#include "mixedmop/linalg.hpp"
#include "mixedmop/tau.hpp"

using namespace mixedmop;

namespace {

const Composition kOne({1});
const Composition kN1({2, 1});
const Composition kN2({1, 1});

GramSource miwa(const WeightedMeasure& wm, const Composition& n1, const Composition& n2, bool bar, int ch, const Real& z,
                int power) {
    const WeightFactor f{WeightFactor::Kind::miwa, z, 0, power};
    const auto c = static_cast<std::size_t>(ch);
    if (bar) return GramSource(wm.with_w2(ch, wm.w2()[c].with_factor(f)), n1, n2);
    return GramSource(wm.with_w1(ch, wm.w1()[c].with_factor(f)), n1, n2);
}

bool same_up_to(const Real& a, const Real& b, const Real& rel) {
    return abs(a - b) <= rel * std::max(Real(1e-300), Real(abs(b)));
}

ShiftConfig mixed_cfg() {
    ShiftConfig cfg;
    cfg.base = fixtures::atomic_mixed();
    cfg.n1 = kN1;
    cfg.n2 = kN2;
    cfg.L = 6;
    auto seq = [](const char* f0, const char* f1, const char* b0) {
        LambdaSequence s;
        s.forward = {{Real(f0)}, {Real(f1)}};
        s.backward = {{Real(b0)}};
        return s;
    };
    cfg.lambda = {seq("-1.5", "-1.7", "-1.9"), seq("-1.3", "-2.1", "-1.6")};
    cfg.lambda_bar = {seq("-1.8", "-2.4", "-2.2"), seq("-1.4", "-2.2", "-2.6")};
    return cfg;
}

ShiftConfig legendre_cfg() {
    ShiftConfig cfg;
    cfg.base = fixtures::legendre();
    cfg.n1 = kOne;
    cfg.n2 = kOne;
    cfg.L = 4;
    cfg.lambda = {LambdaSequence::constant(Real(-2))};
    cfg.lambda_bar = {LambdaSequence::constant(Real(-3))};
    return cfg;
}

FlowPoint origin(int p1, int p2) { return {FlowTimes::zero(p1, p2, 2), std::vector<int>(p1, 0), std::vector<int>(p2, 0)}; }

}  // namespace

TEST_CASE("Legendre tau functions") {
    const GramSource src(fixtures::legendre(), kOne, kOne);
    const auto t = tau_table(src, 5);
    CHECK(abs(t.tau[0] - 1) == 0);
    CHECK(abs(t.tau[2] - Real(4) / 3) < 1e-90);
    for (int l = 0; l <= 5; ++l) {
        REQUIRE(t.minus[static_cast<std::size_t>(l)][0]);
        CHECK(*t.minus[static_cast<std::size_t>(l)][0] == t.tau[static_cast<std::size_t>(l)]);
    }
    const auto f = gauss_borel(MomentMatrix(fixtures::legendre(), kOne, kOne, 8));
    CHECK(tau_ratio_residual(t, f) < 1e-9);
}

TEST_CASE("tau ratio and fixed points on the mixed system") {
    const auto wm = fixtures::atomic_mixed();
    const GramSource src(wm, kN1, kN2);
    const int lmax = 6;
    const auto t = tau_table(src, lmax);
    CHECK(tau_ratio_residual(t, gauss_borel(MomentMatrix(wm, kN1, kN2, 10))) < 1e-9);
    for (int l = 0; l <= lmax; ++l) {
        const auto sl = static_cast<std::size_t>(l);
        const auto a1 = static_cast<std::size_t>(channel_of(l, kN1));
        const auto a2 = static_cast<std::size_t>(channel_of(l, kN2));
        CHECK(t.plus[sl][a1] == t.tau[sl + 1]);
        CHECK(t.bar_plus[sl][a2] == t.tau[sl + 1]);
        for (std::size_t a = 0; a < 2; ++a) {
            CHECK(t.minus[sl][a] == t.plus_minus[sl][a1][a]);
            CHECK(t.minus[sl][a] == t.minus_minus[sl][a2][a]);
        }
        for (std::size_t b = 0; b < 2; ++b) {
            CHECK(t.bar_minus[sl][b] == t.bar_plus_minus[sl][a2][b]);
            CHECK(t.bar_minus[sl][b] == t.minus_minus[sl][b][a1]);
        }
    }
    // the first level has no minus integer in channel 1
    CHECK_FALSE(t.minus[0][1].has_value());
}

TEST_CASE("sign dictionary on the simplest ladder") {
    const auto wm = fixtures::atomic_mixed();
    std::mt19937 gen(11);
    std::uniform_int_distribution<int> deg(1, 3), ch(0, 1);
    const Real rel("1e-60");
    int checked = 0;
    while (checked < 20) {
        std::vector<int> nu1{deg(gen), deg(gen)};
        std::vector<int> nu2{deg(gen), deg(gen) - 1};
        if (nu1[0] + nu1[1] != nu2[0] + nu2[1] + 1) continue;
        const Composition n1(nu1);
        const Composition n2({nu2[0], nu2[1] + 1});
        const int l = nu1[0] + nu1[1] - 1;
        const GramSource src(wm, n1, n2);
        const auto t = tau_table(src, l);
        const auto sl = static_cast<std::size_t>(l);
        const int a = ch(gen), ap = ch(gen), b = ch(gen), bp = ch(gen);
        auto e = [](std::vector<int> v, int i, int d) {
            v[static_cast<std::size_t>(i)] += d;
            return v;
        };
        INFO("nu1 = " << nu1[0] << "," << nu1[1] << " nu2 = " << nu2[0] << "," << nu2[1] << " a=" << a << " a'=" << ap
                      << " b=" << b << " b'=" << bp);

        const auto pm = t.plus_minus[sl][static_cast<std::size_t>(a)][static_cast<std::size_t>(ap)];
        if (pm) CHECK(same_up_to(*pm, epsilon11(nu1, a, ap) * tau_degrees(src, e(e(nu1, ap, -1), a, 1), nu2), rel));

        const auto bpm = t.bar_plus_minus[sl][static_cast<std::size_t>(b)][static_cast<std::size_t>(bp)];
        if (bpm) CHECK(same_up_to(*bpm, epsilon22(nu2, b, bp) * tau_degrees(src, nu1, e(e(nu2, bp, -1), b, 1)), rel));

        const auto mm = t.minus_minus[sl][static_cast<std::size_t>(b)][static_cast<std::size_t>(a)];
        if (mm)
            CHECK(same_up_to(*mm, epsilon21(nu1, nu2, b, a) * tau_degrees(src, e(e(nu1, 1, 1), a, -1), e(e(nu2, 1, 1), b, -1)),
                             rel));

        CHECK(same_up_to(*t.minus[sl][static_cast<std::size_t>(a)],
                         epsilon11(nu1, 1, a) * tau_degrees(src, e(e(nu1, 1, 1), a, -1), nu2), rel));
        if (t.bar_minus[sl][static_cast<std::size_t>(b)])
            CHECK(same_up_to(*t.bar_minus[sl][static_cast<std::size_t>(b)],
                             epsilon22(nu2, 1, b) * tau_degrees(src, nu1, e(e(nu2, 1, 1), b, -1)), rel));
        CHECK(same_up_to(t.plus[sl][static_cast<std::size_t>(a)],
                         epsilon11(nu1, a, 1) * tau_degrees(src, e(nu1, a, 1), e(nu2, 1, 1)), rel));
        CHECK(same_up_to(t.bar_plus[sl][static_cast<std::size_t>(b)],
                         epsilon22(nu2, b, 1) * tau_degrees(src, e(nu1, 1, 1), e(nu2, b, 1)), rel));
        ++checked;
    }
}

TEST_CASE("covector expansion on 3x3 polynomial determinants") {
    std::mt19937 gen(5);
    std::uniform_int_distribution<int> v(-9, 9);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<Vec> r(4, Vec(3));
        for (auto& x : r)
            for (int i = 0; i < 3; ++i) x(i) = v(gen);
        // rows z r_j - r_{j+1}
        std::vector<std::vector<Poly>> m(3, std::vector<Poly>(3));
        for (std::size_t j = 0; j < 3; ++j)
            for (int i = 0; i < 3; ++i) m[j][static_cast<std::size_t>(i)] = {-r[j + 1](i), r[j](i)};
        Poly lhs = poly_determinant(m), rhs = covector_expansion(r);
        lhs.resize(4, Real(0));
        for (std::size_t i = 0; i < 4; ++i) CHECK(abs(lhs[i] - rhs[i]) < 1e-80);
    }
}

TEST_CASE("Miwa shifted minors against the row expansions") {
    const auto wm = fixtures::atomic_mixed();
    const GramSource src(wm, kN1, kN2);
    for (const char* zs : {"2.5", "-3.1"}) {
        const Real z(zs), w = 1 / z;
        for (int l = 1; l <= 5; ++l)
            for (int a = 0; a < 2; ++a) {
                const auto m = spec_minus(kN1, l, a);
                if (m) CHECK(same_up_to(eval_poly(miwa_minus_poly(src, *m, false, a), w),
                                        evaluate(*m, miwa(wm, kN1, kN2, false, a, z, 1)), Real("1e-80")));
                const auto s = miwa_plus_series(src, spec_plus(kN1, l, a), false, a, 400);
                CHECK(same_up_to(eval_poly(s, w), evaluate(spec_plus(kN1, l, a), miwa(wm, kN1, kN2, false, a, z, -1)),
                                 Real("1e-60")));
            }
        for (int l = 1; l <= 5; ++l)
            for (int b = 0; b < 2; ++b) {
                const auto m = spec_bar_minus(kN2, l, b);
                if (m) CHECK(same_up_to(eval_poly(miwa_minus_poly(src, *m, true, b), w),
                                        evaluate(*m, miwa(wm, kN1, kN2, true, b, z, 1)), Real("1e-80")));
                const auto s = miwa_plus_series(src, spec_bar_plus(kN2, l, b), true, b, 400);
                CHECK(same_up_to(eval_poly(s, w), evaluate(spec_bar_plus(kN2, l, b), miwa(wm, kN1, kN2, true, b, z, -1)),
                                 Real("1e-60")));
            }
    }
}

TEST_CASE("tau representations of the polynomials") {
    const auto leg = fixtures::legendre();
    CHECK(abs(tau_representation(leg, kOne, kOne, 1, TauRep::mop, 0, 0, Real(3)) - 3) < 1e-80);
    CHECK(abs(tau_representation(leg, kOne, kOne, 0, TauRep::mop, 0, 0, Real(3)) - 1) < 1e-90);
    const auto wm = fixtures::atomic_mixed();
    for (int l = 0; l <= 6; ++l)
        for (const char* z : {"1.7", "-2.3", "4.1"}) CHECK(tau_mop_residual(wm, kN1, kN2, l, Real(z)) < 1e-8);
    // a missing minus integer gives the zero polynomial
    CHECK(tau_representation(wm, kN1, kN2, 0, TauRep::mop, 1, 0, Real(3)) == 0);
}

TEST_CASE("tau representations of the Cauchy transforms") {
    const auto leg = fixtures::legendre();
    CHECK(tau_cauchy_residual(leg, kOne, kOne, 0, Real(3)) < 1e-9);
    const auto wm = fixtures::atomic_mixed();
    for (int l = 0; l <= 6; ++l)
        for (const char* z : {"1.7", "-2.3", "4.1"}) CHECK(tau_cauchy_residual(wm, kN1, kN2, l, Real(z)) < 1e-8);

    // decay exponent -nu - 1
    for (int l = 2; l <= 4; ++l)
        for (int a = 0; a < 2; ++a) {
            const Real c3 = tau_representation(wm, kN1, kN2, l, TauRep::cauchy_bar, a, 0, Real(1000));
            const Real c4 = tau_representation(wm, kN1, kN2, l, TauRep::cauchy_bar, a, 0, Real(10000));
            const Real slope = log10(abs(c4 / c3));
            CHECK(abs(slope + degree_count(l - 1, a, kN1) + 1) < 1e-3);
        }
    CHECK_THROWS_AS(tau_representation(wm, kN1, kN2, 2, TauRep::cauchy, 0, 0, Real("0.5")), TooCloseToSupport);
}

TEST_CASE("singular tau is reported") {
    const WeightedMeasure two(Measure::atomic({Real("-0.5"), Real("0.5")}, {Real(1), Real(1)}), {Weight()}, {Weight()});
    CHECK_THROWS_AS(tau_representation(two, kOne, kOne, 3, TauRep::mop, 0, 0, Real(3)), SingularTau);
    CHECK_NOTHROW(tau_representation(two, kOne, kOne, 1, TauRep::mop, 0, 0, Real(3)));
}

TEST_CASE("Laurent series arithmetic") {
    const auto e = LaurentSeries::exponential({Real(1)}, 20);
    Real fact = 1;
    for (int n = 0; n <= 20; ++n) {
        if (n > 0) fact *= n;
        CHECK(abs(e.coefficient(n) - 1 / fact) < 1e-90);
    }
    // 1 / (1 - z) against sum z^m / z^{m+1}
    const auto g = LaurentSeries::rational({Real(1)}, {Real(1), Real(-1)}, 30);
    for (int n = 0; n <= 30; ++n) CHECK(g.coefficient(n) == 1);
    std::vector<Real> c(40, Real(0));
    c[3] = 2;
    const auto prod = g * LaurentSeries::cauchy(c, 30);
    CHECK(prod.residue() == 2);
    CHECK((LaurentSeries::polynomial({Real(0), Real(1)}, 5) * LaurentSeries::cauchy({Real(0), Real(7)}, 5)).residue() == 7);
    const auto sum = LaurentSeries::polynomial({Real(1)}, 4) + LaurentSeries::inverse_powers({Real(0), Real(5)}, 0, 4);
    CHECK(sum.coefficient(0) == 1);
    CHECK(sum.residue() == 5);
    CHECK_THROWS_AS(LaurentSeries::rational({Real(1)}, {Real(0), Real(1)}, 4), ConfigError);
}

TEST_CASE("bilinear identity") {
    SUBCASE("equal points give biorthogonality") {
        auto cfg = mixed_cfg();
        FlowPoint p = origin(2, 2);
        p.times.t[1][0] = Real("0.05");
        p.s = {1, 0};
        for (int k = 0; k <= 3; ++k)
            for (int l = 0; l <= 3; ++l) {
                const auto r = bilinear(cfg, p, p, k, l);
                CHECK(abs(r.lhs - (k == l ? 1 : 0)) < 1e-10);
                CHECK(abs(r.rhs - (k == l ? 1 : 0)) < 1e-10);
            }
    }
    SUBCASE("single channel t1 shift") {
        auto cfg = legendre_cfg();
        FlowPoint p0 = origin(1, 1), p1 = origin(1, 1);
        p1.times.t[0][0] = Real("0.1");
        const auto r = bilinear(cfg, p0, p1, 1, 1, 48);
        CHECK(r.residual < 1e-7);
        CHECK(r.quadrature_gap < 1e-7);
        CHECK(r.tau_gap < 1e-6);
        CHECK(abs(r.lhs - 1) > 1e-4);
    }
    SUBCASE("mixed system with continuous and discrete shifts") {
        auto cfg = mixed_cfg();
        FlowPoint p0 = origin(2, 2), p1 = origin(2, 2), p2 = origin(2, 2);
        p1.times.t[0][0] = Real("0.1");
        p2.times.tbar[1][1] = Real("0.1");
        p2.s = {1, 0};
        p2.sbar = {0, -1};
        for (int k = 0; k <= 4; ++k)
            for (int l = 0; l <= 4; ++l) {
                for (const auto* p : {&p1, &p2}) {
                    const auto r = bilinear(cfg, p0, *p, k, l);
                    CHECK(r.residual < 1e-6);
                    CHECK(r.quadrature_gap < 1e-6);
                    CHECK(r.tau_gap < 1e-6);
                }
            }
    }
    SUBCASE("short expansions are flagged") {
        auto cfg = legendre_cfg();
        FlowPoint p0 = origin(1, 1), p1 = origin(1, 1);
        p1.times.t[0][0] = Real(3);
        CHECK_THROWS_AS(bilinear(cfg, p0, p1, 1, 1, 4), SeriesUnderresolved);
    }
}

TEST_CASE("CD type series") {
    const auto leg = fixtures::legendre();
    const auto r = cd_series_identities(leg, kOne, kOne, 20, 0, 0, 0, 0, Real(4), Real(2));
    CHECK(r.primal < 1e-6);
    CHECK(r.dual < 1e-6);
    CHECK(r.mixed < 1e-6);
    // more terms, smaller error
    CHECK(cd_series_identity(leg, kOne, kOne, 40, CdIdentity::primal, 0, 0, Real(4), Real(2)) < r.primal / 1000);

    // several channels on one support: the Markov-Stieltjes identity converges
    const WeightedMeasure wm(Measure::lebesgue(-1, 1, 120), {Weight(), Weight::exponential(1)},
                             {Weight(), Weight::exponential(-1)});
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            CHECK(cd_series_identity(wm, kN1, kN2, 30, CdIdentity::mixed, a, b, Real(4), Real(2)) < 1e-12);
    // while the component polynomials grow and the first identity does not settle
    CHECK_THROWS_AS(cd_series_identity(wm, kN1, kN2, 30, CdIdentity::primal, 0, 1, Real(4), Real(2)), NotConverged);

    CHECK_THROWS_AS(cd_series_identity(leg, kOne, kOne, 20, CdIdentity::primal, 0, 0, Real(2), Real(4)), ConfigError);
    CHECK_THROWS_AS(cd_series_identity(leg, kOne, kOne, 20, CdIdentity::primal, 0, 0, Real(4), Real("1.2")),
                    TooCloseToSupport);
}
