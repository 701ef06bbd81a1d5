#include "doctest.h"

#include "fixtures.hpp"
#include "mixedmop/errors.hpp"
#include "mixedmop/mops.hpp"

using namespace mixedmop;
using fixtures::close;

namespace {
const Composition one({1});
const Real tiny("1e-60");
}  // namespace

TEST_CASE("gauss_borel on the identity") {
    const Factorization f = gauss_borel(Mat(Mat::Identity(5, 5)), one, one);
    CHECK(max_abs(Mat(f.S - Mat::Identity(5, 5))) == 0);
    CHECK(max_abs(Mat(f.Sbar - Mat::Identity(5, 5))) == 0);
}

TEST_CASE("Legendre factorization at L=3") {
    const MomentMatrix mm(fixtures::legendre(), one, one, 3);
    const Factorization f = gauss_borel(mm);
    CHECK(close(f.S(2, 0), Real(-1) / 3, tiny));
    CHECK(close(f.S(2, 1), 0, tiny));
    CHECK(close(f.Sbar(0, 0), 2, tiny));
    CHECK(close(f.Sbar(1, 1), Real(2) / 3, tiny));
    CHECK(close(f.Sbar(2, 2), Real(8) / 45, tiny));
    CHECK(max_abs(Mat(f.reconstruct() - mm.g())) < Real("1e-10"));

    const MopPolynomial p2 = mop(f, 2, 0);
    REQUIRE(p2.coeffs.size() == 3);
    CHECK(close(p2.coeffs[0], Real(-1) / 3, tiny));
    CHECK(close(p2.coeffs[1], 0, tiny));
    CHECK(p2.coeffs[2] == 1);
    CHECK(mop(f, 0, 0).coeffs == Poly{Real(1)});

    CHECK(close(dual_mop(f, 0, 0).coeffs.at(0), Real(1) / 2, tiny));
    const MopPolynomial d1 = dual_mop(f, 1, 0);
    CHECK(close(d1.coeffs.at(0), 0, tiny));
    CHECK(close(d1.coeffs.at(1), Real(3) / 2, tiny));

    const MopPolynomial o2 = det_mop_oracle(mm, 2, 0);
    CHECK(close(o2.coeffs[0], Real(-1) / 3, tiny));
    CHECK(close(o2.coeffs[2], 1, tiny));
    const MopPolynomial o1 = det_mop_oracle(mm, 1, 0);
    CHECK(close(o1.coeffs[0], -mm.g()(1, 0) / mm.g()(0, 0), tiny));
}

TEST_CASE("equal weights are not perfect") {
    const WeightedMeasure wm(Measure::lebesgue(-1, 1, 40), {Weight(), Weight()}, {Weight()});
    const MomentMatrix mm(wm, Composition({1, 1}), one, 6);
    CHECK_THROWS_AS(gauss_borel(mm), PerfectnessViolation);
}

TEST_CASE("classical reduction: monic Legendre recurrence") {
    const int L = 20;
    const MomentMatrix mm(fixtures::legendre(), one, one, L);
    const Factorization f = gauss_borel(mm);
    std::vector<Poly> P{{Real(1)}, {Real(0), Real(1)}};
    for (int n = 1; n + 1 < L; ++n) {
        const Real c = Real(n * n) / (4 * n * n - 1);
        P.push_back(poly_add(poly_mul(P[static_cast<std::size_t>(n)], {Real(0), Real(1)}),
                             poly_scale(P[static_cast<std::size_t>(n - 1)], -c)));
    }
    for (int l = 0; l < L; ++l) {
        const Poly& a = mop(f, l, 0).coeffs;
        const Poly& b = P[static_cast<std::size_t>(l)];
        REQUIRE(a.size() == b.size());
        for (std::size_t k = 0; k < a.size(); ++k) CHECK(abs(a[k] - b[k]) < Real("1e-10"));
    }
}

TEST_CASE("second kind functions and Markov-Stieltjes") {
    const auto wm = fixtures::legendre(120);
    const MomentMatrix mm(wm, one, one, 10);
    const Factorization f = gauss_borel(mm);
    CHECK(close(second_kind(f, wm, 0, Kind2::C, 0, 2), log(Real(3)), Real("1e-30")));
    for (int l = 1; l <= 4; ++l) {
        const Real a = pow(Real(1000), l + 1) * second_kind(f, wm, l, Kind2::C, 0, 1000);
        const Real b = pow(Real(10000), l + 1) * second_kind(f, wm, l, Kind2::C, 0, 10000);
        CHECK(abs(a) < 10);
        CHECK(abs(a / b - 1) < Real("1e-2"));
    }
    CHECK(abs(Real(1e6) * second_kind(f, wm, 0, Kind2::Cbar, 0, Real(1e6)) - 1) < Real("1e-5"));
    CHECK_THROWS_AS(second_kind(f, wm, 0, Kind2::C, 0, Real("1.0000001")), TooCloseToSupport);

    CHECK(abs(markov_stieltjes(f, wm, 0, Kind2::C, 0, 3)) < Real("1e-30"));
    CHECK(close(markov_stieltjes(f, wm, 1, Kind2::C, 0, 3), 2, Real("1e-30")));
    for (int l = 0; l <= 6; ++l) {
        CHECK(markov_stieltjes_polynomiality(f, wm, l, Kind2::C, 0) < Real("1e-8"));
        CHECK(markov_stieltjes_polynomiality(f, wm, l, Kind2::Cbar, 0) < Real("1e-8"));
    }
}

TEST_CASE("Gamma-series cross-check of second kind functions") {
    const auto wm = fixtures::atomic_mixed(12);
    const Composition n1({2, 1}), n2({1, 1});
    const MomentMatrix mm(wm, n1, n2, 8, -1, 80);
    const Factorization f = gauss_borel(mm);
    for (int l = 0; l < 6; ++l)
        for (int c = 0; c < 2; ++c)
            for (const Real z : {Real(4), Real(-5)}) {
                const Real q = second_kind(f, wm, l, Kind2::C, c, z);
                const Real s = second_kind_series(mm, l, Kind2::C, c, z);
                CHECK(abs(q - s) <= Real("1e-15") * std::max(Real(1), Real(abs(q))));
                const Real qb = second_kind(f, wm, l, Kind2::Cbar, c, z);
                const Real sb = second_kind_series(mm, l, Kind2::Cbar, c, z);
                CHECK(abs(qb - sb) <= Real("1e-15") * std::max(Real(1), Real(abs(qb))));
            }
    CHECK_THROWS_AS(second_kind_series(mm, 1, Kind2::C, 0, Real("1.5")), TooCloseToSupport);
}

TEST_CASE("biorthogonality and orthogonality") {
    const auto leg = fixtures::legendre();
    const MomentMatrix ml(leg, one, one, 8);
    const Factorization fl = gauss_borel(ml);
    CHECK(biorthogonality_residual(fl, leg, 5) < Real("1e-10"));
    CHECK(orthogonality_residual(fl, leg, 7) < Real("1e-9"));

    const WeightedMeasure three(Measure::atomic({Real("-0.5"), Real("0.1"), Real("0.8")}, {Real(1), Real(2), Real(1)}),
                                {Weight()}, {Weight()});
    const MomentMatrix m3(three, one, one, 3);
    CHECK(biorthogonality_residual(gauss_borel(m3), three, 2) < Real("1e-12"));

    const auto wm = fixtures::atomic_mixed(40);
    const Composition n1({2, 1}), n2({1, 1});
    const MomentMatrix mm(wm, n1, n2, 30);
    const Factorization f = gauss_borel(mm);
    CHECK(biorthogonality_residual(f, wm, 29) < Real("1e-10"));
    CHECK(orthogonality_residual(f, wm, 29) < Real("1e-9"));
}

TEST_CASE("property: normalization, pivots and alternative expressions") {
    const auto wm = fixtures::atomic_mixed(40);
    const Composition n1({2, 1}), n2({1, 1});
    const int L = 16;
    const MomentMatrix mm(wm, n1, n2, L);
    const Factorization f = gauss_borel(mm);
    for (int l = 0; l < L; ++l) {
        const int a = channel_of(l, n1);
        const MopPolynomial A = mop(f, l, a);
        CHECK(static_cast<int>(A.coeffs.size()) - 1 == degree_count(l, a, n1) - 1);
        CHECK(static_cast<int>(A.coeffs.size()) - 1 == local_degree(l, n1));
        CHECK(A.coeffs.back() == 1);

        const Real lhs = f.Sbar(l, l) * determinant(Mat(mm.g().topLeftCorner(l, l)));
        const Real rhs = determinant(Mat(mm.g().topLeftCorner(l + 1, l + 1)));
        CHECK(abs(lhs - rhs) <= Real("1e-9") * abs(rhs));

        // type I normalization of the dual form
        const int a1 = channel_of(l, n1);
        const int k1 = local_degree(l, n1);
        const Real norm = integrate(
            [&](const Real& x) { return dual_linear_form(f, wm, l, x) * wm.w1()[static_cast<std::size_t>(a1)](x) * pow(x, k1); },
            wm);
        CHECK(abs(norm - 1) < Real("1e-9"));

        for (FormRoute r : {FormRoute::schur, FormRoute::inverse_row, FormRoute::determinant}) {
            const Vec p = primal_form(mm.g(), l, r), d = dual_form(mm.g(), l, r);
            const Vec pf = primal_form(mm.g(), l, FormRoute::factorization, &f);
            const Vec df = dual_form(mm.g(), l, FormRoute::factorization, &f);
            for (const Real x : {Real("-0.83"), Real("-0.2"), Real("0.05"), Real("0.44"), Real("0.91")}) {
                CHECK(abs(eval_form(wm, n1, 1, p, x) - eval_form(wm, n1, 1, pf, x)) < Real("1e-8"));
                CHECK(abs(eval_form(wm, n2, 2, d, x) - eval_form(wm, n2, 2, df, x)) < Real("1e-8"));
            }
        }
        if (l >= 1)
            for (int c = 0; c < 2; ++c) {
                const Poly o = det_mop_oracle(mm, l, c).coeffs, m = mop(f, l, c).coeffs;
                for (std::size_t k = 0; k < o.size(); ++k) CHECK(abs(o[k] - m[k]) < Real("1e-8"));
                const Poly od = det_dual_mop_oracle(mm, l, c).coeffs, md = dual_mop(f, l, c).coeffs;
                for (std::size_t k = 0; k < od.size(); ++k) CHECK(abs(od[k] - md[k]) < Real("1e-8"));
            }
    }
}
