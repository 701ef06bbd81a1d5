#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "mixedmop/cd.hpp"
#include "mixedmop/errors.hpp"

using namespace mixedmop;

namespace {

const Composition kOne({1});

std::vector<std::pair<Real, Real>> sample_pairs(int count, unsigned seed) {
    std::mt19937 gen(seed);
    std::uniform_real_distribution<double> d(-0.9, 0.9);
    std::vector<std::pair<Real, Real>> out;
    for (int i = 0; i < count; ++i) out.emplace_back(Real(d(gen)), Real(d(gen)));
    return out;
}

struct Mixed {
    WeightedMeasure wm = fixtures::atomic_mixed();
    Composition n1{{2, 1}}, n2{{1, 1}};
    MomentMatrix mm{wm, n1, n2, 14};
    Factorization f = gauss_borel(mm);
};

}  // namespace

TEST_CASE("kernel sum at low levels") {
    auto wm = fixtures::legendre();
    MomentMatrix mm(wm, kOne, kOne, 8);
    auto f = gauss_borel(mm);
    CHECK(cd_kernel_sum(f, wm, 0, Real("0.2"), Real("-0.4")) == 0);
    CHECK(fixtures::close(cd_kernel_sum(f, wm, 1, Real("0.2"), Real("-0.4")), Real("0.5"), Real("1e-60")));
    CHECK(fixtures::close(abc_kernel(mm, 1, Real("0.7"), Real("0.1")), Real("0.5"), Real("1e-60")));
    const Real x("0.3"), y("-0.6");
    CHECK(fixtures::close(abc_kernel(mm, 2, x, y), Real("0.5") + Real("1.5") * x * y, Real("1e-60")));
    for (auto [u, v] : sample_pairs(5, 3))
        CHECK(fixtures::close(cd_kernel_sum(f, wm, 5, u, v), cd_kernel_sum(f, wm, 5, v, u), Real("1e-40")));
}

TEST_CASE("ABC theorem matches the kernel sum") {
    Mixed m;
    for (int l = 1; l <= 8; ++l)
        for (auto [x, y] : sample_pairs(10, 11 + l)) {
            CHECK(abs(abc_kernel(m.mm, l, x, y) - cd_kernel_sum(m.f, m.wm, l, x, y)) < 1e-9);
            for (int b = 0; b < 2; ++b)
                for (int a = 0; a < 2; ++a)
                    CHECK(abs(abc_kernel(m.mm, l, x, y, std::make_pair(b, a)) - cd_kernel_partial(m.f, l, b, a, x, y)) <
                          1e-9);
        }
    auto wm = fixtures::legendre();
    MomentMatrix mm(wm, kOne, kOne, 8);
    auto f = gauss_borel(mm);
    for (int l = 1; l <= 6; ++l)
        for (auto [x, y] : sample_pairs(10, 40 + l)) CHECK(abs(abc_kernel(mm, l, x, y) - cd_kernel_sum(f, wm, l, x, y)) < 1e-9);
}

TEST_CASE("associated polynomials in the scalar case") {
    auto wm = fixtures::legendre();
    MomentMatrix mm(wm, kOne, kOne, 8);
    auto f = gauss_borel(mm);
    auto ap = associated_poly(mm, 2, AssocKind::plus_a, 0, 0);
    REQUIRE(ap.coeffs.size() == 3);
    CHECK(abs(ap.coeffs[0] + Real(1) / 3) < 1e-60);
    CHECK(abs(ap.coeffs[1]) < 1e-60);
    CHECK(abs(ap.coeffs[2] - 1) < 1e-60);
    for (int l = 1; l < 6; ++l) {
        auto a = associated_poly(mm, l, AssocKind::plus_a, 0, 0);
        auto ref = mop(f, l, 0);
        for (std::size_t i = 0; i < ref.coeffs.size(); ++i) CHECK(abs(a.coeffs[i] - ref.coeffs[i]) < 1e-50);
    }
}

TEST_CASE("linear algebra and determinantal associated forms agree") {
    Mixed m;
    for (int l = 3; l <= 7; ++l) CHECK(associated_route_gap(m.mm, l) < 1e-8);
    for (int l = 3; l <= 7; ++l) CHECK(associated_orthogonality_residual(m.mm, l) < 1e-20);
}

TEST_CASE("CD formula refuses levels below the composition sizes") {
    Mixed m;
    CHECK_THROWS_AS(associated_form(m.mm, 1, AssocKind::minus_a, 1), MinusNotFound);
    CHECK_THROWS_AS(cd_formula_residual(m.mm, m.f, 2, Real("0.1"), Real("0.2")), ConfigError);
}

TEST_CASE("classical CD formula for Legendre") {
    auto wm = fixtures::legendre();
    MomentMatrix mm(wm, kOne, kOne, 8);
    auto f = gauss_borel(mm);
    for (auto [x, y] : sample_pairs(10, 5)) CHECK(cd_formula_residual(mm, f, 3, x, y) < 1e-9);
    CHECK(cd_formula_residual(mm, f, 3, Real("0.4"), Real("0.4")) < 1e-60);
}

TEST_CASE("multi-channel CD formula") {
    Mixed m;
    for (int l : {3, 4, 6, 9})
        for (auto [x, y] : sample_pairs(10, 17 + l)) {
            CHECK(cd_formula_residual(m.mm, m.f, l, x, y) < 1e-8);
            for (int b = 0; b < 2; ++b)
                for (int a = 0; a < 2; ++a) CHECK(cd_formula_partial_residual(m.mm, m.f, l, b, a, x, y) < 1e-8);
        }
    CHECK(cd_formula_residual(m.mm, m.f, 4, Real("0.25"), Real("0.25")) < 1e-40);
}

TEST_CASE("reproducing and projection properties") {
    Mixed m;
    for (int l : {2, 5, 8}) {
        for (auto [x, y] : sample_pairs(4, 60 + l)) CHECK(reproducing_residual(m.f, m.wm, l, x, y) < 1e-7);
        CHECK(projection_residual(m.f, m.wm, l, Real("0.37")) < 1e-8);
    }
    auto wm = fixtures::legendre();
    auto f = gauss_borel(MomentMatrix(wm, kOne, kOne, 8));
    CHECK(reproducing_residual(f, wm, 6, Real("0.1"), Real("-0.8")) < 1e-7);
}

TEST_CASE("kernel does not depend on the ladder") {
    auto wm = fixtures::atomic_mixed();
    const Composition n2({1, 1});
    // (2,1) and (4,2) both reach nu_1(5) = (4,2)
    auto f1 = gauss_borel(MomentMatrix(wm, Composition({2, 1}), n2, 8));
    auto f2 = gauss_borel(MomentMatrix(wm, Composition({4, 2}), n2, 8));
    CHECK(degree_vector(5, Composition({2, 1})).entries == degree_vector(5, Composition({4, 2})).entries);
    for (auto [x, y] : sample_pairs(10, 99))
        CHECK(abs(cd_kernel_sum(f1, wm, 6, x, y) - cd_kernel_sum(f2, wm, 6, x, y)) < 1e-8);
    // different ladder at an intermediate level gives a different kernel
    CHECK(abs(cd_kernel_sum(f1, wm, 3, Real("0.3"), Real("0.5")) - cd_kernel_sum(f2, wm, 3, Real("0.3"), Real("0.5"))) >
          1e-6);
}
