#pragma once

#include <optional>
#include <utility>

#include "mixedmop/mops.hpp"

namespace mixedmop {

// K^{[l]}(x, y) = sum_{k<l} Q^{(k)}(y) Qbar^{(k)}(x) from the factorization.
Real cd_kernel_sum(const Factorization& f, const WeightedMeasure& wm, int l, const Real& x, const Real& y);
// K^{[l]}_{b,a}(x, y) = sum_{k<l} A_a^{(k)}(y) Abar_b^{(k)}(x).
Real cd_kernel_partial(const Factorization& f, int l, int b, int a, const Real& x, const Real& y);

// xi_2(x)^T (g^{[l]})^{-1} xi_1(y), or chi_{2,b}(x)^T (g^{[l]})^{-1} chi_{1,a}(y) when partial = (b, a).
Real abc_kernel(const MomentMatrix& mm, int l, const Real& x, const Real& y,
                std::optional<std::pair<int, int>> partial = std::nullopt);

// plus_a: A_{+a}, minus_b: A_{-b} over the n1 basis in y.
// minus_a: Abar_{-a}, plus_b: Abar_{+b} over the n2 basis in x.
enum class AssocKind { plus_a, minus_a, plus_b, minus_b };
enum class AssocRoute { linear_algebra, determinant };

struct AssociatedForm {
    AssocKind kind = AssocKind::plus_a;
    int level = 0;
    int channel = 0;
    Vec coeffs;  // over flat indices of the basis composition
    std::vector<Poly> polys;  // per target channel

    int side() const { return kind == AssocKind::plus_a || kind == AssocKind::minus_b ? 1 : 2; }
};

AssociatedForm associated_form(const MomentMatrix& mm, int l, AssocKind kind, int channel,
                               AssocRoute route = AssocRoute::linear_algebra);
MopPolynomial associated_poly(const MomentMatrix& mm, int l, AssocKind kind, int channel, int target,
                              AssocRoute route = AssocRoute::linear_algebra);
// Q_{+a}, Q_{-b}, Qbar_{-a} or Qbar_{+b} at x.
Real associated_linear_form(const MomentMatrix& mm, const AssociatedForm& form, const Real& x);

// Largest coefficient gap between the linear-algebra and determinantal routes over all channels.
Real associated_route_gap(const MomentMatrix& mm, int l);

// Orthogonality of the associated forms: Q_{+a}^{(l)} against xi_2^{(k)}, k < l, and Qbar_{+b}^{(l)} against xi_1^{(k)}.
Real associated_orthogonality_residual(const MomentMatrix& mm, int l);

// |(x - y) K^{[l]} - [sum_b Qbar_{+b}^{(l)}(x) Q_{-b}^{(l-1)}(y) - sum_a Qbar_{-a}^{(l-1)}(x) Q_{+a}^{(l)}(y)]|
Real cd_formula_residual(const MomentMatrix& mm, const Factorization& f, int l, const Real& x, const Real& y);
// Same for K_{b',a'} with associated polynomials.
Real cd_formula_partial_residual(const MomentMatrix& mm, const Factorization& f, int l, int bp, int ap,
                                 const Real& x, const Real& y);

// |int K(x, v) K(v, y) dmu(v) - K(x, y)|
Real reproducing_residual(const Factorization& f, const WeightedMeasure& wm, int l, const Real& x, const Real& y);
// max over k < l of |int K(x, y) Q^{(k)}(x) dmu(x) - Q^{(k)}(y)|
Real projection_residual(const Factorization& f, const WeightedMeasure& wm, int l, const Real& y);

}  // namespace mixedmop
