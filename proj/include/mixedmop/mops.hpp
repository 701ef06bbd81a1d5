#pragma once

#include <optional>

#include "mixedmop/linalg.hpp"
#include "mixedmop/moments.hpp"

namespace mixedmop {

// g^[L] = S^{-1} Sbar with S unit lower and Sbar upper.
struct Factorization {
    Composition n1, n2;
    int L = 0;
    Mat S, Sbar, Sinv, Sbarinv;
    std::vector<Real> pivots;

    Mat reconstruct() const { return Sinv * Sbar; }
};

Real default_pivot_tolerance();

// Doolittle elimination without pivoting.
Factorization gauss_borel(const Mat& g, const Composition& n1, const Composition& n2,
                          std::optional<Real> tol = std::nullopt);
Factorization gauss_borel(const MomentMatrix& mm, std::optional<Real> tol = std::nullopt);

struct MopPolynomial {
    int channel = 0;
    int level = 0;
    Poly coeffs;  // ascending powers

    Real operator()(const Real& x) const { return eval_poly(coeffs, x); }
};

// A_a^{(l)} from row l of S.
MopPolynomial mop(const Factorization& f, int l, int a);
// Abar_b^{(l)} from column l of Sbar^{-1}.
MopPolynomial dual_mop(const Factorization& f, int l, int b);

// Split a coefficient vector over the weighted-monomial basis into per-channel polynomials.
std::vector<Poly> split_channels(const Vec& c, const Composition& n);

// Coefficients of Q^{(l)} over xi_1^{[l+1]} (primal) or of Qbar^{(l)} over xi_2^{[l+1]} (dual).
enum class FormRoute { factorization, schur, inverse_row, determinant };
Vec primal_form(const Mat& g, int l, FormRoute route, const Factorization* f = nullptr);
Vec dual_form(const Mat& g, int l, FormRoute route, const Factorization* f = nullptr);

// Bordered-determinant oracle for A_a^{(l)} and Abar_b^{(l)}.
MopPolynomial det_mop_oracle(const MomentMatrix& mm, int l, int a);
MopPolynomial det_dual_mop_oracle(const MomentMatrix& mm, int l, int b);

// xi_1 (side 1) or xi_2 (side 2) evaluated at x, first `count` entries.
Vec weighted_monomials(const WeightedMeasure& wm, const Composition& n, int side, int count, const Real& x);
// chi_{a}: unweighted monomials restricted to channel a.
Vec channel_monomials(const Composition& n, int a, int count, const Real& x);

Real eval_form(const WeightedMeasure& wm, const Composition& n, int side, const Vec& c, const Real& x);
// Q^{(l)}(x) and Qbar^{(l)}(x) from the factorization.
Real linear_form(const Factorization& f, const WeightedMeasure& wm, int l, const Real& x);
Real dual_linear_form(const Factorization& f, const WeightedMeasure& wm, int l, const Real& x);

enum class Kind2 { C, Cbar };

// C_b^{(l)}(z) = int Q^{(l)} w2_b / (z - x) dmu, or Cbar_a^{(l)} with the dual form, by quadrature.
Real second_kind(const Factorization& f, const WeightedMeasure& wm, int l, Kind2 side, int channel, const Real& z);
// Gamma-series determinantal expression; needs |z| >= 2 R and enough raw moments.
Real second_kind_series(const MomentMatrix& mm, int l, Kind2 side, int channel, const Real& z, int terms = 64);

// muhat_{a,b}(z)
Real markov_stieltjes_function(const WeightedMeasure& wm, int a, int b, const Real& z);
// H_b^{(l)}(z) (side C) or Hbar_a^{(l)}(z) (side Cbar).
Real markov_stieltjes(const Factorization& f, const WeightedMeasure& wm, int l, Kind2 side, int channel,
                      const Real& z);
// Relative interpolation residual of H at extra points; ~0 iff H is a polynomial of the expected degree.
Real markov_stieltjes_polynomiality(const Factorization& f, const WeightedMeasure& wm, int l, Kind2 side,
                                    int channel);

// max_{l,k <= lmax} |int Q^{(l)} Qbar^{(k)} dmu - delta_{lk}|
Real biorthogonality_residual(const Factorization& f, const WeightedMeasure& wm, int lmax);
// max |int Q^{(l)} w2_b x^k dmu| over the orthogonality range, and the dual relations.
Real orthogonality_residual(const Factorization& f, const WeightedMeasure& wm, int lmax);

}  // namespace mixedmop
