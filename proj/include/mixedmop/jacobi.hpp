#pragma once

#include <string>
#include <vector>

#include "mixedmop/mops.hpp"

namespace mixedmop {

enum class Cell : char { zero = '.', entry = '*', unit = '1' };
using PatternMask = std::vector<std::vector<Cell>>;

struct SnakeMatrix {
    Composition n1, n2;
    int L = 0;
    Mat J;
    PatternMask mask;

    int upper_bandwidth() const { return n1.bandwidth(); }
    int lower_bandwidth() const { return n2.bandwidth(); }
    // J_s(l) = J(l, l + s)
    Real diagonal(int s, int l) const { return J(l, l + s); }
    // Rows whose recursion stencil lies inside the window: [N2, L - N1).
    int full_begin() const { return n2.bandwidth(); }
    int full_end() const { return L - n1.bandwidth(); }
};

// Extra truncation needed so that the leading L x L block of J is exact.
int jacobi_margin(const Composition& n1, const Composition& n2);

// S Y1 S^{-1} and Sbar Y2^T Sbar^{-1} at the factorization's truncation.
Mat upper_conjugate(const Factorization& f);
Mat lower_conjugate(const Factorization& f);

// J = (S Y1 S^{-1})_+ + (Sbar Y2^T Sbar^{-1})_-, cut to L <= f.L - jacobi_margin.
SnakeMatrix build_J(const Factorization& f, int L);

// Max |(S Y1 S^{-1} - Sbar Y2^T Sbar^{-1})_{ij}| over rows i < f.L - N1, columns j < f.L - N2.
Real string_identity_residual(const Factorization& f);

// Predicted support: union of upper triangles from the n1 staircase and strictly lower ones from n2.
PatternMask snake_pattern(const Composition& n1, const Composition& n2, int L);

// '.', '*', '1' rendering of J with the given zero threshold.
std::vector<std::string> pattern_grid(const Mat& J, const Real& threshold);
std::vector<std::string> pattern_grid(const PatternMask& mask);

// Number of nonzero entries in row l, i.e. the length of the recursion at level l.
int recursion_length(const Mat& J, int l, const Real& threshold);

// max over rows in [lbegin, lend) and channels of |z A^{(l)} - sum_j J_{lj} A^{(j)}|,
// each row divided by max(1, sum of the absolute terms).
Real recursion_residual(const SnakeMatrix& s, const Factorization& f, const Real& z, int lbegin, int lend);
// Dual: z Abar^{(l)} = sum_m J_{ml} Abar^{(m)}.
Real dual_recursion_residual(const SnakeMatrix& s, const Factorization& f, const Real& z, int lbegin, int lend);
// J C_b = z C_b - c_b and J^T Cbar_a = z Cbar_a - cbar_a with quadrature second kind functions.
Real second_kind_recursion_residual(const SnakeMatrix& s, const Factorization& f, const WeightedMeasure& wm,
                                    const Real& z, int lbegin, int lend);
Real dual_second_kind_recursion_residual(const SnakeMatrix& s, const Factorization& f, const WeightedMeasure& wm,
                                         const Real& z, int lbegin, int lend);

}  // namespace mixedmop
