#pragma once

#include <vector>

#include "mixedmop/real.hpp"

namespace mixedmop {

using Poly = std::vector<Real>;

// Partial-pivot LU; independent of the unpivoted elimination used for factorizations.
Real determinant(const Mat& m);
Mat inverse(const Mat& m);
Vec solve(const Mat& m, const Vec& rhs);

// m without row r and column c
Mat minor_matrix(const Mat& m, int r, int c);

Real eval_poly(const Poly& p, const Real& x);
Poly poly_mul(const Poly& a, const Poly& b);
Poly poly_add(const Poly& a, const Poly& b);
Poly poly_scale(const Poly& a, const Real& s);
// Lagrange interpolation through (x_i, y_i), evaluated at t.
Real lagrange_eval(const std::vector<Real>& x, const std::vector<Real>& y, const Real& t);

// Upper part including the diagonal, and strictly lower part.
Mat upper_part(const Mat& m);
Mat strict_lower_part(const Mat& m);

// Max-norm over the leading k x k block.
Real block_max_abs(const Mat& m, int k);

}  // namespace mixedmop
