#include "mixedmop/linalg.hpp"

#include <algorithm>

namespace mixedmop {

Real determinant(const Mat& m) {
    if (m.rows() == 0) return Real(1);
    return m.partialPivLu().determinant();
}

Mat inverse(const Mat& m) { return m.partialPivLu().inverse(); }

Vec solve(const Mat& m, const Vec& rhs) { return m.partialPivLu().solve(rhs); }

Mat minor_matrix(const Mat& m, int r, int c) {
    const Eigen::Index R = m.rows(), C = m.cols();
    Mat out(R - 1, C - 1);
    for (Eigen::Index i = 0, oi = 0; i < R; ++i) {
        if (i == r) continue;
        for (Eigen::Index j = 0, oj = 0; j < C; ++j) {
            if (j == c) continue;
            out(oi, oj++) = m(i, j);
        }
        ++oi;
    }
    return out;
}

Real eval_poly(const Poly& p, const Real& x) {
    Real v = 0;
    for (auto it = p.rbegin(); it != p.rend(); ++it) v = v * x + *it;
    return v;
}

Poly poly_mul(const Poly& a, const Poly& b) {
    if (a.empty() || b.empty()) return {};
    Poly c(a.size() + b.size() - 1, Real(0));
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) c[i + j] += a[i] * b[j];
    return c;
}

Poly poly_add(const Poly& a, const Poly& b) {
    Poly c(std::max(a.size(), b.size()), Real(0));
    for (std::size_t i = 0; i < a.size(); ++i) c[i] += a[i];
    for (std::size_t i = 0; i < b.size(); ++i) c[i] += b[i];
    return c;
}

Poly poly_scale(const Poly& a, const Real& s) {
    Poly c = a;
    for (auto& v : c) v *= s;
    return c;
}

Real lagrange_eval(const std::vector<Real>& x, const std::vector<Real>& y, const Real& t) {
    Real s = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        Real li = 1;
        for (std::size_t j = 0; j < x.size(); ++j)
            if (j != i) li *= (t - x[j]) / (x[i] - x[j]);
        s += y[i] * li;
    }
    return s;
}

Mat upper_part(const Mat& m) { return m.triangularView<Eigen::Upper>(); }

Mat strict_lower_part(const Mat& m) { return m.triangularView<Eigen::StrictlyLower>(); }

Real block_max_abs(const Mat& m, int k) {
    k = std::min<int>(k, static_cast<int>(std::min(m.rows(), m.cols())));
    if (k <= 0) return Real(0);
    return max_abs(Mat(m.topLeftCorner(k, k)));
}

}  // namespace mixedmop
