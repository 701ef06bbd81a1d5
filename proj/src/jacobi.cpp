#include "mixedmop/jacobi.hpp"

#include <algorithm>

#include "mixedmop/errors.hpp"

namespace mixedmop {

int jacobi_margin(const Composition& n1, const Composition& n2) {
    return std::max(n1.bandwidth(), n2.bandwidth()) + 1;
}

Mat upper_conjugate(const Factorization& f) {
    return f.S * build_upsilon(f.n1, f.L).dense() * f.Sinv;
}

Mat lower_conjugate(const Factorization& f) {
    return f.Sbar * build_upsilon(f.n2, f.L).dense().transpose() * f.Sbarinv;
}

SnakeMatrix build_J(const Factorization& f, int L) {
    if (L + jacobi_margin(f.n1, f.n2) > f.L)
        throw WindowExceeded("J of size " + std::to_string(L) + " needs a factorization of size " +
                             std::to_string(L + jacobi_margin(f.n1, f.n2)));
    const Mat up = upper_conjugate(f), lo = lower_conjugate(f);
    SnakeMatrix s;
    s.n1 = f.n1;
    s.n2 = f.n2;
    s.L = L;
    s.J = upper_part(Mat(up.topLeftCorner(L, L))) + strict_lower_part(Mat(lo.topLeftCorner(L, L)));
    s.mask = snake_pattern(f.n1, f.n2, L);
    return s;
}

Real string_identity_residual(const Factorization& f) {
    const Mat d = upper_conjugate(f) - lower_conjugate(f);
    const int rows = f.L - f.n1.bandwidth(), cols = f.L - f.n2.bandwidth();
    if (rows <= 0 || cols <= 0) return Real(0);
    return max_abs(Mat(d.topLeftCorner(rows, cols)));
}

PatternMask snake_pattern(const Composition& n1, const Composition& n2, int L) {
    PatternMask m(static_cast<std::size_t>(L), std::vector<Cell>(static_cast<std::size_t>(L), Cell::zero));
    auto put = [&](int r, int c, Cell v) {
        if (r < L && c < L && m[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] != Cell::unit)
            m[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] = v;
    };
    int reach = -1;
    for (int i = 0; i < L; ++i) {
        const int s = successor(i, n1);
        for (int r = i; r <= s; ++r)
            for (int c = r; c <= s; ++c) put(r, c, Cell::entry);
        if (s > reach) {
            if (s < L) m[static_cast<std::size_t>(i)][static_cast<std::size_t>(s)] = Cell::unit;
            reach = s;
        }
    }
    for (int i = 0; i < L; ++i) {
        const int s = successor(i, n2);
        for (int c = i; c <= s; ++c)
            for (int r = c + 1; r <= s; ++r) put(r, c, Cell::entry);
    }
    return m;
}

std::vector<std::string> pattern_grid(const Mat& J, const Real& threshold) {
    std::vector<std::string> out;
    for (int i = 0; i < J.rows(); ++i) {
        std::string row;
        for (int j = 0; j < J.cols(); ++j) {
            const Real& v = J(i, j);
            if (abs(v) < threshold) row += '.';
            else if (abs(v - 1) < threshold) row += '1';
            else row += '*';
        }
        out.push_back(row);
    }
    return out;
}

std::vector<std::string> pattern_grid(const PatternMask& mask) {
    std::vector<std::string> out;
    for (const auto& r : mask) {
        std::string row;
        for (Cell c : r) row += static_cast<char>(c);
        out.push_back(row);
    }
    return out;
}

int recursion_length(const Mat& J, int l, const Real& threshold) {
    int n = 0;
    for (int j = 0; j < J.cols(); ++j)
        if (abs(J(l, j)) >= threshold) ++n;
    return n;
}

namespace {

void check_range(const SnakeMatrix& s, int lbegin, int lend) {
    if (lbegin < 0 || lend > s.L || lbegin >= lend) throw ConfigError("empty or invalid row range");
}

}  // namespace

Real recursion_residual(const SnakeMatrix& s, const Factorization& f, const Real& z, int lbegin, int lend) {
    check_range(s, lbegin, lend);
    Real worst = 0;
    for (int a = 0; a < f.n1.p(); ++a) {
        std::vector<Real> A(static_cast<std::size_t>(s.L));
        for (int l = 0; l < s.L; ++l) A[static_cast<std::size_t>(l)] = mop(f, l, a)(z);
        for (int l = lbegin; l < lend; ++l) {
            if (l + s.upper_bandwidth() >= s.L) continue;
            Real r = z * A[static_cast<std::size_t>(l)];
            Real scale = abs(r);
            for (int j = 0; j < s.L; ++j) {
                r -= s.J(l, j) * A[static_cast<std::size_t>(j)];
                scale += abs(s.J(l, j) * A[static_cast<std::size_t>(j)]);
            }
            worst = std::max(worst, Real(abs(r) / std::max(Real(1), scale)));
        }
    }
    return worst;
}

Real dual_recursion_residual(const SnakeMatrix& s, const Factorization& f, const Real& z, int lbegin, int lend) {
    check_range(s, lbegin, lend);
    Real worst = 0;
    for (int b = 0; b < f.n2.p(); ++b) {
        std::vector<Real> A(static_cast<std::size_t>(s.L));
        for (int l = 0; l < s.L; ++l) A[static_cast<std::size_t>(l)] = dual_mop(f, l, b)(z);
        for (int l = lbegin; l < lend; ++l) {
            if (l + s.lower_bandwidth() >= s.L) continue;
            Real r = z * A[static_cast<std::size_t>(l)];
            Real scale = abs(r);
            for (int m = 0; m < s.L; ++m) {
                r -= s.J(m, l) * A[static_cast<std::size_t>(m)];
                scale += abs(s.J(m, l) * A[static_cast<std::size_t>(m)]);
            }
            worst = std::max(worst, Real(abs(r) / std::max(Real(1), scale)));
        }
    }
    return worst;
}

Real second_kind_recursion_residual(const SnakeMatrix& s, const Factorization& f, const WeightedMeasure& wm,
                                    const Real& z, int lbegin, int lend) {
    check_range(s, lbegin, lend);
    Real worst = 0;
    for (int b = 0; b < f.n2.p(); ++b) {
        std::vector<Real> C(static_cast<std::size_t>(s.L));
        for (int l = 0; l < s.L; ++l) C[static_cast<std::size_t>(l)] = second_kind(f, wm, l, Kind2::C, b, z);
        const int first = f.n2.offset(b);
        for (int l = lbegin; l < lend; ++l) {
            if (l + s.upper_bandwidth() >= s.L) continue;
            Real r = z * C[static_cast<std::size_t>(l)] - f.Sbar(l, first);
            for (int j = 0; j < s.L; ++j) r -= s.J(l, j) * C[static_cast<std::size_t>(j)];
            worst = std::max(worst, Real(abs(r)));
        }
    }
    return worst;
}

Real dual_second_kind_recursion_residual(const SnakeMatrix& s, const Factorization& f, const WeightedMeasure& wm,
                                         const Real& z, int lbegin, int lend) {
    check_range(s, lbegin, lend);
    Real worst = 0;
    for (int a = 0; a < f.n1.p(); ++a) {
        std::vector<Real> C(static_cast<std::size_t>(s.L));
        for (int l = 0; l < s.L; ++l) C[static_cast<std::size_t>(l)] = second_kind(f, wm, l, Kind2::Cbar, a, z);
        const int first = f.n1.offset(a);
        for (int l = lbegin; l < lend; ++l) {
            if (l + s.lower_bandwidth() >= s.L) continue;
            Real r = z * C[static_cast<std::size_t>(l)] - f.Sinv(first, l);
            for (int m = 0; m < s.L; ++m) r -= s.J(m, l) * C[static_cast<std::size_t>(m)];
            worst = std::max(worst, Real(abs(r)));
        }
    }
    return worst;
}

}  // namespace mixedmop
