#include "mixedmop/real.hpp"

#include <algorithm>

namespace mixedmop {

std::string format_real(const Real& x, int digits) {
    if (x == 0) return "0";
    return x.str(digits - 1, std::ios_base::scientific);
}

Real max_abs(const Mat& m) {
    Real r = 0;
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) r = std::max(r, Real(abs(m(i, j))));
    return r;
}

Real max_abs(const Vec& v) {
    Real r = 0;
    for (Eigen::Index i = 0; i < v.size(); ++i) r = std::max(r, Real(abs(v(i))));
    return r;
}

Real max_abs(const std::vector<Real>& v) {
    Real r = 0;
    for (const Real& x : v) r = std::max(r, Real(abs(x)));
    return r;
}

}  // namespace mixedmop
