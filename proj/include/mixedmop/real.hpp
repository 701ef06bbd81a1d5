#pragma once

#include <boost/multiprecision/mpfr.hpp>
#include <boost/multiprecision/eigen.hpp>
#include <Eigen/Dense>

#include <string>
#include <vector>

namespace mixedmop {

// 100 decimal digits. Snake-shaped configurations lose ~50 digits in elimination.
using Real = boost::multiprecision::number<boost::multiprecision::mpfr_float_backend<100>,
                                           boost::multiprecision::et_off>;
using Mat = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
using Vec = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

inline double to_double(const Real& x) { return x.convert_to<double>(); }

inline Real working_epsilon() { return std::numeric_limits<Real>::epsilon(); }

// Decimal rendering with `digits` significant digits.
std::string format_real(const Real& x, int digits = 17);

Real max_abs(const Mat& m);
Real max_abs(const Vec& v);
Real max_abs(const std::vector<Real>& v);

}  // namespace mixedmop
