#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mixedmop/mops.hpp"

namespace mixedmop::cli {

// Write to a sibling temporary file, then rename over the target.
void write_atomic(const std::filesystem::path& path, const std::string& content);

class Csv {
public:
    explicit Csv(const std::vector<std::string>& header);
    Csv& row(const std::vector<std::string>& cells);
    const std::string& str() const { return s_; }

private:
    std::string s_;
};

std::string cell(const Real& x);
std::string cell(int x);

// row,col,value over the whole matrix, or only the band -lower <= col - row <= upper.
std::string matrix_csv(const Mat& m);
std::string band_csv(const Mat& m, int lower, int upper);
// level,channel,degree,coefficient
std::string poly_csv(const std::vector<MopPolynomial>& polys);

}  // namespace mixedmop::cli
