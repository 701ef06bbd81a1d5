#include "output.hpp"

#include <fstream>
#include <unistd.h>

#include "mixedmop/errors.hpp"

namespace mixedmop::cli {

void write_atomic(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::create_directories(path.parent_path());
    std::filesystem::path tmp = path;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out << content;
        out.flush();
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

Csv::Csv(const std::vector<std::string>& header) { row(header); }

Csv& Csv::row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) s_ += ',';
        s_ += cells[i];
    }
    s_ += '\n';
    return *this;
}

std::string cell(const Real& x) { return format_real(x, 17); }
std::string cell(int x) { return std::to_string(x); }

std::string matrix_csv(const Mat& m) {
    Csv csv({"row", "col", "value"});
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            csv.row({cell(static_cast<int>(i)), cell(static_cast<int>(j)), cell(m(i, j))});
    return csv.str();
}

std::string band_csv(const Mat& m, int lower, int upper) {
    Csv csv({"row", "col", "value"});
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = std::max<Eigen::Index>(0, i - lower); j < m.cols() && j <= i + upper; ++j)
            csv.row({cell(static_cast<int>(i)), cell(static_cast<int>(j)), cell(m(i, j))});
    return csv.str();
}

std::string poly_csv(const std::vector<MopPolynomial>& polys) {
    Csv csv({"level", "channel", "degree", "coefficient"});
    for (const MopPolynomial& p : polys)
        for (std::size_t k = 0; k < p.coeffs.size(); ++k)
            csv.row({cell(p.level), cell(p.channel), cell(static_cast<int>(k)), cell(p.coeffs[k])});
    return csv.str();
}

}  // namespace mixedmop::cli
