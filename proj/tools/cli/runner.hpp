#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace mixedmop::cli {

struct RunOptions {
    std::string command;
    std::string config_path;
    std::filesystem::path out = "mixedmop-out";
    std::vector<std::string> checks;
    double tolerance_scale = 1;
    unsigned seed = 12345;
    int threads = 1;
    // Off: seconds are reported as 0 so that repeated runs are byte-identical.
    bool timing = true;
};

// 0 when every selected check passes, 1 on failures or module errors, 2 on configuration errors.
int run(const RunOptions& opt, std::ostream& log);

}  // namespace mixedmop::cli
