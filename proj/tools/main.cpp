#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "cli/checks.hpp"
#include "cli/runner.hpp"

int main(int argc, char** argv) {
    using namespace mixedmop::cli;
    CLI::App app{"Mixed multiple orthogonal polynomials: factorization, recursions and integrable flows"};
    app.require_subcommand(1);
    app.fallthrough();

    RunOptions opt;
    std::string out = opt.out.string();
    bool no_timing = false;
    app.add_option("--config", opt.config_path, "Experiment configuration (JSON)")->required();
    app.add_option("--out", out, "Output directory (MIXEDMOP_OUT overrides)");
    app.add_option("--check", opt.checks, "Run only the named check; repeatable")->take_all();
    app.add_option("--tolerance-scale", opt.tolerance_scale, "Multiply every tolerance");
    app.add_option("--seed", opt.seed, "Seed for random sample points");
    app.add_option("--threads", opt.threads, "Checks run concurrently on this many threads");
    app.add_flag("--no-timing", no_timing, "Report zero seconds for byte-identical reruns");

    for (const std::string& name : command_names()) {
        std::string help = name == "verify-all" ? "Every applicable check and every artifact"
                                                : "Checks and artifacts of the " + name + " module";
        app.add_subcommand(name, help);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    opt.command = app.get_subcommands().front()->get_name();
    if (const char* env = std::getenv("MIXEDMOP_OUT"); env && *env) out = env;
    opt.out = out;
    opt.timing = !no_timing;
    return run(opt, std::cout);
}
