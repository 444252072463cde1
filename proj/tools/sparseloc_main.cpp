#include <CLI11.hpp>
#include <cstdio>
#include <exception>

#include "sparseloc/commands.hpp"
#include "sparseloc/types.hpp"

namespace {

// Exit codes: 0 ok, 2 config error, 3 numeric divergence, 4 I/O error.
int run(const std::string& command, const std::string& config_path,
        const sparseloc::CliOptions& opts) {
    using namespace sparseloc;
    try {
        const auto config = load_config(config_path);
        if (command == "simulate")
            cmd_simulate(config, opts);
        else if (command == "solve")
            cmd_solve(config, opts);
        else if (command == "train")
            cmd_train(config, opts);
        else if (command == "infer")
            cmd_infer(config, opts);
        else if (command == "eval")
            cmd_eval(config, opts);
        else if (command == "render")
            cmd_render(config, opts);
        return 0;
    } catch (const DivergenceError& e) {
        std::fprintf(stderr, "divergence: %s\n", e.what());
        return 3;
    } catch (const IoError& e) {
        std::fprintf(stderr, "io error: %s\n", e.what());
        return 4;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sparseloc: sparse source localization via iterative and unrolled solvers"};
    app.require_subcommand(1);

    std::string config_path;
    sparseloc::CliOptions opts;
    uint64_t seed_flag = 0;

    const char* names[] = {"simulate", "solve", "train", "infer", "eval", "render"};
    const char* descs[] = {"render a synthetic frame sequence with ground truth",
                           "recover a grid with ista, fista or sparcom",
                           "train an unrolled net on a simulated dataset",
                           "run a trained net over a frame sequence",
                           "compute localization metrics for a recovered grid",
                           "write a recovered grid as a 16-bit graymap"};
    for (int i = 0; i < 6; ++i) {
        auto* sub = app.add_subcommand(names[i], descs[i]);
        sub->add_option("--config", config_path, "path to the JSON run config")->required();
        auto* seed_opt = sub->add_option("--seed", seed_flag, "override the config seed");
        sub->add_option("--out", opts.out_dir, "output directory (default .)");
        sub->add_option("--threads", opts.threads, "worker threads for frame rendering");
        sub->callback([&, seed_opt, name = std::string(names[i])]() {
            if (seed_opt->count() > 0) opts.seed = seed_flag;
            const int code = run(name, config_path, opts);
            if (code != 0) std::exit(code);
        });
    }

    CLI11_PARSE(app, argc, argv);
    return 0;
}
