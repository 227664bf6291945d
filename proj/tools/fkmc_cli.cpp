#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "fkmc/csv.hpp"
#include "fkmc/run.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Monte Carlo solver for backward parabolic problems in bounded domains"};

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    std::optional<std::string> out_dir;

    app.add_option("--config", config_path, "path to the INI config file")->required();
    app.add_option("--seed", seed, "override [sim] base_seed");
    app.add_option("--threads", threads, "override [sim] threads");
    app.add_option("--out", out_dir, "override [output] dir");

    CLI11_PARSE(app, argc, argv);

    try {
        const fkmc::Config cfg = fkmc::Config::parse(fkmc::read_text_file(config_path));
        fkmc::RunOverrides ov;
        ov.seed = seed;
        ov.threads = threads;
        ov.out_dir = out_dir;
        const fkmc::RunResult result = fkmc::run(cfg, ov);
        if (result.exit_code != fkmc::kOk) {
            std::cerr << "error: " << result.error << "\n";
        } else {
            for (const auto& f : result.files) std::cout << result.out_dir << "/" << f << "\n";
        }
        return result.exit_code;
    } catch (const fkmc::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return fkmc::kValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return fkmc::kFailure;
    }
}
