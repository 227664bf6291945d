#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fkmc/config.hpp"
#include "fkmc/csv.hpp"
#include "fkmc/exit_stats.hpp"
#include "fkmc/models.hpp"
#include "fkmc/nonlocal.hpp"
#include "fkmc/pde_oracle.hpp"
#include "fkmc/portfolio.hpp"
#include "fkmc/solver.hpp"

namespace fkmc {

/// Process exit codes of the CLI.
enum ExitCode : int {
    kOk = 0,
    kFailure = 1,         ///< unexpected error
    kValidation = 2,      ///< bad config, inadmissible kernel, model rejected
    kNumerical = 3,       ///< blowup / instability / evaluation failure
    kNoConvergence = 4,   ///< fixed-point iteration did not converge
};

struct RunOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    std::optional<std::string> out_dir;
};

struct RunResult {
    int exit_code = kOk;
    std::string out_dir;
    std::vector<std::string> files;  ///< artifact names, in write order
    std::string error;               ///< set when exit_code != 0
};

namespace rundetail {

struct ModelBundle {
    CoefficientSet coeffs;
    Domain domain;
};

inline ModelBundle build_model(const Config& cfg) {
    const auto consts = cfg.constants();
    const std::string kind = cfg.get_or("model", "domain", "interval");
    const double r1 = cfg.get_double_or("model", "r1", 0.0);
    const double r2 = cfg.get_double_or("model", "r2", 1.0);
    const double T = cfg.get_double("model", "T");
    Domain domain = kind == "interval"
                        ? Domain::interval(r1, r2)
                        : Domain::spherical_layer(
                              r1, r2, static_cast<std::size_t>(cfg.get_double_or("model", "dim", 2)));

    const std::string preset = cfg.get_or("model", "preset", "");
    CoefficientSet coeffs;
    if (preset == "brownian") {
        coeffs = models::brownian(T);
    } else if (preset == "heat") {
        coeffs = models::heat(T);
    } else if (preset == "gbm") {
        const double sigma = cfg.has("model", "sigma") ? cfg.get_double("model", "sigma")
                             : consts.count("sigma")   ? consts.at("sigma")
                                                       : 0.2;
        coeffs = models::gbm(sigma, T);
    } else if (preset.empty()) {
        // expression-defined scalar model
        coeffs.n = 1;
        coeffs.T = T;
        const Vec mid{0.5 * (r1 + r2)};
        auto compile = [&](const std::string& key, const std::string& fallback) {
            CompiledExpr e(cfg.get_or("model", key, fallback), consts);
            e.smoke_test(mid, 0.0);
            return e;
        };
        CompiledExpr be = compile("b", "0.5");
        CompiledExpr fe = compile("f", "0");
        CompiledExpr le = compile("lambda", "0");
        coeffs.b = [be](const Vec& x, double t) { return Mat::diag({be(x, t)}); };
        coeffs.f = [fe](const Vec& x, double t) { return Vec{fe(x, t)}; };
        coeffs.lambda = [le](const Vec& x, double t) { return le(x, t); };
        if (cfg.has("model", "beta")) {
            std::istringstream in(cfg.get("model", "beta"));
            std::string part;
            while (std::getline(in, part, ';')) {
                CompiledExpr ce(part, consts);
                ce.smoke_test(mid, 0.0);
                coeffs.beta.push_back([ce](const Vec& x, double t) { return Vec{ce(x, t)}; });
            }
        }
        const auto rep = validate_coercivity(coeffs, domain);
        if (rep.rho_hat < -1e-8)
            throw ConfigError("model violates the coercivity condition: rho_hat = " +
                              format_sig(rep.rho_hat, 6));
        coeffs = complete_diffusion(coeffs, domain);
    } else {
        throw ConfigError("unknown preset '" + preset + "'");
    }
    return {coeffs, domain};
}

inline GridSpec build_grid(const Config& cfg, const Domain& domain, double T) {
    const auto nx = static_cast<std::size_t>(cfg.get_double_or("grid", "x_count", 65));
    const auto ns = static_cast<std::size_t>(cfg.get_double_or("grid", "s_count", 33));
    return GridSpec::uniform(domain, nx, T, ns);
}

inline SimConfig build_sim(const Config& cfg, const RunOverrides& ov, bool bridge_default) {
    SimConfig sim;
    sim.step_h = cfg.get_double_or("sim", "step_h", 1e-3);
    sim.path_count = static_cast<std::size_t>(cfg.get_double_or("sim", "paths", 10000));
    sim.base_seed = cfg.get_u64_or("sim", "base_seed", 0);
    sim.bridge_correction = cfg.get_bool_or("sim", "bridge", bridge_default);
    sim.threads = static_cast<unsigned>(cfg.get_double_or("sim", "threads", 1));
    if (ov.seed) sim.base_seed = *ov.seed;
    if (ov.threads) sim.threads = *ov.threads;
    if (sim.step_h <= 0.0) throw ConfigError("[sim] step_h must be positive");
    if (sim.path_count == 0) throw ConfigError("[sim] paths must be >= 1");
    return sim;
}

inline TerminalData build_terminal(const Config& cfg, const GridSpec& grid) {
    const auto consts = cfg.constants();
    CompiledExpr xe(cfg.get("terminal", "xi"), consts);
    xe.smoke_test(Vec{0.5 * (grid.x_nodes.front() + grid.x_nodes.back())}, 0.0);
    return TerminalData::make([xe](double x) { return xe.of_x(x); }, grid);
}

inline gamma::Kernel build_kernel(const Config& cfg, const Domain& domain) {
    const auto consts = cfg.constants();
    const std::string variant = cfg.get("kernel", "variant");
    if (variant == "point") {
        return gamma::PointScaled{cfg.get_double("kernel", "kappa"),
                                  cfg.get_double_or("kernel", "t1", 0.0)};
    }
    if (variant == "two-point") {
        return gamma::TwoPoint{cfg.get_double("kernel", "alpha1"), cfg.get_double("kernel", "t1"),
                               cfg.get_double("kernel", "alpha2"), cfg.get_double("kernel", "t2")};
    }
    if (variant == "time") {
        CompiledExpr ke(cfg.get("kernel", "k"), consts);
        ke.smoke_test(Vec{0.0}, 0.0);
        return gamma::TimeKernel{[ke](double t) { return ke.scalar(t); },
                                 cfg.get_double("kernel", "theta")};
    }
    if (variant == "space-time") {
        CompiledExpr ke(cfg.get("kernel", "k"), consts);
        gamma::SpaceTimeKernel k;
        k.k = [ke](double t, double y, double x) { return ke.space_time(t, y, x); };
        k.theta = cfg.get_double("kernel", "theta");
        k.x_lo = domain.r1;
        k.x_hi = domain.r2;
        k.k(0.0, 0.5 * (domain.r1 + domain.r2), 0.5 * (domain.r1 + domain.r2));
        return k;
    }
    throw ConfigError("unknown kernel variant '" + variant + "'");
}

inline MarketSpec build_market(const Config& cfg) {
    const auto consts = cfg.constants();
    MarketSpec m;
    CompiledExpr se(cfg.get_or("market", "sigma", "0.2"), consts);
    CompiledExpr k1e(cfg.get_or("market", "k1", "0"), consts);
    CompiledExpr k2e(cfg.get_or("market", "k2", "0"), consts);
    CompiledExpr ze(cfg.get("market", "zeta"), consts);
    se.smoke_test(Vec{1.0}, 0.0);
    k1e.smoke_test(Vec{1.0}, 0.0);
    k2e.smoke_test(Vec{1.0}, 0.0);
    m.sigma = [se](double t) { return se.scalar(t); };
    m.k1 = [k1e](double t) { return k1e.scalar(t); };
    m.k2 = [k2e](double t) { return k2e.scalar(t); };
    m.zeta = [ze](double x) { return ze.of_x(x); };
    m.S0 = cfg.get_double("market", "S0");
    m.s_L = cfg.get_double("market", "s_L");
    m.s_U = cfg.get_double("market", "s_U");
    m.W_L = cfg.get_double("market", "W_L");
    m.W_U = cfg.get_double("market", "W_U");
    m.T = cfg.get_double("market", "T");
    m.theta = cfg.get_double_or("market", "theta", m.T);
    ze.smoke_test(Vec{m.S0}, 0.0);
    return m;
}

inline int classify(const std::exception& e) {
    if (dynamic_cast<const NoConvergence*>(&e)) return kNoConvergence;
    if (dynamic_cast<const NumericalBlowup*>(&e) || dynamic_cast<const Instability*>(&e) ||
        dynamic_cast<const NotElliptic*>(&e) || dynamic_cast<const EvaluationError*>(&e) ||
        dynamic_cast<const InterpolationOutOfRange*>(&e) ||
        dynamic_cast<const FieldOutOfRange*>(&e))
        return kNumerical;
    if (dynamic_cast<const Error*>(&e)) return kValidation;
    return kFailure;
}

}  // namespace rundetail

/// Executes one configured command, writing CSV artifacts plus a manifest
/// (resolved config, seed, artifact checksums) into the output directory.
inline RunResult run(const Config& cfg, const RunOverrides& overrides = {}) {
    namespace fs = std::filesystem;
    RunResult result;
    const std::string out_dir =
        overrides.out_dir.value_or(cfg.get_or("output", "dir", "out"));
    result.out_dir = out_dir;
    const int digits = static_cast<int>(cfg.get_double_or("output", "precision", 12));

    std::map<std::string, std::string> artifacts;  // name -> content
    std::string command;
    SimConfig sim;

    try {
        fs::create_directories(out_dir);
        command = cfg.get("run", "command");

        if (command == "solve" || command == "nonlocal" || command == "oracle-compare") {
            auto model = rundetail::build_model(cfg);
            const GridSpec grid = rundetail::build_grid(cfg, model.domain, model.coeffs.T);
            sim = rundetail::build_sim(cfg, overrides, /*bridge_default=*/false);
            const TerminalData xi = rundetail::build_terminal(cfg, grid);

            if (command == "solve") {
                const SolutionField u = solve_cauchy(model.coeffs, model.domain, xi, grid, sim);
                artifacts["u.csv"] = u.to_csv(digits);
            } else if (command == "nonlocal") {
                const auto kernel = rundetail::build_kernel(cfg, model.domain);
                const double tol = cfg.get_double_or("nonlocal", "tol", 1e-3 * std::max(1e-300, xi.sup_norm));
                const auto max_iter =
                    static_cast<std::size_t>(cfg.get_double_or("nonlocal", "max_iter", 50));
                const NonlocalSolution sol =
                    solve_nonlocal(model.coeffs, model.domain, xi, kernel, grid, sim, tol, max_iter);
                artifacts["u.csv"] = sol.field.to_csv(digits);
                artifacts["fixed_point.csv"] = sol.report.to_csv(gamma::describe(kernel), digits);
            } else {
                FDGrid fd;
                fd.nx = static_cast<std::size_t>(cfg.get_double_or("oracle", "nx", 255));
                fd.nt = static_cast<std::size_t>(cfg.get_double_or("oracle", "nt", 256));
                const std::string scheme = cfg.get_or("oracle", "scheme", "crank-nicolson");
                if (scheme == "implicit-euler")
                    fd.scheme = FDScheme::ImplicitEuler;
                else if (scheme != "crank-nicolson")
                    throw ConfigError("unknown FD scheme '" + scheme + "'");
                const SolutionField mc = solve_cauchy(model.coeffs, model.domain, xi, grid, sim);
                const SolutionField fdf = solve_backward_pde(model.coeffs, model.domain, xi, fd);
                const FieldComparison cmp = compare_fields(mc, fdf, grid);
                artifacts["u_mc.csv"] = mc.to_csv(digits);
                artifacts["u_fd.csv"] = resample(fdf, grid).to_csv(digits);
                std::string c = "max_abs_diff,rms_diff,max_abs_z\n";
                c += format_sig(cmp.max_abs_diff, digits) + "," + format_sig(cmp.rms_diff, digits) +
                     "," + format_sig(cmp.max_abs_z, digits) + "\n";
                artifacts["compare.csv"] = c;
            }
        } else if (command == "exit-stats") {
            auto model = rundetail::build_model(cfg);
            sim = rundetail::build_sim(cfg, overrides, /*bridge_default=*/true);
            const double x0 = cfg.get_double("exit", "x");
            const double s = cfg.get_double_or("exit", "s", 0.0);
            const auto thetas = cfg.get_double_list_or("exit", "thetas", {0.5});
            Vec x(model.domain.dim);
            x[0] = x0;
            SurvivalCurve curve;
            for (double th : thetas) {
                const auto est = estimate_survival(model.coeffs, model.domain, x, s, th, sim);
                curve.entries.push_back({x, th, est.p_hat, est.stderr_mean});
            }
            const auto decay =
                static_cast<std::size_t>(cfg.get_double_or("exit", "decay_points", 0));
            if (decay > 0) {
                std::vector<Vec> xs;
                for (std::size_t j = 1; j <= decay; ++j) {
                    Vec xj(model.domain.dim);
                    xj[0] = model.domain.r2 - (model.domain.r2 - x0) * std::pow(2.0, -double(j));
                    xs.push_back(xj);
                }
                const auto dc = boundary_decay_curve(model.coeffs, model.domain, s, thetas.front(),
                                                     xs, sim);
                curve.entries.insert(curve.entries.end(), dc.entries.begin(), dc.entries.end());
            }
            artifacts["survival.csv"] = curve.to_csv(digits);
        } else if (command == "replicate") {
            const MarketSpec market = rundetail::build_market(cfg);
            sim = rundetail::build_sim(cfg, overrides, /*bridge_default=*/false);
            const Domain band = Domain::interval(market.s_L, market.s_U);
            const auto nx = static_cast<std::size_t>(cfg.get_double_or("grid", "x_count", 65));
            const auto ns = static_cast<std::size_t>(cfg.get_double_or("grid", "s_count", 33));
            const GridSpec grid = GridSpec::uniform(band, nx, market.T, ns);
            const double tol = cfg.get_double_or("nonlocal", "tol", 1e-3);
            const auto max_iter =
                static_cast<std::size_t>(cfg.get_double_or("nonlocal", "max_iter", 50));
            const HedgeResult hedge = solve_hedge(market, grid, sim, tol, max_iter);
            const auto rep_paths =
                static_cast<std::size_t>(cfg.get_double_or("market", "rep_paths", 10000));
            const bool diag = cfg.get_bool_or("market", "diagnostics", false);
            const ReplicationReport rep = replicate(market, hedge, rep_paths, sim, diag);
            artifacts["hedge.csv"] = hedge.H.to_csv(digits);
            artifacts["delta.csv"] = hedge.delta.to_csv(digits);
            artifacts["replication.csv"] = rep.to_csv(digits);
            artifacts["replication.txt"] = rep.summary();
            if (diag) artifacts["paths.csv"] = rep.paths_csv(digits);
        } else {
            throw ConfigError("unknown command '" + command + "'");
        }
    } catch (const std::exception& e) {
        result.exit_code = rundetail::classify(e);
        result.error = e.what();
        try {
            write_text_file((fs::path(out_dir) / "error.txt").string(),
                            std::string(e.what()) + "\n");
        } catch (...) {
        }
        return result;
    }

    // artifacts + manifest
    try {
        std::string manifest;
        manifest += "command = " + command + "\n";
        manifest += "seed = " + std::to_string(sim.base_seed) + "\n";
        manifest += "threads = " + std::to_string(sim.threads) + "\n";
        manifest += "[config]\n" + cfg.dump();
        manifest += "[artifacts]\n";
        for (const auto& [name, content] : artifacts) {
            write_text_file((fs::path(out_dir) / name).string(), content);
            result.files.push_back(name);
            manifest += name + " = " + checksum_hex(content) + "\n";
        }
        write_text_file((fs::path(out_dir) / "manifest.txt").string(), manifest);
        result.files.push_back("manifest.txt");
    } catch (const std::exception& e) {
        result.exit_code = kFailure;
        result.error = e.what();
    }
    return result;
}

}  // namespace fkmc
