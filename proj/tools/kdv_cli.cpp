#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "kdv/config.hpp"
#include "kdv/convergence.hpp"
#include "kdv/errors.hpp"
#include "kdv/identities.hpp"
#include "kdv/initial_data.hpp"
#include "kdv/ops.hpp"
#include "kdv/scheme.hpp"
#include "kdv/theta_op.hpp"

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_dir = ".";
    std::string format = "csv";
    int threads = 1;
    std::uint64_t seed = 12345;
};

std::string join_path(const std::string& dir, const std::string& name) {
    if (dir.empty() || dir == ".") return name;
    return dir.back() == '/' ? dir + name : dir + "/" + name;
}

void ensure_out_dir(const std::string& dir) {
    if (dir.empty() || dir == ".") return;
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw kdv::UsageError("cannot create output directory '" + dir + "': " + ec.message());
}

kdv::SchemeConfig scheme_from_config(const kdv::Config& cfg) {
    kdv::SchemeConfig sc;
    sc.theta = cfg.get_double("scheme.theta", 1.0);
    const std::string rus = cfg.get_string("scheme.rusanov", "adaptive");
    if (rus == "adaptive")
        sc.rusanov = kdv::RusanovPolicy::adaptive();
    else if (rus == "fixed")
        sc.rusanov = kdv::RusanovPolicy::fixed(cfg.get_double("scheme.c", 1.0));
    else
        throw kdv::UsageError("config: scheme.rusanov must be 'adaptive' or 'fixed'");
    const std::string cfl = cfg.get_string("scheme.cfl", "experimental");
    if (cfl == "experimental")
        sc.cfl = kdv::CflPolicy::experimental();
    else if (cfl == "theoretical")
        sc.cfl = kdv::CflPolicy::theoretical(cfg.get_double("scheme.beta0", 0.1));
    else
        throw kdv::UsageError("config: scheme.cfl must be 'experimental' or 'theoretical'");
    sc.t_final = cfg.get_double("scheme.T", 0.1);
    sc.dt_cap = cfg.get_double("scheme.dt_cap", std::numeric_limits<double>::quiet_NaN());
    const std::string path = cfg.get_string("scheme.path", "spectral");
    if (path == "spectral")
        sc.path = kdv::SolvePath::Spectral;
    else if (path == "banded")
        sc.path = kdv::SolvePath::Banded;
    else
        throw kdv::UsageError("config: scheme.path must be 'spectral' or 'banded'");
    sc.max_steps = static_cast<std::size_t>(cfg.get_long("scheme.max_steps", 50'000'000L));
    return sc;
}

// Maps the config onto a study description. `kind` must be one of the four
// datum families; zero/constant data are handled by `simulate` directly.
kdv::ExperimentSpec spec_from_config(const kdv::Config& cfg, int threads) {
    kdv::ExperimentSpec spec;
    const std::string kind = cfg.get_string("datum.kind", "sinusoidal");
    if (kind == "sinusoidal")
        spec.datum = kdv::ExperimentSpec::Datum::Sinusoidal;
    else if (kind == "cnoidal")
        spec.datum = kdv::ExperimentSpec::Datum::Cnoidal;
    else if (kind == "rough_integer")
        spec.datum = kdv::ExperimentSpec::Datum::RoughInteger;
    else if (kind == "rough_half_integer")
        spec.datum = kdv::ExperimentSpec::Datum::RoughHalfInteger;
    else
        throw kdv::UsageError("config: unknown datum.kind '" + kind + "'");
    spec.L = cfg.get_double("grid.L", kind == "cnoidal" ? 1.0 : 50.0);
    spec.amplitude = cfg.get_double("datum.amplitude", 1.0);
    spec.s = static_cast<int>(cfg.get_long("datum.s", 1));
    spec.level = static_cast<int>(cfg.get_long("datum.level", 1));
    spec.m = cfg.get_double("datum.m", 0.9);
    spec.mu = cfg.get_double("datum.mu", 1.0 / 576.0);
    spec.scheme = scheme_from_config(cfg);
    const std::string err = cfg.get_string("error.kind", kind == "cnoidal" ? "exact" : "self");
    if (err == "self")
        spec.kind = kdv::ExperimentSpec::ErrorKind::SelfTwoGrid;
    else if (err == "exact")
        spec.kind = kdv::ExperimentSpec::ErrorKind::ExactReference;
    else
        throw kdv::UsageError("config: error.kind must be 'self' or 'exact'");
    const std::string mode = cfg.get_string("error.mode", "point");
    if (mode == "point")
        spec.mode = kdv::ExactErrorMode::PointInTime;
    else if (mode == "cell_average")
        spec.mode = kdv::ExactErrorMode::CellTimeAverage;
    else
        throw kdv::UsageError("config: error.mode must be 'point' or 'cell_average'");
    const std::string projection = cfg.get_string("error.projection", "cell_average");
    if (projection == "cell_average")
        spec.projection = kdv::ExperimentSpec::Projection::CellAverage;
    else if (projection == "sample")
        spec.projection = kdv::ExperimentSpec::Projection::PointSample;
    else
        throw kdv::UsageError("config: error.projection must be 'cell_average' or 'sample'");
    spec.quad_order = static_cast<int>(cfg.get_long("error.quad", 4));
    spec.mollify_enabled = cfg.get_bool("mollifier.enabled", false);
    spec.mollify_delta = cfg.get_double("mollifier.delta", -1.0);
    spec.mollify_exponent =
        cfg.get_double("mollifier.a", std::numeric_limits<double>::quiet_NaN());
    spec.threads = threads;
    return spec;
}

std::string state_csv(const kdv::PeriodicGrid& g, std::span<const double> v) {
    std::ostringstream out;
    out << "x,v\n";
    for (std::size_t j = 0; j < g.J; ++j)
        out << kdv::format_g17(g.x(j)) << "," << kdv::format_g17(v[j]) << "\n";
    return out.str();
}

int cmd_simulate(const CommonOpts& opt) {
    if (opt.config_path.empty()) throw kdv::UsageError("simulate: --config is required");
    const kdv::Config cfg = kdv::Config::parse_file(opt.config_path);
    ensure_out_dir(opt.out_dir);

    const std::string kind = cfg.get_string("datum.kind", "sinusoidal");
    const std::string prefix = cfg.get_string("output.prefix", "run");
    const long snapshot_every = cfg.get_long("output.snapshot_every", 0);
    const int quad = static_cast<int>(cfg.get_long("error.quad", 4));

    kdv::ScalarFn u0;
    kdv::SchemeConfig sc;
    double L = cfg.get_double("grid.L", kind == "cnoidal" ? 1.0 : 50.0);
    double s_nominal = std::numeric_limits<double>::infinity();
    if (kind == "zero") {
        sc = scheme_from_config(cfg);
        u0 = [](double) { return 0.0; };
    } else if (kind == "constant") {
        sc = scheme_from_config(cfg);
        const double a = cfg.get_double("datum.amplitude", 1.0);
        u0 = [a](double) { return a; };
    } else {
        kdv::ExperimentSpec spec = spec_from_config(cfg, 1);
        sc = spec.scheme;
        L = spec.L;
        s_nominal = spec.sobolev_index();
        u0 = kdv::make_datum(spec).u0;
    }

    const long J = cfg.get_long("grid.J", 256);
    if (J < 4) throw kdv::UsageError("config: grid.J must be at least 4");
    const kdv::PeriodicGrid g(L, static_cast<std::size_t>(J));
    std::vector<double> v0 = kdv::cell_average(g, u0, quad);
    if (cfg.get_bool("mollifier.enabled", false)) {
        double delta = cfg.get_double("mollifier.delta", -1.0);
        if (delta < 0.0) {
            const double a =
                cfg.get_double("mollifier.a", std::numeric_limits<double>::quiet_NaN());
            delta = std::isfinite(a) ? std::pow(g.dx, a)
                                     : kdv::mollifier_delta_rule(s_nominal, g.dx);
        }
        v0 = kdv::mollify(g, v0, delta);
    }

    kdv::StepObserver obs;
    if (snapshot_every > 0) {
        obs = [&](std::size_t step, double, std::span<const double> v) {
            if (step % static_cast<std::size_t>(snapshot_every) != 0) return;
            char name[64];
            std::snprintf(name, sizeof name, "%s_state_%06zu.csv", prefix.c_str(), step);
            kdv::write_text_atomic(join_path(opt.out_dir, name), state_csv(g, v));
        };
    }

    const kdv::RunResult rr = kdv::run(g, std::move(v0), sc, obs);
    kdv::write_text_atomic(join_path(opt.out_dir, prefix + "_final.csv"),
                           state_csv(g, rr.final_state.v));

    std::cout << "run: datum " << kind << ", J = " << g.J << ", L = " << kdv::format_g17(L)
              << ", theta = " << kdv::format_g17(sc.theta)
              << ", T = " << kdv::format_g17(sc.t_final) << "\n";
    std::cout << "steps = " << rr.steps << ", final t = "
              << kdv::format_g17(rr.stamps.t.empty() ? 0.0 : rr.stamps.t.back()) << "\n";
    std::cout << "l2 = " << kdv::format_g17(kdv::norm_l2_delta(g, rr.final_state.v))
              << ", linf = " << kdv::format_g17(kdv::norm_linf(rr.final_state.v))
              << ", mean = " << kdv::format_g17(kdv::mean(rr.final_state.v)) << "\n";
    std::cout << "max per-step mean drift (relative) = "
              << kdv::format_g17(rr.max_mean_drift_rel) << "\n";
    if (rr.fixed_c_exceeded) std::cout << "warning: " << rr.warning << "\n";
    std::cout << "wrote " << join_path(opt.out_dir, prefix + "_final.csv") << "\n";
    return kdv::kExitOk;
}

std::string rates_csv(const kdv::RateTable& table) {
    std::ostringstream out;
    out << "J,dx,error,rate,noise_floor,steps\n";
    for (const auto& row : table.rows) {
        out << row.J << "," << kdv::format_g17(row.dx) << "," << kdv::format_g17(row.error)
            << "," << kdv::format_g17(row.rate) << "," << (row.noise_floor ? 1 : 0) << ","
            << row.steps << "\n";
    }
    out << "# aggregated_rate = " << kdv::format_g17(table.aggregated_rate) << "\n";
    return out.str();
}

nlohmann::json rates_json(const kdv::RateTable& table, const std::string& datum_name,
                          double s_nominal) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : table.rows) {
        rows.push_back({{"J", row.J},
                        {"dx", row.dx},
                        {"error", row.error},
                        {"rate", row.rate},
                        {"noise_floor", row.noise_floor},
                        {"steps", row.steps}});
    }
    nlohmann::json j{{"datum", datum_name}, {"rows", rows},
                     {"aggregated_rate", table.aggregated_rate}};
    if (std::isfinite(s_nominal)) {
        const kdv::TheoryRates tr = kdv::theory_rates(s_nominal);
        j["nominal_s"] = s_nominal;
        j["proved_rate"] = tr.proved;
        j["conjectured_rate"] = tr.conjectured;
    }
    return j;
}

int cmd_converge(const CommonOpts& opt) {
    if (opt.config_path.empty()) throw kdv::UsageError("converge: --config is required");
    const kdv::Config cfg = kdv::Config::parse_file(opt.config_path);
    ensure_out_dir(opt.out_dir);

    kdv::ExperimentSpec spec = spec_from_config(cfg, opt.threads);
    spec.ladder = cfg.get_ladder("grid.ladder");

    const std::string datum_name = kdv::make_datum(spec).name;
    const kdv::RateTable table = kdv::experiment(spec);

    std::cout << "convergence study: datum " << datum_name << ", error "
              << (spec.kind == kdv::ExperimentSpec::ErrorKind::ExactReference ? "exact" : "self")
              << ", theta = " << kdv::format_g17(spec.scheme.theta)
              << ", T = " << kdv::format_g17(spec.scheme.t_final)
              << ", L = " << kdv::format_g17(spec.L) << "\n";
    std::cout << std::setw(8) << "J" << std::setw(26) << "error" << std::setw(12) << "rate"
              << std::setw(10) << "steps" << "\n";
    for (const auto& row : table.rows) {
        std::ostringstream rate;
        if (std::isfinite(row.rate))
            rate << std::fixed << std::setprecision(5) << row.rate;
        else
            rate << "-";
        std::cout << std::setw(8) << row.J << std::setw(26) << kdv::format_g17(row.error)
                  << std::setw(12) << rate.str() << std::setw(10) << row.steps
                  << (row.noise_floor ? "  (noise floor)" : "") << "\n";
    }
    std::cout << "aggregated rate (mean of the two finest) = "
              << kdv::format_g17(table.aggregated_rate) << "\n";
    const double s_nominal = spec.sobolev_index();
    if (std::isfinite(s_nominal)) {
        const kdv::TheoryRates tr = kdv::theory_rates(s_nominal);
        std::cout << "nominal Sobolev index " << kdv::format_g17(s_nominal)
                  << ": proved rate " << kdv::format_g17(tr.proved) << ", conjectured "
                  << kdv::format_g17(tr.conjectured) << "\n";
    }

    const std::string prefix = cfg.get_string("output.prefix", "rates");
    const std::string path =
        join_path(opt.out_dir, prefix + (opt.format == "json" ? ".json" : ".csv"));
    if (opt.format == "json")
        kdv::write_text_atomic(path, rates_json(table, datum_name, s_nominal).dump(2) + "\n");
    else
        kdv::write_text_atomic(path, rates_csv(table));
    std::cout << "wrote " << path << "\n";

    // Optional pass/fail thresholds declared by the config.
    int breaches = 0;
    if (cfg.has("gate.rate_min") || cfg.has("gate.rate_max")) {
        const double lo = cfg.get_double("gate.rate_min", -std::numeric_limits<double>::infinity());
        const double hi = cfg.get_double("gate.rate_max", std::numeric_limits<double>::infinity());
        for (std::size_t i = 1; i < table.rows.size(); ++i) {
            const double r = table.rows[i].rate;
            if (!std::isfinite(r) || r < lo || r > hi) {
                std::cerr << "gate: rate " << kdv::format_g17(r) << " at J = "
                          << table.rows[i].J << " outside [" << kdv::format_g17(lo) << ", "
                          << kdv::format_g17(hi) << "]\n";
                ++breaches;
            }
        }
    }
    if (cfg.has("gate.aggregated_target")) {
        const double target = cfg.get_double("gate.aggregated_target", 0.0);
        const double window = cfg.get_double("gate.aggregated_window", 0.05);
        if (!(std::abs(table.aggregated_rate - target) <= window)) {
            std::cerr << "gate: aggregated rate " << kdv::format_g17(table.aggregated_rate)
                      << " not within " << kdv::format_g17(window) << " of "
                      << kdv::format_g17(target) << "\n";
            ++breaches;
        }
    }
    return breaches ? kdv::kExitThreshold : kdv::kExitOk;
}

struct SymbolOpts {
    double theta = 1.0;
    double dt = 1e-3;
    double dx = 0.1;
    std::size_t J = 256;
    std::string prefix = "symbol";
};

int cmd_symbol(const CommonOpts& opt, const SymbolOpts& so) {
    ensure_out_dir(opt.out_dir);
    const kdv::PeriodicGrid g(so.dx * static_cast<double>(so.J), so.J);
    const kdv::ThetaOperator op(g, so.theta, so.dt);

    std::ostringstream out;
    out << "k,xi,symbol_re,symbol_im,symbol_abs,amp_re,amp_im,amp_abs\n";
    double max_amp = 0.0;
    for (std::size_t k = 0; k < so.J; ++k) {
        const double xi = static_cast<double>(k) / static_cast<double>(so.J);
        const std::complex<double> sym = op.symbol(k);
        const std::complex<double> amp = kdv::airy_amplification(so.theta, op.r(), xi);
        max_amp = std::max(max_amp, std::abs(amp));
        out << k << "," << kdv::format_g17(xi) << "," << kdv::format_g17(sym.real()) << ","
            << kdv::format_g17(sym.imag()) << "," << kdv::format_g17(std::abs(sym)) << ","
            << kdv::format_g17(amp.real()) << "," << kdv::format_g17(amp.imag()) << ","
            << kdv::format_g17(std::abs(amp)) << "\n";
    }
    const std::string path = join_path(opt.out_dir, so.prefix + ".csv");
    kdv::write_text_atomic(path, out.str());

    const bool stable = max_amp <= 1.0 + 1e-12;
    std::cout << "theta = " << kdv::format_g17(so.theta) << ", r = dt/dx^3 = "
              << kdv::format_g17(op.r()) << "\n";
    std::cout << "max |amplification| = " << kdv::format_g17(max_amp) << " -> "
              << (stable ? "stable" : "UNSTABLE (max |amp| > 1)") << "\n";
    std::cout << "wrote " << path << "\n";
    return kdv::kExitOk;
}

struct CheckOpts {
    std::vector<std::size_t> Js{16, 64, 256};
    std::size_t trials = 1000;
    bool negative_control = false;
};

int cmd_check_identities(const CommonOpts& opt, const CheckOpts& co) {
    if (co.negative_control) {
        // Self-test of the detector: evaluate a deliberately broken product
        // rule (the shift on the first factor is dropped) and demand the
        // residual is flagged. Exit is nonzero when the corruption is caught.
        std::mt19937_64 rng(opt.seed);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        const kdv::PeriodicGrid g(1.0, 64);
        std::vector<double> a(g.J), b(g.J), ab(g.J);
        for (auto& x : a) x = u(rng);
        for (auto& x : b) x = u(rng);
        for (std::size_t j = 0; j < g.J; ++j) ab[j] = a[j] * b[j];
        const std::vector<double> lhs = kdv::d_plus(g, ab);
        const std::vector<double> dpb = kdv::d_plus(g, b);
        const std::vector<double> dpa = kdv::d_plus(g, a);
        double worst = 0.0;
        for (std::size_t j = 0; j < g.J; ++j) {
            const double rhs = a[j] * dpb[j] + b[j] * dpa[j]; // wrong: wants a_{j+1}
            const double scale = std::max({1.0, std::abs(lhs[j]), std::abs(rhs)});
            worst = std::max(worst, std::abs(lhs[j] - rhs) / scale);
        }
        const bool caught = worst > 1e-12;
        std::cout << "negative control: corrupted product rule residual = "
                  << kdv::format_g17(worst) << (caught ? " (caught)" : " (MISSED)") << "\n";
        return caught ? kdv::kExitThreshold : kdv::kExitOk;
    }

    const kdv::IdentityReport report =
        kdv::check_discrete_identities(co.trials, opt.seed, co.Js);
    for (const auto& c : report.checks) {
        std::cout << (c.worst <= report.tolerance ? "PASS" : "FAIL") << "  "
                  << std::setw(24) << kdv::format_g17(c.worst) << "  " << c.name << "\n";
    }

    // Norm relations of the implicit operator on the same kind of random
    // data, across the theta/stiffness sweep.
    std::mt19937_64 rng(opt.seed ^ 0x9e3779b97f4a7c15ULL);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const kdv::PeriodicGrid g(1.0, 64);
    double worst_lower = 0.0, worst_upper = 0.0, worst_decomp = 0.0;
    for (double theta : {0.0, 0.5, 1.0}) {
        for (double r : {0.01, 1.0, 100.0}) {
            const double dt = r * g.dx * g.dx * g.dx;
            const kdv::ThetaOperator op(g, theta, dt);
            for (int t = 0; t < 100; ++t) {
                std::vector<double> a(g.J);
                for (auto& x : a) x = u(rng);
                const kdv::NormBoundsReport nb = kdv::verify_norm_bounds(op, a);
                const double scale = std::max(1.0, nb.norm_Aa_sq);
                worst_lower = std::max(worst_lower, -nb.lower_slack / scale);
                worst_upper = std::max(worst_upper, -nb.upper_slack / scale);
                worst_decomp = std::max(worst_decomp, nb.decomp_residual);
            }
        }
    }
    const double tol = report.tolerance;
    const bool norms_ok = worst_lower <= tol && worst_upper <= tol && worst_decomp <= tol;
    std::cout << (norms_ok ? "PASS" : "FAIL") << "  lower/upper/decomposition worst = "
              << kdv::format_g17(worst_lower) << " / " << kdv::format_g17(worst_upper) << " / "
              << kdv::format_g17(worst_decomp) << "  implicit operator norm relations\n";

    if (report.all_pass() && norms_ok) {
        std::cout << "all checks passed (" << report.checks.size() << " identities, "
                  << co.trials << " trials, seed " << opt.seed << ")\n";
        return kdv::kExitOk;
    }
    std::cerr << "failing checks:\n";
    for (const auto& name : report.failing()) std::cerr << "  " << name << "\n";
    if (!norms_ok) std::cerr << "  implicit operator norm relations\n";
    return kdv::kExitThreshold;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Finite-difference solver and convergence harness for the KdV equation"};
    app.fallthrough();
    app.require_subcommand(1);

    CommonOpts opt;
    app.add_option("--config", opt.config_path, "Path to the run configuration file");
    app.add_option("--out", opt.out_dir, "Output directory (created if missing)");
    app.add_option("--threads", opt.threads, "Parallel ladder rows for converge")
        ->check(CLI::PositiveNumber);
    app.add_option("--seed", opt.seed, "Seed for randomized checks");
    app.add_option("--format", opt.format, "Report file format")
        ->check(CLI::IsMember({"csv", "json"}));

    CLI::App* sim = app.add_subcommand("simulate", "Run once and dump the final state");
    CLI::App* conv = app.add_subcommand("converge", "Run a refinement ladder and report rates");

    SymbolOpts so;
    CLI::App* sym = app.add_subcommand("symbol",
                                       "Dump the implicit operator symbol and the dispersive "
                                       "amplification factor over all grid frequencies");
    sym->add_option("--theta", so.theta, "Implicitness weight in [0,1]");
    sym->add_option("--dt", so.dt, "Time step")->check(CLI::PositiveNumber);
    sym->add_option("--dx", so.dx, "Grid spacing")->check(CLI::PositiveNumber);
    sym->add_option("--J", so.J, "Number of grid points")->check(CLI::PositiveNumber);
    sym->add_option("--prefix", so.prefix, "Output file name prefix");

    CheckOpts co;
    CLI::App* chk = app.add_subcommand("check-identities",
                                       "Run the discrete-calculus property suite");
    chk->add_option("--J", co.Js, "Grid sizes to cycle through");
    chk->add_option("--trials", co.trials, "Number of random trials");
    chk->add_flag("--negative-control", co.negative_control,
                  "Self-test: verify a corrupted rule is flagged (expects nonzero exit)");

    try {
        app.parse(argc, argv);
        if (sim->parsed()) return cmd_simulate(opt);
        if (conv->parsed()) return cmd_converge(opt);
        if (sym->parsed()) return cmd_symbol(opt, so);
        if (chk->parsed()) return cmd_check_identities(opt, co);
        throw kdv::UsageError("no subcommand given");
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kdv::kExitOk : kdv::kExitUsage;
    } catch (const kdv::UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kdv::kExitUsage;
    } catch (const kdv::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kdv::kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kdv::kExitNumerical;
    }
}
