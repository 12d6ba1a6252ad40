// Batch front end: kernel, solve, ellscan, verify, export-slice.
#include "chain/acceptance.hpp"
#include "chain/config.hpp"
#include "chain/fft.hpp"
#include "chain/kernel.hpp"
#include "chain/linsolve.hpp"
#include "chain/parallel.hpp"
#include "chain/poisson.hpp"
#include "chain/report.hpp"
#include "chain/solver.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace chain;

namespace {

enum Exit { kOk = 0, kVerifyFailed = 1, kConfigError = 2, kNumericalFailure = 3 };

struct Options {
    std::string config;
    std::string out = ".";
    std::string only;
    bool resume = false;
    int threads = 1;
};

Config read_config(const Options &o, bool required) {
    if (o.config.empty()) {
        if (required) throw ConfigError("--config is required for this command");
        return parse_config("");
    }
    return load_config(o.config);
}

KernelTable obtain_table(const Config &c, const GridSpec &g) {
    if (!c.kernel_table.empty() && fs::exists(c.kernel_table)) {
        KernelTable t = load_kernel(c.kernel_table);
        if (!(t.grid == g)) throw ConfigError("kernel.table does not match [domain]");
        return t;
    }
    return build_kernel_table(g, c.kernel);
}

int cmd_kernel(const Options &o) {
    const Config c = read_config(o, true);
    const GridSpec &g = require_grid(c);
    const KernelTable t = build_kernel_table(g, c.kernel);
    dump_kernel(t, o.out + "/kernel.bin");
    write_json(kernel_summary(t), o.out + "/kernel.json");
    std::cout.precision(12);
    std::cout << "calibration " << t.calibration << "\ncrossover_R " << t.meta.crossover_R << "\nC_K " << t.meta.C_K
              << "\nfit_slope " << t.meta.fit_slope << "\n";
    return kOk;
}

int cmd_solve(const Options &o) {
    const Config c = read_config(o, true);
    const GridSpec &g = require_grid(c);
    const PotentialSpec a = c.potential.build();
    SolveReport r;
    try {
        if (c.solver.cls == SolverClass::planar) {
            if (!a.z_independent) throw ConfigError("planar class needs an x3-independent potential");
            const GridSpec pg = g.plane();
            r = planar_ground_state(c.solver, a, build_planar_log_table(pg, c.kernel.patch));
        } else {
            r = ground_state(c.solver, a, obtain_table(c, g));
        }
    } catch (const SolverError &e) {
        write_trace_csv(e.trace(), o.out + "/trace.csv");
        write_json({{"error", e.what()}, {"iterations", e.trace().size()}}, o.out + "/report.json");
        throw;
    }
    write_json(to_json(r), o.out + "/report.json");
    write_trace_csv(r.trace, o.out + "/trace.csv");
    dump_field(r.u, o.out + "/field.bin");
    write_mid_slices(r.u, o.out, "slice");
    std::cout.precision(12);
    std::cout << "class " << r.cls << "\nphi " << r.energy.phi << "\ngrad_norm " << r.grad_norm << "\nnehari_residual "
              << r.nehari_residual << "\npde_residual " << r.pde_residual << "\nd3_fraction " << r.d3_fraction << "\n";
    return kOk;
}

int cmd_ellscan(const Options &o) {
    const Config c = read_config(o, true);
    const PotentialSpec a = c.potential.build();
    if (!a.z_independent) throw ConfigError("ellscan needs an x3-independent potential");
    ScanOptions opt;
    if (c.has_grid) {
        opt.L = c.grid.L;
        opt.nx = c.grid.nx;
    }
    opt.hz_target = c.scan.hz;
    opt.patch = c.kernel.patch;
    opt.margin = c.scan.margin;
    const std::string csv = o.out + "/scan.csv";
    if (o.resume && std::filesystem::exists(csv)) {
        for (const ScanRow &r : read_scan_csv(csv))
            if (r.error.empty()) opt.done.push_back(r);
        std::cout << "resumed rows " << opt.done.size() << "\n";
    }
    ScanResult partial;
    partial.rows = opt.done;
    opt.on_row = [&](const ScanRow &row) {
        auto it = std::find_if(partial.rows.begin(), partial.rows.end(), [&](const ScanRow &r) { return r.ell == row.ell; });
        if (it != partial.rows.end())
            *it = row;
        else
            partial.rows.push_back(row);
        write_scan_csv(partial, csv);
    };
    const ScanResult scan = ell_scan(c.scan.ells, c.solver, a, opt);
    write_scan_csv(scan, csv);
    write_json(to_json(scan), o.out + "/scan.json");
    const auto newton = newtonian_limit_experiment(Bump{c.scan.newton_radius, 1.0}, c.scan.newton_ells, c.scan.newton_cells);
    write_newtonian_csv(newton, o.out + "/newton.csv");
    std::cout.precision(12);
    std::cout << "kappa " << scan.kappa << "\nell_star ";
    if (scan.ell_star)
        std::cout << *scan.ell_star << "\n";
    else
        std::cout << "none\n";
    return kOk;
}

int cmd_verify(const Options &o) {
    const Config c = read_config(o, false);
    std::vector<std::string> ids = o.only.empty() ? criterion_ids() : std::vector<std::string>{o.only};
    std::vector<CriterionResult> results;
    bool all = true;
    for (const auto &id : ids) {
        results.push_back(run_criterion(id));
        std::cout << format_result_line(results.back()) << std::endl;
        all = all && results.back().pass;
    }
    std::ofstream(o.out + "/" + c.verify_summary) << summary_json(results) << '\n';
    return all ? kOk : kVerifyFailed;
}

int cmd_export(const Options &o) {
    const Config c = read_config(o, true);
    if (c.export_.field.empty()) throw ConfigError("missing required key export.field");
    const Field u = load_field(c.export_.field);
    const int lim = c.export_.axis == 'z' ? u.grid.nz : u.grid.nx;
    const int index = c.export_.index < 0 ? lim / 2 : c.export_.index;
    if (index >= lim) throw ConfigError("export.index out of range");
    write_slice_csv(u, c.export_.axis, index, o.out + "/slice.csv");
    return kOk;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Chain-structure Choquard solver on a periodic slab"};
    app.require_subcommand(1);
    Options o;
    auto add_common = [&](CLI::App *s) {
        s->add_option("--config", o.config, "configuration file");
        s->add_option("--out", o.out, "output directory");
        s->add_option("--threads", o.threads, "worker threads")->check(CLI::PositiveNumber);
    };
    CLI::App *kernel = app.add_subcommand("kernel", "build and dump the kernel table");
    CLI::App *solve = app.add_subcommand("solve", "compute a ground state");
    CLI::App *scan = app.add_subcommand("ellscan", "scan the half-period");
    CLI::App *verify = app.add_subcommand("verify", "run the acceptance suite");
    CLI::App *exp = app.add_subcommand("export-slice", "write a plane of a dumped field as CSV");
    for (CLI::App *s : {kernel, solve, scan, verify, exp}) add_common(s);
    scan->add_flag("--resume", o.resume, "skip rows already present in scan.csv");
    verify->add_option("--only", o.only, "run a single criterion (A1..A10)");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kConfigError;
    }
    try {
        set_worker_threads(o.threads);
        set_fft_threads(o.threads);
        fs::create_directories(o.out);
        if (*kernel) return cmd_kernel(o);
        if (*solve) return cmd_solve(o);
        if (*scan) return cmd_ellscan(o);
        if (*verify) {
            if (!o.only.empty()) {
                const auto &ids = criterion_ids();
                if (std::find(ids.begin(), ids.end(), o.only) == ids.end()) throw ConfigError("unknown criterion " + o.only);
            }
            return cmd_verify(o);
        }
        if (*exp) return cmd_export(o);
    } catch (const ConfigError &e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::invalid_argument &e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::length_error &e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception &e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kNumericalFailure;
    }
    return kOk;
}
