#include "mixsim/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "mixsim/config.hpp"
#include "mixsim/csv.hpp"
#include "mixsim/diagnostics.hpp"
#include "mixsim/snapshot.hpp"
#include "mixsim/verification.hpp"

namespace mixsim {

namespace {

std::string snapshot_name(int step) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "snap_%06d.mxs", step);
    return buf;
}

}  // namespace

int cmd_run(const std::string& config_path, const std::string& out_override) {
    RunConfig cfg;
    try {
        cfg = load_config(config_path);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    if (!out_override.empty()) cfg.output.out_dir = out_override;

    try {
        auto grid = std::make_shared<SpectralGrid>(cfg.dim, cfg.M);
        Stepper stepper(grid, cfg.approx, cfg.physics, cfg.chemistry);
        InitialData init = build_initial_data(cfg, grid);

        std::filesystem::create_directories(cfg.output.out_dir);
        const std::string csv_path = cfg.output.out_dir + "/diagnostics.csv";
        std::ofstream csv_file(csv_path, std::ios::binary | std::ios::trunc);
        if (!csv_file) {
            std::cerr << "error: cannot open " << csv_path << " for writing\n";
            return 1;
        }
        DiagnosticsCsv csv(csv_file);
        DiagnosticsOptions dopt;
        dopt.bd_r = cfg.output.bd_r;

        int step = 0;
        double prev_energy = -1.0;
        auto hook = [&](const MixtureState& state, const StepRecord& rec) {
            const bool due = (step % cfg.output.diag_every == 0) ||
                             state.time >= cfg.approx.t_end - 1e-12;
            if (due) {
                DiagnosticsReport rep = assemble_report(state, cfg.approx, cfg.physics,
                                                        cfg.chemistry, rec, prev_energy, dopt);
                csv.write_row(rep);
                prev_energy = rep.E_total;
            } else {
                prev_energy = total_energy(state, cfg.approx, cfg.physics).total();
            }
            if (cfg.output.snapshot_every > 0 && step > 0 &&
                step % cfg.output.snapshot_every == 0)
                write_snapshot(state, cfg.physics.n_species,
                               cfg.output.out_dir + "/" + snapshot_name(step));
            ++step;
        };

        MixtureState final_state = stepper.run(init, hook);
        write_snapshot(final_state, cfg.physics.n_species, cfg.output.out_dir + "/final.mxs");
        std::cout << "run complete: t = " << final_state.time << ", " << (step - 1)
                  << " steps, output in " << cfg.output.out_dir << "\n";
        return 0;
    } catch (const PositivityError& e) {
        std::cerr << "run aborted: " << e.what() << "\n";
        return 1;
    } catch (const StepError& e) {
        std::cerr << "run aborted: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

int cmd_check(const std::string& snapshot_path, const std::string& config_path) {
    RunConfig cfg;
    try {
        cfg = load_config(config_path);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    try {
        auto grid = std::make_shared<SpectralGrid>(cfg.dim, cfg.M);
        MixtureState state = read_snapshot(snapshot_path, grid, cfg.physics.n_species);

        DiagnosticsOptions dopt;
        dopt.bd_r = cfg.output.bd_r;
        DiagnosticsReport rep = assemble_report(state, cfg.approx, cfg.physics, cfg.chemistry,
                                                StepRecord{}, -1.0, dopt);

        bool ok = true;
        auto verdict = [&ok](const std::string& name, bool pass, double value) {
            std::cout << "check " << name << ": " << (pass ? "PASS" : "FAIL") << " (" << value
                      << ")\n";
            ok = ok && pass;
        };
        const double vol = state.rho.grid().volume();
        bool finite = true;
        for (double v : {rep.total_mass, rep.species_ledger, rep.E_total, rep.entropy,
                         rep.sigma_total, rep.sigma_min, rep.bd})
            finite = finite && std::isfinite(v);
        verdict("finite diagnostics", finite, rep.E_total);
        verdict("min_rho > 0", rep.min_rho > 0.0, rep.min_rho);
        verdict("min_theta > 0", rep.min_theta > 0.0, rep.min_theta);
        verdict("min_rho_k >= 0", rep.min_rho_k >= 0.0, rep.min_rho_k);
        verdict("bd >= 0", rep.bd >= 0.0, rep.bd);
        verdict("sigma_min tolerance",
                rep.sigma_min >= -1e-8 * std::max(rep.sigma_total / vol, 0.0) - 1e-12,
                rep.sigma_min);
        if (cfg.approx.delta == 0.0)
            verdict("species/total consistency", rep.sum_rhok_dev <= cfg.output.consistency_band,
                    rep.sum_rhok_dev);
        return ok ? 0 : 1;
    } catch (const SnapshotError& e) {
        std::cerr << "check failed: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

int cmd_mms(const std::string& case_name, int levels) {
    try {
        const MmsCaseKind kind = mms_case_from_name(case_name);

        ApproxParams ap;
        ap.epsilon = 1e-3;
        ap.delta = 0.0;
        ap.lambda = 1e-6;
        ap.s = 1;
        ap.dt = 1e-5;
        ap.t_end = 0.02;

        std::vector<int> Ms;
        for (int l = 0, M = 8; l < levels; ++l, M *= 2) Ms.push_back(M);
        std::cout << "spatial study, case " << case_name << ":\n";
        ConvergenceStudy sp = spatial_study(kind, Ms, ap);
        for (std::size_t i = 0; i < sp.levels.size(); ++i)
            std::cout << "  M = " << sp.levels[i] << "  error = " << sp.errors[i] << "\n";
        const double ratio = sp.errors.front() / std::max(sp.errors.back(), 1e-300);
        std::cout << "  error(M=" << Ms.front() << ") / error(M=" << Ms.back()
                  << ") = " << ratio << "\n";

        ApproxParams at = ap;
        at.t_end = 0.1;
        const std::vector<double> dts = {1e-2, 5e-3, 2.5e-3};
        std::cout << "temporal study at M = 32:\n";
        ConvergenceStudy tm = temporal_study(kind, 32, dts, at);
        for (std::size_t i = 0; i < tm.levels.size(); ++i)
            std::cout << "  dt = " << tm.levels[i] << "  error = " << tm.errors[i] << "\n";
        std::cout << "  observed temporal order = " << tm.observed_order << "\n";

        const bool spatial_ok = ratio >= 100.0;
        const bool temporal_ok = tm.observed_order >= 0.9;
        std::cout << "spatial decay:   " << (spatial_ok ? "PASS" : "FAIL") << "\n";
        std::cout << "temporal order:  " << (temporal_ok ? "PASS" : "FAIL") << "\n";
        return (spatial_ok && temporal_ok) ? 0 : 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "mms failed: " << e.what() << "\n";
        return 1;
    }
}

int cli_main(const std::vector<std::string>& args) {
    CLI::App app{"spectral mixture simulator"};
    app.require_subcommand(1);

    std::string config_path, out_dir, snapshot_path, case_name;
    int levels = 3;

    CLI::App* run = app.add_subcommand("run", "integrate a configuration and write diagnostics");
    run->add_option("--config", config_path, "configuration file")->required();
    run->add_option("--out", out_dir, "output directory (overrides [output] out_dir)");

    CLI::App* check = app.add_subcommand("check", "recompute and verify a snapshot's invariants");
    check->add_option("--snapshot", snapshot_path, "MXS1 snapshot")->required();
    check->add_option("--config", config_path, "configuration file")->required();

    CLI::App* mms = app.add_subcommand("mms", "manufactured-solution convergence study");
    mms->add_option("--case", case_name, "continuity | species_single | coupled2")->required();
    mms->add_option("--levels", levels, "number of spatial refinement levels")
        ->check(CLI::Range(2, 5));

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        std::ostream& out = (e.get_exit_code() == 0) ? std::cout : std::cerr;
        const int code = app.exit(e, out, out);
        return (code == 0) ? 0 : 2;
    }

    if (run->parsed()) return cmd_run(config_path, out_dir);
    if (check->parsed()) return cmd_check(snapshot_path, config_path);
    if (mms->parsed()) return cmd_mms(case_name, levels);
    return 2;
}

int cli_main(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return cli_main(args);
}

}  // namespace mixsim
