#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "mixsim/cli.hpp"
#include "mixsim/config.hpp"
#include "mixsim/csv.hpp"
#include "mixsim/snapshot.hpp"

using namespace mixsim;

namespace {

std::string minimal_config() {
    return "[grid]\n"
           "dim = 1\n"
           "M = 16\n";
}

std::filesystem::path temp_dir() {
    auto p = std::filesystem::temp_directory_path() / "mixsim_io_test";
    std::filesystem::create_directories(p);
    return p;
}

void write_file(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << text;
}

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

MixtureState random_state(const GridPtr& g, std::size_t n) {
    MixtureState st;
    st.time = 0.375;
    st.rho = ScalarField(g);
    st.theta = ScalarField(g);
    st.u = VectorField(g);
    unsigned seed = 12345;
    auto next = [&seed]() {
        seed = seed * 1103515245u + 12345u;
        return 0.5 + static_cast<double>(seed % 1000) / 2000.0;
    };
    for (auto& v : st.rho.values()) v = next();
    for (auto& v : st.theta.values()) v = next();
    for (int d = 0; d < g->dim(); ++d)
        for (auto& v : st.u[d].values()) v = next() - 0.75;
    for (std::size_t k = 0; k < n; ++k) {
        ScalarField rk(g);
        for (auto& v : rk.values()) v = -next();
        st.r.push_back(std::move(rk));
    }
    return st;
}

}  // namespace

TEST_CASE("minimal config yields the documented defaults") {
    RunConfig cfg = parse_config(minimal_config());
    CHECK(cfg.dim == 1);
    CHECK(cfg.M == 16);
    CHECK(cfg.approx.epsilon == doctest::Approx(1e-3));
    CHECK(cfg.approx.delta == 0.0);
    CHECK(cfg.approx.lambda == doctest::Approx(1e-6));
    CHECK(cfg.approx.s == 1);
    CHECK(cfg.physics.n_species == 1);
    CHECK(cfg.physics.gamma_minus == doctest::Approx(10.0));
    CHECK(cfg.physics.gamma_plus == doctest::Approx(6.0));
    CHECK(cfg.physics.B == doctest::Approx(8.0));
    CHECK(cfg.chemistry.kind == ReactionKind::Inert);
    CHECK(cfg.initial.preset == InitialPreset::Uniform);
    CHECK(cfg.output.diag_every == 1);
}

TEST_CASE("config serialization round-trips losslessly") {
    RunConfig cfg = parse_config(
        "[grid]\ndim = 2\nM = 24\n"
        "[approx]\nepsilon = 0.0012345678901234567\ndelta = 0.25\nlambda = 3e-7\ns = 2\n"
        "dt = 7.5e-4\nt_end = 0.125\n"
        "[physics]\nn_species = 3\nm = 0.5,1.25,1.25\ngamma_minus = 11\ngamma_plus = 5.5\n"
        "beta = 0.07\nkappa0 = 0.3\n"
        "[chemistry]\nmodel = reversible_pair\npair = 2,3\nkappa_r = 1.5\nomega_bar = 0.4\n"
        "[initial]\npreset = two_blob\nrho0 = 1.5\ntheta0 = 0.9\nY0 = 0.25,0.25,0.5\n"
        "amp_Y = 0.1\nrho_coeffs = 2:0.03:0.7,3:0.01\n"
        "[output]\nout_dir = somewhere\ndiag_every = 5\nbd_r = 3\n");
    const std::string text = serialize_config(cfg);
    RunConfig back = parse_config(text);
    CHECK(serialize_config(back) == text);
    CHECK(back.M == cfg.M);
    CHECK(back.approx.epsilon == cfg.approx.epsilon);
    CHECK(back.approx.dt == cfg.approx.dt);
    CHECK(back.physics.m == cfg.physics.m);
    CHECK(back.chemistry.pair_b == cfg.chemistry.pair_b);
    CHECK(back.initial.rho_coeffs.size() == 2);
    CHECK(back.initial.rho_coeffs[0].phase == cfg.initial.rho_coeffs[0].phase);
    CHECK(back.output.out_dir == "somewhere");
}

TEST_CASE("config rejections carry line numbers and the violated rule") {
    SUBCASE("gamma_minus bound") {
        const std::string text = minimal_config() + "[physics]\ngamma_minus = 4\n";
        try {
            parse_config(text);
            FAIL("expected rejection");
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find("gamma_minus > 5 required") != std::string::npos);
            CHECK(e.line == 5);
        }
    }
    SUBCASE("conductivity exponent bound") {
        const std::string text = minimal_config() + "[physics]\nB = 6\n";
        try {
            parse_config(text);
            FAIL("expected rejection");
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find("B >= 8 required") != std::string::npos);
            CHECK(e.line == 5);
        }
    }
    SUBCASE("unknown key") {
        const std::string text = minimal_config() + "banana = 3\n";
        try {
            parse_config(text);
            FAIL("expected rejection");
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find("unknown key") != std::string::npos);
            CHECK(e.line == 4);
        }
    }
    SUBCASE("unknown section") {
        CHECK_THROWS_AS(parse_config("[nonsense]\nx = 1\n"), ConfigError);
    }
    SUBCASE("syntax error") {
        try {
            parse_config("[grid]\ndim 1\n");
            FAIL("expected rejection");
        } catch (const ConfigError& e) {
            CHECK(e.line == 2);
        }
    }
    SUBCASE("coupled exponent rule") {
        const std::string text =
            minimal_config() + "[physics]\ngamma_plus = 4\ngamma_minus = 10\n";
        CHECK_THROWS_AS(parse_config(text), ConfigError);
    }
    SUBCASE("duplicate key") {
        CHECK_THROWS_AS(parse_config("[grid]\nM = 16\nM = 32\n"), ConfigError);
    }
}

TEST_CASE("initial-data presets") {
    RunConfig cfg = parse_config(
        "[grid]\ndim = 1\nM = 32\n"
        "[physics]\nn_species = 2\nm = 1,1\n"
        "[initial]\npreset = two_blob\nrho0 = 1.0\namp_rho = 0.1\namp_Y = 0.25\n");
    auto grid = std::make_shared<SpectralGrid>(cfg.dim, cfg.M);
    InitialData init = build_initial_data(cfg, grid);
    init.validate();
    // blob pattern: species 1 peaks where cos x = 1
    CHECK(init.rho_k0[0].values()[0] > init.rho_k0[1].values()[0]);
    const std::size_t half = init.rho0.values().size() / 2;
    CHECK(init.rho_k0[0].values()[half] < init.rho_k0[1].values()[half]);
    // species sum to the total pointwise
    for (std::size_t i = 0; i < init.rho0.values().size(); ++i) {
        const double s = init.rho_k0[0].values()[i] + init.rho_k0[1].values()[i];
        CHECK(s == doctest::Approx(init.rho0.values()[i]).epsilon(1e-14));
    }

    SUBCASE("trigonometric coefficient lists are applied") {
        RunConfig c2 = parse_config(
            "[grid]\ndim = 1\nM = 32\n"
            "[initial]\npreset = uniform\nrho0 = 2.0\nrho_coeffs = 2:0.05:0.5\n");
        InitialData i2 = build_initial_data(c2, grid);
        ScalarField rho = i2.rho0;
        rho.to_spectral();
        // mode 2 amplitude 2.0*0.05/2; cos(kx+phi) puts e^{+i phi} on the +k side
        CHECK(std::abs(rho.coeffs()[2]) == doctest::Approx(0.05).epsilon(1e-12));
        CHECK(std::arg(rho.coeffs()[2]) == doctest::Approx(0.5).epsilon(1e-10));
    }
    SUBCASE("overshooting blob contrast is rejected") {
        RunConfig c3 = cfg;
        c3.initial.amp_Y = 0.8;
        CHECK_THROWS_AS(build_initial_data(c3, grid), ConfigError);
    }
}

TEST_CASE("snapshot round-trip is bit-exact") {
    auto grid = std::make_shared<SpectralGrid>(2, 8);
    MixtureState st = random_state(grid, 2);
    const auto path = temp_dir() / "state.mxs";
    write_snapshot(st, 2, path.string());
    MixtureState back = read_snapshot(path.string(), grid, 2);

    CHECK(back.time == st.time);
    for (std::size_t i = 0; i < st.rho.values().size(); ++i) {
        CHECK(back.rho.values()[i] == st.rho.values()[i]);
        CHECK(back.theta.values()[i] == st.theta.values()[i]);
        CHECK(back.u[0].values()[i] == st.u[0].values()[i]);
        CHECK(back.u[1].values()[i] == st.u[1].values()[i]);
        CHECK(back.r[0].values()[i] == st.r[0].values()[i]);
        CHECK(back.r[1].values()[i] == st.r[1].values()[i]);
    }
}

TEST_CASE("snapshot faults are distinct") {
    auto grid = std::make_shared<SpectralGrid>(1, 16);
    MixtureState st = random_state(grid, 1);
    const auto dir = temp_dir();

    SUBCASE("bad magic") {
        const auto path = dir / "bad_magic.mxs";
        write_file(path, "NOPE" + std::string(100, '\0'));
        try {
            read_snapshot(path.string(), grid, 1);
            FAIL("expected fault");
        } catch (const SnapshotError& e) {
            CHECK(e.fault == SnapshotFault::BadMagic);
        }
    }
    SUBCASE("truncation") {
        const auto path = dir / "trunc.mxs";
        write_snapshot(st, 1, path.string());
        std::string bytes = read_file(path);
        write_file(path, bytes.substr(0, bytes.size() / 2));
        try {
            read_snapshot(path.string(), grid, 1);
            FAIL("expected fault");
        } catch (const SnapshotError& e) {
            CHECK(e.fault == SnapshotFault::Truncated);
        }
    }
    SUBCASE("dimension mismatch") {
        const auto path = dir / "dims.mxs";
        write_snapshot(st, 1, path.string());
        auto other = std::make_shared<SpectralGrid>(1, 32);
        try {
            read_snapshot(path.string(), other, 1);
            FAIL("expected fault");
        } catch (const SnapshotError& e) {
            CHECK(e.fault == SnapshotFault::DimensionMismatch);
        }
    }
    SUBCASE("missing file") {
        try {
            read_snapshot((dir / "nope.mxs").string(), grid, 1);
            FAIL("expected fault");
        } catch (const SnapshotError& e) {
            CHECK(e.fault == SnapshotFault::Io);
        }
    }
}

TEST_CASE("diagnostics CSV schema") {
    DiagnosticsReport rep;
    rep.time = 0.25;
    rep.total_mass = 6.283185307179586;
    rep.picard_iters = 4;

    std::ostringstream out;
    DiagnosticsCsv csv(out);
    csv.write_row(rep);
    csv.write_row(rep);

    std::istringstream in(out.str());
    std::string header, row1, row2;
    std::getline(in, header);
    std::getline(in, row1);
    std::getline(in, row2);
    CHECK(header == kDiagnosticsCsvHeader);
    CHECK(row1 == row2);

    auto count_cols = [](const std::string& s) {
        return 1 + std::count(s.begin(), s.end(), ',');
    };
    CHECK(count_cols(header) == 19);
    CHECK(count_cols(row1) == 19);
    // 17 significant digits survive the round trip
    CHECK(row1.find("6.2831853071795862") != std::string::npos);
}

TEST_CASE("cli: run, check, snapshot loop") {
    const auto dir = temp_dir() / "loop";
    std::filesystem::create_directories(dir);
    const auto cfg_path = dir / "run.cfg";
    write_file(cfg_path,
               "[grid]\ndim = 1\nM = 16\n"
               "[approx]\ndt = 1e-3\nt_end = 5e-3\n"
               "[physics]\nn_species = 2\nm = 1,1\n"
               "[initial]\npreset = perturbed\n"
               "[output]\nout_dir = " + (dir / "out").string() + "\n");

    SUBCASE("run then check passes") {
        CHECK(cmd_run(cfg_path.string(), "") == 0);
        CHECK(std::filesystem::exists(dir / "out" / "diagnostics.csv"));
        CHECK(std::filesystem::exists(dir / "out" / "final.mxs"));
        CHECK(cmd_check((dir / "out" / "final.mxs").string(), cfg_path.string()) == 0);
    }
    SUBCASE("identical runs give byte-identical CSV") {
        CHECK(cmd_run(cfg_path.string(), (dir / "a").string()) == 0);
        CHECK(cmd_run(cfg_path.string(), (dir / "b").string()) == 0);
        CHECK(read_file(dir / "a" / "diagnostics.csv") ==
              read_file(dir / "b" / "diagnostics.csv"));
    }
    SUBCASE("check on a corrupted snapshot fails with exit 1") {
        CHECK(cmd_run(cfg_path.string(), (dir / "c").string()) == 0);
        const auto snap = dir / "c" / "final.mxs";
        std::string bytes = read_file(snap);
        write_file(snap, bytes.substr(0, bytes.size() - 13));
        CHECK(cmd_check(snap.string(), cfg_path.string()) == 1);
    }
    SUBCASE("usage errors exit with 2") {
        CHECK(cli_main(std::vector<std::string>{}) == 2);
        CHECK(cli_main({"run"}) == 2);
        CHECK(cmd_run((dir / "missing.cfg").string(), "") == 2);
    }
}
