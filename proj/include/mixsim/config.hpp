#pragma once

// Flat key-value run configuration. Sections [grid], [approx], [physics],
// [chemistry], [initial], [output]; `key = value` lines; '#' comments.
// Unknown sections or keys and every constraint violation are rejected with
// the offending line number.

#include <string>
#include <vector>

#include "mixsim/chemistry.hpp"
#include "mixsim/constitutive.hpp"
#include "mixsim/solver.hpp"

namespace mixsim {

class ConfigError : public std::runtime_error {
public:
    ConfigError(int line, const std::string& message)
        : std::runtime_error(line > 0 ? "config line " + std::to_string(line) + ": " + message
                                      : "config: " + message),
          line(line) {}
    int line;
};

enum class InitialPreset { Uniform, Perturbed, TwoBlob };

struct TrigCoeff {
    int k = 1;          // wavenumber along the first axis
    double amp = 0.0;
    double phase = 0.0;
};

struct InitialSpec {
    InitialPreset preset = InitialPreset::Uniform;
    double rho0 = 1.0;
    double theta0 = 1.0;
    double u0 = 0.0;                 // mean velocity along the first axis
    std::vector<double> Y0;          // base mass fractions, sum to 1
    double amp_rho = 0.0;            // cos(x1) amplitudes (relative for rho/theta)
    double amp_theta = 0.0;
    double amp_u = 0.0;              // sin(x1) amplitude (absolute)
    double amp_Y = 0.0;              // two-blob species contrast
    std::vector<TrigCoeff> rho_coeffs, theta_coeffs, u_coeffs;
};

struct OutputOptions {
    std::string out_dir = "out";
    int diag_every = 1;        // steps between diagnostics rows
    int snapshot_every = 0;    // steps between snapshots; 0 = final only
    double bd_r = 2.0;         // B-D functional constant, > 1
    double consistency_band = 1e-3;  // allowed |sum rho_k - rho|/rho when delta = 0
};

struct RunConfig {
    int dim = 1;
    int M = 64;
    ApproxParams approx;
    ConstitutiveParams physics;
    ReactionModel chemistry;
    InitialSpec initial;
    OutputOptions output;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

// Canonical text form; parse_config(serialize_config(cfg)) reproduces cfg
// exactly (17 significant digits on every number).
std::string serialize_config(const RunConfig& cfg);

// Realizes the named preset plus coefficient lists on the grid. The total
// density is dealiased first and the species built as exact pointwise
// fractions of it, so sum_k rho_k0 = rho0 holds to round-off.
InitialData build_initial_data(const RunConfig& cfg, const GridPtr& grid);

}  // namespace mixsim
