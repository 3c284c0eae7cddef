#include "mixsim/csv.hpp"

#include <cstdio>

namespace mixsim {

const char* const kDiagnosticsCsvHeader =
    "time,total_mass,species_ledger,E_total,E_kin,E_int,E_rad,E_cold,E_lambda,"
    "entropy,sigma_total,sigma_min,bd,min_rho,min_theta,min_rho_k,sum_rhok_dev,"
    "picard_iters,energy_residual";

std::string format_diagnostics_row(const DiagnosticsReport& rep) {
    char buf[1024];
    std::snprintf(buf, sizeof(buf),
                  "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,"
                  "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d,%.17g",
                  rep.time, rep.total_mass, rep.species_ledger, rep.E_total, rep.E_kin,
                  rep.E_int, rep.E_rad, rep.E_cold, rep.E_lambda, rep.entropy,
                  rep.sigma_total, rep.sigma_min, rep.bd, rep.min_rho, rep.min_theta,
                  rep.min_rho_k, rep.sum_rhok_dev, rep.picard_iters, rep.energy_residual);
    return std::string(buf);
}

void DiagnosticsCsv::write_row(const DiagnosticsReport& rep) {
    if (!header_written_) {
        out_ << kDiagnosticsCsvHeader << '\n';
        header_written_ = true;
    }
    out_ << format_diagnostics_row(rep) << '\n';
    if (!out_) throw std::runtime_error("diagnostics CSV write failed");
}

}  // namespace mixsim
