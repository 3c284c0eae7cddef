#pragma once

// Diagnostics time series as CSV. Fixed 19-column schema, header written
// once, 17 significant digits so replay comparisons are bit-faithful.

#include <ostream>
#include <string>

#include "mixsim/diagnostics.hpp"

namespace mixsim {

extern const char* const kDiagnosticsCsvHeader;

std::string format_diagnostics_row(const DiagnosticsReport& rep);

class DiagnosticsCsv {
public:
    explicit DiagnosticsCsv(std::ostream& out) : out_(out) {}

    // Appends one row; the header goes out before the first row.
    void write_row(const DiagnosticsReport& rep);

private:
    std::ostream& out_;
    bool header_written_ = false;
};

}  // namespace mixsim
