#pragma once

// Binary state snapshots. Format `MXS1`:
//   bytes 0..3   magic "MXS1"
//   3 x uint64   dim, M, n_species        (little endian)
//   1 x float64  time                     (little endian)
//   float64 arrays, row-major grid order: rho, u_1..u_dim, theta, r_1..r_n
// Reading back a written snapshot reproduces the state bit-exactly.

#include <string>

#include "mixsim/solver.hpp"
#include "mixsim/spectral.hpp"

namespace mixsim {

enum class SnapshotFault { BadMagic, Truncated, DimensionMismatch, Io };

class SnapshotError : public std::runtime_error {
public:
    SnapshotError(SnapshotFault fault, const std::string& message)
        : std::runtime_error(message), fault(fault) {}
    SnapshotFault fault;
};

void write_snapshot(const MixtureState& state, std::size_t n_species, const std::string& path);

// The grid must match the stored dim/M; n_species must match the stored count.
MixtureState read_snapshot(const std::string& path, const GridPtr& grid, std::size_t n_species);

}  // namespace mixsim
