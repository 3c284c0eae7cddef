#include "mixsim/snapshot.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

namespace mixsim {

namespace {

constexpr char kMagic[4] = {'M', 'X', 'S', '1'};

void put_u64(std::ostream& out, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    out.write(reinterpret_cast<const char*>(b), 8);
}

void put_f64(std::ostream& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    put_u64(out, bits);
}

bool get_u64(std::istream& in, std::uint64_t& v) {
    unsigned char b[8];
    if (!in.read(reinterpret_cast<char*>(b), 8)) return false;
    v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return true;
}

bool get_f64(std::istream& in, double& v) {
    std::uint64_t bits;
    if (!get_u64(in, bits)) return false;
    std::memcpy(&v, &bits, 8);
    return true;
}

void put_field(std::ostream& out, const ScalarField& f) {
    ScalarField g = f;
    g.to_grid();
    for (double v : g.values()) put_f64(out, v);
}

ScalarField get_field(std::istream& in, const GridPtr& grid) {
    ScalarField f(grid);
    for (auto& v : f.values())
        if (!get_f64(in, v)) throw SnapshotError(SnapshotFault::Truncated, "snapshot truncated");
    return f;
}

}  // namespace

void write_snapshot(const MixtureState& state, std::size_t n_species, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw SnapshotError(SnapshotFault::Io, "cannot open snapshot for writing: " + path);
    const SpectralGrid& grid = state.rho.grid();
    out.write(kMagic, 4);
    put_u64(out, static_cast<std::uint64_t>(grid.dim()));
    put_u64(out, static_cast<std::uint64_t>(grid.modes_per_dim()));
    put_u64(out, static_cast<std::uint64_t>(n_species));
    put_f64(out, state.time);
    put_field(out, state.rho);
    for (int d = 0; d < grid.dim(); ++d) put_field(out, state.u[d]);
    put_field(out, state.theta);
    for (const auto& rk : state.r) put_field(out, rk);
    if (!out) throw SnapshotError(SnapshotFault::Io, "write failed: " + path);
}

MixtureState read_snapshot(const std::string& path, const GridPtr& grid, std::size_t n_species) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SnapshotError(SnapshotFault::Io, "cannot open snapshot: " + path);
    char magic[4];
    if (!in.read(magic, 4)) throw SnapshotError(SnapshotFault::Truncated, "snapshot truncated");
    if (std::memcmp(magic, kMagic, 4) != 0)
        throw SnapshotError(SnapshotFault::BadMagic, "not an MXS1 snapshot: " + path);
    std::uint64_t dim, M, n;
    if (!get_u64(in, dim) || !get_u64(in, M) || !get_u64(in, n))
        throw SnapshotError(SnapshotFault::Truncated, "snapshot truncated");
    if (dim != static_cast<std::uint64_t>(grid->dim()) ||
        M != static_cast<std::uint64_t>(grid->modes_per_dim()) ||
        n != static_cast<std::uint64_t>(n_species))
        throw SnapshotError(SnapshotFault::DimensionMismatch,
                            "snapshot dimensions (dim=" + std::to_string(dim) + ", M=" +
                                std::to_string(M) + ", n=" + std::to_string(n) +
                                ") do not match the configuration");
    MixtureState state;
    if (!get_f64(in, state.time))
        throw SnapshotError(SnapshotFault::Truncated, "snapshot truncated");
    state.rho = get_field(in, grid);
    state.u = VectorField(grid);
    for (int d = 0; d < grid->dim(); ++d) state.u[d] = get_field(in, grid);
    state.theta = get_field(in, grid);
    for (std::size_t k = 0; k < n_species; ++k) state.r.push_back(get_field(in, grid));
    return state;
}

}  // namespace mixsim
