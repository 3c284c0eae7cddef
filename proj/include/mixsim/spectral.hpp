#pragma once

// Periodic-torus discrete calculus on [0,2pi)^dim collocation grids:
// normalized FFTs, derivatives and Laplacian powers as Fourier multipliers,
// Galerkin truncation to a wavenumber ball, 2/3-rule dealiasing.

#include <complex>
#include <cstddef>
#include <memory>
#include <vector>

namespace mixsim {

class FftEngine;  // fftw-backed, defined in spectral.cpp

// Grid descriptor plus transform engine. M must be even, dim in {1,2,3}.
// Collocation points are x_i = 2*pi*j/M; wavenumbers per axis are the
// integers 0..M/2-1, -M/2..-1 in FFT storage order.
class SpectralGrid {
public:
    SpectralGrid(int dim, int modes_per_dim);
    ~SpectralGrid();

    SpectralGrid(const SpectralGrid&) = delete;
    SpectralGrid& operator=(const SpectralGrid&) = delete;

    int dim() const { return dim_; }
    int modes_per_dim() const { return M_; }
    std::size_t size() const { return npoints_; }
    double volume() const { return volume_; }  // (2*pi)^dim

    // Largest mode kept by the 2/3-rule mask. Quadratic products of fields
    // band-limited to the cut are alias-free after masking.
    int dealias_cut() const { return cut_; }

    double wavenumber(int axis, std::size_t flat_index) const;
    // |k|^2 per flat spectral index (same layout as coefficients).
    const std::vector<double>& ksq() const { return ksq_; }
    const std::vector<bool>& dealias_mask() const { return keep_; }

    // Collocation coordinate of a grid point along one axis.
    double coord(int axis, std::size_t flat_index) const;

    // Normalized transforms: forward divides by the point count, so the
    // k=0 coefficient is the grid mean and Parseval reads
    // mean(|f|^2) = sum_k |f_k|^2.
    void forward(const std::vector<double>& vals,
                 std::vector<std::complex<double>>& coef) const;
    void inverse(const std::vector<std::complex<double>>& coef,
                 std::vector<double>& vals) const;

private:
    int dim_;
    int M_;
    int cut_;
    std::size_t npoints_;
    double volume_;
    std::vector<double> ksq_;
    std::vector<bool> keep_;
    std::vector<int> kint_;  // per-axis integer wavenumber lookup, size M
    std::unique_ptr<FftEngine> fft_;
};

using GridPtr = std::shared_ptr<const SpectralGrid>;

enum class Rep { Grid, Spectral };

// Real scalar field stored either as collocation values or spectral
// coefficients; transform() toggles. Value-like: copies are independent.
class ScalarField {
public:
    ScalarField() = default;
    explicit ScalarField(GridPtr grid, double fill = 0.0);

    const SpectralGrid& grid() const { return *grid_; }
    GridPtr grid_ptr() const { return grid_; }
    Rep rep() const { return rep_; }
    std::size_t size() const { return grid_ ? grid_->size() : 0; }

    // Representation changes (in place).
    void to_spectral();
    void to_grid();

    std::vector<double>& values();              // requires Rep::Grid
    const std::vector<double>& values() const;
    std::vector<std::complex<double>>& coeffs();  // requires Rep::Spectral
    const std::vector<std::complex<double>>& coeffs() const;

    bool compatible(const ScalarField& other) const {
        return grid_.get() == other.grid_.get();
    }

private:
    GridPtr grid_;
    Rep rep_ = Rep::Grid;
    std::vector<double> vals_;
    std::vector<std::complex<double>> coef_;
};

struct VectorField {
    std::vector<ScalarField> comp;  // one ScalarField per space dimension

    VectorField() = default;
    explicit VectorField(GridPtr grid, double fill = 0.0);
    int dim() const { return static_cast<int>(comp.size()); }
    ScalarField& operator[](int i) { return comp[static_cast<std::size_t>(i)]; }
    const ScalarField& operator[](int i) const { return comp[static_cast<std::size_t>(i)]; }
};

// --- Differential operators (exact multipliers) ---

// d/dx_axis; the Nyquist mode is zeroed so derivatives of real fields stay real.
ScalarField derivative(const ScalarField& f, int axis);
VectorField gradient(const ScalarField& f);
ScalarField divergence(const VectorField& v);

// Multiplier (-|k|^2)^s for integer s; |k|^(2s) for half-integer s
// (the |k|-power form used for seminorms of odd order).
ScalarField laplacian_power(const ScalarField& f, double s);

// Zero all modes with |k| > N (Euclidean ball). Idempotent.
ScalarField project(const ScalarField& f, int N);
void project_inplace(ScalarField& f, int N);

// 2/3-rule mask: zero modes with any |k_i| > dealias_cut().
ScalarField dealias(const ScalarField& f);
void dealias_inplace(ScalarField& f);

// --- Quadrature and algebra ---

// Integral over the torus: grid mean times volume (exact for trigonometric
// polynomials resolved by the grid).
double integrate(const ScalarField& f);
double l2_norm(const ScalarField& f);

// Pointwise product computed on the grid, then dealiased.
ScalarField multiply_dealias(const ScalarField& a, const ScalarField& b);

ScalarField add(const ScalarField& a, const ScalarField& b);
ScalarField sub(const ScalarField& a, const ScalarField& b);
ScalarField scale(const ScalarField& a, double c);
void axpy_inplace(ScalarField& y, double a, const ScalarField& x);  // y += a*x

}  // namespace mixsim
