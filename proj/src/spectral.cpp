#include "mixsim/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace mixsim {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

// Complex-to-complex FFTW plans on a private aligned buffer. Plans are built
// once with FFTW_ESTIMATE so the algorithm choice (and hence the floating
// point result) is reproducible run to run.
class FftEngine {
public:
    FftEngine(int dim, int M, std::size_t npoints) : n_(npoints) {
        buf_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n_));
        if (!buf_) throw std::bad_alloc();
        int dims[3] = {M, M, M};
        fwd_ = fftw_plan_dft(dim, dims, buf_, buf_, FFTW_FORWARD, FFTW_ESTIMATE);
        bwd_ = fftw_plan_dft(dim, dims, buf_, buf_, FFTW_BACKWARD, FFTW_ESTIMATE);
        if (!fwd_ || !bwd_) throw std::runtime_error("fftw plan creation failed");
    }
    ~FftEngine() {
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(bwd_);
        fftw_free(buf_);
    }

    void forward(const std::vector<double>& vals,
                 std::vector<std::complex<double>>& coef) const {
        for (std::size_t i = 0; i < n_; ++i) {
            buf_[i][0] = vals[i];
            buf_[i][1] = 0.0;
        }
        fftw_execute(fwd_);
        coef.resize(n_);
        const double inv = 1.0 / static_cast<double>(n_);
        for (std::size_t i = 0; i < n_; ++i)
            coef[i] = std::complex<double>(buf_[i][0] * inv, buf_[i][1] * inv);
    }

    void inverse(const std::vector<std::complex<double>>& coef,
                 std::vector<double>& vals) const {
        for (std::size_t i = 0; i < n_; ++i) {
            buf_[i][0] = coef[i].real();
            buf_[i][1] = coef[i].imag();
        }
        fftw_execute(bwd_);
        vals.resize(n_);
        for (std::size_t i = 0; i < n_; ++i) vals[i] = buf_[i][0];
    }

private:
    std::size_t n_;
    mutable fftw_complex* buf_;
    fftw_plan fwd_ = nullptr;
    fftw_plan bwd_ = nullptr;
};

SpectralGrid::SpectralGrid(int dim, int modes_per_dim)
    : dim_(dim), M_(modes_per_dim) {
    if (dim < 1 || dim > 3) throw std::invalid_argument("grid dim must be 1, 2 or 3");
    if (M_ < 4 || M_ % 2 != 0) throw std::invalid_argument("modes per dim must be even and >= 4");
    npoints_ = 1;
    for (int d = 0; d < dim_; ++d) npoints_ *= static_cast<std::size_t>(M_);
    volume_ = std::pow(kTwoPi, dim_);

    // cut satisfies 3*cut < M so quadratic aliases land strictly above it
    cut_ = (M_ - 1) / 3;

    kint_.resize(static_cast<std::size_t>(M_));
    for (int j = 0; j < M_; ++j) kint_[static_cast<std::size_t>(j)] = (j < M_ / 2) ? j : j - M_;

    ksq_.assign(npoints_, 0.0);
    keep_.assign(npoints_, true);
    for (std::size_t idx = 0; idx < npoints_; ++idx) {
        std::size_t rem = idx;
        double s = 0.0;
        bool keep = true;
        // FFTW row-major: the last axis varies fastest
        for (int d = dim_ - 1; d >= 0; --d) {
            int j = static_cast<int>(rem % static_cast<std::size_t>(M_));
            rem /= static_cast<std::size_t>(M_);
            int k = kint_[static_cast<std::size_t>(j)];
            s += static_cast<double>(k) * static_cast<double>(k);
            if (std::abs(k) > cut_) keep = false;
        }
        ksq_[idx] = s;
        keep_[idx] = keep;
    }

    fft_ = std::make_unique<FftEngine>(dim_, M_, npoints_);
}

SpectralGrid::~SpectralGrid() = default;

double SpectralGrid::wavenumber(int axis, std::size_t flat_index) const {
    // axis 0 is the slowest-varying index (row-major layout)
    std::size_t stride = 1;
    for (int d = dim_ - 1; d > axis; --d) stride *= static_cast<std::size_t>(M_);
    std::size_t j = (flat_index / stride) % static_cast<std::size_t>(M_);
    return static_cast<double>(kint_[j]);
}

double SpectralGrid::coord(int axis, std::size_t flat_index) const {
    std::size_t stride = 1;
    for (int d = dim_ - 1; d > axis; --d) stride *= static_cast<std::size_t>(M_);
    std::size_t j = (flat_index / stride) % static_cast<std::size_t>(M_);
    return kTwoPi * static_cast<double>(j) / static_cast<double>(M_);
}

void SpectralGrid::forward(const std::vector<double>& vals,
                           std::vector<std::complex<double>>& coef) const {
    if (vals.size() != npoints_) throw std::invalid_argument("field size does not match grid");
    fft_->forward(vals, coef);
}

void SpectralGrid::inverse(const std::vector<std::complex<double>>& coef,
                           std::vector<double>& vals) const {
    if (coef.size() != npoints_) throw std::invalid_argument("field size does not match grid");
    fft_->inverse(coef, vals);
}

ScalarField::ScalarField(GridPtr grid, double fill)
    : grid_(std::move(grid)), rep_(Rep::Grid), vals_(grid_->size(), fill) {}

void ScalarField::to_spectral() {
    if (rep_ == Rep::Spectral) return;
    grid_->forward(vals_, coef_);
    vals_.clear();
    rep_ = Rep::Spectral;
}

void ScalarField::to_grid() {
    if (rep_ == Rep::Grid) return;
    grid_->inverse(coef_, vals_);
    coef_.clear();
    rep_ = Rep::Grid;
}

std::vector<double>& ScalarField::values() {
    if (rep_ != Rep::Grid) throw std::logic_error("field is not in grid representation");
    return vals_;
}
const std::vector<double>& ScalarField::values() const {
    if (rep_ != Rep::Grid) throw std::logic_error("field is not in grid representation");
    return vals_;
}
std::vector<std::complex<double>>& ScalarField::coeffs() {
    if (rep_ != Rep::Spectral) throw std::logic_error("field is not in spectral representation");
    return coef_;
}
const std::vector<std::complex<double>>& ScalarField::coeffs() const {
    if (rep_ != Rep::Spectral) throw std::logic_error("field is not in spectral representation");
    return coef_;
}

VectorField::VectorField(GridPtr grid, double fill) {
    comp.reserve(static_cast<std::size_t>(grid->dim()));
    for (int d = 0; d < grid->dim(); ++d) comp.emplace_back(grid, fill);
}

namespace {

ScalarField spectral_copy(const ScalarField& f) {
    ScalarField g = f;
    g.to_spectral();
    return g;
}

}  // namespace

ScalarField derivative(const ScalarField& f, int axis) {
    const SpectralGrid& g = f.grid();
    if (axis < 0 || axis >= g.dim()) throw std::invalid_argument("derivative axis out of range");
    ScalarField out = spectral_copy(f);
    auto& c = out.coeffs();
    const int nyq = -g.modes_per_dim() / 2;
    for (std::size_t i = 0; i < c.size(); ++i) {
        double k = g.wavenumber(axis, i);
        // zero the Nyquist mode: i*k at k=-M/2 would break conjugate symmetry
        if (static_cast<int>(k) == nyq) {
            c[i] = 0.0;
        } else {
            c[i] *= std::complex<double>(0.0, k);
        }
    }
    return out;
}

VectorField gradient(const ScalarField& f) {
    VectorField out;
    out.comp.reserve(static_cast<std::size_t>(f.grid().dim()));
    for (int d = 0; d < f.grid().dim(); ++d) out.comp.push_back(derivative(f, d));
    return out;
}

ScalarField divergence(const VectorField& v) {
    ScalarField out = derivative(v[0], 0);
    out.to_spectral();
    for (int d = 1; d < v.dim(); ++d) {
        ScalarField dd = derivative(v[d], d);
        auto& a = out.coeffs();
        const auto& b = dd.coeffs();
        for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
    }
    return out;
}

ScalarField laplacian_power(const ScalarField& f, double s) {
    if (s < 0.0) throw std::invalid_argument("laplacian power must be nonnegative");
    ScalarField out = spectral_copy(f);
    auto& c = out.coeffs();
    const auto& ksq = f.grid().ksq();
    const bool integral = std::abs(s - std::round(s)) < 1e-12;
    if (integral) {
        const long p = std::lround(s);
        const double sign = (p % 2 == 0) ? 1.0 : -1.0;
        for (std::size_t i = 0; i < c.size(); ++i)
            c[i] *= sign * std::pow(ksq[i], static_cast<double>(p));
    } else {
        for (std::size_t i = 0; i < c.size(); ++i) c[i] *= std::pow(ksq[i], s);
    }
    return out;
}

ScalarField project(const ScalarField& f, int N) {
    ScalarField out = f;
    project_inplace(out, N);
    return out;
}

void project_inplace(ScalarField& f, int N) {
    const SpectralGrid& g = f.grid();
    if (N < 0 || N > g.modes_per_dim() / 2) throw std::invalid_argument("truncation exceeds grid capacity");
    f.to_spectral();
    auto& c = f.coeffs();
    const double nsq = static_cast<double>(N) * static_cast<double>(N);
    const auto& ksq = g.ksq();
    for (std::size_t i = 0; i < c.size(); ++i)
        if (ksq[i] > nsq) c[i] = 0.0;
}

ScalarField dealias(const ScalarField& f) {
    ScalarField out = f;
    dealias_inplace(out);
    return out;
}

void dealias_inplace(ScalarField& f) {
    f.to_spectral();
    auto& c = f.coeffs();
    const auto& keep = f.grid().dealias_mask();
    for (std::size_t i = 0; i < c.size(); ++i)
        if (!keep[i]) c[i] = 0.0;
}

double integrate(const ScalarField& f) {
    if (f.rep() == Rep::Grid) {
        const auto& v = f.values();
        double s = 0.0;
        for (double x : v) s += x;
        return s / static_cast<double>(v.size()) * f.grid().volume();
    }
    return f.coeffs()[0].real() * f.grid().volume();
}

double l2_norm(const ScalarField& f) {
    if (f.rep() == Rep::Grid) {
        const auto& v = f.values();
        double s = 0.0;
        for (double x : v) s += x * x;
        return std::sqrt(s / static_cast<double>(v.size()) * f.grid().volume());
    }
    const auto& c = f.coeffs();
    double s = 0.0;
    for (const auto& z : c) s += std::norm(z);
    return std::sqrt(s * f.grid().volume());
}

ScalarField multiply_dealias(const ScalarField& a, const ScalarField& b) {
    if (!a.compatible(b)) throw std::invalid_argument("fields on different grids");
    ScalarField ga = a, gb = b;
    ga.to_grid();
    gb.to_grid();
    ScalarField out(a.grid_ptr());
    auto& v = out.values();
    const auto& va = ga.values();
    const auto& vb = gb.values();
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = va[i] * vb[i];
    dealias_inplace(out);
    return out;
}

ScalarField add(const ScalarField& a, const ScalarField& b) {
    ScalarField out = a;
    axpy_inplace(out, 1.0, b);
    return out;
}

ScalarField sub(const ScalarField& a, const ScalarField& b) {
    ScalarField out = a;
    axpy_inplace(out, -1.0, b);
    return out;
}

ScalarField scale(const ScalarField& a, double c) {
    ScalarField out = a;
    if (out.rep() == Rep::Grid) {
        for (auto& x : out.values()) x *= c;
    } else {
        for (auto& z : out.coeffs()) z *= c;
    }
    return out;
}

void axpy_inplace(ScalarField& y, double a, const ScalarField& x) {
    if (!y.compatible(x)) throw std::invalid_argument("fields on different grids");
    if (y.rep() != x.rep()) {
        ScalarField xx = x;
        if (y.rep() == Rep::Grid) xx.to_grid(); else xx.to_spectral();
        axpy_inplace(y, a, xx);
        return;
    }
    if (y.rep() == Rep::Grid) {
        auto& vy = y.values();
        const auto& vx = x.values();
        for (std::size_t i = 0; i < vy.size(); ++i) vy[i] += a * vx[i];
    } else {
        auto& cy = y.coeffs();
        const auto& cx = x.coeffs();
        for (std::size_t i = 0; i < cy.size(); ++i) cy[i] += a * cx[i];
    }
}

}  // namespace mixsim
