#include "nehari/grid.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <new>
#include <numbers>
#include <stdexcept>
#include <tuple>

#include "nehari/errors.hpp"

namespace nehari {

std::size_t GridSpec::size() const {
    const std::size_t n = static_cast<std::size_t>(points_per_dim);
    return dim == 1 ? n : n * n;
}

double GridSpec::cell_volume() const {
    return dim == 1 ? spacing() : spacing() * spacing();
}

double GridSpec::volume() const {
    const double side = 2.0 * half_width;
    return dim == 1 ? side : side * side;
}

double GridSpec::critical_exponent() const {
    if (dim > 2.0 * s) return 2.0 * dim / (dim - 2.0 * s);
    return std::numeric_limits<double>::infinity();
}

void validate_grid(const GridSpec& g) {
    if (g.dim != 1 && g.dim != 2)
        throw config_error("grid: dim must be 1 or 2");
    const int n = g.points_per_dim;
    if (n < 16 || (n & (n - 1)) != 0)
        throw config_error("grid: points_per_dim must be a power of two >= 16");
    if (!(g.half_width > 0) || !std::isfinite(g.half_width))
        throw config_error("grid: half_width must be positive and finite");
    if (!(g.s > 0) || !(g.s <= 1))
        throw config_error("grid: fractional order s must lie in (0, 1]");
}

double& ScalarField::at(int ix, int iy) {
    return values[static_cast<std::size_t>(ix) * grid.points_per_dim + iy];
}

double ScalarField::at(int ix, int iy) const {
    return values[static_cast<std::size_t>(ix) * grid.points_per_dim + iy];
}

void require_same_grid(const ScalarField& f, const ScalarField& g) {
    if (!(f.grid == g.grid))
        throw std::invalid_argument("fields live on different grids");
}

namespace {

// Neumaier variant of compensated summation
struct Accum {
    double sum = 0.0;
    double comp = 0.0;

    void add(double x) {
        const double t = sum + x;
        if (std::abs(sum) >= std::abs(x))
            comp += (sum - t) + x;
        else
            comp += (x - t) + sum;
        sum = t;
    }
    double value() const { return sum + comp; }
};

class FftBuffer {
  public:
    explicit FftBuffer(std::size_t n) : p_(fftw_alloc_complex(n)) {
        if (!p_) throw std::bad_alloc();
    }
    ~FftBuffer() { fftw_free(p_); }
    FftBuffer(const FftBuffer&) = delete;
    FftBuffer& operator=(const FftBuffer&) = delete;
    fftw_complex* get() const { return p_; }

  private:
    fftw_complex* p_;
};

// FFTW planning mutates global state, so it happens once per (dim, n,
// direction) under a lock; execution through the new-array interface on
// fftw_malloc'd buffers is re-entrant.
fftw_plan acquire_plan(int dim, int n, int sign) {
    static std::mutex mu;
    static std::map<std::tuple<int, int, int>, fftw_plan> cache;
    std::lock_guard<std::mutex> lock(mu);
    const auto key = std::make_tuple(dim, n, sign);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
    const std::size_t total = dim == 1 ? static_cast<std::size_t>(n)
                                       : static_cast<std::size_t>(n) * n;
    FftBuffer in(total), out(total);
    fftw_plan plan = dim == 1
        ? fftw_plan_dft_1d(n, in.get(), out.get(), sign, FFTW_ESTIMATE)
        : fftw_plan_dft_2d(n, n, in.get(), out.get(), sign, FFTW_ESTIMATE);
    if (!plan) throw std::runtime_error("fftw plan creation failed");
    cache.emplace(key, plan);
    return plan;
}

void run_plan(const GridSpec& g, int sign, fftw_complex* in, fftw_complex* out) {
    fftw_execute_dft(acquire_plan(g.dim, g.points_per_dim, sign), in, out);
}

void forward_spectrum(const ScalarField& f, const FftBuffer& hat) {
    const std::size_t total = f.grid.size();
    FftBuffer in(total);
    for (std::size_t i = 0; i < total; ++i) {
        in.get()[i][0] = f.values[i];
        in.get()[i][1] = 0.0;
    }
    run_plan(f.grid, FFTW_FORWARD, in.get(), hat.get());
}

// |xi_k|^{2s} at flat index k, xi = (pi/L) * signed DFT index
double multiplier(const GridSpec& g, std::size_t k) {
    const int n = g.points_per_dim;
    const double unit = std::numbers::pi / g.half_width;
    auto signed_of = [n](int j) { return 2 * j < n ? j : j - n; };
    double xi_sq;
    if (g.dim == 1) {
        const double x = unit * signed_of(static_cast<int>(k));
        xi_sq = x * x;
    } else {
        const double x = unit * signed_of(static_cast<int>(k) / n);
        const double y = unit * signed_of(static_cast<int>(k) % n);
        xi_sq = x * x + y * y;
    }
    if (xi_sq == 0.0) return 0.0;
    return g.s == 1.0 ? xi_sq : std::pow(xi_sq, g.s);
}

}  // namespace

double stable_sum(const std::vector<double>& terms) {
    Accum acc;
    for (double x : terms) acc.add(x);
    return acc.value();
}

ScalarField fractional_laplacian_apply(const ScalarField& f) {
    validate_grid(f.grid);
    const std::size_t total = f.grid.size();
    FftBuffer hat(total);
    forward_spectrum(f, hat);
    const double ninv = 1.0 / static_cast<double>(total);
    for (std::size_t k = 0; k < total; ++k) {
        const double m = multiplier(f.grid, k) * ninv;
        hat.get()[k][0] *= m;
        hat.get()[k][1] *= m;
    }
    FftBuffer back(total);
    run_plan(f.grid, FFTW_BACKWARD, hat.get(), back.get());
    ScalarField out(f.grid);
    for (std::size_t k = 0; k < total; ++k) out.values[k] = back.get()[k][0];
    return out;
}

double gagliardo_seminorm_sq(const ScalarField& f) {
    validate_grid(f.grid);
    const std::size_t total = f.grid.size();
    FftBuffer hat(total);
    forward_spectrum(f, hat);
    Accum acc;
    for (std::size_t k = 0; k < total; ++k) {
        const double re = hat.get()[k][0];
        const double im = hat.get()[k][1];
        acc.add(multiplier(f.grid, k) * (re * re + im * im));
    }
    return f.grid.cell_volume() / static_cast<double>(total) * acc.value();
}

double spectral_form(const ScalarField& f, const ScalarField& g) {
    require_same_grid(f, g);
    validate_grid(f.grid);
    const std::size_t total = f.grid.size();
    FftBuffer fhat(total), ghat(total);
    forward_spectrum(f, fhat);
    forward_spectrum(g, ghat);
    Accum acc;
    for (std::size_t k = 0; k < total; ++k) {
        const double re = fhat.get()[k][0] * ghat.get()[k][0] + fhat.get()[k][1] * ghat.get()[k][1];
        acc.add(multiplier(f.grid, k) * re);
    }
    return f.grid.cell_volume() / static_cast<double>(total) * acc.value();
}

double integral(const ScalarField& f) {
    validate_grid(f.grid);
    Accum acc;
    for (double x : f.values) acc.add(x);
    return f.grid.cell_volume() * acc.value();
}

double l2_norm_sq(const ScalarField& f) {
    validate_grid(f.grid);
    Accum acc;
    for (double x : f.values) acc.add(x * x);
    return f.grid.cell_volume() * acc.value();
}

double lp_norm_pow(const ScalarField& f, double r) {
    validate_grid(f.grid);
    if (!(r >= 1.0) || !std::isfinite(r))
        throw std::domain_error("Lebesgue exponent must satisfy r >= 1");
    if (r > f.grid.critical_exponent())
        throw std::domain_error("Lebesgue exponent exceeds the critical exponent 2N/(N-2s)");
    Accum acc;
    for (double x : f.values)
        if (x != 0.0) acc.add(std::pow(std::abs(x), r));
    return f.grid.cell_volume() * acc.value();
}

double coupling_integral(const FieldPair& w, double alpha, double beta) {
    require_same_grid(w.u, w.v);
    validate_grid(w.u.grid);
    const std::size_t total = w.u.grid.size();
    Accum acc;
    for (std::size_t i = 0; i < total; ++i) {
        const double au = std::abs(w.u.values[i]);
        const double av = std::abs(w.v.values[i]);
        if (au == 0.0 || av == 0.0) continue;
        acc.add(std::pow(au, alpha) * std::pow(av, beta));
    }
    return w.u.grid.cell_volume() * acc.value();
}

double coupling_threshold(const GridSpec& g) { return 1e-14 * g.volume(); }

void write_field_csv(const ScalarField& f, const std::string& path) {
    validate_grid(f.grid);
    std::ofstream out(path);
    if (!out) throw config_error("cannot open " + path + " for writing");
    char line[160];
    std::snprintf(line, sizeof line, "# field dim=%d n=%d L=%.17g s=%.17g\n",
                  f.grid.dim, f.grid.points_per_dim, f.grid.half_width, f.grid.s);
    out << line;
    for (double x : f.values) {
        std::snprintf(line, sizeof line, "%.17g\n", x);
        out << line;
    }
    out.flush();
    if (!out) throw config_error("short write to " + path);
}

ScalarField read_field_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open " + path);
    std::string header;
    std::getline(in, header);
    GridSpec g;
    if (std::sscanf(header.c_str(), "# field dim=%d n=%d L=%lf s=%lf",
                    &g.dim, &g.points_per_dim, &g.half_width, &g.s) != 4)
        throw config_error(path + ": malformed field header");
    validate_grid(g);
    ScalarField f(g);
    for (std::size_t i = 0; i < f.values.size(); ++i)
        if (!(in >> f.values[i]))
            throw config_error(path + ": truncated field data");
    return f;
}

namespace {
constexpr char kRasterMagic[8] = {'N', 'E', 'H', 'F', 'L', 'D', '0', '1'};
}

void write_field_raster(const ScalarField& f, const std::string& path) {
    validate_grid(f.grid);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw config_error("cannot open " + path + " for writing");
    unsigned char header[64] = {};
    const std::uint32_t dim = static_cast<std::uint32_t>(f.grid.dim);
    const std::uint32_t n = static_cast<std::uint32_t>(f.grid.points_per_dim);
    const std::uint64_t count = f.values.size();
    std::memcpy(header, kRasterMagic, 8);
    std::memcpy(header + 8, &dim, 4);
    std::memcpy(header + 12, &n, 4);
    std::memcpy(header + 16, &f.grid.half_width, 8);
    std::memcpy(header + 24, &f.grid.s, 8);
    std::memcpy(header + 32, &count, 8);
    out.write(reinterpret_cast<const char*>(header), sizeof header);
    out.write(reinterpret_cast<const char*>(f.values.data()),
              static_cast<std::streamsize>(count * sizeof(double)));
    out.flush();
    if (!out) throw config_error("short write to " + path);
}

ScalarField read_field_raster(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("cannot open " + path);
    unsigned char header[64];
    in.read(reinterpret_cast<char*>(header), sizeof header);
    if (!in || std::memcmp(header, kRasterMagic, 8) != 0)
        throw config_error(path + ": not a field raster");
    std::uint32_t dim = 0, n = 0;
    std::uint64_t count = 0;
    GridSpec g;
    std::memcpy(&dim, header + 8, 4);
    std::memcpy(&n, header + 12, 4);
    std::memcpy(&g.half_width, header + 16, 8);
    std::memcpy(&g.s, header + 24, 8);
    std::memcpy(&count, header + 32, 8);
    g.dim = static_cast<int>(dim);
    g.points_per_dim = static_cast<int>(n);
    validate_grid(g);
    if (count != g.size()) throw config_error(path + ": raster size mismatch");
    ScalarField f(g);
    in.read(reinterpret_cast<char*>(f.values.data()),
            static_cast<std::streamsize>(count * sizeof(double)));
    if (!in) throw config_error(path + ": truncated raster data");
    return f;
}

}  // namespace nehari
