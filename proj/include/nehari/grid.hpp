#pragma once
#include <cstddef>
#include <string>
#include <vector>

namespace nehari {

// Periodic box [-L, L)^dim sampled on a uniform lattice with n points per
// dimension.  The fractional order s travels with the grid because every
// spectral operation needs it; frequencies are xi_j = (pi/L) * j with j on
// the usual signed DFT index set.
struct GridSpec {
    int dim = 1;
    int points_per_dim = 256;
    double half_width = 16.0;
    double s = 0.45;

    std::size_t size() const;
    double spacing() const { return 2.0 * half_width / points_per_dim; }
    double cell_volume() const;
    double volume() const;
    double coordinate(int i) const { return -half_width + i * spacing(); }
    // Largest admissible Lebesgue exponent 2N/(N-2s); +inf once 2s >= N.
    double critical_exponent() const;

    bool operator==(const GridSpec&) const = default;
};

// dim in {1,2}, n a power of two >= 16, L > 0, s in (0,1].  The boundary
// s = 1 stays usable so the multiplier can be cross-checked against the
// classical Laplacian; problem-level validation tightens this to N > 2s.
void validate_grid(const GridSpec& g);

struct ScalarField {
    GridSpec grid;
    std::vector<double> values;

    ScalarField() = default;
    explicit ScalarField(const GridSpec& g) : grid(g), values(g.size(), 0.0) {}

    double& at(std::size_t i) { return values[i]; }
    double at(std::size_t i) const { return values[i]; }
    // row-major addressing for dim == 2
    double& at(int ix, int iy);
    double at(int ix, int iy) const;
};

struct FieldPair {
    ScalarField u;
    ScalarField v;
};

void require_same_grid(const ScalarField& f, const ScalarField& g);

// Neumaier-compensated serial sum.  Every reduction in this layer funnels
// through it so results are reproducible bit for bit across runs.
double stable_sum(const std::vector<double>& terms);

// (-Delta)^s f via forward transform, multiplier |xi|^{2s}, inverse
// transform.  The zero mode is annihilated.
ScalarField fractional_laplacian_apply(const ScalarField& f);

// [f]^2 = (h^N / n^N) * sum_k |xi_k|^{2s} |fhat_k|^2.  The weight is chosen
// so this equals the quadrature of f * fractional_laplacian_apply(f) exactly,
// keeping the quadratic form and the operator mutually consistent.
double gagliardo_seminorm_sq(const ScalarField& f);

// spectral bilinear form (h^N / n^N) * sum_k |xi_k|^{2s} Re(fhat ghat*);
// third route for the operator/form consistency checks
double spectral_form(const ScalarField& f, const ScalarField& g);

double integral(const ScalarField& f);    // h^N * sum f_i
double l2_norm_sq(const ScalarField& f);  // h^N * sum f_i^2

// h^N * sum |f_i|^r with r in [1, 2N/(N-2s)]; outside that range the
// embedding backing the energy terms fails, so the call is refused.
double lp_norm_pow(const ScalarField& f, double r);

// h^N * sum |u_i|^alpha |v_i|^beta
double coupling_integral(const FieldPair& w, double alpha, double beta);

// membership threshold for the coupled cone: values at or below it count as
// a vanishing overlap (absorbs roundoff on genuinely disjoint supports)
double coupling_threshold(const GridSpec& g);

// field import/export: CSV (header line + one value per row) and a binary
// raster of 64-bit floats behind a 64-byte header
void write_field_csv(const ScalarField& f, const std::string& path);
ScalarField read_field_csv(const std::string& path);
void write_field_raster(const ScalarField& f, const std::string& path);
ScalarField read_field_raster(const std::string& path);

}  // namespace nehari
