#pragma once
#include <utility>

#include "nehari/params.hpp"

namespace nehari {

enum class NehariTag { NPlus, NMinus, NZero, OffManifold };

struct NehariClass {
    NehariTag tag = NehariTag::OffManifold;
    double d1 = 0.0;  // E'(u,v)(u,v)
    double d2 = 0.0;  // E''(u,v)(u,v)^2, radial form
};

const char* to_string(NehariTag tag);

// scalar forms shared by the field path and the coefficient path
double energy_value(const FiberingCoefficients& f, double lambda);
double d1_value(const FiberingCoefficients& f, double lambda);
// true radial second derivative psi''(1) with psi(t) = E(t u, t v):
// a - lambda (p-1) c - lambda (q-1) d - (eta-1) b
double d2_value(const FiberingCoefficients& f, double lambda);

// E_lambda(u,v) = 1/2 ||(u,v)||^2 - lambda/p ||u||_p^p - lambda/q ||v||_q^q
//                 - theta/eta * coupling
double energy(const ProblemParams& prm, const FieldPair& w);
double d_energy_radial(const ProblemParams& prm, const FieldPair& w);
double d2_energy_radial(const ProblemParams& prm, const FieldPair& w);

// L2 representation of the Gateaux derivative; the p = 1 endpoint uses the
// subgradient selection sign(u), with 0 at u = 0
FieldPair gradient(const ProblemParams& prm, const FieldPair& w);

// sup norm of the gradient pair, the solver's stopping quantity
double gradient_sup_norm(const FieldPair& g);

NehariClass classify(const ProblemParams& prm, const FieldPair& w, double tol = 1e-8);

// nonlinear Rayleigh quotients on fields; lambda = rayleigh_n iff the pair
// sits on the Nehari manifold, lambda = rayleigh_e iff its energy vanishes
double rayleigh_n(const ProblemParams& prm, const FieldPair& w);
double rayleigh_e(const ProblemParams& prm, const FieldPair& w);

// residuals of the quotient-derivative identities at ray scale t, with
// lambda re-solved from the corresponding quotient at that scale
std::pair<double, double> derivative_identity_residuals(const ProblemParams& prm,
                                                        const FieldPair& w, double t);

// energy reduced over the manifold constraint d1 = 0:
// (1/2 - 1/eta) a + lambda (1/eta - 1/p) c + lambda (1/eta - 1/q) d
double nehari_energy_form(const FiberingCoefficients& f, double lambda);

// norm floor for pairs on the N^- branch, given an estimate s_hat of the
// best X -> L^eta embedding ratio: ((2-q)/(theta (eta-q) s_hat^eta))^{1/(eta-2)}
double nminus_norm_floor(const Exponents& ex, double theta, double s_hat);

}  // namespace nehari
