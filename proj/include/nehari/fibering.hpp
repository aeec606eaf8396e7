#pragma once
#include <utility>

#include "nehari/exponents.hpp"

namespace nehari {

// Scalar invariants of a pair along its ray t -> (t*u, t*v):
//   a = squared energy norm, b = weighted coupling integral (theta already
//   folded in), c = |u|_p^p, d = |v|_q^q.
// Everything in this header is pure arithmetic on these four numbers.
struct FiberingCoefficients {
    double a = 0, b = 0, c = 0, d = 0;
    Exponents ex;
};

// coefficients of the scaled pair (t*u, t*v)
FiberingCoefficients scale_coefficients(const FiberingCoefficients& f, double t);

// The two fibering quotients.  quotient_nehari(f,t) is the lambda for which
// the scaled pair sits on the natural constraint set; quotient_energy(f,t)
// is the lambda for which the scaled pair has zero energy.
double quotient_nehari(const FiberingCoefficients& f, double t);
double quotient_energy(const FiberingCoefficients& f, double t);
double quotient_nehari_derivative(const FiberingCoefficients& f, double t);
double quotient_energy_derivative(const FiberingCoefficients& f, double t);

struct Peak {
    double scale;  // unique maximizer t on (0, inf)
    double value;  // quotient value there
};

// Unique interior maximum of each quotient (requires b > 0).  Located by
// bracketed bisection/Newton on the crossing of the log-derivative of the
// numerator with that of the denominator; the crossing is guaranteed inside
// (0, (2a/(eta*b))^{1/(eta-2)}) for the first quotient and
// (0, (a/b)^{1/(eta-2)}) for the second.
Peak peak_nehari(const FiberingCoefficients& f);
Peak peak_energy(const FiberingCoefficients& f);

enum class RootKind { two, tangent, none };

// Scales solving quotient_nehari(f, t) = lambda.  Below the peak value there
// are exactly two (plus < peak < minus); inside a relative 1e-9 band around
// the peak value the tangent double root is reported; above it, none.
struct ProjectionScales {
    RootKind kind = RootKind::none;
    double plus = 0;        // root left of the peak
    double minus = 0;       // root right of the peak
    Peak peak;              // always filled
};
ProjectionScales projection_scales(const FiberingCoefficients& f, double lambda);

// Closed forms available when p == q.  value_* carry the full peak values for
// the given coefficients; const_* are the standalone constants (theta kept
// explicit, the coupling integral enters as b/theta).
struct EqualExponentForms {
    double scale_nehari, value_nehari;
    double scale_energy, value_energy;
    double const_nehari, const_energy;
};
EqualExponentForms closed_form_equal_exponents(const FiberingCoefficients& f, double theta);

// ratio const_nehari/const_energy as a function of (q, eta) alone; > 1 on
// the whole admissible range, which is what separates the two thresholds
double constant_ratio_equal_exponents(double q, double eta);
bool constant_inequality_holds(double q, double eta);

// min, mediant, max of two fractions a1/b1, a2/b2 (b1, b2 > 0); the mediant
// (a1+a2)/(b1+b2) always lands between the two
struct MediantBounds {
    double lo, mid, hi;
};
MediantBounds mediant_bounds(double a1, double b1, double a2, double b2);

// Relative residual (scaled by 1+|lhs|) of the exact identity linking the
// gap between the two quotients to the derivative of the second one:
//   Q_n(t) - Q_e(t) = t/(pq) * (q c t^p + p d t^q)/(c t^p + d t^q) * Q_e'(t)
double quotient_gap_residual(const FiberingCoefficients& f, double t);

enum class Channel { nehari, energy };

// Relative residual of the coupling value forced by stationarity at t = 1:
// if t = 1 is the peak scale of the chosen quotient, b is a fixed weighted
// mediant of the remaining coefficients.
double stationary_coupling_residual(const FiberingCoefficients& f, Channel ch);

// Residuals of the two derivative identities at scale t (any t > 0): the
// lambda is re-solved from the matching quotient, then
//   d/dt quotient_nehari == (second radial derivative)/(t * G),
//   d/dt quotient_energy == (first radial derivative)/(t * G),
// with G the p/q-norm block of the scaled pair.  Returned scaled by 1+|lhs|.
std::pair<double, double> derivative_match_residuals(const FiberingCoefficients& f, double t);

} // namespace nehari
