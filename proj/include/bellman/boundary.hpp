#pragma once

#include <optional>

#include "bellman/types.hpp"

namespace bellman {

/// Cubic polynomial a3*t^3 + a2*t^2 + a1*t + a0.
struct Cubic {
    double a3 = 0.0, a2 = 0.0, a1 = 0.0, a0 = 0.0;

    double operator()(double t) const { return ((a3 * t + a2) * t + a1) * t + a0; }
    double d1(double t) const { return (3.0 * a3 * t + 2.0 * a2) * t + a1; }
    double d2(double t) const { return 6.0 * a3 * t + 2.0 * a2; }
    double d3() const { return 6.0 * a3; }

    /// t -> -t conjugate: p(-t).
    Cubic reflected() const { return {-a3, a2, -a1, a0}; }
};

/// Boundary data: B(x1, +eps) = fp(x1), B(x1, -eps) = fm(x1).
struct BoundaryPair {
    Cubic fp;
    Cubic fm;
};

/// Coefficient gaps fp - fm, index = degree.
struct Deltas {
    double d3 = 0.0, d2 = 0.0, d1 = 0.0, d0 = 0.0;
};

Deltas deltas(const BoundaryPair& bp);

/// Strip symmetries applied to reach the canonical pair. `swapped` exchanges
/// the boundaries (x2 -> -x2); `reflected` conjugates the abscissa
/// (x1 -> -x1). Both are involutions, so to/from use the same formula.
struct Symmetry {
    bool swapped = false;
    bool reflected = false;

    Vec2 to_canonical(Vec2 x) const {
        return {reflected ? -x.x1 : x.x1, swapped ? -x.x2 : x.x2};
    }
    Vec2 from_canonical(Vec2 x) const { return to_canonical(x); }

    /// The value B is invariant; gradient components flip with their axis.
    Vec2 pull_back_gradient(Vec2 g) const {
        return {reflected ? -g.x1 : g.x1, swapped ? -g.x2 : g.x2};
    }
};

/// Canonical form: |a3 of fp| >= |a3 of fm| and a3 of fp >= 0.
struct Canonical {
    BoundaryPair pair;
    Symmetry sym;
};

/// Swap boundaries if |a3^+| < |a3^-|, then reflect t -> -t if a3^+ < 0.
/// Ties do not swap.
Canonical canonicalize(const BoundaryPair& bp);

/// Sign class of the discriminant of q = fp' - fm' (quadratic
/// 3*d3*t^2 + 2*d2*t + d1). Negative means q has no real root.
enum class DiscClass { Negative, Zero, Positive };

DiscClass disc_class(const BoundaryPair& bp);

/// 2*eps*D+(u, eps): scaled validity function of the chord {x1 - x2 = u} at
/// its upper boundary point. Nonnegative iff the right-simple leaf through u
/// satisfies the upper obstruction.
double two_eps_Dp(const BoundaryPair& bp, double eps, double u);

/// 2*eps*D-(u, eps): lower obstruction counterpart.
double two_eps_Dm(const BoundaryPair& bp, double eps, double u);

/// Interior forms 2*x2*D±(x); polynomial in x, independent of eps.
double two_x2_Dp(const BoundaryPair& bp, Vec2 x);
double two_x2_Dm(const BoundaryPair& bp, Vec2 x);

/// Critical strip half-widths for a canonical pair with d3 > 0.
///   eps0p: first eps with a root of D+ on the upper boundary.
///   eps0m: first eps with a root of D- (present iff a3^- < 0).
///   eps1p/eps1m: where the non-saddle stationary point changes character
///     (node -> improper node -> spiral).
/// u0p/u0m are the abscissae where those first roots appear.
struct Criticals {
    double eps0p_sq = 0.0;  // may be <= 0 (positive discriminant class)
    std::optional<double> eps0p;
    std::optional<double> eps0m;
    std::optional<double> eps1p;
    std::optional<double> eps1m;
    double u0p = 0.0;
    double u0m = 0.0;
};

Result<Criticals> criticals(const BoundaryPair& canonical_pair);

/// Roots of D± on its boundary (closed forms). Requires eps beyond the
/// matching critical value; ul < ur.
struct PocketRoots {
    double ul = 0.0;
    double ur = 0.0;
};

Result<PocketRoots> upper_roots(const BoundaryPair& canonical_pair, double eps);
Result<PocketRoots> lower_roots(const BoundaryPair& canonical_pair, double eps);

/// Closed-form curvature parameters at the boundary roots:
/// kappa at the right upper root (positive; left root is its negative), and
/// at the left lower root (positive; right root is its negative).
Result<double> kappa_upper_r(const BoundaryPair& canonical_pair, double eps);
Result<double> kappa_lower_l(const BoundaryPair& canonical_pair, double eps);

}  // namespace bellman
