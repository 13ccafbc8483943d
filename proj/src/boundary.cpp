#include "bellman/boundary.hpp"

#include <cmath>

namespace bellman {

Deltas deltas(const BoundaryPair& bp) {
    return {bp.fp.a3 - bp.fm.a3, bp.fp.a2 - bp.fm.a2, bp.fp.a1 - bp.fm.a1,
            bp.fp.a0 - bp.fm.a0};
}

Canonical canonicalize(const BoundaryPair& bp) {
    Canonical c{bp, {}};
    if (std::abs(c.pair.fp.a3) < std::abs(c.pair.fm.a3)) {
        std::swap(c.pair.fp, c.pair.fm);
        c.sym.swapped = true;
    }
    if (c.pair.fp.a3 < 0.0) {
        c.pair.fp = c.pair.fp.reflected();
        c.pair.fm = c.pair.fm.reflected();
        c.sym.reflected = true;
    }
    return c;
}

DiscClass disc_class(const BoundaryPair& bp) {
    Deltas d = deltas(bp);
    // q = 3*d3 t^2 + 2*d2 t + d1 has no real root iff 3*d3*d1 > d2^2.
    double lhs = 3.0 * d.d3 * d.d1;
    double rhs = d.d2 * d.d2;
    double scale = std::max(std::abs(lhs), rhs);
    double tol = 1e-12 * std::max(scale, 1e-300);
    if (lhs > rhs + tol) return DiscClass::Negative;
    if (lhs < rhs - tol) return DiscClass::Positive;
    return DiscClass::Zero;
}

double two_eps_Dp(const BoundaryPair& bp, double eps, double u) {
    return bp.fp.d1(u + eps) - bp.fm.d1(u - eps) - 2.0 * eps * bp.fp.d2(u + eps);
}

double two_eps_Dm(const BoundaryPair& bp, double eps, double u) {
    return bp.fp.d1(u + eps) - bp.fm.d1(u - eps) - 2.0 * eps * bp.fm.d2(u - eps);
}

double two_x2_Dp(const BoundaryPair& bp, Vec2 x) {
    Deltas d = deltas(bp);
    double t = x.x1 - x.x2;
    return (3.0 * d.d3 * t + 2.0 * d.d2) * t + d.d1 -
           12.0 * bp.fp.a3 * x.x2 * x.x2;
}

double two_x2_Dm(const BoundaryPair& bp, Vec2 x) {
    Deltas d = deltas(bp);
    double t = x.x1 + x.x2;
    return (3.0 * d.d3 * t + 2.0 * d.d2) * t + d.d1 +
           12.0 * bp.fm.a3 * x.x2 * x.x2;
}

Result<Criticals> criticals(const BoundaryPair& bp) {
    Deltas d = deltas(bp);
    if (!(d.d3 > 0.0))
        return Error{"degenerate root", "criticals need a canonical pair with d3 > 0"};
    double a3p = bp.fp.a3;
    double a3m = bp.fm.a3;
    if (!(a3p > 0.0))
        return Error{"degenerate root", "criticals need a3^+ > 0"};

    Criticals c;
    double disc = d.d1 - d.d2 * d.d2 / (3.0 * d.d3);  // = q_min scaled by 3*d3 sign
    c.eps0p_sq = disc / (12.0 * a3p);
    double shift = d.d2 / (3.0 * d.d3);
    if (c.eps0p_sq >= 0.0) {
        c.eps0p = std::sqrt(c.eps0p_sq);
        c.u0p = *c.eps0p - shift;
        if (a3m < 0.0) {
            c.eps0m = std::sqrt(a3p / -a3m) * *c.eps0p;
            c.u0m = -*c.eps0m - shift;
        }
    } else {
        c.u0p = -shift;
        c.u0m = -shift;
    }
    // For eps0 = 0 the stationary character is eps-independent; no eps1.
    double den1p = 80.0 * a3p - 81.0 * a3m;
    if (c.eps0p && *c.eps0p > 0.0 && den1p > 0.0)
        c.eps1p = 9.0 * *c.eps0p * std::sqrt(d.d3 / den1p);
    if (c.eps0m && *c.eps0m > 0.0 && a3m < 0.0) {
        double den1m = 81.0 * a3p - 80.0 * a3m;  // always positive here
        c.eps1m = 9.0 * *c.eps0m * std::sqrt(d.d3 / den1m);
    }
    return c;
}

// The root midpoint is eps - d2/(3*d3) for every discriminant class (the
// eps0 in u0p + (eps - eps0) cancels), so the closed forms below accept
// eps0p_sq < 0, where the pocket exists for every eps > 0.

Result<PocketRoots> upper_roots(const BoundaryPair& bp, double eps) {
    Result<Criticals> rc = criticals(bp);
    if (!rc) return rc.error();
    Deltas d = deltas(bp);
    double gap = eps * eps - rc.value().eps0p_sq;
    if (!(gap >= 0.0)) return Error{"degenerate root", "upper roots need eps >= eps0p"};
    double w = 2.0 * std::sqrt(bp.fp.a3 / d.d3 * gap);
    double m = eps - d.d2 / (3.0 * d.d3);
    return PocketRoots{m - w, m + w};
}

Result<PocketRoots> lower_roots(const BoundaryPair& bp, double eps) {
    Result<Criticals> rc = criticals(bp);
    if (!rc) return rc.error();
    if (!(bp.fm.a3 < 0.0))
        return Error{"degenerate root", "no lower root for this pair"};
    Deltas d = deltas(bp);
    double e0m_sq = rc.value().eps0p_sq * bp.fp.a3 / -bp.fm.a3;
    double gap = eps * eps - e0m_sq;
    if (!(gap >= 0.0)) return Error{"degenerate root", "lower roots need eps >= eps0m"};
    double w = 2.0 * std::sqrt(-bp.fm.a3 / d.d3 * gap);
    double m = -eps - d.d2 / (3.0 * d.d3);
    return PocketRoots{m - w, m + w};
}

Result<double> kappa_upper_r(const BoundaryPair& bp, double eps) {
    Result<Criticals> rc = criticals(bp);
    if (!rc) return rc.error();
    Deltas d = deltas(bp);
    double den = d.d3 * (eps * eps - rc.value().eps0p_sq);
    if (!(den > 0.0)) return Error{"degenerate root", "kappa needs eps > eps0p"};
    return std::sqrt(bp.fp.a3 / den);
}

Result<double> kappa_lower_l(const BoundaryPair& bp, double eps) {
    Result<Criticals> rc = criticals(bp);
    if (!rc) return rc.error();
    if (!(bp.fm.a3 < 0.0))
        return Error{"degenerate root", "no lower root for this pair"};
    Deltas d = deltas(bp);
    double e0m_sq = rc.value().eps0p_sq * bp.fp.a3 / -bp.fm.a3;
    double den = d.d3 * (eps * eps - e0m_sq);
    if (!(den > 0.0)) return Error{"degenerate root", "kappa needs eps > eps0m"};
    return std::sqrt(-bp.fm.a3 / den);
}

}  // namespace bellman
