#include "bellman/field.hpp"

#include <cmath>

namespace bellman {

Vec2 field_velocity(const BoundaryPair& bp, double eps, FieldKind kind, Vec2 x) {
    double x2 = x.x2;
    if (kind == FieldKind::Left) {
        double P = x.x1 + x2, M = x.x1 - x2;
        double fp1 = bp.fp.d1(P), fm1 = bp.fm.d1(M);
        double fp2 = bp.fp.d2(P), fm2 = bp.fm.d2(M);
        return {eps * (fp1 - fm1) - x2 * (eps - x2) * fm2 - x2 * (eps + x2) * fp2,
                x2 * (fm1 - fp1) - x2 * (eps - x2) * fm2 + x2 * (eps + x2) * fp2};
    }
    double P = x.x1 - x2, M = x.x1 + x2;
    double fp1 = bp.fp.d1(P), fm1 = bp.fm.d1(M);
    double fp2 = bp.fp.d2(P), fm2 = bp.fm.d2(M);
    return {eps * (fm1 - fp1) - x2 * (eps + x2) * fp2 - x2 * (eps - x2) * fm2,
            x2 * (fm1 - fp1) - x2 * (eps + x2) * fp2 + x2 * (eps - x2) * fm2};
}

Mat2 field_jacobian(const BoundaryPair& bp, double eps, FieldKind kind, Vec2 x) {
    double x2 = x.x2;
    if (kind == FieldKind::Left) {
        double P = x.x1 + x2, M = x.x1 - x2;
        double fp1 = bp.fp.d1(P), fm1 = bp.fm.d1(M);
        double fp2 = bp.fp.d2(P), fm2 = bp.fm.d2(M);
        double fp3 = bp.fp.d3(), fm3 = bp.fm.d3();
        Mat2 j;
        j.a11 = eps * (fp2 - fm2) - x2 * (eps - x2) * fm3 - x2 * (eps + x2) * fp3;
        j.a12 = 2.0 * x2 * (fm2 - fp2) + x2 * (eps - x2) * fm3 - x2 * (eps + x2) * fp3;
        j.a21 = x2 * (fm2 - fp2) - x2 * (eps - x2) * fm3 + x2 * (eps + x2) * fp3;
        j.a22 = (fm1 - fp1) - (eps - x2) * (fm2 - x2 * fm3) +
                (eps + x2) * (fp2 + x2 * fp3);
        return j;
    }
    double P = x.x1 - x2, M = x.x1 + x2;
    double fp1 = bp.fp.d1(P), fm1 = bp.fm.d1(M);
    double fp2 = bp.fp.d2(P), fm2 = bp.fm.d2(M);
    double fp3 = bp.fp.d3(), fm3 = bp.fm.d3();
    Mat2 j;
    j.a11 = eps * (fm2 - fp2) - x2 * (eps + x2) * fp3 - x2 * (eps - x2) * fm3;
    j.a12 = 2.0 * x2 * (fm2 - fp2) + x2 * (eps + x2) * fp3 - x2 * (eps - x2) * fm3;
    j.a21 = x2 * (fm2 - fp2) - x2 * (eps + x2) * fp3 + x2 * (eps - x2) * fm3;
    j.a22 = (fm1 - fp1) - (eps + x2) * (fp2 - x2 * fp3) +
            (eps - x2) * (fm2 + x2 * fm3);
    return j;
}

double stationarity(const BoundaryPair& bp, double eps, FieldKind kind, Side side,
                    double u) {
    if (kind == FieldKind::Left) {
        if (side == Side::Upper) return two_eps_Dp(bp, eps, u);
        return bp.fm.d1(u + eps) - bp.fp.d1(u - eps) - 2.0 * eps * bp.fm.d2(u + eps);
    }
    if (side == Side::Lower) return two_eps_Dm(bp, eps, u);
    return bp.fm.d1(u + eps) - bp.fp.d1(u - eps) - 2.0 * eps * bp.fp.d2(u - eps);
}

double stationarity_du(const BoundaryPair& bp, double eps, FieldKind kind, Side side,
                       double u) {
    if (kind == FieldKind::Left) {
        if (side == Side::Upper)
            return bp.fp.d2(u + eps) - bp.fm.d2(u - eps) - 2.0 * eps * bp.fp.d3();
        return bp.fm.d2(u + eps) - bp.fp.d2(u - eps) - 2.0 * eps * bp.fm.d3();
    }
    if (side == Side::Lower)
        return bp.fp.d2(u + eps) - bp.fm.d2(u - eps) - 2.0 * eps * bp.fm.d3();
    return bp.fm.d2(u + eps) - bp.fp.d2(u - eps) - 2.0 * eps * bp.fp.d3();
}

Result<double> kappa_general(const BoundaryPair& bp, double eps, FieldKind kind,
                             Side side, double u) {
    double den = stationarity_du(bp, eps, kind, side, u);
    double num;
    if (kind == FieldKind::Left)
        num = (side == Side::Upper) ? 2.0 * bp.fp.d3() : 2.0 * bp.fm.d3();
    else
        num = (side == Side::Lower) ? 2.0 * bp.fm.d3() : 2.0 * bp.fp.d3();
    double scale = std::abs(bp.fp.d2(u + eps)) + std::abs(bp.fm.d2(u - eps)) + 1.0;
    if (std::abs(den) < 1e-12 * scale)
        return Error{"degenerate root", "stationarity derivative vanishes"};
    return num / den;
}

Vec2 stationary_location(double eps, FieldKind kind, Side side, double u) {
    // The root variable u of the Left/Upper and Right/Lower functions labels
    // the chord with upper strip abscissa u + eps; the stationary point of
    // the field sits at (u, +-eps) in field coordinates.
    (void)kind;
    return {u, side == Side::Upper ? eps : -eps};
}

Vec2 StationaryPoint::exit_dir() const {
    double r = s * s + 8.0 * s;
    if (r < 0.0) return {0.0, 0.0};
    double root = std::sqrt(r);
    // den = s - 2 + root; the alternate form avoids cancellation for small s.
    double den = (s >= 1.0 / 3.0) ? (s - 2.0 + root)
                                  : 4.0 * (1.0 - 3.0 * s) / (s - 2.0 - root);
    return {den, 2.0};
}

Result<StationaryPoint> classify_stationary(const BoundaryPair& bp, double eps,
                                            FieldKind kind, Side side, double u) {
    double sv = stationarity(bp, eps, kind, side, u);
    double scale = std::abs(bp.fp.d1(u + eps)) + std::abs(bp.fm.d1(u - eps)) + 1.0;
    if (std::abs(sv) > 1e-6 * scale)
        return Error{"degenerate root", "u is not a stationarity root"};

    Result<double> kr = kappa_general(bp, eps, kind, side, u);
    if (!kr) return kr.error();

    StationaryPoint sp;
    sp.x = stationary_location(eps, kind, side, u);
    sp.kind = kind;
    sp.side = side;
    sp.kappa = kr.value();
    sp.s = 1.0 + eps * sp.kappa;
    if (std::abs(sp.s) <= 1e-12)
        return Error{"degenerate root", "s = 1 + eps*kappa vanishes"};

    Mat2 j = field_jacobian(bp, eps, kind, sp.x);
    sp.prefactor = j.a11;
    double s = sp.s;
    Mat2 n{1.0, 1.0 - 3.0 * s, -1.0, s - 1.0};
    double jn = norm_inf(j);
    double resid = std::max(
        std::max(std::abs(j.a11 - sp.prefactor * n.a11),
                 std::abs(j.a12 - sp.prefactor * n.a12)),
        std::max(std::abs(j.a21 - sp.prefactor * n.a21),
                 std::abs(j.a22 - sp.prefactor * n.a22)));
    if (resid > 1e-9 * std::max(jn, 1e-300))
        return Error{"degenerate prefactor",
                     "Jacobian is not proportional to the normal form"};

    if (s > 0.0)
        sp.type = StationaryType::Saddle;
    else if (std::abs(s + 8.0) <= 1e-9)
        sp.type = StationaryType::ImproperNode;
    else if (s < -8.0)
        sp.type = StationaryType::Node;
    else
        sp.type = StationaryType::Spiral;
    return sp;
}

double X0_value(const BoundaryPair& bp, double eps, Vec2 x) {
    double P = x.x1 + x.x2, M = x.x1 - x.x2;
    return bp.fm.d1(M) - bp.fp.d1(P) - (eps - x.x2) * bp.fm.d2(M) +
           (eps + x.x2) * bp.fp.d2(P);
}

double X1_value(const BoundaryPair& bp, Vec2 x) {
    double P = x.x1 + x.x2, M = x.x1 - x.x2;
    return bp.fp.d1(P) - bp.fm.d1(M) - 2.0 * x.x2 * bp.fp.d2(P);
}

double Xinf_value(const BoundaryPair& bp, double eps, Vec2 x) {
    return field_velocity(bp, eps, FieldKind::Left, x).x1;
}

}  // namespace bellman
