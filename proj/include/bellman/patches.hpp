#pragma once

#include "bellman/foliation.hpp"

namespace bellman {

/// Candidate value and gradient at one strip point.
struct EvalPoint {
    double B = 0.0;
    Vec2 grad{};
};

/// Closed form on a right-simple band: B is linear along each slope+1 chord
/// between the boundary cubics. Valid anywhere in the closed strip.
double simple_value(const BoundaryPair& bp, double eps, Vec2 x);
Vec2 simple_gradient(const BoundaryPair& bp, double eps, Vec2 x);
EvalPoint simple_at(const BoundaryPair& bp, double eps, Vec2 x);

/// Bent chord of a herringbone band, resolved by its band label u (the
/// x1 - x2 intercept of the leaf's straight seam chord): elbow on the spine,
/// feet on the two boundaries, chord ratios and fan rates.
/// kappa = +1 for the Left kind, -1 for the Right kind.
struct ChordFrame {
    double u = 0.0;        // band label
    double p = 0.0;        // elbow abscissa, u + kappa*eps
    double T = 0.0;        // elbow height
    double dTdp = 0.0;     // spine slope at the elbow
    double A = 0.0;        // spine value at the elbow
    double up_foot = 0.0;  // abscissa of the x2 = +eps chord endpoint
    double down_foot = 0.0;  // abscissa of the x2 = -eps endpoint
    double Rp = 0.0;       // (A - fp(up_foot)) / (eps - T)
    double Rm = 0.0;       // (A - fm(down_foot)) / (eps + T)
    double R = 0.0;        // Rp + Rm
    double Np = 0.0;       // fan rate above the spine, (R/2 - kappa*fp')/(eps - T)
    double Nm = 0.0;       // fan rate below the spine, (R/2 - kappa*fm')/(eps + T)
};

/// Errors: "degenerate root" when the chord at u is straight to working
/// precision (band seam; the fan rates have no finite value there), or the
/// label lies outside the band.
Result<ChordFrame> chord_frame(const BoundaryPair& bp, const HerringboneLeaf& leaf,
                               double u);

/// Value/gradient inside a herringbone band. The chord through x is located
/// by the monotone spine equations p + T(p) and p - T(p); near-straight end
/// chords delegate to the simple closed form, which they glue to with C1
/// contact. Errors when x is not on any chord of the band.
Result<double> herringbone_value(const BoundaryPair& bp, const HerringboneLeaf& leaf,
                                 Vec2 x);
Result<Vec2> herringbone_gradient(const BoundaryPair& bp, const HerringboneLeaf& leaf,
                                  Vec2 x);
Result<EvalPoint> herringbone_at(const BoundaryPair& bp, const HerringboneLeaf& leaf,
                                 Vec2 x);

/// Bilinear patch B = a(x1^2 - x2^2) + b*x1 + c*x2 + d on the diamond
/// Rect(C), assembled from boundary data at the top/bottom vertices and the
/// two spine-value displays at the side vertices. This is the generic
/// closed-form family (|C2| below 1e-6*eps switches to its continuous
/// limit); the degenerate-rectangle foliation instead carries coefficients
/// from traced spine values, which this family does not reproduce.
struct RectPatch {
    Vec2 C;
    double a = 0.0, b = 0.0, c = 0.0, d = 0.0;
    double f_top = 0.0;     // fp(C1 + C2)
    double f_bottom = 0.0;  // fm(C1 - C2)
    double A_l = 0.0;       // value at the right vertex (C1 + eps, C2)
    double A_r = 0.0;       // value at the left vertex (C1 - eps, -C2)
};

Result<RectPatch> rect_patch(const BoundaryPair& bp, double eps, Vec2 C);

double rect_value(const RectPatch& rp, Vec2 x);
Vec2 rect_gradient(const RectPatch& rp, Vec2 x);
double rect_value(const RectLeaf& leaf, Vec2 x);
Vec2 rect_gradient(const RectLeaf& leaf, Vec2 x);

/// Evaluate the assembled candidate at a point given in the original frame
/// of the pair the foliation was built from. The point is mapped through the
/// stored canonicalization, dispatched to its leaf (left to right, ties to
/// the left leaf), and the gradient is pulled back. Errors: "outside-strip"
/// for |x2| > eps, "not evaluable — out of paper scope" inside a fissure
/// band, "assembly error" if no leaf covers the point.
Result<EvalPoint> bellman_at(const Foliation& F, Vec2 x);
Result<double> bellman_eval(const Foliation& F, Vec2 x);
Result<Vec2> bellman_gradient(const Foliation& F, Vec2 x);

}  // namespace bellman
