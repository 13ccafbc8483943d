#include "bellman/patches.hpp"

#include <cmath>
#include <optional>

namespace bellman {

namespace {

double kap(FieldKind k) { return k == FieldKind::Left ? 1.0 : -1.0; }

double poly_value(double a, double b, double c, double d, Vec2 x) {
    return a * (x.x1 * x.x1 - x.x2 * x.x2) + b * x.x1 + c * x.x2 + d;
}

Vec2 poly_gradient(double a, double b, double c, Vec2 x) {
    return {2.0 * a * x.x1 + b, -2.0 * a * x.x2 + c};
}

}  // namespace

double simple_value(const BoundaryPair& bp, double eps, Vec2 x) {
    double u = x.x1 - x.x2;
    return ((eps + x.x2) * bp.fp(u + eps) + (eps - x.x2) * bp.fm(u - eps)) /
           (2.0 * eps);
}

Vec2 simple_gradient(const BoundaryPair& bp, double eps, Vec2 x) {
    double u = x.x1 - x.x2;
    double d1 = ((eps + x.x2) * bp.fp.d1(u + eps) + (eps - x.x2) * bp.fm.d1(u - eps)) /
                (2.0 * eps);
    double d2 = (bp.fp(u + eps) - bp.fm(u - eps)) / (2.0 * eps) - d1;
    return {d1, d2};
}

EvalPoint simple_at(const BoundaryPair& bp, double eps, Vec2 x) {
    return {simple_value(bp, eps, x), simple_gradient(bp, eps, x)};
}

Result<ChordFrame> chord_frame(const BoundaryPair& bp, const HerringboneLeaf& leaf,
                               double u) {
    const SpineCurve& sc = leaf.spine;
    double eps = sc.eps, k = kap(leaf.kind);
    double slack = 1e-9 * (1.0 + std::abs(u));
    if (u < leaf.u_from - slack || u > leaf.u_to + slack)
        return Error{"assembly error", "label outside the band"};
    double p = u + k * eps;
    p = std::min(std::max(p, sc.p_lo()), sc.p_hi());
    ChordFrame cf;
    cf.u = u;
    cf.p = p;
    cf.T = sc.T_at(p);
    if (eps - std::abs(cf.T) <= 1e-9 * eps)
        return Error{"degenerate root", "chord at the band seam is straight"};
    cf.dTdp = sc.dTdp_at(p);
    cf.A = sc.V_at(p);
    cf.up_foot = u + k * cf.T;
    cf.down_foot = u - k * cf.T;
    cf.Rp = (cf.A - bp.fp(cf.up_foot)) / (eps - cf.T);
    cf.Rm = (cf.A - bp.fm(cf.down_foot)) / (eps + cf.T);
    cf.R = cf.Rp + cf.Rm;
    cf.Np = (0.5 * cf.R - k * bp.fp.d1(cf.up_foot)) / (eps - cf.T);
    cf.Nm = (0.5 * cf.R - k * bp.fm.d1(cf.down_foot)) / (eps + cf.T);
    return cf;
}

Result<EvalPoint> herringbone_at(const BoundaryPair& bp, const HerringboneLeaf& leaf,
                                 Vec2 x) {
    const SpineCurve& sc = leaf.spine;
    double eps = sc.eps, k = kap(leaf.kind);
    if (std::abs(x.x2) > eps)
        return Error{"outside-strip", "point is beyond the boundary lines"};
    double vtol = 1e-12 + 1e-9 * eps;

    auto branch = [&](bool above) -> std::optional<EvalPoint> {
        // Above the spine the chord runs to the x2 = +eps foot along
        // x1 + kappa*x2 = const; below, to the x2 = -eps foot along
        // x1 - kappa*x2 = const.
        double target = above ? x.x1 + k * x.x2 : x.x1 - k * x.x2;
        auto ps = sc.solve_chord(target, above ? k : -k);
        if (!ps.ok()) return std::nullopt;
        double p = ps.value();
        double T = sc.T_at(p);
        if (above ? x.x2 < T - vtol : x.x2 > T + vtol) return std::nullopt;
        if (eps - std::abs(T) <= 1e-7 * eps)
            return simple_at(bp, eps, x);  // straight end chord, C1 contact
        double u = p - k * eps;
        double A = sc.V_at(p);
        EvalPoint out;
        if (above) {
            double foot = u + k * T;
            double Rp = (A - bp.fp(foot)) / (eps - T);
            double Rm = (A - bp.fm(u - k * T)) / (eps + T);
            double Np = (0.5 * (Rp + Rm) - k * bp.fp.d1(foot)) / (eps - T);
            out.B = A - Rp * (x.x2 - T);
            out.grad.x1 = bp.fp.d1(foot) + k * (eps - x.x2) * Np;
            out.grad.x2 = k * out.grad.x1 - Rp;
        } else {
            double foot = u - k * T;
            double Rp = (A - bp.fp(u + k * T)) / (eps - T);
            double Rm = (A - bp.fm(foot)) / (eps + T);
            double Nm = (0.5 * (Rp + Rm) - k * bp.fm.d1(foot)) / (eps + T);
            out.B = A + Rm * (x.x2 - T);
            out.grad.x1 = bp.fm.d1(foot) + k * (eps + x.x2) * Nm;
            out.grad.x2 = -k * out.grad.x1 + Rm;
        }
        return out;
    };

    if (auto r = branch(true)) return *r;
    if (auto r = branch(false)) return *r;
    return Error{"assembly error", "point is not on any chord of this band"};
}

Result<double> herringbone_value(const BoundaryPair& bp, const HerringboneLeaf& leaf,
                                 Vec2 x) {
    auto r = herringbone_at(bp, leaf, x);
    if (!r.ok()) return r.error();
    return r.value().B;
}

Result<Vec2> herringbone_gradient(const BoundaryPair& bp, const HerringboneLeaf& leaf,
                                  Vec2 x) {
    auto r = herringbone_at(bp, leaf, x);
    if (!r.ok()) return r.error();
    return r.value().grad;
}

Result<RectPatch> rect_patch(const BoundaryPair& bp, double eps, Vec2 C) {
    if (!(std::abs(C.x2) < eps))
        return Error{"outside-strip", "patch center must lie strictly inside the strip"};
    RectPatch rp;
    rp.C = C;
    double c1 = C.x1, c2 = C.x2;
    rp.f_top = bp.fp(c1 + c2);
    rp.f_bottom = bp.fm(c1 - c2);
    if (std::abs(c2) < 1e-6 * eps) {
        // Continuous limit of the coefficient family along C2 -> 0.
        double p1 = 0.5 * (bp.fp.d1(c1) + bp.fm.d1(c1));
        double s2 = bp.fp.d2(c1) + bp.fm.d2(c1);
        double mean = 0.5 * (bp.fp(c1) + bp.fm(c1));
        rp.a = 0.25 * s2;
        rp.b = p1 - 2.0 * rp.a * c1;
        rp.c = (bp.fp(c1) - bp.fm(c1)) / (2.0 * eps);
        rp.d = mean - c1 * p1 + (c1 * c1 + eps * eps) * rp.a;
        rp.A_l = eps * p1 + 0.5 * eps * eps * s2 + mean;
        rp.A_r = -eps * p1 + 0.5 * eps * eps * s2 + mean;
        return rp;
    }
    double dfp = bp.fp.d1(c1 + c2);
    double dfm = bp.fm.d1(c1 - c2);
    rp.a = (dfp - dfm) / (4.0 * c2);
    rp.b = ((c1 + c2) * dfm - (c1 - c2) * dfp) / (2.0 * c2);
    rp.c = (rp.f_top - rp.f_bottom - c2 * (dfp + dfm)) / (2.0 * eps);
    double q = c1 * c1 + eps * eps - c2 * c2;
    rp.d = 0.5 * (rp.f_top + rp.f_bottom) +
           ((q - 2.0 * c1 * c2) * dfp - (q + 2.0 * c1 * c2) * dfm) / (4.0 * c2);
    rp.A_l = display_value(bp, eps, FieldKind::Left, c1 + eps, c2);
    rp.A_r = display_value(bp, eps, FieldKind::Right, c1 - eps, -c2);
    return rp;
}

double rect_value(const RectPatch& rp, Vec2 x) {
    return poly_value(rp.a, rp.b, rp.c, rp.d, x);
}

Vec2 rect_gradient(const RectPatch& rp, Vec2 x) {
    return poly_gradient(rp.a, rp.b, rp.c, x);
}

double rect_value(const RectLeaf& leaf, Vec2 x) {
    return poly_value(leaf.a, leaf.b, leaf.c, leaf.d, x);
}

Vec2 rect_gradient(const RectLeaf& leaf, Vec2 x) {
    return poly_gradient(leaf.a, leaf.b, leaf.c, x);
}

Result<EvalPoint> bellman_at(const Foliation& F, Vec2 x) {
    double eps = F.eps;
    Vec2 xc = F.canon.sym.to_canonical(x);
    if (std::abs(xc.x2) > eps)
        return Error{"outside-strip", "point is beyond the boundary lines"};
    const BoundaryPair& bp = F.canon.pair;
    double u = xc.x1 - xc.x2;
    double su = 1e-9 * (1.0 + std::abs(xc.x1));
    std::optional<EvalPoint> out;
    for (const Leaf& leaf : F.leaves) {
        if (const auto* s = std::get_if<SimpleLeaf>(&leaf)) {
            if (s->left) continue;  // no in-scope regime emits the left family
            if (u >= s->u_from - su && u <= s->u_to + su) {
                out = simple_at(bp, eps, xc);
                break;
            }
        } else if (const auto* h = std::get_if<HerringboneLeaf>(&leaf)) {
            auto r = herringbone_at(bp, *h, xc);
            if (r.ok()) {
                out = r.value();
                break;
            }
        } else if (const auto* rl = std::get_if<RectLeaf>(&leaf)) {
            double xi = xc.x1 + xc.x2, et = xc.x1 - xc.x2;
            double sr = 1e-9 * (1.0 + std::abs(xi) + std::abs(et));
            if (std::abs(xi - rl->C.x1) <= eps + rl->C.x2 + sr &&
                std::abs(et - rl->C.x1) <= eps - rl->C.x2 + sr) {
                out = EvalPoint{rect_value(*rl, xc), rect_gradient(*rl, xc)};
                break;
            }
        } else if (const auto* f = std::get_if<FissureLeaf>(&leaf)) {
            // Seam chords stay with the evaluable neighbors.
            if (u > f->u_from + su && u < f->u_to - su)
                return Error{"not evaluable — out of paper scope",
                             "point lies in a fissure band"};
        }
    }
    if (!out) return Error{"assembly error", "no leaf covers the point"};
    out->grad = F.canon.sym.pull_back_gradient(out->grad);
    return *out;
}

Result<double> bellman_eval(const Foliation& F, Vec2 x) {
    auto r = bellman_at(F, x);
    if (!r.ok()) return r.error();
    return r.value().B;
}

Result<Vec2> bellman_gradient(const Foliation& F, Vec2 x) {
    auto r = bellman_at(F, x);
    if (!r.ok()) return r.error();
    return r.value().grad;
}

}  // namespace bellman
