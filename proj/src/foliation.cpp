#include "bellman/foliation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <utility>

namespace bellman {

const char* regime_slug(Regime r) {
    switch (r) {
        case Regime::SimpleRightEverywhere: return "simple-right-everywhere";
        case Regime::OnePocket: return "one-pocket";
        case Regime::TwoPockets: return "two-pockets";
        case Regime::RectangleWithHerringbones: return "rectangle-with-herringbones";
        case Regime::ZeroDiscriminantRectangle: return "zero-discriminant-rectangle";
        case Regime::FissureOpaque: return "fissure-opaque";
        case Regime::Unclassified: return "unclassified";
    }
    return "unclassified";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTileSlack = 1e-8;

bool flat_pair(const BoundaryPair& bp) { return deltas(bp).d3 == 0.0; }

/// Equal leading coefficients: once the quadratic terms also match, both
/// obstructions are constant in u (2eps*D+ = d1 - 12*a3*eps^2 and
/// 2eps*D- = d1 + 12*a3*eps^2), so the samples at u = 0 decide the whole
/// line. A quadratic-term gap tilts both obstructions linearly and one tail
/// always fails; left-leaning chord structure is not represented here.
Regime flat_regime(const BoundaryPair& bp, double eps, std::string* note) {
    Deltas d = deltas(bp);
    if (d.d2 == 0.0 && two_eps_Dp(bp, eps, 0.0) >= 0.0 &&
        two_eps_Dm(bp, eps, 0.0) >= 0.0) {
        if (note) *note = "equal leading coefficients; simple foliation only";
        return Regime::SimpleRightEverywhere;
    }
    if (note) *note = "equal leading coefficients beyond the simple case";
    return Regime::Unclassified;
}

/// Hermite sample of a curve at the cut abscissa plus the samples on the kept
/// side; the cut point itself becomes an exact endpoint.
Result<SpineCurve> cut_curve(const SpineCurve& sc, double cut_p, bool keep_above) {
    double tol = 1e-7 * (1.0 + std::abs(cut_p));
    double p = std::clamp(cut_p, sc.p_lo(), sc.p_hi());
    if (std::abs(p - cut_p) > tol)
        return Error{"assembly error", "rectangle cut lies outside the spine span"};
    SpineSample cut{p, sc.T_at(p), sc.dTdp_at(p), sc.V_at(p), sc.dVdp_at(p)};
    SpineCurve out;
    out.kind = sc.kind;
    out.eps = sc.eps;
    out.end = sc.end;
    out.truncated = true;
    double drop = 1e-9 * (1.0 + std::abs(p));
    if (keep_above) {
        out.s.push_back(cut);
        for (const SpineSample& q : sc.s)
            if (q.p > p + drop) out.s.push_back(q);
    } else {
        for (const SpineSample& q : sc.s)
            if (q.p < p - drop) out.s.push_back(q);
        out.s.push_back(cut);
    }
    if (out.s.size() < 2)
        return Error{"assembly error", "rectangle cut collapses the spine"};
    return out;
}

/// Coefficients of B = a(x1^2-x2^2) + b*x1 + c*x2 + d from the four vertex
/// values of the diamond: boundary data at the top/bottom vertices, carried
/// spine values at the side vertices. The system stays nonsingular for
/// |C2| < eps, including C2 = 0.
Result<RectLeaf> make_rect(const BoundaryPair& bp, double eps, Vec2 C,
                           double A_plus, double A_minus) {
    std::array<std::array<double, 5>, 4> M{};
    const std::array<Vec2, 4> verts{Vec2{C.x1 + C.x2, eps}, Vec2{C.x1 + eps, C.x2},
                                    Vec2{C.x1 - C.x2, -eps}, Vec2{C.x1 - eps, -C.x2}};
    const std::array<double, 4> rhs{bp.fp(C.x1 + C.x2), A_plus, bp.fm(C.x1 - C.x2),
                                    A_minus};
    for (int i = 0; i < 4; ++i) {
        M[i] = {verts[i].x1 * verts[i].x1 - verts[i].x2 * verts[i].x2, verts[i].x1,
                verts[i].x2, 1.0, rhs[i]};
    }
    for (int col = 0; col < 4; ++col) {
        int piv = col;
        for (int r = col + 1; r < 4; ++r)
            if (std::abs(M[r][col]) > std::abs(M[piv][col])) piv = r;
        std::swap(M[col], M[piv]);
        double scale = 0.0;
        for (int r = col; r < 4; ++r) scale = std::max(scale, std::abs(M[r][col]));
        if (!(std::abs(M[col][col]) > 1e-13 * (1.0 + scale)))
            return Error{"assembly error", "rectangle vertex system is singular"};
        for (int r = col + 1; r < 4; ++r) {
            double f = M[r][col] / M[col][col];
            for (int c2 = col; c2 < 5; ++c2) M[r][c2] -= f * M[col][c2];
        }
    }
    std::array<double, 4> sol{};
    for (int r = 3; r >= 0; --r) {
        double acc = M[r][4];
        for (int c2 = r + 1; c2 < 4; ++c2) acc -= M[r][c2] * sol[c2];
        sol[r] = acc / M[r][r];
    }
    return RectLeaf{C, sol[0], sol[1], sol[2], sol[3]};
}

Result<Trace> run_spine(const BoundaryPair& bp, double eps, bool upper) {
    auto sp = upper ? upper_spine_saddle(bp, eps) : lower_spine_saddle(bp, eps);
    if (!sp.ok()) return sp.error();
    return trace_spine(bp, eps, sp.value());
}

Regime regime_for_impl(const BoundaryPair& bp, const CriticalEps& ce, double eps) {
    double a3m = bp.fm.a3;
    switch (ce.disc) {
        case DiscClass::Negative:
            if (ce.base.eps0p && eps <= *ce.base.eps0p)
                return Regime::SimpleRightEverywhere;
            if (a3m >= 0.0) return Regime::OnePocket;
            if (ce.base.eps0m && eps <= *ce.base.eps0m) return Regime::OnePocket;
            if (ce.eps2 && eps > *ce.eps2)
                return Regime::RectangleWithHerringbones;
            return Regime::TwoPockets;
        case DiscClass::Zero:
            return a3m < 0.0 ? Regime::ZeroDiscriminantRectangle
                             : Regime::Unclassified;
        case DiscClass::Positive:
            if (a3m >= 0.0) return Regime::Unclassified;
            if (ce.eps2 && eps >= *ce.eps2)
                return Regime::RectangleWithHerringbones;
            return Regime::FissureOpaque;
    }
    return Regime::Unclassified;
}

const char* out_of_scope_detail(const BoundaryPair& bp, const CriticalEps& ce) {
    if (ce.disc == DiscClass::Zero && bp.fm.a3 >= 0.0)
        return "zero discriminant needs a3- < 0";
    if (ce.disc == DiscClass::Positive && bp.fm.a3 >= 0.0)
        return "positive discriminant needs a3- < 0";
    return "parameter combination not covered";
}

}  // namespace

Regime regime_for(const BoundaryPair& canonical_pair, const CriticalEps& crit,
                  double eps) {
    return regime_for_impl(canonical_pair, crit, eps);
}

Result<CriticalEps> critical_epsilons(const BoundaryPair& pair) {
    Canonical canon = canonicalize(pair);
    const BoundaryPair& bp = canon.pair;
    auto rc = criticals(bp);
    if (!rc.ok()) return rc.error();
    CriticalEps ce;
    ce.base = rc.value();
    ce.disc = disc_class(bp);
    auto e2 = solve_eps2(bp);
    if (!e2.ok()) return e2.error();
    ce.eps2 = e2.value().eps2;
    ce.eps2_always = e2.value().always_intersecting;
    return ce;
}

Result<Regime> regime_at(const BoundaryPair& pair, double eps) {
    if (!(eps > 0.0)) return Error{"outside-strip", "eps must be positive"};
    Canonical canon = canonicalize(pair);
    if (flat_pair(canon.pair)) return flat_regime(canon.pair, eps, nullptr);
    auto ce = critical_epsilons(canon.pair);
    if (!ce.ok()) return ce.error();
    return regime_for_impl(canon.pair, ce.value(), eps);
}

Result<Foliation> build_foliation(const BoundaryPair& pair, double eps) {
    Canonical canon = canonicalize(pair);
    if (flat_pair(canon.pair))
        return build_foliation(pair, eps, CriticalEps{});
    auto ce = critical_epsilons(canon.pair);
    if (!ce.ok()) return ce.error();
    return build_foliation(pair, eps, ce.value());
}

Result<Foliation> build_foliation(const BoundaryPair& pair, double eps,
                                  const CriticalEps& crit) {
    if (!(eps > 0.0)) return Error{"outside-strip", "eps must be positive"};
    Foliation F;
    F.eps = eps;
    F.canon = canonicalize(pair);
    const BoundaryPair& bp = F.canon.pair;

    if (flat_pair(bp)) {
        F.crit.disc = disc_class(bp);
        F.regime = flat_regime(bp, eps, &F.note);
        if (F.regime == Regime::Unclassified)
            return Error{"not evaluable — out of paper scope", F.note};
        F.leaves.push_back(SimpleLeaf{-kInf, kInf, false});
        return F;
    }

    F.crit = crit;
    F.regime = regime_for_impl(bp, F.crit, eps);

    switch (F.regime) {
        case Regime::SimpleRightEverywhere: {
            F.leaves.push_back(SimpleLeaf{-kInf, kInf, false});
            return F;
        }

        case Regime::Unclassified:
            return Error{"not evaluable — out of paper scope",
                         out_of_scope_detail(bp, F.crit)};

        case Regime::OnePocket: {
            auto roots = upper_roots(bp, eps);
            if (!roots.ok()) return roots.error();
            auto tr = run_spine(bp, eps, true);
            if (!tr.ok()) return tr.error();
            auto sc = make_spine_curve(tr.value());
            if (!sc.ok()) return sc.error();
            double vp = tr.value().exit_x1();
            double ur = roots.value().ur;
            if (!(vp <= ur + kTileSlack))
                return Error{"assembly error", "spine exit right of the pocket"};
            if (std::abs(sc.value().p_hi() - (ur + eps)) >
                kTileSlack * (1.0 + std::abs(ur)))
                return Error{"assembly error", "spine does not reach its saddle"};
            F.leaves.push_back(SimpleLeaf{-kInf, vp, false});
            F.leaves.push_back(HerringboneLeaf{FieldKind::Left, vp, ur,
                                               std::move(sc.value())});
            F.leaves.push_back(SimpleLeaf{ur, kInf, false});
            return F;
        }

        case Regime::TwoPockets: {
            auto up_roots = upper_roots(bp, eps);
            if (!up_roots.ok()) return up_roots.error();
            auto lo_roots = lower_roots(bp, eps);
            if (!lo_roots.ok()) return lo_roots.error();
            auto up = run_spine(bp, eps, true);
            if (!up.ok()) return up.error();
            auto dn = run_spine(bp, eps, false);
            if (!dn.ok()) return dn.error();
            auto up_sc = make_spine_curve(up.value());
            if (!up_sc.ok()) return up_sc.error();
            auto dn_sc = make_spine_curve(dn.value());
            if (!dn_sc.ok()) return dn_sc.error();
            double vp = up.value().exit_x1();
            double vm = dn.value().exit_x1();
            double ulm = lo_roots.value().ul;
            double urp = up_roots.value().ur;
            if (!(ulm <= vm + kTileSlack && vm <= vp + kTileSlack &&
                  vp <= urp + kTileSlack))
                return Error{"assembly error", "pocket bands out of order"};
            F.leaves.push_back(SimpleLeaf{-kInf, ulm, false});
            F.leaves.push_back(HerringboneLeaf{FieldKind::Right, ulm, vm,
                                               std::move(dn_sc.value())});
            F.leaves.push_back(SimpleLeaf{vm, vp, false});
            F.leaves.push_back(HerringboneLeaf{FieldKind::Left, vp, urp,
                                               std::move(up_sc.value())});
            F.leaves.push_back(SimpleLeaf{urp, kInf, false});
            return F;
        }

        case Regime::ZeroDiscriminantRectangle:
        case Regime::RectangleWithHerringbones: {
            auto up_roots = upper_roots(bp, eps);
            if (!up_roots.ok()) return up_roots.error();
            auto lo_roots = lower_roots(bp, eps);
            if (!lo_roots.ok()) return lo_roots.error();
            auto up = run_spine(bp, eps, true);
            if (!up.ok()) return up.error();
            auto dn = run_spine(bp, eps, false);
            if (!dn.ok()) return dn.error();
            auto up_sc = make_spine_curve(up.value());
            if (!up_sc.ok()) return up_sc.error();
            auto dn_sc = make_spine_curve(dn.value());
            if (!dn_sc.ok()) return dn_sc.error();
            auto ctr = find_center(up.value(), dn.value());
            if (!ctr.ok()) return ctr.error();
            Vec2 C = ctr.value().C;
            if (ctr.value().tangent && F.regime != Regime::ZeroDiscriminantRectangle)
                F.note = "near-tangential spine crossing";
            if (!(std::abs(C.x2) < eps))
                return Error{"assembly error", "rectangle center outside the strip"};
            double ulm = lo_roots.value().ul;
            double urp = up_roots.value().ur;

            if (eps - std::abs(C.x2) < 1e-9 * eps) {
                // Hairline rectangle at the transition: the herringbones share
                // the cut chord and the diamond carries no area.
                F.note = "degenerate rectangle at the transition";
                F.leaves.push_back(SimpleLeaf{-kInf, ulm, false});
                F.leaves.push_back(HerringboneLeaf{FieldKind::Right, ulm, C.x1,
                                                   std::move(dn_sc.value())});
                F.leaves.push_back(HerringboneLeaf{FieldKind::Left, C.x1, urp,
                                                   std::move(up_sc.value())});
                F.leaves.push_back(SimpleLeaf{urp, kInf, false});
                return F;
            }

            // Curves carry physical strip abscissae (label shifted by +-eps),
            // so the side vertices C +- eps are the cut points; the leaf
            // labels below stay in the chord-label plane.
            auto up_cut = cut_curve(up_sc.value(), C.x1 + eps, true);
            if (!up_cut.ok()) return up_cut.error();
            auto dn_cut = cut_curve(dn_sc.value(), C.x1 - eps, false);
            if (!dn_cut.ok()) return dn_cut.error();
            double t_tol = 1e-6 * (1.0 + eps);
            if (std::abs(up_cut.value().s.front().T - C.x2) > t_tol ||
                std::abs(dn_cut.value().s.back().T + C.x2) > t_tol)
                return Error{"assembly error",
                             "cut chord does not pass through the center"};
            double A_plus = up_cut.value().s.front().V;
            double A_minus = dn_cut.value().s.back().V;
            auto rect = make_rect(bp, eps, C, A_plus, A_minus);
            if (!rect.ok()) return rect.error();
            if (!(ulm <= C.x1 + kTileSlack && C.x1 <= urp + kTileSlack))
                return Error{"assembly error", "rectangle center outside the pockets"};
            F.leaves.push_back(SimpleLeaf{-kInf, ulm, false});
            F.leaves.push_back(HerringboneLeaf{FieldKind::Right, ulm, C.x1,
                                               std::move(dn_cut.value())});
            F.leaves.push_back(rect.value());
            F.leaves.push_back(HerringboneLeaf{FieldKind::Left, C.x1, urp,
                                               std::move(up_cut.value())});
            F.leaves.push_back(SimpleLeaf{urp, kInf, false});
            return F;
        }

        case Regime::FissureOpaque: {
            auto up_roots = upper_roots(bp, eps);
            if (!up_roots.ok()) return up_roots.error();
            auto lo_roots = lower_roots(bp, eps);
            if (!lo_roots.ok()) return lo_roots.error();
            double lo = lo_roots.value().ul;
            double hi = up_roots.value().ur;
            if (!(lo < hi))
                return Error{"assembly error", "fissure band is empty"};
            F.note = "fissure band out of evaluation scope";
            F.leaves.push_back(SimpleLeaf{-kInf, lo, false});
            F.leaves.push_back(FissureLeaf{lo, hi});
            F.leaves.push_back(SimpleLeaf{hi, kInf, false});
            return F;
        }
    }
    return Error{"not evaluable — out of paper scope", "unreachable regime"};
}

}  // namespace bellman
