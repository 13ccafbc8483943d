#include "bellman/spine.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace bellman {

namespace {

// Feet abscissae of the two chords through the spine point (p, T).
void chord_feet(FieldKind kind, double eps, double p, double T, double& up, double& dn) {
    if (kind == FieldKind::Left) {
        up = p + T - eps;
        dn = p - T - eps;
    } else {
        up = p - T + eps;
        dn = p + T + eps;
    }
}

// Sign of the x1 gradient component relative to (Rp + Rm)/2.
double bx_orient(FieldKind kind) { return kind == FieldKind::Left ? 0.5 : -0.5; }

}  // namespace

double display_value(const BoundaryPair& bp, double eps, FieldKind kind, double p,
                     double T) {
    double up, dn;
    chord_feet(kind, eps, p, T, up, dn);
    double mean = ((eps + T) * bp.fp(up) + (eps - T) * bp.fm(dn)) / (2.0 * eps);
    // same bracket for both kinds; only the prefactor orientation flips
    double br = (eps + T) * bp.fp.d1(up) - (eps - T) * bp.fm.d1(dn);
    double sgn = (kind == FieldKind::Left) ? 1.0 : -1.0;
    return sgn * (eps * eps - T * T) / (2.0 * eps * T) * br + mean;
}

void display_R(const BoundaryPair& bp, double eps, FieldKind kind, double p, double T,
               double& Rp, double& Rm) {
    double up, dn;
    chord_feet(kind, eps, p, T, up, dn);
    double gap = (bp.fm(dn) - bp.fp(up)) / (2.0 * eps);
    double sgn = (kind == FieldKind::Left) ? 1.0 : -1.0;
    double br = (eps + T) * bp.fp.d1(up) - (eps - T) * bp.fm.d1(dn);
    Rp = sgn * (eps + T) / (2.0 * eps * T) * br + gap;
    Rm = sgn * (eps - T) / (2.0 * eps * T) * br - gap;
}

Result<StationaryPoint> upper_spine_saddle(const BoundaryPair& bp, double eps) {
    auto roots = upper_roots(bp, eps);
    if (!roots.ok()) return roots.error();
    auto sp =
        classify_stationary(bp, eps, FieldKind::Left, Side::Upper, roots.value().ur);
    if (!sp.ok()) return sp.error();
    if (sp.value().type != StationaryType::Saddle)
        return Error{"degenerate root", "right root of D+ is not a saddle"};
    return sp.value();
}

Result<StationaryPoint> lower_spine_saddle(const BoundaryPair& bp, double eps) {
    auto roots = lower_roots(bp, eps);
    if (!roots.ok()) return roots.error();
    auto sp =
        classify_stationary(bp, eps, FieldKind::Right, Side::Lower, roots.value().ul);
    if (!sp.ok()) return sp.error();
    if (sp.value().type != StationaryType::Saddle)
        return Error{"degenerate root", "left root of D- is not a saddle"};
    return sp.value();
}

namespace {

struct OdeState {
    double x1 = 0.0, x2 = 0.0, V = 0.0;
};

class Tracer {
  public:
    Tracer(const BoundaryPair& bp, double eps, const StationaryPoint& sp,
           const TraceOptions& opt)
        : bp_(bp), eps_(eps), sp_(sp), opt_(opt) {}

    Result<Trace> run();

  private:
    double strip_p(double x1) const {
        return x1 + (sp_.kind == FieldKind::Left ? eps_ : -eps_);
    }

    // Unit walk direction; falls back to the last direction at a field zero
    // (only reachable in the final subdivisions near a degenerate endpoint).
    Vec2 unit_dir(Vec2 x) const {
        Vec2 f = field_velocity(bp_, eps_, sp_.kind, x);
        double n = std::hypot(f.x1, f.x2);
        if (n < 1e-280) return last_dir_;
        Vec2 u{sigma_ * f.x1 / n, sigma_ * f.x2 / n};
        last_dir_ = u;
        return u;
    }

    // Chord-slope ratios carried by V; switches to the closed form inside the
    // cancellation sliver along the boundaries.
    void chord_ratios(double x1, double x2, double V, double& Rp, double& Rm) const {
        if (eps_ - std::abs(x2) < 1e-8 * eps_) {
            display_R(bp_, eps_, sp_.kind, strip_p(x1), x2, Rp, Rm);
            return;
        }
        if (sp_.kind == FieldKind::Left) {
            Rp = (V - bp_.fp(x1 + x2)) / (eps_ - x2);
            Rm = (V - bp_.fm(x1 - x2)) / (eps_ + x2);
        } else {
            Rp = (V - bp_.fp(x1 - x2)) / (eps_ - x2);
            Rm = (V - bp_.fm(x1 + x2)) / (eps_ + x2);
        }
    }

    OdeState rhs(const OdeState& y) const {
        Vec2 u = unit_dir({y.x1, y.x2});
        double Rp, Rm;
        chord_ratios(y.x1, y.x2, y.V, Rp, Rm);
        double bx = bx_orient(sp_.kind) * (Rp + Rm);
        double by = 0.5 * (Rm - Rp);
        return {u.x1, u.x2, bx * u.x1 + by * u.x2};
    }

    OdeState rk4(const OdeState& y, double h) const {
        auto ax = [h](const OdeState& a, const OdeState& k, double c) {
            return OdeState{a.x1 + c * h * k.x1, a.x2 + c * h * k.x2,
                            a.V + c * h * k.V};
        };
        OdeState k1 = rhs(y);
        OdeState k2 = rhs(ax(y, k1, 0.5));
        OdeState k3 = rhs(ax(y, k2, 0.5));
        OdeState k4 = rhs(ax(y, k3, 1.0));
        return OdeState{y.x1 + h / 6.0 * (k1.x1 + 2.0 * k2.x1 + 2.0 * k3.x1 + k4.x1),
                        y.x2 + h / 6.0 * (k1.x2 + 2.0 * k2.x2 + 2.0 * k3.x2 + k4.x2),
                        y.V + h / 6.0 * (k1.V + 2.0 * k2.V + 2.0 * k3.V + k4.V)};
    }

    void append(Trace& tr, const OdeState& y) const {
        Vec2 u = unit_dir({y.x1, y.x2});
        double slope = (std::abs(u.x1) > 1e-13)
                           ? u.x2 / u.x1
                           : (u.x2 * u.x1 >= 0.0 ? 1.0 : -1.0) * 1e12;
        double Rp, Rm;
        chord_ratios(y.x1, y.x2, y.V, Rp, Rm);
        double bx = bx_orient(sp_.kind) * (Rp + Rm);
        double by = 0.5 * (Rm - Rp);
        tr.pts.push_back({{y.x1, y.x2}, y.V, slope, bx + by * slope});
        double dp = two_x2_Dp(bp_, {y.x1, y.x2});
        double dm = two_x2_Dm(bp_, {y.x1, y.x2});
        double margin = 1e-9 * (1.0 + std::abs(dp) + std::abs(dm));
        if ((dp < -margin && dm > margin) || (dm < -margin && dp > margin))
            tr.obstruction_flag = true;
    }

    const BoundaryPair& bp_;
    double eps_;
    StationaryPoint sp_;
    TraceOptions opt_;
    double sigma_ = 1.0;
    mutable Vec2 last_dir_{1.0, 0.0};
};

Result<Trace> Tracer::run() {
    if (sp_.type != StationaryType::Saddle)
        return Error{"degenerate root", "trace must start from a saddle"};
    if (!((sp_.kind == FieldKind::Left && sp_.side == Side::Upper) ||
          (sp_.kind == FieldKind::Right && sp_.side == Side::Lower)))
        return Error{"degenerate root", "unsupported saddle side for this field"};

    Vec2 dir = sp_.exit_dir();
    double dn = std::hypot(dir.x1, dir.x2);
    if (dn == 0.0) return Error{"degenerate prefactor", "missing exit eigendirection"};
    double orient = (sp_.side == Side::Upper) ? -1.0 : 1.0;
    Vec2 inward{orient * dir.x1 / dn, orient * dir.x2 / dn};

    double delta = opt_.seed_offset_rel * eps_;
    OdeState y{sp_.x.x1 + delta * inward.x1, sp_.x.x2 + delta * inward.x2, 0.0};
    {
        Vec2 f = field_velocity(bp_, eps_, sp_.kind, {y.x1, y.x2});
        double along = f.x1 * inward.x1 + f.x2 * inward.x2;
        if (along == 0.0)
            return Error{"degenerate prefactor", "field vanishes at the seed"};
        sigma_ = along > 0.0 ? 1.0 : -1.0;
    }
    y.V = display_value(bp_, eps_, sp_.kind, strip_p(y.x1), y.x2);

    // Terminal capture targets.
    std::optional<Vec2> node_x;
    double node_V = 0.0, node_slope = 0.0, node_dv = 0.0;
    std::optional<double> midline_u0;
    DiscClass dc = disc_class(bp_);
    if (dc != DiscClass::Negative) {
        // The midline is invariant and q = fp' - fm' vanishes at the target.
        // Each separatrix is the stable manifold of the root nearest its
        // saddle: the Left trace lands on the right root, the Right trace on
        // the left one (they coincide at a zero-discriminant double root).
        Deltas dd = deltas(bp_);
        double rad = std::sqrt(std::max(dd.d2 * dd.d2 - 3.0 * dd.d3 * dd.d1, 0.0));
        double sgn = (sp_.kind == FieldKind::Left) ? 1.0 : -1.0;
        midline_u0 = (-dd.d2 + sgn * rad) / (3.0 * dd.d3);
    }
    if (dc != DiscClass::Zero) {
        auto roots = (sp_.kind == FieldKind::Left) ? upper_roots(bp_, eps_)
                                                   : lower_roots(bp_, eps_);
        if (roots.ok()) {
            double other = (sp_.kind == FieldKind::Left) ? roots.value().ul
                                                         : roots.value().ur;
            auto cls = classify_stationary(bp_, eps_, sp_.kind, sp_.side, other);
            if (cls.ok() && (cls.value().type == StationaryType::Node ||
                             cls.value().type == StationaryType::ImproperNode)) {
                node_x = cls.value().x;
                double pn = strip_p(other);
                node_V = (sp_.side == Side::Upper) ? bp_.fp(pn) : bp_.fm(pn);
                double s = cls.value().s;
                // Arrival is tangent to the weak eigendirection of the node.
                double lam = (cls.value().type == StationaryType::ImproperNode)
                                 ? 0.5 * s
                                 : 0.5 * (s + std::sqrt(std::max(s * s + 8.0 * s, 0.0)));
                node_slope = 1.0 / (s - 1.0 - lam);
                double Rp, Rm;
                display_R(bp_, eps_, sp_.kind, pn, cls.value().x.x2, Rp, Rm);
                double bx = bx_orient(sp_.kind) * (Rp + Rm);
                double by = 0.5 * (Rm - Rp);
                node_dv = bx + by * node_slope;
            }
        }
    }

    Trace tr;
    tr.kind = sp_.kind;
    tr.eps = eps_;

    // Exact saddle sample.
    {
        double p0 = strip_p(sp_.x.x1);
        double V0 = (sp_.side == Side::Upper) ? bp_.fp(p0) : bp_.fm(p0);
        double slope0 = dir.x2 / dir.x1;
        double Rp, Rm;
        display_R(bp_, eps_, sp_.kind, p0, sp_.x.x2, Rp, Rm);
        double bx = bx_orient(sp_.kind) * (Rp + Rm);
        double by = 0.5 * (Rm - Rp);
        tr.pts.push_back({sp_.x, V0, slope0, bx + by * slope0});
    }
    append(tr, y);

    bool v_reset_done = false;
    double h = opt_.init_step_rel * eps_;
    const double hmax = opt_.max_step_rel * eps_;
    int steps = 0;
    while (true) {
        if (++steps > opt_.max_steps)
            return Error{"non-terminating trace",
                         "step budget exhausted before a terminal condition"};
        // The eps-scaled cap resolves boundary-layer geometry; deep inside
        // the strip the field varies on the coefficient scale instead, so a
        // midline-hugging stretch may take outer-scale steps (error control
        // still bounds each one).
        double cap = (std::abs(y.x2) > 0.8 * eps_)
                         ? hmax
                         : std::max(hmax, 0.01 * (1.0 + eps_));
        double h_eff = std::min(h, cap);
        if (node_x) {
            double d = std::hypot(y.x1 - node_x->x1, y.x2 - node_x->x2);
            h_eff = std::min(h_eff, std::max(0.3 * d, 1e-3 * opt_.snap_radius));
        }
        if (midline_u0) {
            double d = std::hypot(y.x1 - *midline_u0, y.x2);
            h_eff = std::min(h_eff, std::max(0.3 * d, 1e-3 * opt_.snap_radius));
        }
        h_eff = std::max(h_eff, opt_.min_step);

        OdeState y1 = rk4(y, h_eff);
        OdeState y2 = rk4(rk4(y, 0.5 * h_eff), 0.5 * h_eff);
        double e1 = std::abs(y2.x1 - y1.x1);
        double e2 = std::abs(y2.x2 - y1.x2);
        double ev = std::abs(y2.V - y1.V) / (1.0 + std::abs(y2.V));
        double err = std::max(e1, std::max(e2, ev)) / 15.0;
        if (err > opt_.abs_tol && h_eff > opt_.min_step) {
            h = 0.5 * h_eff;
            continue;
        }
        OdeState y_new{y2.x1 + (y2.x1 - y1.x1) / 15.0, y2.x2 + (y2.x2 - y1.x2) / 15.0,
                       y2.V + (y2.V - y1.V) / 15.0};
        h = (err < 0.03125 * opt_.abs_tol) ? 2.0 * h_eff : h_eff;

        // Node capture: the far root attracts; crawl in and snap exactly.
        if (node_x) {
            double d = std::hypot(y_new.x1 - node_x->x1, y_new.x2 - node_x->x2);
            if (d <= opt_.snap_radius) {
                append(tr, y_new);
                tr.pts.push_back({*node_x, node_V, node_slope, node_dv});
                tr.end = TraceEnd::OtherRoot;
                return tr;
            }
        }

        // Midline stationary point: either the abscissa crosses u0 with a
        // flat tangency (zero discriminant), or the trace converges onto the
        // target monotonically (positive discriminant) and the crawl snaps.
        if (midline_u0) {
            double dsnap = std::hypot(y_new.x1 - *midline_u0, y_new.x2);
            if (dsnap <= 1e-3 * opt_.snap_radius) {
                append(tr, y_new);
                double rp = (y_new.V - bp_.fp(*midline_u0)) / eps_;
                double rm = (y_new.V - bp_.fm(*midline_u0)) / eps_;
                double bx = bx_orient(sp_.kind) * (rp + rm);
                tr.pts.push_back({{*midline_u0, 0.0}, y_new.V, 0.0, bx});
                tr.end = TraceEnd::MidlineEnd;
                return tr;
            }
            // Once the trace has collapsed onto the invariant midline the
            // remaining motion is one-dimensional; the step integrator
            // degenerates there (substages straddle the line), so capture
            // within the node-scale ball and close V to first order, which
            // leaves an O(dsnap^2) value error. A double root's approach can
            // stall on the repelling side and never reach the tight ball.
            if (dsnap <= opt_.snap_radius && std::abs(y_new.x2) <= 1e-10 * eps_) {
                append(tr, y_new);
                double rp = (y_new.V - bp_.fp(*midline_u0)) / eps_;
                double rm = (y_new.V - bp_.fm(*midline_u0)) / eps_;
                double bx = bx_orient(sp_.kind) * (rp + rm);
                double Vc = y_new.V + bx * (*midline_u0 - y_new.x1);
                tr.pts.push_back({{*midline_u0, 0.0}, Vc, 0.0, bx});
                tr.end = TraceEnd::MidlineEnd;
                return tr;
            }
            double a = y.x1 - *midline_u0;
            double b = y_new.x1 - *midline_u0;
            if (a * b <= 0.0 && a != 0.0 && std::abs(y_new.x2) <= 0.05 * eps_) {
                double tlo = 0.0, thi = 1.0;
                OdeState yc = y_new;
                for (int it = 0; it < 80; ++it) {
                    double tm = 0.5 * (tlo + thi);
                    OdeState ym = rk4(y, tm * h_eff);
                    if ((ym.x1 - *midline_u0) * a > 0.0) {
                        tlo = tm;
                    } else {
                        thi = tm;
                        yc = ym;
                    }
                }
                double rp = (yc.V - bp_.fp(*midline_u0)) / eps_;
                double rm = (yc.V - bp_.fm(*midline_u0)) / eps_;
                double bx = bx_orient(sp_.kind) * (rp + rm);
                tr.pts.push_back({{*midline_u0, 0.0}, yc.V, 0.0, bx});
                tr.end = TraceEnd::MidlineEnd;
                return tr;
            }
        }

        // Boundary crossing; the endpoint value closes on the boundary data.
        {
            bool cross_up = (eps_ - y.x2 > 0.0) && (eps_ - y_new.x2 <= 0.0);
            bool cross_dn = (eps_ + y.x2 > 0.0) && (eps_ + y_new.x2 <= 0.0);
            if (cross_up || cross_dn) {
                bool upper = cross_up;
                double tlo = 0.0, thi = 1.0;
                OdeState yc = y_new;
                for (int it = 0; it < 80; ++it) {
                    double tm = 0.5 * (tlo + thi);
                    OdeState ym = rk4(y, tm * h_eff);
                    double mu = upper ? eps_ - ym.x2 : eps_ + ym.x2;
                    if (mu > 0.0) {
                        tlo = tm;
                    } else {
                        thi = tm;
                        yc = ym;
                    }
                }
                double x2e = upper ? eps_ : -eps_;
                double pe = strip_p(yc.x1);
                double Ve = upper ? bp_.fp(pe) : bp_.fm(pe);
                Vec2 f = field_velocity(bp_, eps_, sp_.kind, {yc.x1, x2e});
                double slope_e = (std::abs(f.x1) > 1e-300) ? f.x2 / f.x1 : 0.0;
                double Rp, Rm;
                display_R(bp_, eps_, sp_.kind, pe, x2e, Rp, Rm);
                double bx = bx_orient(sp_.kind) * (Rp + Rm);
                double by = 0.5 * (Rm - Rp);
                tr.pts.push_back({{yc.x1, x2e}, Ve, slope_e, bx + by * slope_e});
                tr.end = upper ? TraceEnd::UpperBoundary : TraceEnd::LowerBoundary;
                return tr;
            }
        }

        if (y_new.x1 < opt_.window_lo || y_new.x1 > opt_.window_hi) {
            append(tr, y_new);
            tr.end = TraceEnd::Window;
            return tr;
        }

        y = y_new;
        if (!v_reset_done && eps_ - std::abs(y.x2) >= 1e-6 * eps_) {
            // Replace the value accumulated across the seed sliver by the
            // closed form once the denominators are healthy.
            y.V = display_value(bp_, eps_, sp_.kind, strip_p(y.x1), y.x2);
            v_reset_done = true;
        }
        append(tr, y);
    }
}

}  // namespace

Result<Trace> trace_spine(const BoundaryPair& bp, double eps, const StationaryPoint& sp,
                          const TraceOptions& opt) {
    if (!(eps > 0.0)) return Error{"degenerate root", "eps must be positive"};
    Tracer t(bp, eps, sp, opt);
    return t.run();
}

namespace {

void hermite_eval(double x0, double y0, double m0, double x1, double y1, double m1,
                  double x, double& y, double& dy) {
    double h = x1 - x0;
    double t = (x - x0) / h;
    double t2 = t * t, t3 = t2 * t;
    y = (2.0 * t3 - 3.0 * t2 + 1.0) * y0 + (t3 - 2.0 * t2 + t) * h * m0 +
        (-2.0 * t3 + 3.0 * t2) * y1 + (t3 - t2) * h * m1;
    dy = (6.0 * t2 - 6.0 * t) * y0 / h + (3.0 * t2 - 4.0 * t + 1.0) * m0 +
         (-6.0 * t2 + 6.0 * t) * y1 / h + (3.0 * t2 - 2.0 * t) * m1;
}

std::size_t sample_seg(const std::vector<SpineSample>& s, double p) {
    if (p <= s.front().p) return 0;
    if (p >= s.back().p) return s.size() - 2;
    std::size_t lo = 0, hi = s.size() - 1;
    while (hi - lo > 1) {
        std::size_t mid = (lo + hi) / 2;
        if (s[mid].p <= p) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return lo;
}

}  // namespace

double SpineCurve::T_at(double p) const {
    std::size_t i = sample_seg(s, p);
    double y, dy;
    hermite_eval(s[i].p, s[i].T, s[i].dTdp, s[i + 1].p, s[i + 1].T, s[i + 1].dTdp, p, y,
                 dy);
    return y;
}

double SpineCurve::dTdp_at(double p) const {
    std::size_t i = sample_seg(s, p);
    double y, dy;
    hermite_eval(s[i].p, s[i].T, s[i].dTdp, s[i + 1].p, s[i + 1].T, s[i + 1].dTdp, p, y,
                 dy);
    return dy;
}

double SpineCurve::V_at(double p) const {
    std::size_t i = sample_seg(s, p);
    double y, dy;
    hermite_eval(s[i].p, s[i].V, s[i].dVdp, s[i + 1].p, s[i + 1].V, s[i + 1].dVdp, p, y,
                 dy);
    return y;
}

double SpineCurve::dVdp_at(double p) const {
    std::size_t i = sample_seg(s, p);
    double y, dy;
    hermite_eval(s[i].p, s[i].V, s[i].dVdp, s[i + 1].p, s[i + 1].V, s[i + 1].dVdp, p, y,
                 dy);
    return dy;
}

Result<double> SpineCurve::solve_chord(double target, double sign) const {
    auto gval = [&](std::size_t i) { return s[i].p + sign * s[i].T; };
    double g0 = gval(0), g1 = gval(s.size() - 1);
    double slack = 1e-9 * (1.0 + std::abs(target));
    if (target < g0 - slack || target > g1 + slack)
        return Error{"outside-strip", "chord is not covered by this spine"};
    double t = std::clamp(target, g0, g1);
    std::size_t lo = 0, hi = s.size() - 1;
    while (hi - lo > 1) {
        std::size_t mid = (lo + hi) / 2;
        if (gval(mid) <= t) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    double a = s[lo].p, b = s[hi].p;
    double p = 0.5 * (a + b);
    for (int it = 0; it < 60; ++it) {
        double Tv, dT;
        hermite_eval(s[lo].p, s[lo].T, s[lo].dTdp, s[hi].p, s[hi].T, s[hi].dTdp, p, Tv,
                     dT);
        double G = p + sign * Tv - t;
        double dG = 1.0 + sign * dT;
        if (G > 0.0) {
            b = p;
        } else {
            a = p;
        }
        double pn = (dG > 1e-3) ? p - G / dG : 0.5 * (a + b);
        if (pn <= a || pn >= b) pn = 0.5 * (a + b);
        if (std::abs(pn - p) <= 1e-14 * (1.0 + std::abs(p))) {
            p = pn;
            break;
        }
        p = pn;
    }
    return p;
}

Result<SpineCurve> make_spine_curve(const Trace& tr) {
    if (tr.pts.size() < 2) return Error{"non-terminating trace", "trace too short"};
    double shift = (tr.kind == FieldKind::Left) ? tr.eps : -tr.eps;
    double walk = (tr.kind == FieldKind::Left) ? -1.0 : 1.0;
    SpineCurve sc;
    sc.kind = tr.kind;
    sc.eps = tr.eps;
    sc.end = tr.end;
    std::vector<SpineSample> tmp;
    tmp.push_back({tr.pts[0].x.x1 + shift, tr.pts[0].x.x2, tr.pts[0].slope, tr.pts[0].V,
                   tr.pts[0].dVdx1});
    for (std::size_t i = 1; i < tr.pts.size(); ++i) {
        double dp = (tr.pts[i].x.x1 - tr.pts[i - 1].x.x1) * walk;
        if (dp <= 0.0 || std::abs(tr.pts[i].slope) >= 1.0) {
            sc.truncated = true;
            break;
        }
        tmp.push_back({tr.pts[i].x.x1 + shift, tr.pts[i].x.x2, tr.pts[i].slope,
                       tr.pts[i].V, tr.pts[i].dVdx1});
    }
    if (sc.truncated && !tmp.empty() &&
        (tr.end == TraceEnd::UpperBoundary || tr.end == TraceEnd::LowerBoundary)) {
        // A boundary exit is approached tangent to a chord direction
        // (|T'| -> 1), so the slope cut above can drop the final stretch.
        // The exit itself is an exact graph point (x2 snapped to the
        // boundary, V and dV carried through the boundary-exact chord
        // ratios); restoring it makes the seam chord exact.
        const TracePoint& e = tr.pts.back();
        double pe = e.x.x1 + shift;
        if ((pe - tmp.back().p) * walk > 0.0)
            tmp.push_back({pe, e.x.x2, e.x.x2 > 0.0 ? -1.0 : 1.0, e.V, e.dVdx1});
    }
    if (tmp.size() < 2) return Error{"non-terminating trace", "no graph portion"};
    if (tr.kind == FieldKind::Left) std::reverse(tmp.begin(), tmp.end());
    sc.s = std::move(tmp);
    return sc;
}

namespace {

// Both spines drawn in one plane of field coordinates, the Right one
// conjugated (x2 -> -x2); ascending x.
struct Overlay {
    std::vector<double> x, y, m;
};

Overlay overlay_of(const Trace& tr) {
    bool refl = (tr.kind == FieldKind::Right);
    double walk = (tr.kind == FieldKind::Left) ? -1.0 : 1.0;
    Overlay ov;
    std::size_t n = 1;
    for (std::size_t i = 1; i < tr.pts.size(); ++i) {
        double dp = (tr.pts[i].x.x1 - tr.pts[i - 1].x.x1) * walk;
        if (dp <= 0.0 || std::abs(tr.pts[i].slope) >= 1.0) break;
        ++n;
    }
    ov.x.reserve(n);
    ov.y.reserve(n);
    ov.m.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        ov.x.push_back(tr.pts[i].x.x1);
        ov.y.push_back(refl ? -tr.pts[i].x.x2 : tr.pts[i].x.x2);
        ov.m.push_back(refl ? -tr.pts[i].slope : tr.pts[i].slope);
    }
    if (tr.kind == FieldKind::Left) {
        std::reverse(ov.x.begin(), ov.x.end());
        std::reverse(ov.y.begin(), ov.y.end());
        std::reverse(ov.m.begin(), ov.m.end());
    }
    return ov;
}

std::size_t grid_seg(const std::vector<double>& xs, double x) {
    if (x <= xs.front()) return 0;
    if (x >= xs.back()) return xs.size() - 2;
    std::size_t lo = 0, hi = xs.size() - 1;
    while (hi - lo > 1) {
        std::size_t mid = (lo + hi) / 2;
        if (xs[mid] <= x) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return lo;
}

double lin_at(const Overlay& ov, double x) {
    std::size_t i = grid_seg(ov.x, x);
    double t = (x - ov.x[i]) / (ov.x[i + 1] - ov.x[i]);
    return ov.y[i] + t * (ov.y[i + 1] - ov.y[i]);
}

void herm_at(const Overlay& ov, double x, double& y, double& dy) {
    std::size_t i = grid_seg(ov.x, x);
    hermite_eval(ov.x[i], ov.y[i], ov.m[i], ov.x[i + 1], ov.y[i + 1], ov.m[i + 1], x, y,
                 dy);
}

}  // namespace

Result<CenterResult> find_center(const Trace& plus, const Trace& minus) {
    if (plus.kind != FieldKind::Left || minus.kind != FieldKind::Right)
        return Error{"degenerate root", "center needs one Left and one Right trace"};
    if (plus.end == TraceEnd::MidlineEnd && minus.end == TraceEnd::MidlineEnd) {
        Vec2 a = plus.pts.back().x;
        Vec2 b = minus.pts.back().x;
        double d = std::hypot(a.x1 - b.x1, a.x2 + b.x2);
        if (d > 1e-9 * (1.0 + std::abs(a.x1)))
            return Error{"tangent", "midline endpoints of the two spines disagree"};
        return CenterResult{a, false};
    }
    if (plus.pts.size() < 2 || minus.pts.size() < 2)
        return Error{"non-terminating trace", "trace too short for an intersection"};
    Overlay P = overlay_of(plus);
    Overlay M = overlay_of(minus);
    if (P.x.size() < 2 || M.x.size() < 2)
        return Error{"tangent", "degenerate spine overlay"};
    double lo = std::max(P.x.front(), M.x.front());
    double hi = std::min(P.x.back(), M.x.back());
    if (!(hi > lo)) return Error{"tangent", "spine curves do not share abscissae"};

    auto sgn = [](double v) { return v > 0.0 ? 1 : (v < 0.0 ? -1 : 1); };
    const int N = 2000;
    double bl = 0.0, bh = 0.0;
    int nbrackets = 0;
    double prev_x = lo;
    int prev_s = sgn(lin_at(M, lo) - lin_at(P, lo));
    for (int i = 1; i <= N; ++i) {
        double xx = lo + (hi - lo) * i / N;
        int cs = sgn(lin_at(M, xx) - lin_at(P, xx));
        if (prev_s * cs < 0) {
            ++nbrackets;
            if (nbrackets == 1) {
                bl = prev_x;
                bh = xx;
            }
        }
        prev_s = cs;
        prev_x = xx;
    }
    if (nbrackets == 0) return Error{"tangent", "spine curves do not cross"};
    if (nbrackets > 1) return Error{"tangent", "multiple spine crossings"};

    double a = bl, b = bh;
    double ga = lin_at(M, a) - lin_at(P, a);
    for (int it = 0; it < 90; ++it) {
        double mid = 0.5 * (a + b);
        double gm = lin_at(M, mid) - lin_at(P, mid);
        if ((ga > 0.0) == (gm > 0.0)) {
            a = mid;
            ga = gm;
        } else {
            b = mid;
        }
        if (b - a <= 1e-14 * (1.0 + std::abs(a))) break;
    }
    double xc = 0.5 * (a + b);
    for (int it = 0; it < 12; ++it) {
        double yp, mp, ym, mm;
        herm_at(P, xc, yp, mp);
        herm_at(M, xc, ym, mm);
        double G = ym - yp, dG = mm - mp;
        if (dG == 0.0) break;
        double step = G / dG;
        double xn = std::clamp(xc - step, lo, hi);
        double moved = std::abs(xn - xc);
        xc = xn;
        if (moved <= 1e-14 * (1.0 + std::abs(xc))) break;
    }
    double yp, mp, ym, mm;
    herm_at(P, xc, yp, mp);
    herm_at(M, xc, ym, mm);
    CenterResult res;
    res.C = {xc, 0.5 * (yp + ym)};
    res.tangent = std::abs(mm - mp) < 1e-4;
    return res;
}

namespace {

// Signed vertical separation of the two spines in the overlay plane: positive
// while the conjugated Right spine stays strictly above (or beside) the Left
// one, negative once they cross.
Result<double> spine_gap(const BoundaryPair& bp, double eps, const TraceOptions& base) {
    auto su = upper_spine_saddle(bp, eps);
    if (!su.ok()) return su.error();
    auto sl = lower_spine_saddle(bp, eps);
    if (!sl.ok()) return sl.error();
    TraceOptions opt = base;
    double a = su.value().x.x1, b = sl.value().x.x1;
    double span = 10.0 * (1.0 + eps) + std::abs(a) + std::abs(b);
    opt.window_lo = std::min(a, b) - span;
    opt.window_hi = std::max(a, b) + span;
    auto tp = trace_spine(bp, eps, su.value(), opt);
    if (!tp.ok()) return tp.error();
    auto tm = trace_spine(bp, eps, sl.value(), opt);
    if (!tm.ok()) return tm.error();
    Overlay P = overlay_of(tp.value());
    Overlay M = overlay_of(tm.value());
    if (P.x.size() < 2 || M.x.size() < 2)
        return Error{"tangent", "degenerate spine overlay"};
    double lo = std::max(P.x.front(), M.x.front());
    double hi = std::min(P.x.back(), M.x.back());
    if (!(hi >= lo)) {
        if (M.x.back() <= P.x.front()) return P.x.front() - M.x.back();
        return M.x.front() - P.x.back();
    }
    double g = 1e300;
    const int K = 512;
    for (int i = 0; i <= K; ++i) {
        double xx = lo + (hi - lo) * i / K;
        g = std::min(g, lin_at(M, xx) - lin_at(P, xx));
    }
    for (double xx : P.x)
        if (xx >= lo && xx <= hi) g = std::min(g, lin_at(M, xx) - lin_at(P, xx));
    for (double xx : M.x)
        if (xx >= lo && xx <= hi) g = std::min(g, lin_at(M, xx) - lin_at(P, xx));
    return g;
}

}  // namespace

Result<Epsilon2Result> solve_eps2(const BoundaryPair& bp, const TraceOptions& opt) {
    auto cr = criticals(bp);
    if (!cr.ok()) return cr.error();
    DiscClass dc = disc_class(bp);
    if (dc == DiscClass::Zero) return Epsilon2Result{0.0, true};
    if (bp.fm.a3 >= 0.0) return Epsilon2Result{std::nullopt, false};
    double lo;
    if (dc == DiscClass::Negative) {
        if (!cr.value().eps0m) return Epsilon2Result{std::nullopt, false};
        lo = *cr.value().eps0m * (1.0 + 1e-6);
    } else {
        lo = 1e-3 * std::sqrt(std::abs(cr.value().eps0p_sq));
        if (!(lo > 0.0)) lo = 1e-3;
    }
    auto g0 = spine_gap(bp, lo, opt);
    if (!g0.ok()) return g0.error();
    if (g0.value() <= 0.0) return Epsilon2Result{lo, false};
    double pos = lo, neg = 0.0;
    bool found = false;
    double prev_gap = g0.value();
    int stall = 0;
    for (int k = 0; k < 48 && !found; ++k) {
        double cand = pos * 2.0;
        // A gap that stops shrinking over successive octaves never closes
        // (the curve endpoints are pinned); stop before the carried values
        // outgrow the step tolerance at astronomical eps.
        if (cand > 1e6) return Epsilon2Result{std::nullopt, false};
        auto g = spine_gap(bp, cand, opt);
        if (!g.ok()) return g.error();
        if (g.value() <= 0.0) {
            neg = cand;
            found = true;
        } else {
            if (g.value() >= prev_gap - 1e-12 * (1.0 + std::abs(prev_gap))) {
                if (++stall >= 3) return Epsilon2Result{std::nullopt, false};
            } else {
                stall = 0;
            }
            prev_gap = g.value();
            pos = cand;
        }
    }
    if (!found) return Epsilon2Result{std::nullopt, false};
    double a = pos, b = neg;
    for (int it = 0; it < 64; ++it) {
        double mid = 0.5 * (a + b);
        auto g = spine_gap(bp, mid, opt);
        if (!g.ok()) return g.error();
        if (g.value() > 0.0) {
            a = mid;
        } else {
            b = mid;
        }
        if (b - a <= 1e-8 * std::max(1.0, a)) break;
    }
    return Epsilon2Result{0.5 * (a + b), false};
}

}  // namespace bellman
