#pragma once

#include <optional>
#include <vector>

#include "bellman/boundary.hpp"
#include "bellman/field.hpp"
#include "bellman/types.hpp"

namespace bellman {

/// Closed-form candidate value at the spine point (p, T), strip coordinates.
/// p is the spine abscissa (field x1 + eps for Left, field x1 - eps for
/// Right); T in (-eps, eps], nonzero. Exact wherever the spine terminates on
/// the boundary; near a degenerate midline end the traced value replaces it.
double display_value(const BoundaryPair& bp, double eps, FieldKind kind, double p,
                     double T);

/// Chord-slope ratios at the spine point, cancellation-free:
///   Rp = (A - fp(up foot)) / (eps - T),  Rm = (A - fm(down foot)) / (eps + T).
/// Finite at T = +-eps; invalid at T = 0.
void display_R(const BoundaryPair& bp, double eps, FieldKind kind, double p, double T,
               double& Rp, double& Rm);

struct TraceOptions {
    double seed_offset_rel = 1e-7;  // seed distance from the saddle, * eps
    double init_step_rel = 1e-3;    // initial arc step, * eps
    double max_step_rel = 1e-2;     // arc step cap, * eps
    double min_step = 1e-12;
    double abs_tol = 1e-10;         // per-step Richardson error bound
    double snap_radius = 1e-6;      // capture distance at a node endpoint
    int max_steps = 200000;
    double window_lo = -1e300;      // abscissa window, field coordinates
    double window_hi = 1e300;
};

enum class TraceEnd {
    UpperBoundary,  // crossed x2 = +eps; endpoint bisected onto the boundary
    LowerBoundary,  // crossed x2 = -eps
    OtherRoot,      // captured by the node at the far root of the pocket
    MidlineEnd,     // reached the degenerate point (u0, 0), zero discriminant
    Window,         // left the abscissa window before terminating
};

/// Accepted sample along a trace, field coordinates. slope = dx2/dx1 and
/// dVdx1 = dV/dx1, exact tangent data at the sample (the polyline upgrades to
/// a cubic Hermite interpolant).
struct TracePoint {
    Vec2 x;
    double V = 0.0;
    double slope = 0.0;
    double dVdx1 = 0.0;
};

struct Trace {
    FieldKind kind = FieldKind::Left;
    double eps = 0.0;
    TraceEnd end = TraceEnd::UpperBoundary;
    bool obstruction_flag = false;  // saw D+ * D- < 0 along the way
    std::vector<TracePoint> pts;    // walk order, exact saddle first

    double exit_x1() const { return pts.back().x.x1; }
};

/// Trace the spine separatrix leaving the saddle into the strip, carrying the
/// candidate value V through its chord-tangency differential equation.
Result<Trace> trace_spine(const BoundaryPair& bp, double eps, const StationaryPoint& sp,
                          const TraceOptions& opt = {});

/// The two spine generators of a canonical pair: the saddle at the right root
/// of D+ on the upper boundary (Left field) and at the left root of D- on the
/// lower boundary (Right field).
Result<StationaryPoint> upper_spine_saddle(const BoundaryPair& bp, double eps);
Result<StationaryPoint> lower_spine_saddle(const BoundaryPair& bp, double eps);

/// Spine curve in strip coordinates, samples ascending in p.
struct SpineSample {
    double p = 0.0;
    double T = 0.0;
    double dTdp = 0.0;
    double V = 0.0;
    double dVdp = 0.0;
};

/// Graph portion of a trace (p strictly monotone, |T'| < 1) with cubic
/// Hermite accessors. The Left spine's saddle sits at p_hi, the Right one's
/// at p_lo.
struct SpineCurve {
    FieldKind kind = FieldKind::Left;
    double eps = 0.0;
    TraceEnd end = TraceEnd::UpperBoundary;
    bool truncated = false;
    std::vector<SpineSample> s;

    double p_lo() const { return s.front().p; }
    double p_hi() const { return s.back().p; }

    double T_at(double p) const;
    double dTdp_at(double p) const;
    double V_at(double p) const;
    double dVdp_at(double p) const;

    /// Solve p + sign*T(p) = target (strictly increasing in p). sign = +1
    /// selects the chords of one family, -1 the other.
    Result<double> solve_chord(double target, double sign) const;
};

Result<SpineCurve> make_spine_curve(const Trace& tr);

struct CenterResult {
    Vec2 C;
    bool tangent = false;  // near-tangential crossing: out-of-scope suspect
};

/// Intersection of the Left spine with the conjugated (x2 -> -x2) Right spine
/// in the overlay plane of field coordinates; simultaneously the strip center
/// of the rectangle. Both traces must come from the same eps.
Result<CenterResult> find_center(const Trace& plus, const Trace& minus);

struct Epsilon2Result {
    std::optional<double> eps2;        // smallest eps where the spines meet
    bool always_intersecting = false;  // zero discriminant: meet for every eps
};

/// Critical half-width beyond which the two spines share a point and the
/// rectangle regime begins. nullopt with always_intersecting == false means
/// they never meet (eps2 = infinity).
Result<Epsilon2Result> solve_eps2(const BoundaryPair& canonical_pair,
                                  const TraceOptions& opt = {});

}  // namespace bellman
