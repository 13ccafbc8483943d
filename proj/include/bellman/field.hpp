#pragma once

#include "bellman/boundary.hpp"
#include "bellman/types.hpp"

namespace bellman {

/// Which herringbone family the field generates: Left spines hang below the
/// upper boundary (chords reach up to x2 = +eps), Right spines the reverse.
enum class FieldKind { Left, Right };

enum class Side { Upper, Lower };

/// Field velocity at x (field coordinates; the strip spine is this curve
/// shifted by +eps in x1 for Left, -eps for Right).
Vec2 field_velocity(const BoundaryPair& bp, double eps, FieldKind kind, Vec2 x);

/// Analytic Jacobian of the field velocity.
Mat2 field_jacobian(const BoundaryPair& bp, double eps, FieldKind kind, Vec2 x);

/// The field has a stationary point on the given side's boundary exactly at
/// the roots u of this function. (Left, Upper) is 2*eps*D+; (Right, Lower) is
/// 2*eps*D-.
double stationarity(const BoundaryPair& bp, double eps, FieldKind kind, Side side,
                    double u);
double stationarity_du(const BoundaryPair& bp, double eps, FieldKind kind, Side side,
                       double u);

/// Curvature parameter at a stationarity root: 2 f''' over S'(u), with the
/// third derivative taken on the side the root lives on.
Result<double> kappa_general(const BoundaryPair& bp, double eps, FieldKind kind,
                             Side side, double u);

/// Boundary location of the stationary point for a root u.
Vec2 stationary_location(double eps, FieldKind kind, Side side, double u);

enum class StationaryType { Saddle, Spiral, Node, ImproperNode };

/// Stationary point with its local linearization data. The Jacobian is
/// prefactor * [[1, 1-3s], [-1, s-1]] with s = 1 + eps*kappa; the spine
/// leaves a saddle along the eigenvector of (s - sqrt(s^2+8s))/2.
struct StationaryPoint {
    Vec2 x;
    FieldKind kind = FieldKind::Left;
    Side side = Side::Upper;
    double kappa = 0.0;
    double s = 0.0;
    StationaryType type = StationaryType::Saddle;
    double prefactor = 0.0;

    /// Unnormalized exit eigenvector (den, 2); slope = 2/den. Valid for
    /// saddles and nodes (s > 0 or s <= -8); zero vector otherwise.
    Vec2 exit_dir() const;
};

Result<StationaryPoint> classify_stationary(const BoundaryPair& bp, double eps,
                                            FieldKind kind, Side side, double u);

/// Reference curves of the left field in field coordinates: zero sets of
/// these functions organize the region where spines can turn.
double X0_value(const BoundaryPair& bp, double eps, Vec2 x);
double X1_value(const BoundaryPair& bp, Vec2 x);
double Xinf_value(const BoundaryPair& bp, double eps, Vec2 x);

}  // namespace bellman
