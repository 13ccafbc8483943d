#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "bellman/boundary.hpp"
#include "bellman/spine.hpp"
#include "bellman/types.hpp"

namespace bellman {

enum class Regime {
    SimpleRightEverywhere,
    OnePocket,
    TwoPockets,
    RectangleWithHerringbones,
    ZeroDiscriminantRectangle,
    FissureOpaque,
    Unclassified,
};

/// Stable kebab-case regime name used by the CLI and serialized dumps.
const char* regime_slug(Regime r);

/// Critical half-widths of a canonical pair: closed-form thresholds plus the
/// traced spine-intersection threshold eps2. eps2 == nullopt with
/// eps2_always == false means the spines never meet.
struct CriticalEps {
    Criticals base;
    std::optional<double> eps2;
    bool eps2_always = false;  // spines share a point for every eps
    DiscClass disc = DiscClass::Negative;
};

Result<CriticalEps> critical_epsilons(const BoundaryPair& pair);

/// Band of parallel slope+-1 chords. Labels are midline abscissae; the outer
/// bands use -+infinity. left == false is the right family (slope +1).
struct SimpleLeaf {
    double u_from = 0.0;
    double u_to = 0.0;
    bool left = false;
};

/// Minor-pocket herringbone: the spine plus the bent-chord fan it carries.
/// u_from/u_to are chord-label abscissae of the spine ends, ascending; they
/// equal the band labels of the decomposition the leaf belongs to. The curve
/// itself uses physical strip abscissae, label + eps for the Left kind and
/// label - eps for the Right kind.
struct HerringboneLeaf {
    FieldKind kind = FieldKind::Left;  // Left hangs from the upper boundary
    double u_from = 0.0;
    double u_to = 0.0;
    SpineCurve spine;  // physical strip coordinates; truncated at a rect cut
};

/// Bilinear patch B = a(x1^2 - x2^2) + b*x1 + c*x2 + d on the diamond with
/// center C and vertices (C1 +- C2, +-eps), C +- eps.
struct RectLeaf {
    Vec2 C;
    double a = 0.0, b = 0.0, c = 0.0, d = 0.0;
};

/// Band whose interior foliation is not constructed here; evaluation inside
/// reports out of scope. Bounded by the outermost valid right chords.
struct FissureLeaf {
    double u_from = 0.0;
    double u_to = 0.0;
};

using Leaf = std::variant<SimpleLeaf, HerringboneLeaf, RectLeaf, FissureLeaf>;

/// Ordered strip decomposition for the canonical frame of a pair. Leaves run
/// left to right; `canon.sym` maps original coordinates into that frame.
struct Foliation {
    double eps = 0.0;
    Regime regime = Regime::Unclassified;
    Canonical canon;
    std::vector<Leaf> leaves;
    CriticalEps crit;
    std::string note;
};

/// Threshold-only classification from a precomputed CriticalEps (canonical
/// pair, positive leading gap). Lets sweeps reuse one critical_epsilons run.
Regime regime_for(const BoundaryPair& canonical_pair, const CriticalEps& crit,
                  double eps);

Result<Regime> regime_at(const BoundaryPair& pair, double eps);

Result<Foliation> build_foliation(const BoundaryPair& pair, double eps);

/// Same, reusing a CriticalEps previously computed for this pair.
Result<Foliation> build_foliation(const BoundaryPair& pair, double eps,
                                  const CriticalEps& crit);

}  // namespace bellman
