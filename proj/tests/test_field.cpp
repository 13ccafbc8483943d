#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "bellman/field.hpp"

using namespace bellman;

namespace {

const Cubic kCube{1.0, 0.0, 0.0, 0.0};
const Cubic kCubePlusT{1.0, 0.0, 1.0, 0.0};
const Cubic kZero{0.0, 0.0, 0.0, 0.0};
const Cubic kNegCube{-1.0, 0.0, 0.0, 0.0};

BoundaryPair random_pair(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> coef(-2.0, 2.0);
    return {{coef(rng), coef(rng), coef(rng), coef(rng)},
            {coef(rng), coef(rng), coef(rng), coef(rng)}};
}

Mat2 fd_jacobian(const BoundaryPair& bp, double eps, FieldKind k, Vec2 x) {
    double h = 1e-6;
    Vec2 vxp = field_velocity(bp, eps, k, {x.x1 + h, x.x2});
    Vec2 vxm = field_velocity(bp, eps, k, {x.x1 - h, x.x2});
    Vec2 vyp = field_velocity(bp, eps, k, {x.x1, x.x2 + h});
    Vec2 vym = field_velocity(bp, eps, k, {x.x1, x.x2 - h});
    return {(vxp.x1 - vxm.x1) / (2 * h), (vyp.x1 - vym.x1) / (2 * h),
            (vxp.x2 - vxm.x2) / (2 * h), (vyp.x2 - vym.x2) / (2 * h)};
}

}  // namespace

TEST_CASE("velocity reference values") {
    BoundaryPair bp{kCubePlusT, kZero};
    Vec2 vl = field_velocity(bp, 0.3, FieldKind::Left, {0.3, 0.3});
    CHECK(vl.x1 == doctest::Approx(-0.024).epsilon(1e-12));
    CHECK(vl.x2 == doctest::Approx(0.024).epsilon(1e-12));

    Vec2 vr = field_velocity(bp, 0.3, FieldKind::Right, {0.3, 0.1});
    CHECK(vr.x1 == doctest::Approx(-0.384).epsilon(1e-12));
    CHECK(vr.x2 == doctest::Approx(-0.16).epsilon(1e-12));
}

TEST_CASE("right field is the time-reversed left field of the reflected pair") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> xs(-2.0, 2.0);
    for (int i = 0; i < 100; ++i) {
        BoundaryPair bp = random_pair(rng);
        BoundaryPair g{bp.fp.reflected(), bp.fm.reflected()};
        double eps = 0.1 + 0.5 * std::abs(xs(rng));
        Vec2 x{xs(rng), 0.45 * eps * xs(rng)};
        Vec2 r = field_velocity(bp, eps, FieldKind::Right, x);
        Vec2 l = field_velocity(g, eps, FieldKind::Left, {-x.x1, x.x2});
        double sc = 1.0 + std::abs(l.x1) + std::abs(l.x2);
        CHECK(r.x1 == doctest::Approx(l.x1).epsilon(1e-12).scale(sc));
        CHECK(r.x2 == doctest::Approx(-l.x2).epsilon(1e-12).scale(sc));
    }
    // Spot check of the same identity.
    BoundaryPair bp{kCubePlusT, kZero};
    BoundaryPair g{bp.fp.reflected(), bp.fm.reflected()};
    Vec2 l = field_velocity(g, 0.3, FieldKind::Left, {-0.3, 0.1});
    CHECK(l.x1 == doctest::Approx(-0.384).epsilon(1e-12));
    CHECK(l.x2 == doctest::Approx(0.16).epsilon(1e-12));
}

TEST_CASE("analytic Jacobian matches central differences") {
    std::mt19937_64 rng(1234);
    std::uniform_real_distribution<double> xs(-2.0, 2.0);
    for (int i = 0; i < 60; ++i) {
        BoundaryPair bp = random_pair(rng);
        double eps = 0.1 + 0.5 * std::abs(xs(rng));
        Vec2 x{xs(rng), 0.9 * eps * (xs(rng) / 2.0)};
        for (FieldKind k : {FieldKind::Left, FieldKind::Right}) {
            Mat2 ja = field_jacobian(bp, eps, k, x);
            Mat2 jf = fd_jacobian(bp, eps, k, x);
            double sc = norm_inf(ja) + 1.0;
            CHECK(ja.a11 == doctest::Approx(jf.a11).epsilon(1e-6).scale(sc));
            CHECK(ja.a12 == doctest::Approx(jf.a12).epsilon(1e-6).scale(sc));
            CHECK(ja.a21 == doctest::Approx(jf.a21).epsilon(1e-6).scale(sc));
            CHECK(ja.a22 == doctest::Approx(jf.a22).epsilon(1e-6).scale(sc));
        }
    }
}

TEST_CASE("stationarity roots are field zeros on the matching side") {
    BoundaryPair one{kCubePlusT, kZero};
    auto ru = upper_roots(one, 0.3);
    REQUIRE(ru.ok());
    for (double u : {ru.value().ul, ru.value().ur}) {
        CHECK(std::abs(stationarity(one, 0.3, FieldKind::Left, Side::Upper, u)) < 1e-12);
        Vec2 loc = stationary_location(0.3, FieldKind::Left, Side::Upper, u);
        Vec2 v = field_velocity(one, 0.3, FieldKind::Left, loc);
        CHECK(std::abs(v.x1) < 1e-12);
        CHECK(std::abs(v.x2) < 1e-12);
    }

    BoundaryPair sym{kCubePlusT, kNegCube};
    auto rl = lower_roots(sym, 0.3);
    REQUIRE(rl.ok());
    for (double u : {rl.value().ul, rl.value().ur}) {
        CHECK(std::abs(stationarity(sym, 0.3, FieldKind::Right, Side::Lower, u)) < 1e-12);
        Vec2 loc = stationary_location(0.3, FieldKind::Right, Side::Lower, u);
        CHECK(loc.x2 == -0.3);
        Vec2 v = field_velocity(sym, 0.3, FieldKind::Right, loc);
        CHECK(std::abs(v.x1) < 1e-12);
        CHECK(std::abs(v.x2) < 1e-12);
    }
}

TEST_CASE("stationarity derivative matches finite differences") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> xs(-2.0, 2.0);
    for (int i = 0; i < 50; ++i) {
        BoundaryPair bp = random_pair(rng);
        double eps = 0.1 + std::abs(xs(rng));
        double u = xs(rng), h = 1e-6;
        for (FieldKind k : {FieldKind::Left, FieldKind::Right})
            for (Side sd : {Side::Upper, Side::Lower}) {
                double fd = (stationarity(bp, eps, k, sd, u + h) -
                             stationarity(bp, eps, k, sd, u - h)) / (2 * h);
                double an = stationarity_du(bp, eps, k, sd, u);
                CHECK(an == doctest::Approx(fd).epsilon(1e-6).scale(1.0 + std::abs(an)));
            }
    }
}

TEST_CASE("general curvature matches the closed form at pocket roots") {
    BoundaryPair one{kCubePlusT, kZero};
    double eps = 0.3;
    auto ru = upper_roots(one, eps);
    auto kc = kappa_upper_r(one, eps);
    REQUIRE(ru.ok());
    REQUIRE(kc.ok());
    auto kr = kappa_general(one, eps, FieldKind::Left, Side::Upper, ru.value().ur);
    auto kl = kappa_general(one, eps, FieldKind::Left, Side::Upper, ru.value().ul);
    REQUIRE(kr.ok());
    REQUIRE(kl.ok());
    CHECK(kr.value() == doctest::Approx(std::sqrt(150.0)).epsilon(1e-10));
    CHECK(kl.value() == doctest::Approx(-std::sqrt(150.0)).epsilon(1e-10));

    BoundaryPair sym{kCubePlusT, kNegCube};
    auto rl = lower_roots(sym, eps);
    auto kcl = kappa_lower_l(sym, eps);
    REQUIRE(rl.ok());
    REQUIRE(kcl.ok());
    auto kg = kappa_general(sym, eps, FieldKind::Right, Side::Lower, rl.value().ul);
    REQUIRE(kg.ok());
    CHECK(kg.value() == doctest::Approx(kcl.value()).epsilon(1e-10));
}

TEST_CASE("stationary classification across the width sweep") {
    BoundaryPair bp{kCubePlusT, kZero};
    auto cr = criticals(bp);
    REQUIRE(cr.ok());
    double e1 = *cr.value().eps1p;

    auto at = [&](double eps, bool right) -> StationaryPoint {
        auto rr = upper_roots(bp, eps);
        REQUIRE(rr.ok());
        auto sp = classify_stationary(bp, eps, FieldKind::Left, Side::Upper,
                                      right ? rr.value().ur : rr.value().ul);
        REQUIRE(sp.ok());
        return sp.value();
    };

    // Right root: always a saddle.
    for (double eps : {0.29, 0.3, 0.5, 2.0}) {
        StationaryPoint sp = at(eps, true);
        CHECK(sp.type == StationaryType::Saddle);
        CHECK(sp.s > 1.0);
    }
    CHECK(at(0.3, true).s == doctest::Approx(1.0 + 0.3 * std::sqrt(150.0)).epsilon(1e-10));

    // Left root walks node -> improper node -> spiral as eps grows through e1.
    StationaryPoint n = at(0.29, false);
    CHECK(n.type == StationaryType::Node);
    CHECK(n.s == doctest::Approx(-9.4735).epsilon(1e-3));
    StationaryPoint i = at(e1, false);
    CHECK(i.type == StationaryType::ImproperNode);
    CHECK(i.s == doctest::Approx(-8.0).epsilon(1e-12));
    StationaryPoint sp = at(0.3, false);
    CHECK(sp.type == StationaryType::Spiral);
    CHECK(sp.s == doctest::Approx(1.0 - 0.3 * std::sqrt(150.0)).epsilon(1e-10));
}

TEST_CASE("exit direction: forms agree and the slope sits in (0,1) for s > 1") {
    for (double s : {0.5, 1.1, 1.7071, 4.674, 40.0}) {
        StationaryPoint sp;
        sp.s = s;
        double root = std::sqrt(s * s + 8.0 * s);
        double primary = s - 2.0 + root;
        double alternate = 4.0 * (1.0 - 3.0 * s) / (s - 2.0 - root);
        CHECK(primary == doctest::Approx(alternate).epsilon(1e-12));
        Vec2 d = sp.exit_dir();
        double slope = d.x2 / d.x1;
        if (s > 1.0) {
            CHECK(slope > 0.0);
            CHECK(slope < 1.0);
        }
    }
}

TEST_CASE("exit eigenvector annihilates the Jacobian at the saddle") {
    BoundaryPair bp{kCubePlusT, kZero};
    double eps = 0.3;
    auto rr = upper_roots(bp, eps);
    REQUIRE(rr.ok());
    auto spr = classify_stationary(bp, eps, FieldKind::Left, Side::Upper, rr.value().ur);
    REQUIRE(spr.ok());
    const StationaryPoint& sp = spr.value();
    double s = sp.s;
    double lam = 0.5 * (s - std::sqrt(s * s + 8.0 * s));  // normal-form eigenvalue
    Vec2 v = sp.exit_dir();
    Mat2 j = field_jacobian(bp, eps, FieldKind::Left, sp.x);
    double r1 = j.a11 * v.x1 + j.a12 * v.x2 - sp.prefactor * lam * v.x1;
    double r2 = j.a21 * v.x1 + j.a22 * v.x2 - sp.prefactor * lam * v.x2;
    double bound = 1e-8 * norm_inf(j) * (std::abs(v.x1) + std::abs(v.x2));
    CHECK(std::abs(r1) <= bound);
    CHECK(std::abs(r2) <= bound);
}

TEST_CASE("zero-discriminant Jacobians match the closed forms") {
    BoundaryPair bp{kCube, kNegCube};
    double eps = 0.5, k = std::sqrt(0.5), d3 = 2.0;

    // Upper right root at (eps*(1+2k), eps); prefactor +12*d3*k*eps^2.
    double up = eps * (1.0 + 2.0 * k);
    Mat2 ju = field_jacobian(bp, eps, FieldKind::Left, {up, eps});
    double cu = 12.0 * d3 * k * eps * eps;
    CHECK(ju.a11 == doctest::Approx(cu).epsilon(1e-12));
    CHECK(ju.a12 == doctest::Approx(cu * (-2.0 - 3.0 * k)).epsilon(1e-12));
    CHECK(ju.a21 == doctest::Approx(-cu).epsilon(1e-12));
    CHECK(ju.a22 == doctest::Approx(cu * k).epsilon(1e-12));

    // Lower left root at (-eps*(1+2k), -eps). Same normal form up to the
    // orientation of the field; |prefactor| matches the upper closed form.
    double lo = -eps * (1.0 + 2.0 * k);
    Mat2 jl = field_jacobian(bp, eps, FieldKind::Right, {lo, -eps});
    CHECK(std::abs(jl.a11) == doctest::Approx(cu).epsilon(1e-12));
    CHECK(jl.a12 == doctest::Approx(jl.a11 * (-2.0 - 3.0 * k)).epsilon(1e-12));
    CHECK(jl.a21 == doctest::Approx(-jl.a11).epsilon(1e-12));
    CHECK(jl.a22 == doctest::Approx(jl.a11 * k).epsilon(1e-12));

    // Both classify as saddles with eps-independent s = 1 + k.
    for (double e : {0.1, 0.5, 2.0}) {
        auto ru = upper_roots(bp, e);
        REQUIRE(ru.ok());
        auto sp = classify_stationary(bp, e, FieldKind::Left, Side::Upper, ru.value().ur);
        REQUIRE(sp.ok());
        CHECK(sp.value().type == StationaryType::Saddle);
        CHECK(sp.value().s == doctest::Approx(1.0 + k).epsilon(1e-12));
        auto rl = lower_roots(bp, e);
        REQUIRE(rl.ok());
        auto sl = classify_stationary(bp, e, FieldKind::Right, Side::Lower, rl.value().ul);
        REQUIRE(sl.ok());
        CHECK(sl.value().type == StationaryType::Saddle);
        CHECK(sl.value().s == doctest::Approx(1.0 + k).epsilon(1e-12));
    }
}

TEST_CASE("reference curves reduce to the obstruction on the boundary") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> xs(-2.0, 2.0);
    for (int i = 0; i < 50; ++i) {
        BoundaryPair bp = random_pair(rng);
        double eps = 0.1 + std::abs(xs(rng)), u = xs(rng);
        double dp = two_eps_Dp(bp, eps, u);
        double sc = 1.0 + std::abs(dp);
        CHECK(X0_value(bp, eps, {u, eps}) == doctest::Approx(-dp).epsilon(1e-12).scale(sc));
        CHECK(X1_value(bp, {u, eps}) == doctest::Approx(dp).epsilon(1e-12).scale(sc));
        CHECK(Xinf_value(bp, eps, {u, eps}) ==
              doctest::Approx(eps * dp).epsilon(1e-12).scale(sc * eps));

        // X1 equals the interior upper obstruction everywhere.
        Vec2 x{xs(rng), xs(rng)};
        double want = two_x2_Dp(bp, x);
        CHECK(X1_value(bp, x) == doctest::Approx(want).epsilon(1e-12).scale(1.0 + std::abs(want)));
    }
}

TEST_CASE("reference value for the interior turning curve") {
    BoundaryPair bp{kCubePlusT, kZero};
    CHECK(X1_value(bp, {0.3, 0.3}) == doctest::Approx(-0.08).epsilon(1e-12));
}
