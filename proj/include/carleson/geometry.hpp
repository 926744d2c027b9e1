#pragma once

// Dyadic decomposition of the unit disc.
//
// Level-n arcs are the half-open angular intervals [2 pi k 2^-n, 2 pi (k+1) 2^-n).
// The Carleson square over arc (n,k) is {arg z in arc, |z| >= 1 - 2^-n} and its top
// half additionally has |z| < 1 - 2^-n-1. With these conventions the top halves tile
// the disc exactly, so every point (and every atom) belongs to exactly one of them.
// Areas are normalized: A(disc) = 1.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <set>
#include <utility>
#include <variant>
#include <vector>

#include "carleson/errors.hpp"

namespace carleson {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct DyadicIndex {
    int level = 0;
    std::int64_t position = 0;

    friend auto operator<=>(const DyadicIndex&, const DyadicIndex&) = default;

    bool valid() const noexcept {
        return level >= 0 && level < 62 && position >= 0 && position < (std::int64_t{1} << level);
    }
};

inline std::pair<DyadicIndex, DyadicIndex> dyadic_children(DyadicIndex idx) {
    if (!idx.valid()) throw InvalidArgument("invalid dyadic index");
    return {{idx.level + 1, 2 * idx.position}, {idx.level + 1, 2 * idx.position + 1}};
}

inline DyadicIndex dyadic_parent(DyadicIndex idx) {
    if (!idx.valid() || idx.level == 0) throw InvalidArgument("level-0 index has no parent");
    return {idx.level - 1, idx.position / 2};
}

inline double arc_width(int level) { return kTwoPi * std::ldexp(1.0, -level); }

// Inner radius of the Carleson square, 1 - l(I)/2pi.
inline double square_inner_radius(int level) { return 1.0 - std::ldexp(1.0, -level); }

// Outer radius of the top half, 1 - l(I)/4pi.
inline double tophalf_outer_radius(int level) { return 1.0 - std::ldexp(1.0, -level - 1); }

inline double carleson_square_area(int level) {
    const double a = std::ldexp(1.0, -level);
    return a * a * (2.0 - a);
}

inline double tophalf_area(int level) {
    const double a = std::ldexp(1.0, -level);
    return a * std::ldexp(1.0, -level - 1) * (2.0 - 3.0 * std::ldexp(1.0, -level - 1));
}

// Fraction of a full turn, in [0, 1). Multiplying by 2^n is exact, so arc positions
// at different levels are always consistent with the tree structure.
inline double turn_fraction(std::complex<double> z) {
    double a = std::atan2(z.imag(), z.real());
    if (a < 0.0) a += kTwoPi;
    double t = a / kTwoPi;
    if (t >= 1.0) t = 0.0;
    return t;
}

inline std::int64_t arc_position(double turn, int level) {
    const double scaled = std::ldexp(turn, level);
    const auto k = static_cast<std::int64_t>(std::floor(scaled));
    return std::clamp<std::int64_t>(k, 0, (std::int64_t{1} << level) - 1);
}

// Regions -------------------------------------------------------------------

struct WholeDisc {};
struct CarlesonSquare { DyadicIndex index; };
struct TopHalf { DyadicIndex index; };
// {zeta : |zeta - center| < ratio (1 - |center|)}
struct HyperbolicDisc { std::complex<double> center; double ratio; };
// {zeta : |zeta - center| < ratio (1 - |zeta|)}
struct TildeDisc { std::complex<double> center; double ratio; };
// {inner <= |z| < outer, arg z in [theta_lo, theta_hi) modulo 2 pi}; used for the
// non-dyadic squares S(h, theta) of the Bekolle-Bonami condition.
struct AnnularSector { double inner; double outer; double theta_lo; double theta_hi; };

using Region = std::variant<WholeDisc, CarlesonSquare, TopHalf, HyperbolicDisc, TildeDisc, AnnularSector>;

// Bekolle-Bonami square {1 - h < r < 1, |t - theta| < pi h}.
inline AnnularSector bb_square(double h, double theta) {
    if (!(h > 0.0 && h <= 1.0)) throw InvalidArgument("square size h must lie in (0, 1]");
    return {1.0 - h, 1.0, theta - std::numbers::pi * h, theta + std::numbers::pi * h};
}

namespace detail {

inline void require_in_disc(std::complex<double> z) {
    if (!(std::abs(z) < 1.0)) throw InvalidArgument("point must lie in the open unit disc");
}

inline void require_ratio(double r) {
    if (!(r > 0.0 && r < 1.0)) throw InvalidArgument("disc ratio must lie in (0, 1)");
}

inline bool in_arc(DyadicIndex idx, std::complex<double> z) {
    return arc_position(turn_fraction(z), idx.level) == idx.position;
}

}  // namespace detail

inline double region_area(const Region& region) {
    struct Visitor {
        double operator()(const WholeDisc&) const { return 1.0; }
        double operator()(const CarlesonSquare& q) const {
            if (!q.index.valid()) throw InvalidArgument("invalid dyadic index");
            return carleson_square_area(q.index.level);
        }
        double operator()(const TopHalf& t) const {
            if (!t.index.valid()) throw InvalidArgument("invalid dyadic index");
            return tophalf_area(t.index.level);
        }
        double operator()(const HyperbolicDisc& d) const {
            detail::require_in_disc(d.center);
            detail::require_ratio(d.ratio);
            const double s = d.ratio * (1.0 - std::abs(d.center));
            return s * s;
        }
        double operator()(const TildeDisc&) const {
            throw InvalidArgument("tilde discs have no closed-form area; integrate the indicator instead");
        }
        double operator()(const AnnularSector& s) const {
            const double span = std::min(s.theta_hi - s.theta_lo, kTwoPi);
            return (s.outer * s.outer - s.inner * s.inner) * span / kTwoPi;
        }
    };
    return std::visit(Visitor{}, region);
}

inline bool contains(const Region& region, std::complex<double> z) {
    detail::require_in_disc(z);
    const double rho = std::abs(z);
    struct Visitor {
        std::complex<double> z;
        double rho;
        bool operator()(const WholeDisc&) const { return true; }
        bool operator()(const CarlesonSquare& q) const {
            return rho >= square_inner_radius(q.index.level) && detail::in_arc(q.index, z);
        }
        bool operator()(const TopHalf& t) const {
            return rho >= square_inner_radius(t.index.level) && rho < tophalf_outer_radius(t.index.level) &&
                   detail::in_arc(t.index, z);
        }
        bool operator()(const HyperbolicDisc& d) const {
            return std::abs(z - d.center) < d.ratio * (1.0 - std::abs(d.center));
        }
        bool operator()(const TildeDisc& d) const { return std::abs(z - d.center) < d.ratio * (1.0 - rho); }
        bool operator()(const AnnularSector& s) const {
            if (rho < s.inner || rho >= s.outer) return false;
            if (s.theta_hi - s.theta_lo >= kTwoPi) return true;
            double t = std::atan2(z.imag(), z.real()) - s.theta_lo;
            t -= kTwoPi * std::floor(t / kTwoPi);
            return t < s.theta_hi - s.theta_lo;
        }
    };
    return std::visit(Visitor{z, rho}, region);
}

inline DyadicIndex locate_tophalf(std::complex<double> z) {
    detail::require_in_disc(z);
    const double rho = std::abs(z);
    int level = 0;
    while (!(rho < tophalf_outer_radius(level))) ++level;
    return {level, arc_position(turn_fraction(z), level)};
}

// All top halves of level <= max_depth in (level, position) order, plus the
// residual annulus {|z| >= 1 - 2^-(max_depth+1)} they leave uncovered.
struct TopHalfPartition {
    int max_depth = 0;
    std::vector<DyadicIndex> cells;
    double residual_inner_radius = 0.0;
    double residual_area = 0.0;
};

inline TopHalfPartition tophalf_partition(int max_depth) {
    if (max_depth < 0 || max_depth > 40) throw InvalidArgument("max depth must lie in [0, 40]");
    TopHalfPartition p;
    p.max_depth = max_depth;
    p.cells.reserve((std::size_t{2} << max_depth) - 1);
    for (int n = 0; n <= max_depth; ++n)
        for (std::int64_t k = 0; k < (std::int64_t{1} << n); ++k) p.cells.push_back({n, k});
    p.residual_inner_radius = tophalf_outer_radius(max_depth);
    const double eps = std::ldexp(1.0, -max_depth - 1);
    p.residual_area = eps * (2.0 - eps);
    return p;
}

// Position of cell (n,k) in tophalf_partition order.
inline std::size_t partition_slot(DyadicIndex idx) {
    return static_cast<std::size_t>((std::int64_t{1} << idx.level) - 1 + idx.position);
}

// Top halves meeting the closed disc |zeta - lambda| <= r (1 - |lambda|). Every
// returned cell has 1 - |zeta| within a factor (1+r)/(1-r) of 1 - |lambda|, so
// the count depends only on r.
inline std::vector<DyadicIndex> tophalf_cover_of_region(const HyperbolicDisc& disc) {
    detail::require_in_disc(disc.center);
    detail::require_ratio(disc.ratio);
    const double c = std::abs(disc.center);
    const double radius = disc.ratio * (1.0 - c);
    const double rho_lo = std::max(0.0, c - radius);
    const double rho_hi = c + radius;

    const bool all_angles = radius >= c;
    const double phi = all_angles ? 0.0 : std::atan2(disc.center.imag(), disc.center.real());
    const double half = all_angles ? std::numbers::pi : std::asin(radius / c);

    std::set<DyadicIndex> out;
    for (int n = 0; square_inner_radius(n) <= rho_hi; ++n) {
        if (tophalf_outer_radius(n) < rho_lo) continue;
        const std::int64_t count = std::int64_t{1} << n;
        if (all_angles || 2.0 * half >= kTwoPi) {
            for (std::int64_t k = 0; k < count; ++k) out.insert({n, k});
            continue;
        }
        const double lo = std::ldexp((phi - half) / kTwoPi, n);
        const double hi = std::ldexp((phi + half) / kTwoPi, n);
        const auto k_lo = static_cast<std::int64_t>(std::floor(lo));
        const auto k_hi = static_cast<std::int64_t>(std::floor(hi));
        for (std::int64_t k = k_lo; k <= k_hi; ++k) out.insert({n, ((k % count) + count) % count});
    }
    return {out.begin(), out.end()};
}

}  // namespace carleson
