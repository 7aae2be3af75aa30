#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gibbs/errors.hpp"

namespace gibbs {

constexpr int kMaxDim = 4;

// Spatial position with up to kMaxDim coordinates.
struct Vec {
    std::array<double, kMaxDim> c{};
    int d = 0;

    static Vec of(std::initializer_list<double> xs) {
        Vec v;
        v.d = static_cast<int>(xs.size());
        int i = 0;
        for (double x : xs) v.c[i++] = x;
        return v;
    }
    double operator[](int i) const { return c[i]; }
    double& operator[](int i) { return c[i]; }
};

double distance(const Vec& a, const Vec& b);
double distance_sq(const Vec& a, const Vec& b);

// 128-bit identity token, stable across window restriction.
struct PointId {
    std::uint64_t hi = 0;
    std::uint64_t lo = 0;

    friend bool operator==(const PointId& a, const PointId& b) {
        return a.hi == b.hi && a.lo == b.lo;
    }
    friend bool operator!=(const PointId& a, const PointId& b) { return !(a == b); }
    friend bool operator<(const PointId& a, const PointId& b) {
        return a.hi != b.hi ? a.hi < b.hi : a.lo < b.lo;
    }
};

std::string id_to_hex(const PointId& id);
PointId id_from_hex(const std::string& hex);

struct PointIdHash {
    std::size_t operator()(const PointId& id) const {
        return static_cast<std::size_t>(id.hi * 0x9e3779b97f4a7c15ull ^ id.lo);
    }
};

struct MarkedPoint {
    Vec position;
    std::optional<double> mark;
    PointId id;
};

struct PointPattern {
    std::vector<MarkedPoint> points;
    int dimension = 0;

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
};

// Axis-aligned box given by center and per-axis side lengths.
struct Window {
    Vec center;
    Vec side;

    int dimension() const { return center.d; }
    double lo(int k) const { return center[k] - 0.5 * side[k]; }
    double hi(int k) const { return center[k] + 0.5 * side[k]; }
    double volume() const;
    bool contains(const Vec& p) const;

    // Centered cube [-n/2, n/2]^d.
    static Window cube(int d, double n);
};

Window validate_window(const Window& w);

// ---------------------------------------------------------------------------
// Cell grid
// ---------------------------------------------------------------------------

// Global lattice of cells with spacing `side`, anchored at the origin:
// cell i covers [i*side, (i+1)*side) on each axis. The anchoring makes cell
// contents independent of any particular window.
struct CellCoord {
    std::array<std::int64_t, kMaxDim> idx{};
    int d = 0;

    friend bool operator==(const CellCoord& a, const CellCoord& b) {
        if (a.d != b.d) return false;
        for (int k = 0; k < a.d; ++k)
            if (a.idx[k] != b.idx[k]) return false;
        return true;
    }
};

struct CellLayout {
    double side = 1.0;
    CellCoord cell_of(const Vec& p) const;
    Vec cell_lo(const CellCoord& c) const;
    // L-infinity shell index of a cell; cells of shell <= m tile the centered
    // cube of half-width m*side.
    std::int64_t shell(const CellCoord& c) const;
    std::uint64_t cell_key(std::uint64_t seed, const CellCoord& c) const;
};

// Snap a window outward so that its faces lie on cell boundaries.
Window snap_to_cells(const Window& w, double cell_side);
bool is_cell_aligned(const Window& w, double cell_side, double tol = 1e-9);

// ---------------------------------------------------------------------------
// Orderings
// ---------------------------------------------------------------------------

// Cube-wise ordering key: cells of a window enumerated in raster order,
// positions lexicographic within a cell, id as the final tiebreak.
struct OrderKey {
    std::int64_t cell_rank = 0;
    Vec position;
    PointId id;
};

OrderKey cube_ordering_key(const MarkedPoint& p, const Window& w, double cell_side);
bool order_key_less(const OrderKey& a, const OrderKey& b);

// Global shell-major ordering used by the thinning algorithms: cells ordered
// by decreasing L-infinity shell (outermost first), lexicographic cell coords
// within a shell, positions within a cell, id last. Window-independent, so
// nested windows order their common points identically.
struct ShellKey {
    std::int64_t shell = 0;  // larger shell = earlier
    CellCoord cell;
    Vec position;
    PointId id;
};

ShellKey shell_order_key(const MarkedPoint& p, const CellLayout& layout);
bool shell_key_less(const ShellKey& a, const ShellKey& b);

// Bounding box of {y : shell_key(y) >= key(x)} intersected with `window`:
// everything after x lies in the centered cube of half-width shell(x)*side.
Window shell_suffix_box(const ShellKey& x, const CellLayout& layout, const Window& window);

// ---------------------------------------------------------------------------
// Grid index for neighbor queries
// ---------------------------------------------------------------------------

class GridIndex {
public:
    GridIndex(const PointPattern& pattern, double cell_side);

    // Points of the indexed pattern at distance <= radius from center,
    // excluding any point with the same id as center.
    std::vector<std::size_t> ball_indices(const MarkedPoint& center, double radius) const;

    const PointPattern& pattern() const { return *pattern_; }

private:
    const PointPattern* pattern_;
    CellLayout layout_;
    // cell hash -> point indices
    std::vector<std::pair<std::uint64_t, std::vector<std::uint32_t>>> buckets_;
    const std::vector<std::uint32_t>* bucket(std::uint64_t key) const;
};

PointPattern ball_neighbors(const GridIndex& index, const PointPattern& pattern,
                            const MarkedPoint& center, double radius);

double spatial_diameter(const PointPattern& pattern);

} // namespace gibbs
