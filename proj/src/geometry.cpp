#include "gibbs/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <unordered_map>

#include "gibbs/rng.hpp"

namespace gibbs {

double distance_sq(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (int k = 0; k < a.d; ++k) {
        double diff = a[k] - b[k];
        s += diff * diff;
    }
    return s;
}

double distance(const Vec& a, const Vec& b) { return std::sqrt(distance_sq(a, b)); }

std::string id_to_hex(const PointId& id) {
    char buf[33];
    std::snprintf(buf, sizeof(buf), "%016llx%016llx",
                  static_cast<unsigned long long>(id.hi),
                  static_cast<unsigned long long>(id.lo));
    return std::string(buf);
}

PointId id_from_hex(const std::string& hex) {
    if (hex.size() != 32) throw validation_error("id must be 32 hex digits, got '" + hex + "'");
    PointId id;
    id.hi = std::stoull(hex.substr(0, 16), nullptr, 16);
    id.lo = std::stoull(hex.substr(16, 16), nullptr, 16);
    return id;
}

double Window::volume() const {
    double v = 1.0;
    for (int k = 0; k < dimension(); ++k) v *= side[k];
    return v;
}

bool Window::contains(const Vec& p) const {
    for (int k = 0; k < dimension(); ++k)
        if (p[k] < lo(k) || p[k] >= hi(k)) return false;
    return true;
}

Window Window::cube(int d, double n) {
    Window w;
    w.center.d = d;
    w.side.d = d;
    for (int k = 0; k < d; ++k) {
        w.center[k] = 0.0;
        w.side[k] = n;
    }
    return w;
}

Window validate_window(const Window& w) {
    if (w.center.d <= 0 || w.center.d > kMaxDim)
        throw dimension_error("window dimension must be in [1," + std::to_string(kMaxDim) + "]");
    if (w.side.d != w.center.d) throw dimension_error("window side/center dimension mismatch");
    for (int k = 0; k < w.dimension(); ++k)
        if (!(w.side[k] > 0.0)) throw validation_error("window sides must be positive");
    return w;
}

CellCoord CellLayout::cell_of(const Vec& p) const {
    CellCoord c;
    c.d = p.d;
    for (int k = 0; k < p.d; ++k)
        c.idx[k] = static_cast<std::int64_t>(std::floor(p[k] / side));
    return c;
}

Vec CellLayout::cell_lo(const CellCoord& c) const {
    Vec v;
    v.d = c.d;
    for (int k = 0; k < c.d; ++k) v[k] = static_cast<double>(c.idx[k]) * side;
    return v;
}

std::int64_t CellLayout::shell(const CellCoord& c) const {
    std::int64_t s = 0;
    for (int k = 0; k < c.d; ++k) {
        std::int64_t i = c.idx[k];
        std::int64_t sk = i >= 0 ? i + 1 : -i;
        s = std::max(s, sk);
    }
    return s;
}

std::uint64_t CellLayout::cell_key(std::uint64_t seed, const CellCoord& c) const {
    std::uint64_t h = splitmix64(seed ^ 0x5c33d9f7a1b2c3d4ull);
    for (int k = 0; k < c.d; ++k) h = mix_in(h, static_cast<std::uint64_t>(c.idx[k]));
    return h;
}

Window snap_to_cells(const Window& w, double cell_side) {
    validate_window(w);
    if (!(cell_side > 0.0)) throw validation_error("cell side must be positive");
    Window out = w;
    for (int k = 0; k < w.dimension(); ++k) {
        double lo = std::floor(w.lo(k) / cell_side) * cell_side;
        double hi = std::ceil(w.hi(k) / cell_side) * cell_side;
        if (hi <= lo) hi = lo + cell_side;
        out.center[k] = 0.5 * (lo + hi);
        out.side[k] = hi - lo;
    }
    return out;
}

bool is_cell_aligned(const Window& w, double cell_side, double tol) {
    for (int k = 0; k < w.dimension(); ++k) {
        double lo = w.lo(k) / cell_side;
        double hi = w.hi(k) / cell_side;
        if (std::abs(lo - std::round(lo)) > tol) return false;
        if (std::abs(hi - std::round(hi)) > tol) return false;
    }
    return true;
}

OrderKey cube_ordering_key(const MarkedPoint& p, const Window& w, double cell_side) {
    validate_window(w);
    if (p.position.d != w.dimension()) throw dimension_error("point/window dimension mismatch");
    for (int k = 0; k < w.dimension(); ++k)
        if (p.position[k] < w.lo(k) || p.position[k] > w.hi(k))
            throw domain_error("point outside window in cube_ordering_key");
    CellLayout layout{cell_side};
    // Raster rank over the snapped window's cell box.
    Window snapped = snap_to_cells(w, cell_side);
    std::int64_t rank = 0;
    for (int k = 0; k < w.dimension(); ++k) {
        std::int64_t lo_idx = static_cast<std::int64_t>(std::floor(snapped.lo(k) / cell_side + 0.5));
        std::int64_t n_cells = static_cast<std::int64_t>(std::round(snapped.side[k] / cell_side));
        std::int64_t i = static_cast<std::int64_t>(std::floor(p.position[k] / cell_side)) - lo_idx;
        i = std::clamp<std::int64_t>(i, 0, n_cells - 1);
        rank = rank * n_cells + i;
    }
    return OrderKey{rank, p.position, p.id};
}

bool order_key_less(const OrderKey& a, const OrderKey& b) {
    if (a.cell_rank != b.cell_rank) return a.cell_rank < b.cell_rank;
    for (int k = 0; k < a.position.d; ++k) {
        if (a.position[k] < b.position[k]) return true;
        if (a.position[k] > b.position[k]) return false;
    }
    return a.id < b.id;
}

ShellKey shell_order_key(const MarkedPoint& p, const CellLayout& layout) {
    ShellKey k;
    k.cell = layout.cell_of(p.position);
    k.shell = layout.shell(k.cell);
    k.position = p.position;
    k.id = p.id;
    return k;
}

bool shell_key_less(const ShellKey& a, const ShellKey& b) {
    if (a.shell != b.shell) return a.shell > b.shell;  // outer shells first
    for (int k = 0; k < a.cell.d; ++k)
        if (a.cell.idx[k] != b.cell.idx[k]) return a.cell.idx[k] < b.cell.idx[k];
    for (int k = 0; k < a.position.d; ++k) {
        if (a.position[k] < b.position[k]) return true;
        if (a.position[k] > b.position[k]) return false;
    }
    return a.id < b.id;
}

Window shell_suffix_box(const ShellKey& x, const CellLayout& layout, const Window& window) {
    const double half = static_cast<double>(x.shell) * layout.side;
    Window out = window;
    for (int k = 0; k < window.dimension(); ++k) {
        double lo = std::max(window.lo(k), -half);
        double hi = std::min(window.hi(k), half);
        if (hi <= lo) {  // empty; collapse to a zero-ish box at lo
            hi = lo;
        }
        out.center[k] = 0.5 * (lo + hi);
        out.side[k] = std::max(hi - lo, 0.0);
    }
    return out;
}

GridIndex::GridIndex(const PointPattern& pattern, double cell_side) : pattern_(&pattern) {
    if (!(cell_side > 0.0)) throw validation_error("grid cell side must be positive");
    layout_.side = cell_side;
    std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> map;
    for (std::size_t i = 0; i < pattern.points.size(); ++i) {
        const auto& p = pattern.points[i];
        if (p.position.d != pattern.dimension)
            throw dimension_error("pattern point dimension mismatch");
        map[layout_.cell_key(0, layout_.cell_of(p.position))].push_back(
            static_cast<std::uint32_t>(i));
    }
    buckets_.assign(map.begin(), map.end());
    std::sort(buckets_.begin(), buckets_.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
}

const std::vector<std::uint32_t>* GridIndex::bucket(std::uint64_t key) const {
    auto it = std::lower_bound(buckets_.begin(), buckets_.end(), key,
                               [](const auto& b, std::uint64_t k) { return b.first < k; });
    if (it == buckets_.end() || it->first != key) return nullptr;
    return &it->second;
}

std::vector<std::size_t> GridIndex::ball_indices(const MarkedPoint& center, double radius) const {
    if (center.position.d != pattern_->dimension)
        throw dimension_error("query point dimension mismatch");
    if (radius < 0.0) throw validation_error("radius must be non-negative");
    std::vector<std::size_t> out;
    const int d = pattern_->dimension;
    std::array<std::int64_t, kMaxDim> lo{}, hi{}, cur{};
    for (int k = 0; k < d; ++k) {
        lo[k] = static_cast<std::int64_t>(std::floor((center.position[k] - radius) / layout_.side));
        hi[k] = static_cast<std::int64_t>(std::floor((center.position[k] + radius) / layout_.side));
        cur[k] = lo[k];
    }
    double r2 = radius * radius;
    for (;;) {
        CellCoord c;
        c.d = d;
        c.idx = cur;
        if (const auto* b = bucket(layout_.cell_key(0, c))) {
            for (std::uint32_t i : *b) {
                const auto& p = pattern_->points[i];
                if (p.id == center.id) continue;
                if (distance_sq(p.position, center.position) <= r2) out.push_back(i);
            }
        }
        int k = 0;
        for (; k < d; ++k) {
            if (++cur[k] <= hi[k]) break;
            cur[k] = lo[k];
        }
        if (k == d) break;
    }
    std::sort(out.begin(), out.end());
    return out;
}

PointPattern ball_neighbors(const GridIndex& index, const PointPattern& pattern,
                            const MarkedPoint& center, double radius) {
    PointPattern out;
    out.dimension = pattern.dimension;
    for (std::size_t i : index.ball_indices(center, radius)) out.points.push_back(pattern.points[i]);
    return out;
}

double spatial_diameter(const PointPattern& pattern) {
    if (pattern.empty()) throw empty_input_error("spatial_diameter of empty pattern");
    double best = 0.0;
    for (std::size_t i = 0; i < pattern.size(); ++i)
        for (std::size_t j = i + 1; j < pattern.size(); ++j)
            best = std::max(best, distance_sq(pattern.points[i].position, pattern.points[j].position));
    return std::sqrt(best);
}

} // namespace gibbs
