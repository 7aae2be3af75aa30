#include "gibbs/dominating.hpp"

#include <cmath>

#include "gibbs/rng.hpp"

namespace gibbs {

namespace {

// Stream tags keep the draws for different per-point attributes independent.
enum : std::uint64_t {
    kTagCount = 0x01,
    kTagPoint = 0x02,
    kTagIdHi = 0x03,
    kTagIdLo = 0x04,
    kTagU = 0x05,
    kTagPair = 0x06,
};

} // namespace

DominatingConfiguration sample_dominating(const Window& window, const ReferenceMeasure& reference,
                                          std::uint64_t seed, double cell_side) {
    validate_reference(reference);
    Window w = snap_to_cells(window, cell_side);
    const int d = w.dimension();

    DominatingConfiguration out;
    out.seed = seed;
    out.cell_layout.side = cell_side;
    out.window = w;
    out.pattern.dimension = d;

    const double cell_vol = std::pow(cell_side, d);
    const double lambda_cell = reference.activity * cell_vol;

    std::array<std::int64_t, kMaxDim> lo{}, hi{}, cur{};
    for (int k = 0; k < d; ++k) {
        lo[k] = static_cast<std::int64_t>(std::llround(w.lo(k) / cell_side));
        hi[k] = static_cast<std::int64_t>(std::llround(w.hi(k) / cell_side)) - 1;
        cur[k] = lo[k];
        if (hi[k] < lo[k]) return out;
    }

    for (;;) {
        CellCoord c;
        c.d = d;
        c.idx = cur;
        const std::uint64_t ckey = out.cell_layout.cell_key(seed, c);
        CounterStream count_stream(mix_in(ckey, kTagCount));
        const std::uint64_t n = count_stream.next_poisson(lambda_cell);
        const Vec cl = out.cell_layout.cell_lo(c);
        for (std::uint64_t j = 0; j < n; ++j) {
            const std::uint64_t pkey = prf64(ckey, kTagPoint, j);
            CounterStream ps(pkey);
            MarkedPoint p;
            p.position.d = d;
            for (int k = 0; k < d; ++k) p.position[k] = cl[k] + ps.next_unit() * cell_side;
            if (reference.has_marks()) p.mark = reference.mark_from_unit(ps.next_unit());
            p.id.hi = prf64(ckey, kTagIdHi, j) & 0x7fffffffffffffffull;  // Poisson namespace
            p.id.lo = prf64(ckey, kTagIdLo, j);
            out.pattern.points.push_back(p);
            out.u_marks.push_back(to_unit(prf64(seed, p.id.hi, p.id.lo, kTagU)));
        }
        int k = 0;
        for (; k < d; ++k) {
            if (++cur[k] <= hi[k]) break;
            cur[k] = lo[k];
        }
        if (k == d) break;
    }
    return out;
}

DominatingConfiguration restrict(const DominatingConfiguration& config, const Window& sub) {
    const double s = config.cell_layout.side;
    if (!is_cell_aligned(sub, s)) throw alignment_error("subwindow not aligned to the cell grid");
    for (int k = 0; k < sub.dimension(); ++k)
        if (sub.lo(k) < config.window.lo(k) - 1e-9 || sub.hi(k) > config.window.hi(k) + 1e-9)
            throw alignment_error("subwindow not contained in the configuration window");

    DominatingConfiguration out;
    out.seed = config.seed;
    out.cell_layout = config.cell_layout;
    out.window = sub;
    out.pattern.dimension = config.pattern.dimension;
    for (std::size_t i = 0; i < config.pattern.size(); ++i) {
        const auto& p = config.pattern.points[i];
        // membership by cell so that restriction matches direct generation
        CellCoord c = config.cell_layout.cell_of(p.position);
        bool inside = true;
        for (int k = 0; k < sub.dimension(); ++k) {
            double cell_lo = static_cast<double>(c.idx[k]) * s;
            if (cell_lo < sub.lo(k) - 1e-9 || cell_lo > sub.hi(k) - s + 1e-9) inside = false;
        }
        if (!inside) continue;
        out.pattern.points.push_back(p);
        out.u_marks.push_back(config.u_marks[i]);
    }
    return out;
}

double PairMarkOracle::pair_mark(const PointId& a, const PointId& b) const {
    if (a == b) throw self_pair_error("pair mark requested for identical ids");
    return to_unit(prf64(seed_, a.hi ^ splitmix64(a.lo), b.hi ^ splitmix64(b.lo), 0x06));
}

} // namespace gibbs
