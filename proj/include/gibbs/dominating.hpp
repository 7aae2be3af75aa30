#pragma once

#include <cstdint>
#include <vector>

#include "gibbs/geometry.hpp"
#include "gibbs/model.hpp"

namespace gibbs {

// The dominating marked Poisson process Phi*: points with i.i.d. uniform
// thinning marks u and lazily derived pair marks r_{x,y}. Cell contents are
// pure functions of (seed, cell), so restricting to an aligned subwindow
// reproduces the direct sample bitwise.

struct DominatingConfiguration {
    PointPattern pattern;
    std::vector<double> u_marks;     // parallel to pattern.points
    std::uint64_t seed = 0;
    CellLayout cell_layout;
    Window window;                   // cell-aligned

    std::size_t size() const { return pattern.size(); }
};

DominatingConfiguration sample_dominating(const Window& window, const ReferenceMeasure& reference,
                                          std::uint64_t seed, double cell_side);

DominatingConfiguration restrict(const DominatingConfiguration& config, const Window& sub);

// Deterministic pair marks keyed by ordered id pairs; pair_mark(a,b) and
// pair_mark(b,a) are distinct uniforms.
class PairMarkOracle {
public:
    explicit PairMarkOracle(std::uint64_t seed) : seed_(seed) {}

    double pair_mark(const PointId& a, const PointId& b) const;
    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_;
};

} // namespace gibbs
