#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "gibbs/dominating.hpp"
#include "gibbs/geometry.hpp"
#include "gibbs/model.hpp"

namespace gibbs {

struct PartitionEstimate {
    double value = 1.0;
    double stderr_ = 0.0;
    std::uint64_t samples = 0;
};

enum class EstimatorMode { common_random_numbers_mc, exact_expansion };

struct RatioEstimator {
    EstimatorMode mode = EstimatorMode::common_random_numbers_mc;
    std::uint64_t mc_samples = 500;
    int n_max = 12;
    std::uint64_t integral_samples = 100000;
    double tail_tol = 1e-9;
    // Optional locality cutoff for ratio estimation in large windows: fresh
    // draws are restricted to B_local_radius(x). 0 disables the cutoff.
    double local_radius = 0.0;
};

RatioEstimator validate_estimator(const RatioEstimator& est);

// kappa-tilde(draws, phi): sequential product of Papangelou intensities, the
// density weight of a fresh pattern against conditioning points phi.
double sequential_weight(const InteractionModel& m, const std::vector<MarkedPoint>& draws,
                         const PointPattern& phi);

// prod_{i<j}(1-pi(x_i,x_j)) * prod_{i, y in psi}(1-pi(x_i,y)); equals
// sequential_weight for pair-potential families.
double noedge_weight(const InteractionModel& m, const PointPattern& phi, const PointPattern& psi);

// Z_Q(psi) by Monte Carlo over Poisson draws or by the truncated Poisson
// expansion with uniform-MC inner integrals.
PartitionEstimate estimate_partition(const InteractionModel& m, const Window& window,
                                     const BoundaryConditions& psi, const RatioEstimator& est,
                                     std::uint64_t seed);

// ---------------------------------------------------------------------------
// Ratio estimation on a sampling region
// ---------------------------------------------------------------------------

// Sampling region for fresh Poisson draws: a bounding box plus an acceptance
// predicate (suffix-of-ordering cuts, explored-region exclusions).
struct SamplingRegion {
    Window box;
    std::function<bool(const MarkedPoint&)> accept;  // nullptr = accept all

    bool accepts(const MarkedPoint& p) const { return !accept || accept(p); }
};

// Optional per-point intensity thinning rho(y) in [0,1] applied to fresh
// draws (reduced reference measure rho * lambda).
using IntensityThinner = std::function<double(const MarkedPoint&)>;

// CRN estimate of Z_D(phi ∪ {x}) / Z_D(phi) over the region D. Identical
// Poisson draws feed numerator and denominator; the result lies in [0,1]
// pathwise for repulsive models. Returns 0 when the denominator estimate
// is 0 (convention 0/0 := 0).
double ratio_on_domain(const InteractionModel& m, const SamplingRegion& region,
                       const PointPattern& phi, const MarkedPoint& x, const RatioEstimator& est,
                       std::uint64_t seed, const IntensityThinner& rho = nullptr);

// Public ratio op: D = the part of the window after x in the shell ordering.
double estimate_ratio(const InteractionModel& m, const Window& window, const PointPattern& psi,
                      const MarkedPoint& x, const RatioEstimator& est, std::uint64_t seed);

// Per-decision estimator seed, a function of (base seed, point id) so coupled
// runs reproduce decisions point-locally.
std::uint64_t decision_seed(std::uint64_t base, const PointId& id);

} // namespace gibbs
