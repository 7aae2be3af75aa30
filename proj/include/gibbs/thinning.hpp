#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "gibbs/dominating.hpp"
#include "gibbs/graphs.hpp"
#include "gibbs/model.hpp"
#include "gibbs/partition.hpp"

namespace gibbs {

// ---------------------------------------------------------------------------
// Results
// ---------------------------------------------------------------------------

struct ThinningDecision {
    PointId id;
    double retention = 0.0;
    double u = 0.0;
    bool kept = false;
    std::size_t step = 0;
};

struct ThinningResult {
    PointPattern kept;
    std::vector<ThinningDecision> decisions;
    // Points explored while boundary-dependent information was being consumed
    // (clusters connected to B / nu), and their cluster representatives.
    std::vector<PointId> touched_points;
    std::vector<PointId> touched_clusters;

    bool is_touched(const PointId& id) const;
};

struct CouplingPair {
    ThinningResult result_a;
    ThinningResult result_b;
    PointPattern boundary_delta;
};

// ---------------------------------------------------------------------------
// Embeddings and couplings
// ---------------------------------------------------------------------------

// Standard Poisson embedding: visit points in the shell ordering; keep x when
// u_x <= kappa(x, psi ∪ kept) * Z-ratio over the remaining domain.
ThinningResult standard_embedding(const InteractionModel& m, const Window& window,
                                  const BoundaryConditions& psi,
                                  const DominatingConfiguration& config,
                                  const RatioEstimator& est, std::uint64_t seed);

// RCM embedding: realize the RCM, then visit points in order; a point with an
// edge to psi or to a previously kept point is removed outright, otherwise it
// is kept with the bare Z-ratio (the kappa / prod(1-pi) cancellation of the
// retention probability is applied analytically).
ThinningResult rcm_embedding(const InteractionModel& m, const Window& window,
                             const BoundaryConditions& psi, const DominatingConfiguration& config,
                             const PairMarkOracle& oracle, const RatioEstimator& est,
                             std::uint64_t seed);

// Cluster-based disagreement coupling for local interactions: explore the
// relation clusters reachable from B first, thinning layer by layer, then
// sweep the remaining clusters in the order of their iota-smallest point.
// When B has no neighboring points in the window the schedule degenerates and
// the run delegates to the standard embedding (pathwise identical).
// `force_cascade` keeps the cluster schedule even for empty B so nested runs
// stay comparable.
ThinningResult cluster_coupled_thinning(const InteractionModel& m, const Window& window,
                                        const PointPattern& B, const BoundaryConditions& psi,
                                        const DominatingConfiguration& config,
                                        const RatioEstimator& est, std::uint64_t seed,
                                        bool force_cascade = false);

// Cluster-based disagreement coupling for the RCM: interleaves the
// exploration-based graph construction with two-stage thinning (directly
// connected sets via the rho-thinned partition expectations, bulk points via
// the RCM retention at reduced reference intensity).
ThinningResult rcm_cluster_coupled(const InteractionModel& m, const Window& window,
                                   const PointPattern& nu, const BoundaryConditions& psi,
                                   const DominatingConfiguration& config,
                                   const PairMarkOracle& oracle, const RatioEstimator& est,
                                   std::uint64_t seed);

// Thinning pass over an already-explored graph/trace (the exploration
// schedule is decision-independent, so it can be replayed).
ThinningResult rcm_cluster_replay(const InteractionModel& m, const Window& window,
                                  const RcmGraph& graph, const ExplorationTrace& trace,
                                  const PointPattern& nu, const BoundaryConditions& psi,
                                  const DominatingConfiguration& config, const RatioEstimator& est,
                                  std::uint64_t seed);

// Two runs over one dominating configuration with boundary conditions psi_a
// and psi_b; B / nu defaults to the symmetric difference.
CouplingPair coupled_pair_local(const InteractionModel& m, const Window& window,
                                const BoundaryConditions& psi_a, const BoundaryConditions& psi_b,
                                const DominatingConfiguration& config, const RatioEstimator& est,
                                std::uint64_t seed);

CouplingPair coupled_pair_rcm(const InteractionModel& m, const Window& window,
                              const BoundaryConditions& psi_a, const BoundaryConditions& psi_b,
                              const DominatingConfiguration& config, const PairMarkOracle& oracle,
                              const RatioEstimator& est, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Nested-window construction
// ---------------------------------------------------------------------------

enum class NestedFlavor { auto_pick, local, rcm };

struct NestedSample {
    ThinningResult inner_result;
    ThinningResult outer_result;
    bool agreement = false;
    bool no_connection = false;
    std::size_t separating_points = 0;  // |Poisson points in outer \ inner|
};

// One dominating configuration on `outer`; cluster-coupled thinning on
// `inner` seeded from the separating points, and on `outer` seeded from
// nothing. Reports pathwise agreement on `probe` and whether the probe's
// points are disconnected from the separating set.
NestedSample nested_window_sample(const InteractionModel& m, const Window& inner,
                                  const Window& outer, const Window& probe,
                                  const BoundaryConditions& psi, const RatioEstimator& est,
                                  std::uint64_t seed, double cell_side,
                                  NestedFlavor flavor = NestedFlavor::auto_pick);

PointPattern pattern_difference(const PointPattern& a, const PointPattern& b);
PointPattern symmetric_difference(const PointPattern& a, const PointPattern& b);

} // namespace gibbs
