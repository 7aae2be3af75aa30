#pragma once

#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "gibbs/dominating.hpp"
#include "gibbs/geometry.hpp"
#include "gibbs/model.hpp"

namespace gibbs {

// ---------------------------------------------------------------------------
// Graphs on configurations
// ---------------------------------------------------------------------------

struct RcmEdge {
    PointId a;
    PointId b;
    // true when the consumed pair mark was r_{a,b} (a's sequence indexed by
    // b); false for r_{b,a}. Kept for debugging mark conventions.
    bool mark_from_a = true;
};

enum class GraphOrigin { direct, exploration };

struct RcmGraph {
    std::vector<MarkedPoint> vertices;  // Poisson points followed by boundary
    std::vector<RcmEdge> edges;
    GraphOrigin origin = GraphOrigin::direct;

    std::unordered_map<PointId, std::uint32_t, PointIdHash> index;

    void build_index();
    bool has_vertex(const PointId& id) const { return index.count(id) > 0; }
};

// Union-find partition over graph vertices.
class ClusterPartition {
public:
    explicit ClusterPartition(const RcmGraph& graph);

    PointId cluster_of(const PointId& id) const;
    bool same_cluster(const PointId& a, const PointId& b) const;
    std::size_t cluster_count() const;
    // size of the largest cluster (vertex count)
    std::size_t largest_cluster() const;

private:
    const RcmGraph* graph_;
    mutable std::vector<std::uint32_t> parent_;
    std::uint32_t find(std::uint32_t v) const;
};

// Shell-major ordering context shared by graph constructions and thinnings.
struct ShellOrdering {
    CellLayout layout;
};

// Deterministic relation graph: edge iff relation_holds.
RcmGraph build_relation_graph(const InteractionModel& m, const PointPattern& pattern,
                              const BoundaryConditions& psi);

// RCM realization from pair marks: edge between x in phi and iota-earlier y
// iff r_{x,y} <= pi(x,y). Boundary points come first in the ordering.
RcmGraph realize_rcm(const InteractionModel& m, const DominatingConfiguration& config,
                     const BoundaryConditions& psi, const PairMarkOracle& oracle,
                     const ShellOrdering& ordering);

// ---------------------------------------------------------------------------
// Exploration-based construction
// ---------------------------------------------------------------------------

enum class StepCase { successful, failed };

struct ExplorationStep {
    std::size_t index = 0;                 // step number k (1-based)
    std::vector<PointId> nu;               // nu_k used for the step
    std::vector<PointId> explored;         // V'_k in visiting order
    std::optional<PointId> reference;      // x_k after the step (none = -inf)
    StepCase step_case = StepCase::failed;
    // For each explored point, the nu-members it has a direct edge to.
    std::vector<std::vector<PointId>> connected_nu;
};

struct ExplorationTrace {
    std::vector<ExplorationStep> steps;
};

// Cluster-based exploration of the RCM (nu_1 = nu, nu_{k+1} = V'_k): grows
// the clusters reachable from nu first, then sweeps remaining clusters in
// the order of their iota-smallest point. Returns the accumulated graph
// (distributed as the RCM) and the full trace.
std::pair<RcmGraph, ExplorationTrace> explore_rcm(const InteractionModel& m,
                                                  const DominatingConfiguration& config,
                                                  const PointPattern& nu,
                                                  const BoundaryConditions& psi,
                                                  const PairMarkOracle& oracle,
                                                  const ShellOrdering& ordering);

// true iff some vertex located in A shares a cluster with some point of B.
bool connection_event(const RcmGraph& graph, const ClusterPartition& clusters, const Window& A,
                      const PointPattern& B);

// ---------------------------------------------------------------------------
// Percolation diagnostics
// ---------------------------------------------------------------------------

struct TailPoint {
    double r = 0.0;
    double p_hat = 0.0;
    double stderr_ = 0.0;
    std::uint64_t reps = 0;
};

// P(diam(C(x, Gamma_x)) > r) with x planted at the window center (Palm
// version); per replication one Poisson sample plus one graph.
std::vector<TailPoint> diameter_tail(const InteractionModel& m, const Window& window,
                                     const std::vector<double>& r_grid, std::uint64_t reps,
                                     std::uint64_t seed);

} // namespace gibbs
