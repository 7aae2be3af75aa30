#include "gibbs/graphs.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gibbs/rng.hpp"

namespace gibbs {

namespace {

// Marks below this never beat pi; pairs with pi < kPiCut are treated as
// deterministic non-edges so unbounded kernels stay O(n * local degree).
constexpr double kPiCut = 1e-14;

std::vector<std::size_t> shell_sorted_order(const PointPattern& pattern,
                                            const CellLayout& layout) {
    std::vector<ShellKey> keys;
    keys.reserve(pattern.size());
    for (const auto& p : pattern.points) keys.push_back(shell_order_key(p, layout));
    std::vector<std::size_t> order(pattern.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return shell_key_less(keys[a], keys[b]); });
    return order;
}

} // namespace

void RcmGraph::build_index() {
    index.clear();
    for (std::uint32_t i = 0; i < vertices.size(); ++i) index[vertices[i].id] = i;
    if (index.size() != vertices.size())
        throw validation_error("duplicate vertex ids in graph");
}

ClusterPartition::ClusterPartition(const RcmGraph& graph) : graph_(&graph) {
    parent_.resize(graph.vertices.size());
    std::iota(parent_.begin(), parent_.end(), 0u);
    for (const auto& e : graph.edges) {
        auto ia = graph.index.find(e.a);
        auto ib = graph.index.find(e.b);
        if (ia == graph.index.end() || ib == graph.index.end())
            throw validation_error("edge endpoint missing from vertex set");
        std::uint32_t ra = find(ia->second), rb = find(ib->second);
        if (ra != rb) parent_[ra] = rb;
    }
}

std::uint32_t ClusterPartition::find(std::uint32_t v) const {
    while (parent_[v] != v) {
        parent_[v] = parent_[parent_[v]];
        v = parent_[v];
    }
    return v;
}

PointId ClusterPartition::cluster_of(const PointId& id) const {
    auto it = graph_->index.find(id);
    if (it == graph_->index.end()) throw membership_error("id not a graph vertex");
    return graph_->vertices[find(it->second)].id;
}

bool ClusterPartition::same_cluster(const PointId& a, const PointId& b) const {
    auto ia = graph_->index.find(a);
    auto ib = graph_->index.find(b);
    if (ia == graph_->index.end() || ib == graph_->index.end()) return false;
    return find(ia->second) == find(ib->second);
}

std::size_t ClusterPartition::cluster_count() const {
    std::size_t n = 0;
    for (std::uint32_t v = 0; v < parent_.size(); ++v)
        if (find(v) == v) ++n;
    return n;
}

std::size_t ClusterPartition::largest_cluster() const {
    std::vector<std::size_t> counts(parent_.size(), 0);
    std::size_t best = 0;
    for (std::uint32_t v = 0; v < parent_.size(); ++v) best = std::max(best, ++counts[find(v)]);
    return best;
}

RcmGraph build_relation_graph(const InteractionModel& m, const PointPattern& pattern,
                              const BoundaryConditions& psi) {
    if (!has_relation(m))
        throw unsupported_error("relation graph requires a finite-range relation");
    RcmGraph g;
    g.origin = GraphOrigin::direct;
    g.vertices = pattern.points;
    for (const auto& b : psi.points.points) g.vertices.push_back(b);
    g.build_index();
    for (std::size_t i = 0; i < g.vertices.size(); ++i)
        for (std::size_t j = i + 1; j < g.vertices.size(); ++j)
            if (relation_holds(m, g.vertices[i], g.vertices[j]))
                g.edges.push_back({g.vertices[i].id, g.vertices[j].id, true});
    return g;
}

RcmGraph realize_rcm(const InteractionModel& m, const DominatingConfiguration& config,
                     const BoundaryConditions& psi, const PairMarkOracle& oracle,
                     const ShellOrdering& ordering) {
    if (!has_pair_potential(m)) throw unsupported_error("realize_rcm requires a pair potential");
    RcmGraph g;
    g.origin = GraphOrigin::direct;
    g.vertices = config.pattern.points;
    for (const auto& b : psi.points.points) g.vertices.push_back(b);
    g.build_index();

    const double r_cut = pi_support_radius(m, kPiCut);
    GridIndex grid(config.pattern, std::max(ordering.layout.side, 1e-9));
    std::vector<ShellKey> keys;
    keys.reserve(config.pattern.size());
    for (const auto& p : config.pattern.points)
        keys.push_back(shell_order_key(p, ordering.layout));

    // Edges between Poisson points: the later point's mark sequence decides.
    for (std::size_t i = 0; i < config.pattern.size(); ++i) {
        const auto& x = config.pattern.points[i];
        for (std::size_t j : grid.ball_indices(x, r_cut)) {
            if (!shell_key_less(keys[j], keys[i])) continue;  // need y <_iota x
            const auto& y = config.pattern.points[j];
            double pi = connection_prob(m, x, y);
            if (pi < kPiCut) continue;
            if (oracle.pair_mark(x.id, y.id) <= pi) g.edges.push_back({x.id, y.id, true});
        }
        // Boundary points precede everything in the ordering.
        for (const auto& b : psi.points.points) {
            if (distance(x.position, b.position) > r_cut) continue;
            double pi = connection_prob(m, x, b);
            if (pi < kPiCut) continue;
            if (oracle.pair_mark(x.id, b.id) <= pi) g.edges.push_back({x.id, b.id, true});
        }
    }
    return g;
}

// ---------------------------------------------------------------------------
// Exploration-based construction (cluster schedule)
// ---------------------------------------------------------------------------

std::pair<RcmGraph, ExplorationTrace> explore_rcm(const InteractionModel& m,
                                                  const DominatingConfiguration& config,
                                                  const PointPattern& nu,
                                                  const BoundaryConditions& psi,
                                                  const PairMarkOracle& oracle,
                                                  const ShellOrdering& ordering) {
    if (!has_pair_potential(m)) throw unsupported_error("explore_rcm requires a pair potential");
    RcmGraph g;
    g.origin = GraphOrigin::exploration;
    g.vertices = config.pattern.points;
    for (const auto& b : psi.points.points) g.vertices.push_back(b);
    g.build_index();
    ExplorationTrace trace;

    const auto& pts = config.pattern.points;
    const std::size_t n = pts.size();
    const double r_cut = pi_support_radius(m, kPiCut);

    std::vector<ShellKey> keys;
    keys.reserve(n);
    for (const auto& p : pts) keys.push_back(shell_order_key(p, ordering.layout));
    std::vector<std::size_t> order = shell_sorted_order(config.pattern, ordering.layout);
    std::vector<std::size_t> rank(n);
    for (std::size_t r = 0; r < n; ++r) rank[order[r]] = r;

    std::vector<char> explored(n, 0);
    std::size_t n_explored = 0;
    std::size_t sweep_cursor = 0;  // first unexplored position in `order`

    // Original boundary points, with membership in the original nu tracked so
    // edges to consumed boundary members are not re-tested.
    struct BoundaryPt {
        const MarkedPoint* p;
        bool in_nu = false;
    };
    std::vector<BoundaryPt> boundary;
    boundary.reserve(psi.points.size());
    for (const auto& b : psi.points.points) boundary.push_back({&b, false});
    for (auto& b : boundary)
        for (const auto& v : nu.points)
            if (v.id == b.p->id) b.in_nu = true;

    // Current nu set, as indices into pts (for layer nus) or external points
    // (for the original nu).
    struct NuMember {
        const MarkedPoint* p;
        bool is_vertex;  // ids that live in the graph (phi or psi members)
    };
    std::vector<NuMember> cur_nu;
    cur_nu.reserve(nu.points.size());
    for (const auto& v : nu.points) cur_nu.push_back({&v, g.has_vertex(v.id)});

    GridIndex grid(config.pattern, std::max(ordering.layout.side, 1e-9));

    std::vector<std::size_t> prev_layer;  // indices of V'_k within pts; empty = nu-original
    bool use_original_nu = true;
    std::size_t step_index = 0;
    std::optional<PointId> reference;

    while (n_explored < n) {
        ++step_index;
        ExplorationStep step;
        step.index = step_index;
        if (use_original_nu) {
            for (const auto& v : cur_nu) step.nu.push_back(v.p->id);
        } else {
            for (std::size_t i : prev_layer) step.nu.push_back(pts[i].id);
        }

        // V-test: unexplored points with a direct edge to the current nu.
        std::vector<std::size_t> layer;
        std::vector<std::vector<PointId>> layer_conn;
        auto test_candidate = [&](std::size_t cand) {
            std::vector<PointId> conn;
            if (use_original_nu) {
                for (const auto& v : cur_nu) {
                    if (distance(pts[cand].position, v.p->position) > r_cut) continue;
                    double pi = connection_prob(m, pts[cand], *v.p);
                    if (pi < kPiCut) continue;
                    if (oracle.pair_mark(pts[cand].id, v.p->id) <= pi) conn.push_back(v.p->id);
                }
            } else {
                for (std::size_t j : prev_layer) {
                    if (distance(pts[cand].position, pts[j].position) > r_cut) continue;
                    double pi = connection_prob(m, pts[cand], pts[j]);
                    if (pi < kPiCut) continue;
                    if (oracle.pair_mark(pts[cand].id, pts[j].id) <= pi) conn.push_back(pts[j].id);
                }
            }
            return conn;
        };

        // Candidate set: unexplored points within r_cut of some nu member.
        std::vector<std::size_t> candidates;
        {
            std::vector<char> seen(n, 0);
            auto add_near = [&](const MarkedPoint& center) {
                for (std::size_t j : grid.ball_indices(center, r_cut)) {
                    if (explored[j] || seen[j]) continue;
                    seen[j] = 1;
                    candidates.push_back(j);
                }
            };
            if (use_original_nu) {
                for (const auto& v : cur_nu) add_near(*v.p);
            } else {
                for (std::size_t j : prev_layer) add_near(pts[j]);
            }
        }
        std::sort(candidates.begin(), candidates.end(),
                  [&](std::size_t a, std::size_t b) { return rank[a] < rank[b]; });

        for (std::size_t cand : candidates) {
            auto conn = test_candidate(cand);
            if (conn.empty()) continue;
            layer.push_back(cand);
            layer_conn.push_back(std::move(conn));
        }

        if (!layer.empty()) {
            // Case 1 -- successful exploration: record the layer's induced
            // edges (within the layer, to the previous layer, and to the
            // surviving original boundary).
            step.step_case = StepCase::successful;
            for (std::size_t a = 0; a < layer.size(); ++a) {
                const auto& x = pts[layer[a]];
                // edges to connected nu members that are graph vertices
                for (const auto& cid : layer_conn[a])
                    if (g.has_vertex(cid)) g.edges.push_back({x.id, cid, true});
                // edges within the layer (later point's mark decides)
                for (std::size_t b = 0; b < a; ++b) {
                    const auto& y = pts[layer[b]];
                    if (distance(x.position, y.position) > r_cut) continue;
                    double pi = connection_prob(m, x, y);
                    if (pi < kPiCut) continue;
                    bool x_later = rank[layer[a]] > rank[layer[b]];
                    const auto& later = x_later ? x : y;
                    const auto& earlier = x_later ? y : x;
                    if (oracle.pair_mark(later.id, earlier.id) <= pi)
                        g.edges.push_back({later.id, earlier.id, true});
                }
                // edges to surviving original boundary (psi minus consumed nu)
                for (const auto& b : boundary) {
                    if (b.in_nu) continue;
                    if (distance(x.position, b.p->position) > r_cut) continue;
                    double pi = connection_prob(m, x, *b.p);
                    if (pi < kPiCut) continue;
                    if (oracle.pair_mark(x.id, b.p->id) <= pi)
                        g.edges.push_back({x.id, b.p->id, true});
                }
                explored[layer[a]] = 1;
                ++n_explored;
                step.explored.push_back(x.id);
            }
            step.connected_nu = std::move(layer_conn);
            step.reference = reference;
            prev_layer = std::move(layer);
            use_original_nu = false;
        } else {
            // Case 2 -- failed exploration: start a new cluster at the
            // iota-smallest unexplored point.
            step.step_case = StepCase::failed;
            while (sweep_cursor < n && explored[order[sweep_cursor]]) ++sweep_cursor;
            if (sweep_cursor >= n) {
                trace.steps.push_back(std::move(step));
                break;
            }
            std::size_t root = order[sweep_cursor];
            const auto& x = pts[root];
            for (const auto& b : boundary) {
                if (b.in_nu) continue;
                if (distance(x.position, b.p->position) > r_cut) continue;
                double pi = connection_prob(m, x, *b.p);
                if (pi < kPiCut) continue;
                if (oracle.pair_mark(x.id, b.p->id) <= pi)
                    g.edges.push_back({x.id, b.p->id, true});
            }
            explored[root] = 1;
            ++n_explored;
            step.explored.push_back(x.id);
            step.connected_nu.emplace_back();
            reference = x.id;
            step.reference = reference;
            prev_layer = {root};
            use_original_nu = false;
        }
        trace.steps.push_back(std::move(step));
    }
    return {std::move(g), std::move(trace)};
}

bool connection_event(const RcmGraph& graph, const ClusterPartition& clusters, const Window& A,
                      const PointPattern& B) {
    for (const auto& v : graph.vertices) {
        if (!A.contains(v.position)) continue;
        for (const auto& b : B.points)
            if (clusters.same_cluster(v.id, b.id)) return true;
    }
    return false;
}

std::vector<TailPoint> diameter_tail(const InteractionModel& m, const Window& window,
                                     const std::vector<double>& r_grid, std::uint64_t reps,
                                     std::uint64_t seed) {
    validate_model(m);
    validate_window(window);
    for (std::size_t i = 1; i < r_grid.size(); ++i)
        if (r_grid[i] <= r_grid[i - 1]) throw validation_error("r_grid must be increasing");
    double min_side = window.side[0];
    for (int k = 1; k < window.dimension(); ++k) min_side = std::min(min_side, window.side[k]);
    if (!r_grid.empty() && r_grid.back() >= 0.5 * min_side)
        throw boundary_error("r_max must be below half the window side");

    std::vector<std::uint64_t> exceed(r_grid.size(), 0);
    const double cell = default_cell_side(m);
    for (std::uint64_t rep = 0; rep < reps; ++rep) {
        const std::uint64_t rs = replication_seed(seed, rep);
        DominatingConfiguration config = sample_dominating(window, m.reference, rs, cell);
        // plant the origin point at the window center
        MarkedPoint origin;
        origin.position = window.center;
        if (m.reference.has_marks())
            origin.mark = m.reference.mark_from_unit(to_unit(prf64(rs, 0x07a1)));
        origin.id = PointId{0xc000000000000000ull, rep};
        config.pattern.points.push_back(origin);
        config.u_marks.push_back(0.0);

        RcmGraph graph;
        BoundaryConditions none;
        none.points.dimension = m.dimension;
        if (has_pair_potential(m)) {
            PairMarkOracle oracle(rs);
            graph = realize_rcm(m, config, none, oracle, ShellOrdering{config.cell_layout});
        } else {
            graph = build_relation_graph(m, config.pattern, none);
        }
        ClusterPartition clusters(graph);
        PointPattern comp;
        comp.dimension = m.dimension;
        for (const auto& v : graph.vertices)
            if (clusters.same_cluster(v.id, origin.id)) comp.points.push_back(v);
        double diam = comp.size() <= 1 ? 0.0 : spatial_diameter(comp);
        for (std::size_t i = 0; i < r_grid.size(); ++i)
            if (diam > r_grid[i]) ++exceed[i];
    }

    std::vector<TailPoint> out;
    for (std::size_t i = 0; i < r_grid.size(); ++i) {
        TailPoint tp;
        tp.r = r_grid[i];
        tp.p_hat = reps ? static_cast<double>(exceed[i]) / static_cast<double>(reps) : 0.0;
        tp.stderr_ = reps ? std::sqrt(tp.p_hat * (1.0 - tp.p_hat) / static_cast<double>(reps)) : 0.0;
        tp.reps = reps;
        out.push_back(tp);
    }
    return out;
}

} // namespace gibbs
