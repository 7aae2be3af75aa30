#include "gibbs/thinning.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include "gibbs/rng.hpp"

namespace gibbs {

namespace {

constexpr double kPiCut = 1e-14;

using IdSet = std::unordered_set<PointId, PointIdHash>;

struct OrderedPoints {
    std::vector<std::size_t> order;  // pattern indices sorted by shell key
    std::vector<ShellKey> keys;      // per pattern index
};

OrderedPoints order_points(const DominatingConfiguration& config) {
    OrderedPoints op;
    op.keys.reserve(config.pattern.size());
    for (const auto& p : config.pattern.points)
        op.keys.push_back(shell_order_key(p, config.cell_layout));
    op.order.resize(config.pattern.size());
    std::iota(op.order.begin(), op.order.end(), std::size_t{0});
    std::sort(op.order.begin(), op.order.end(), [&](std::size_t a, std::size_t b) {
        return shell_key_less(op.keys[a], op.keys[b]);
    });
    return op;
}

SamplingRegion suffix_region(const ShellKey& kx, const CellLayout& layout, const Window& window) {
    SamplingRegion r;
    r.box = shell_suffix_box(kx, layout, window);
    r.accept = [kx, layout](const MarkedPoint& p) {
        return shell_key_less(kx, shell_order_key(p, layout));
    };
    return r;
}

SamplingRegion whole_window_region(const Window& window) {
    SamplingRegion r;
    r.box = window;
    r.accept = nullptr;
    return r;
}

void sort_ids(std::vector<PointId>& ids) { std::sort(ids.begin(), ids.end()); }

} // namespace

bool ThinningResult::is_touched(const PointId& id) const {
    return std::binary_search(touched_points.begin(), touched_points.end(), id);
}

// ---------------------------------------------------------------------------
// Standard Poisson embedding
// ---------------------------------------------------------------------------

ThinningResult standard_embedding(const InteractionModel& m, const Window& window,
                                  const BoundaryConditions& psi,
                                  const DominatingConfiguration& config,
                                  const RatioEstimator& est, std::uint64_t seed) {
    validate_model(m);
    validate_estimator(est);
    const auto op = order_points(config);
    ThinningResult res;
    res.kept.dimension = config.pattern.dimension;
    PointPattern cond = psi.points;
    cond.dimension = config.pattern.dimension;

    for (std::size_t pos = 0; pos < op.order.size(); ++pos) {
        const std::size_t idx = op.order[pos];
        const MarkedPoint& x = config.pattern.points[idx];
        const double u = config.u_marks[idx];
        const double kappa = papangelou(m, x, cond);
        double p = 0.0;
        if (kappa > 0.0) {
            SamplingRegion region = suffix_region(op.keys[idx], config.cell_layout, window);
            const double ratio =
                ratio_on_domain(m, region, cond, x, est, decision_seed(seed, x.id));
            p = kappa * ratio;
        }
        const bool keep = u <= p;
        if (keep) {
            res.kept.points.push_back(x);
            cond.points.push_back(x);
        }
        res.decisions.push_back({x.id, p, u, keep, pos});
    }
    return res;
}

// ---------------------------------------------------------------------------
// RCM embedding
// ---------------------------------------------------------------------------

namespace {

std::unordered_map<PointId, std::vector<PointId>, PointIdHash> adjacency(const RcmGraph& g) {
    std::unordered_map<PointId, std::vector<PointId>, PointIdHash> adj;
    for (const auto& e : g.edges) {
        adj[e.a].push_back(e.b);
        adj[e.b].push_back(e.a);
    }
    return adj;
}

} // namespace

ThinningResult rcm_embedding(const InteractionModel& m, const Window& window,
                             const BoundaryConditions& psi, const DominatingConfiguration& config,
                             const PairMarkOracle& oracle, const RatioEstimator& est,
                             std::uint64_t seed) {
    validate_model(m);
    validate_estimator(est);
    if (!has_pair_potential(m)) throw unsupported_error("rcm_embedding requires a pair potential");

    const ShellOrdering ordering{config.cell_layout};
    RcmGraph graph = realize_rcm(m, config, psi, oracle, ordering);
    auto adj = adjacency(graph);

    IdSet blocking;  // psi ∪ kept-so-far
    for (const auto& b : psi.points.points) blocking.insert(b.id);

    const auto op = order_points(config);
    ThinningResult res;
    res.kept.dimension = config.pattern.dimension;
    PointPattern cond = psi.points;
    cond.dimension = config.pattern.dimension;

    for (std::size_t pos = 0; pos < op.order.size(); ++pos) {
        const std::size_t idx = op.order[pos];
        const MarkedPoint& x = config.pattern.points[idx];
        const double u = config.u_marks[idx];
        bool killed = false;
        if (auto it = adj.find(x.id); it != adj.end())
            for (const auto& nb : it->second)
                if (blocking.count(nb)) {
                    killed = true;
                    break;
                }
        double p = 0.0;
        if (!killed) {
            SamplingRegion region = suffix_region(op.keys[idx], config.cell_layout, window);
            p = ratio_on_domain(m, region, cond, x, est, decision_seed(seed, x.id));
        }
        const bool keep = u <= p;
        if (keep) {
            res.kept.points.push_back(x);
            cond.points.push_back(x);
            blocking.insert(x.id);
        }
        res.decisions.push_back({x.id, p, u, keep, pos});
    }
    return res;
}

// ---------------------------------------------------------------------------
// Cluster-based disagreement coupling, local interactions
// ---------------------------------------------------------------------------

namespace {

// Region bookkeeping for the cluster schedule: the explored set is a union of
// relation neighborhoods of explored points (plus N(B) once the first layer
// has been formed) and prefix cuts from failed steps.
class ExploredRegion {
public:
    ExploredRegion(const InteractionModel& m, const PointPattern& B, const CellLayout& layout)
        : m_(&m), b_points_(&B), layout_(layout) {}

    void activate_b_region() { b_active_ = true; }
    void add_explored(const MarkedPoint* p) { explored_.push_back(p); }
    void set_prefix(const ShellKey& k) { prefix_ = k; }
    std::size_t explored_count() const { return explored_.size(); }

    // Membership at a given snapshot (explored count at step start).
    bool contains(const MarkedPoint& y, std::size_t snapshot) const {
        if (prefix_ && !shell_key_less(*prefix_, shell_order_key(y, layout_))) return true;
        if (b_active_)
            for (const auto& b : b_points_->points)
                if (relation_holds(*m_, y, b)) return true;
        for (std::size_t i = 0; i < snapshot && i < explored_.size(); ++i)
            if (relation_holds(*m_, y, *explored_[i])) return true;
        return false;
    }

private:
    const InteractionModel* m_;
    const PointPattern* b_points_;
    CellLayout layout_;
    bool b_active_ = false;
    std::vector<const MarkedPoint*> explored_;
    std::optional<ShellKey> prefix_;
};

} // namespace

ThinningResult cluster_coupled_thinning(const InteractionModel& m, const Window& window,
                                        const PointPattern& B, const BoundaryConditions& psi,
                                        const DominatingConfiguration& config,
                                        const RatioEstimator& est, std::uint64_t seed,
                                        bool force_cascade) {
    validate_model(m);
    validate_estimator(est);
    if (!has_relation(m))
        throw unsupported_error("cluster_coupled_thinning requires a finite-range relation");

    const auto& pts = config.pattern.points;
    const std::size_t n = pts.size();
    const auto op = order_points(config);
    std::vector<std::size_t> rank(n);
    for (std::size_t r = 0; r < n; ++r) rank[op.order[r]] = r;

    // First layer: points related to B.
    std::vector<std::size_t> first_layer;
    for (std::size_t r = 0; r < n; ++r) {
        const std::size_t idx = op.order[r];
        for (const auto& b : B.points)
            if (relation_holds(m, pts[idx], b)) {
                first_layer.push_back(idx);
                break;
            }
    }
    if (first_layer.empty() && !force_cascade)
        return standard_embedding(m, window, psi, config, est, seed);

    ThinningResult res;
    res.kept.dimension = config.pattern.dimension;
    PointPattern cond = psi.points;
    cond.dimension = config.pattern.dimension;

    ExploredRegion region(m, B, config.cell_layout);
    std::vector<char> explored(n, 0);
    std::size_t n_explored = 0;
    std::size_t sweep_cursor = 0;
    std::size_t step_index = 0;
    bool in_b_phase = true;

    GridIndex grid(config.pattern, std::max(config.cell_layout.side, 1e-9));
    const auto rel_range = relation_range(m);

    // Thin one layer: members visited in iota order; the layer region (the
    // neighborhoods of `frontier`, or of B for the first layer) is ordered
    // before the rest of the remaining domain.
    auto thin_layer = [&](const std::vector<std::size_t>& layer,
                          const std::vector<const MarkedPoint*>& frontier,
                          std::size_t snapshot) {
        for (std::size_t idx : layer) {
            const MarkedPoint& x = pts[idx];
            const double u = config.u_marks[idx];
            const double kappa = papangelou(m, x, cond);
            double p = 0.0;
            if (kappa > 0.0) {
                const ShellKey kx = op.keys[idx];
                SamplingRegion sr;
                sr.box = window;
                sr.accept = [&, kx, snapshot](const MarkedPoint& y) {
                    if (region.contains(y, snapshot)) return false;
                    bool in_layer_region = false;
                    for (const auto* f : frontier)
                        if (relation_holds(m, y, *f)) {
                            in_layer_region = true;
                            break;
                        }
                    if (in_layer_region)
                        return shell_key_less(kx, shell_order_key(y, config.cell_layout));
                    return true;
                };
                const double ratio =
                    ratio_on_domain(m, sr, cond, x, est, decision_seed(seed, x.id));
                p = kappa * ratio;
            }
            const bool keep = u <= p;
            if (keep) {
                res.kept.points.push_back(x);
                cond.points.push_back(x);
            }
            res.decisions.push_back({x.id, p, u, keep, step_index});
            if (in_b_phase) res.touched_points.push_back(x.id);
        }
    };

    // B phase: first layer from N(B), then breadth-first growth.
    std::vector<const MarkedPoint*> frontier;
    std::vector<std::size_t> layer = first_layer;
    {
        std::vector<const MarkedPoint*> b_frontier;
        for (const auto& b : B.points) b_frontier.push_back(&b);
        frontier = b_frontier;
    }

    auto next_layer_from = [&](const std::vector<std::size_t>& prev) {
        std::vector<std::size_t> next;
        std::vector<char> seen(n, 0);
        for (std::size_t j : prev) {
            double radius = rel_range ? *rel_range : 0.0;
            std::vector<std::size_t> cands;
            if (rel_range) {
                cands = grid.ball_indices(pts[j], radius);
            } else {
                cands.resize(n);
                std::iota(cands.begin(), cands.end(), std::size_t{0});
            }
            for (std::size_t c : cands) {
                if (explored[c] || seen[c]) continue;
                if (!relation_holds(m, pts[c], pts[j])) continue;
                seen[c] = 1;
                next.push_back(c);
            }
        }
        std::sort(next.begin(), next.end(),
                  [&](std::size_t a, std::size_t b) { return rank[a] < rank[b]; });
        return next;
    };

    while (true) {
        while (!layer.empty()) {
            ++step_index;
            const std::size_t snapshot = region.explored_count();
            thin_layer(layer, frontier, snapshot);
            std::vector<std::size_t> just = layer;
            frontier.clear();
            for (std::size_t idx : just) {
                explored[idx] = 1;
                ++n_explored;
                region.add_explored(&pts[idx]);
                frontier.push_back(&pts[idx]);
            }
            region.activate_b_region();
            layer = next_layer_from(just);
        }
        region.activate_b_region();
        in_b_phase = false;
        if (n_explored == n) break;

        // Case 2: new cluster at the iota-smallest unexplored point.
        while (sweep_cursor < n && explored[op.order[sweep_cursor]]) ++sweep_cursor;
        const std::size_t root = op.order[sweep_cursor];
        ++step_index;
        const MarkedPoint& x = pts[root];
        const double u = config.u_marks[root];
        region.set_prefix(op.keys[root]);
        const std::size_t snapshot = region.explored_count();
        const double kappa = papangelou(m, x, cond);
        double p = 0.0;
        if (kappa > 0.0) {
            const ShellKey kx = op.keys[root];
            SamplingRegion sr;
            sr.box = shell_suffix_box(kx, config.cell_layout, window);
            sr.accept = [&, kx, snapshot](const MarkedPoint& y) {
                if (!shell_key_less(kx, shell_order_key(y, config.cell_layout))) return false;
                return !region.contains(y, snapshot);
            };
            const double ratio = ratio_on_domain(m, sr, cond, x, est, decision_seed(seed, x.id));
            p = kappa * ratio;
        }
        const bool keep = u <= p;
        if (keep) {
            res.kept.points.push_back(x);
            cond.points.push_back(x);
        }
        res.decisions.push_back({x.id, p, u, keep, step_index});
        explored[root] = 1;
        ++n_explored;
        region.add_explored(&pts[root]);
        frontier = {&pts[root]};
        layer = next_layer_from({root});
    }

    sort_ids(res.touched_points);
    if (!res.touched_points.empty()) {
        RcmGraph rel = build_relation_graph(m, config.pattern, BoundaryConditions{});
        ClusterPartition clusters(rel);
        IdSet reps;
        for (const auto& id : res.touched_points) reps.insert(clusters.cluster_of(id));
        res.touched_clusters.assign(reps.begin(), reps.end());
        sort_ids(res.touched_clusters);
    }
    return res;
}

// ---------------------------------------------------------------------------
// RCM cluster-based coupling
// ---------------------------------------------------------------------------

namespace {

// Z-bar ratio of eq-style expectations for the directly-connected stage:
// indicator weights over the rho^x_nu-thinned Poisson with fresh RCM edges,
// shared uniforms for numerator and denominator (pair-indexed so evaluation
// order cannot perturb consumption).
double zbar_ratio(const InteractionModel& m, const SamplingRegion& sregion,
                  const CellLayout& layout, const MarkedPoint& x,
                  const std::vector<const MarkedPoint*>& nu_members,
                  const std::vector<const MarkedPoint*>& phi_all,
                  const std::vector<const MarkedPoint*>& phi_minus_nu, const RatioEstimator& est,
                  std::uint64_t seed) {
    const double r_cut = pi_support_radius(m, kPiCut);
    const ShellKey kx = shell_order_key(x, layout);
    std::uint64_t den_count = 0, num_count = 0;
    std::vector<MarkedPoint> draws;
    std::vector<char> pre;
    for (std::uint64_t s = 0; s < est.mc_samples; ++s) {
        const std::uint64_t skey = prf64(seed, 0x5a, s);
        CounterStream cs(skey);
        draws.clear();
        pre.clear();
        const int d = sregion.box.dimension();
        double vol = 1.0;
        for (int k = 0; k < d; ++k) vol *= std::max(sregion.box.side[k], 0.0);
        const std::uint64_t nd = cs.next_poisson(m.reference.activity * vol);
        bool den_ok = true;
        std::vector<std::uint64_t> draw_ix;
        for (std::uint64_t j = 0; j < nd; ++j) {
            MarkedPoint p;
            p.position.d = d;
            for (int k = 0; k < d; ++k)
                p.position[k] = sregion.box.lo(k) + cs.next_unit() * sregion.box.side[k];
            if (m.reference.has_marks()) p.mark = m.reference.mark_from_unit(cs.next_unit());
            p.id.hi = 0x4000000000000002ull;
            p.id.lo = j;
            if (!sregion.accepts(p)) continue;
            const bool is_pre = shell_key_less(shell_order_key(p, layout), kx);
            if (is_pre) {
                // rho_nu-thinning before x
                double rho = 1.0;
                for (const auto* v : nu_members) {
                    if (distance(p.position, v->position) > r_cut) continue;
                    rho *= 1.0 - connection_prob(m, p, *v);
                    if (rho == 0.0) break;
                }
                if (rho <= 0.0) continue;
                if (rho < 1.0 && to_unit(prf64(skey, 0xa1, j)) >= rho) continue;
            }
            draws.push_back(p);
            pre.push_back(is_pre ? 1 : 0);
            draw_ix.push_back(j);
        }
        // forbidden edges to the conditioning points
        for (std::size_t i = 0; i < draws.size() && den_ok; ++i) {
            const auto& targets = pre[i] ? phi_minus_nu : phi_all;
            for (std::size_t t = 0; t < targets.size(); ++t) {
                if (distance(draws[i].position, targets[t]->position) > r_cut) continue;
                double pi = connection_prob(m, draws[i], *targets[t]);
                if (pi < kPiCut) continue;
                if (to_unit(prf64(skey, 0xe0 + (pre[i] ? 1 : 0), draw_ix[i],
                                  static_cast<std::uint64_t>(t))) <= pi) {
                    den_ok = false;
                    break;
                }
            }
        }
        // forbidden edges among the draws
        for (std::size_t i = 0; i < draws.size() && den_ok; ++i)
            for (std::size_t j2 = i + 1; j2 < draws.size(); ++j2) {
                if (distance(draws[i].position, draws[j2].position) > r_cut) continue;
                double pi = connection_prob(m, draws[i], draws[j2]);
                if (pi < kPiCut) continue;
                if (to_unit(prf64(skey, 0xee, draw_ix[i], draw_ix[j2])) <= pi) {
                    den_ok = false;
                    break;
                }
            }
        if (!den_ok) continue;
        ++den_count;
        bool num_ok = true;
        for (std::size_t i = 0; i < draws.size() && num_ok; ++i) {
            if (distance(draws[i].position, x.position) > r_cut) continue;
            double pi = connection_prob(m, draws[i], x);
            if (pi < kPiCut) continue;
            if (to_unit(prf64(skey, 0xe2, draw_ix[i])) <= pi) num_ok = false;
        }
        if (num_ok) ++num_count;
    }
    if (den_count == 0) return 0.0;  // convention 0/0 := 0
    double ratio = static_cast<double>(num_count) / static_cast<double>(den_count);
    return std::min(1.0, std::max(0.0, ratio));
}

} // namespace

ThinningResult rcm_cluster_coupled(const InteractionModel& m, const Window& window,
                                   const PointPattern& nu, const BoundaryConditions& psi,
                                   const DominatingConfiguration& config,
                                   const PairMarkOracle& oracle, const RatioEstimator& est,
                                   std::uint64_t seed) {
    validate_model(m);
    validate_estimator(est);
    if (!has_pair_potential(m))
        throw unsupported_error("rcm_cluster_coupled requires a pair potential");
    auto [graph, trace] =
        explore_rcm(m, config, nu, psi, oracle, ShellOrdering{config.cell_layout});
    return rcm_cluster_replay(m, window, graph, trace, nu, psi, config, est, seed);
}

ThinningResult rcm_cluster_replay(const InteractionModel& m, const Window& window,
                                  const RcmGraph& graph, const ExplorationTrace& trace,
                                  const PointPattern& nu, const BoundaryConditions& psi,
                                  const DominatingConfiguration& config, const RatioEstimator& est,
                                  std::uint64_t seed) {
    const auto& pts = config.pattern.points;

    // id -> point lookups
    std::unordered_map<PointId, const MarkedPoint*, PointIdHash> by_id;
    std::unordered_map<PointId, double, PointIdHash> u_by_id;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        by_id[pts[i].id] = &pts[i];
        u_by_id[pts[i].id] = config.u_marks[i];
    }
    for (const auto& b : psi.points.points) by_id[b.id] = &b;
    for (const auto& v : nu.points) by_id.emplace(v.id, &v);

    auto adj = adjacency(graph);

    ThinningResult res;
    res.kept.dimension = config.pattern.dimension;

    // Boundary recursion B_{k+1} = (B_k \ nu_k) ∪ xi_k, starting from psi.
    std::vector<PointId> b_cur;
    for (const auto& b : psi.points.points) b_cur.push_back(b.id);

    bool seen_failed = false;
    std::optional<PointId> reference;  // x_k before the current step

    for (const auto& step : trace.steps) {
        IdSet nu_set(step.nu.begin(), step.nu.end());
        IdSet b_set(b_cur.begin(), b_cur.end());

        std::vector<PointId> xi_step;

        if (step.step_case == StepCase::successful) {
            // Stage 1: thin the directly-connected set V with the Z-bar rule.
            std::vector<PointId> stage_kept;
            IdSet stage_set;
            for (std::size_t i = 0; i < step.explored.size(); ++i) {
                const PointId& xid = step.explored[i];
                const MarkedPoint& x = *by_id.at(xid);
                const double u = u_by_id.at(xid);
                // killed when a direct edge lands in B ∪ kept-so-far
                bool killed = false;
                for (const auto& cid : step.connected_nu[i])
                    if (b_set.count(cid) || stage_set.count(cid)) {
                        killed = true;
                        break;
                    }
                if (!killed) {
                    if (auto it = adj.find(xid); it != adj.end())
                        for (const auto& nb : it->second)
                            if (b_set.count(nb) || stage_set.count(nb)) {
                                killed = true;
                                break;
                            }
                }
                double p = 0.0;
                if (!killed) {
                    // conditioning phi = B_k ∪ stage-kept; pre-x draws are
                    // tested against phi \ nu only
                    std::vector<const MarkedPoint*> phi_all, phi_minus_nu, nu_members;
                    for (const auto& id : b_cur) {
                        const auto* p_ = by_id.at(id);
                        phi_all.push_back(p_);
                        if (!nu_set.count(id)) phi_minus_nu.push_back(p_);
                    }
                    for (const auto& id : stage_kept) {
                        const auto* p_ = by_id.at(id);
                        phi_all.push_back(p_);
                        phi_minus_nu.push_back(p_);
                    }
                    for (const auto& id : step.nu) nu_members.push_back(by_id.at(id));
                    SamplingRegion sr =
                        reference
                            ? suffix_region(shell_order_key(*by_id.at(*reference),
                                                            config.cell_layout),
                                            config.cell_layout, window)
                            : whole_window_region(window);
                    p = zbar_ratio(m, sr, config.cell_layout, x, nu_members, phi_all,
                                   phi_minus_nu, est, decision_seed(seed, xid));
                }
                const bool keep = u <= p;
                if (keep) {
                    res.kept.points.push_back(x);
                    stage_kept.push_back(xid);
                    stage_set.insert(xid);
                    xi_step.push_back(xid);
                }
                res.decisions.push_back({xid, p, u, keep, step.index});
                if (!seen_failed) res.touched_points.push_back(xid);
            }
        } else if (!step.explored.empty()) {
            // Case 2: single new-cluster root thinned with the RCM retention;
            // the boundary for the bulk stage is B_k \ nu_k.
            seen_failed = true;
            const PointId& xid = step.explored.front();
            const MarkedPoint& x = *by_id.at(xid);
            const double u = u_by_id.at(xid);
            bool killed = false;
            if (auto it = adj.find(xid); it != adj.end())
                for (const auto& nb : it->second)
                    if (b_set.count(nb) && !nu_set.count(nb)) {
                        killed = true;
                        break;
                    }
            double p = 0.0;
            if (!killed) {
                PointPattern cond;
                cond.dimension = config.pattern.dimension;
                for (const auto& id : b_cur)
                    if (!nu_set.count(id)) cond.points.push_back(*by_id.at(id));
                SamplingRegion sr =
                    suffix_region(shell_order_key(x, config.cell_layout), config.cell_layout,
                                  window);
                p = ratio_on_domain(m, sr, cond, x, est, decision_seed(seed, xid));
            }
            const bool keep = u <= p;
            if (keep) {
                res.kept.points.push_back(x);
                xi_step.push_back(xid);
            }
            res.decisions.push_back({xid, p, u, keep, step.index});
            reference = xid;
        } else {
            seen_failed = true;
        }

        // B_{k+1} = (B_k \ nu_k) ∪ xi_k
        std::vector<PointId> b_next;
        for (const auto& id : b_cur)
            if (!nu_set.count(id)) b_next.push_back(id);
        for (const auto& id : xi_step) b_next.push_back(id);
        b_cur = std::move(b_next);
    }

    sort_ids(res.touched_points);
    if (!res.touched_points.empty()) {
        ClusterPartition clusters(graph);
        IdSet reps;
        for (const auto& id : res.touched_points) reps.insert(clusters.cluster_of(id));
        res.touched_clusters.assign(reps.begin(), reps.end());
        sort_ids(res.touched_clusters);
    }
    return res;
}

// ---------------------------------------------------------------------------
// Coupled pairs
// ---------------------------------------------------------------------------

CouplingPair coupled_pair_local(const InteractionModel& m, const Window& window,
                                const BoundaryConditions& psi_a, const BoundaryConditions& psi_b,
                                const DominatingConfiguration& config, const RatioEstimator& est,
                                std::uint64_t seed) {
    CouplingPair pair;
    pair.boundary_delta = symmetric_difference(psi_a.points, psi_b.points);
    pair.result_a = cluster_coupled_thinning(m, window, pair.boundary_delta, psi_a, config, est,
                                             seed, /*force_cascade=*/true);
    pair.result_b = cluster_coupled_thinning(m, window, pair.boundary_delta, psi_b, config, est,
                                             seed, /*force_cascade=*/true);
    return pair;
}

CouplingPair coupled_pair_rcm(const InteractionModel& m, const Window& window,
                              const BoundaryConditions& psi_a, const BoundaryConditions& psi_b,
                              const DominatingConfiguration& config, const PairMarkOracle& oracle,
                              const RatioEstimator& est, std::uint64_t seed) {
    CouplingPair pair;
    pair.boundary_delta = symmetric_difference(psi_a.points, psi_b.points);
    pair.result_a =
        rcm_cluster_coupled(m, window, pair.boundary_delta, psi_a, config, oracle, est, seed);
    pair.result_b =
        rcm_cluster_coupled(m, window, pair.boundary_delta, psi_b, config, oracle, est, seed);
    return pair;
}

// ---------------------------------------------------------------------------
// Nested windows
// ---------------------------------------------------------------------------

namespace {

bool window_contained(const Window& a, const Window& b) {
    for (int k = 0; k < a.dimension(); ++k)
        if (a.lo(k) < b.lo(k) - 1e-9 || a.hi(k) > b.hi(k) + 1e-9) return false;
    return true;
}

std::vector<PointId> kept_in_window(const ThinningResult& r, const Window& w) {
    std::vector<PointId> ids;
    for (const auto& p : r.kept.points)
        if (w.contains(p.position)) ids.push_back(p.id);
    sort_ids(ids);
    return ids;
}

} // namespace

NestedSample nested_window_sample(const InteractionModel& m, const Window& inner,
                                  const Window& outer, const Window& probe,
                                  const BoundaryConditions& psi, const RatioEstimator& est,
                                  std::uint64_t seed, double cell_side, NestedFlavor flavor) {
    validate_model(m);
    if (!is_cell_aligned(inner, cell_side) || !is_cell_aligned(outer, cell_side) ||
        !is_cell_aligned(probe, cell_side))
        throw alignment_error("nested windows must be cell-aligned");
    if (!window_contained(probe, inner) || !window_contained(inner, outer))
        throw alignment_error("need probe ⊆ inner ⊆ outer");

    if (flavor == NestedFlavor::auto_pick)
        flavor = has_pair_potential(m) ? NestedFlavor::rcm : NestedFlavor::local;

    DominatingConfiguration config_outer =
        sample_dominating(outer, m.reference, seed, cell_side);
    DominatingConfiguration config_inner = restrict(config_outer, inner);

    // Separating set: Poisson points of outer \ inner.
    IdSet inner_ids;
    for (const auto& p : config_inner.pattern.points) inner_ids.insert(p.id);
    PointPattern xi;
    xi.dimension = config_outer.pattern.dimension;
    for (const auto& p : config_outer.pattern.points)
        if (!inner_ids.count(p.id)) xi.points.push_back(p);

    NestedSample out;
    out.separating_points = xi.points.size();

    if (flavor == NestedFlavor::local) {
        out.inner_result = cluster_coupled_thinning(m, inner, xi, psi, config_inner, est, seed,
                                                    /*force_cascade=*/true);
        PointPattern empty_b;
        empty_b.dimension = xi.dimension;
        out.outer_result = cluster_coupled_thinning(m, outer, empty_b, psi, config_outer, est,
                                                    seed, /*force_cascade=*/true);
        // no_connection: no probe point in a xi-connected component of the
        // relation graph over the outer Poisson points.
        RcmGraph rel = build_relation_graph(m, config_outer.pattern, BoundaryConditions{});
        ClusterPartition clusters(rel);
        bool connected = false;
        for (const auto& p : config_outer.pattern.points) {
            if (!probe.contains(p.position)) continue;
            for (const auto& v : xi.points)
                if (clusters.same_cluster(p.id, v.id)) {
                    connected = true;
                    break;
                }
            if (connected) break;
        }
        out.no_connection = !connected;
    } else {
        PairMarkOracle oracle(config_outer.seed);
        const ShellOrdering ordering{config_outer.cell_layout};
        PointPattern empty_nu;
        empty_nu.dimension = xi.dimension;

        auto [graph_in, trace_in] = explore_rcm(m, config_inner, xi, psi, oracle, ordering);
        out.inner_result = rcm_cluster_replay(m, inner, graph_in, trace_in, xi, psi, config_inner,
                                              est, seed);
        auto [graph_out, trace_out] =
            explore_rcm(m, config_outer, empty_nu, psi, oracle, ordering);
        out.outer_result = rcm_cluster_replay(m, outer, graph_out, trace_out, empty_nu, psi,
                                              config_outer, est, seed);

        // xi-connected points of the outer exploration graph
        ClusterPartition clusters(graph_out);
        std::vector<PointId> outer_touched;
        for (const auto& p : config_inner.pattern.points)
            for (const auto& v : xi.points)
                if (clusters.same_cluster(p.id, v.id)) {
                    outer_touched.push_back(p.id);
                    break;
                }
        sort_ids(outer_touched);
        // The event requires the two explorations to resolve the separating
        // clusters identically, and the probe to avoid them.
        bool touched_match = outer_touched == out.inner_result.touched_points;
        bool probe_clear = true;
        for (const auto& p : config_inner.pattern.points) {
            if (!probe.contains(p.position)) continue;
            if (out.inner_result.is_touched(p.id) ||
                std::binary_search(outer_touched.begin(), outer_touched.end(), p.id)) {
                probe_clear = false;
                break;
            }
        }
        out.no_connection = touched_match && probe_clear;
    }

    out.agreement =
        kept_in_window(out.inner_result, probe) == kept_in_window(out.outer_result, probe);
    return out;
}

// ---------------------------------------------------------------------------
// Pattern set operations
// ---------------------------------------------------------------------------

PointPattern pattern_difference(const PointPattern& a, const PointPattern& b) {
    IdSet in_b;
    for (const auto& p : b.points) in_b.insert(p.id);
    PointPattern out;
    out.dimension = a.dimension;
    for (const auto& p : a.points)
        if (!in_b.count(p.id)) out.points.push_back(p);
    return out;
}

PointPattern symmetric_difference(const PointPattern& a, const PointPattern& b) {
    PointPattern out = pattern_difference(a, b);
    PointPattern ba = pattern_difference(b, a);
    for (const auto& p : ba.points) out.points.push_back(p);
    return out;
}

} // namespace gibbs
