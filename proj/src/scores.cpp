#include "gibbs/scores.hpp"

#include <algorithm>
#include <cmath>

#include "gibbs/errors.hpp"

namespace gibbs {

namespace {

bool contains_id(const PointPattern& pattern, const PointId& id) {
    for (const auto& p : pattern.points)
        if (p.id == id) return true;
    return false;
}

// Indices of the k nearest neighbors of pattern.points[i], ties broken by
// (distance, id).
std::vector<std::size_t> knn_of(const PointPattern& pattern, std::size_t i, int k) {
    std::vector<std::pair<double, std::size_t>> cand;
    for (std::size_t j = 0; j < pattern.size(); ++j) {
        if (j == i) continue;
        cand.emplace_back(distance_sq(pattern.points[i].position, pattern.points[j].position), j);
    }
    auto cmp = [&](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first < b.first;
        return pattern.points[a.second].id < pattern.points[b.second].id;
    };
    std::size_t kk = std::min<std::size_t>(k, cand.size());
    std::partial_sort(cand.begin(), cand.begin() + kk, cand.end(), cmp);
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < kk; ++j) out.push_back(cand[j].second);
    return out;
}

std::size_t index_of(const PointPattern& pattern, const MarkedPoint& x) {
    for (std::size_t i = 0; i < pattern.size(); ++i)
        if (pattern.points[i].id == x.id) return i;
    throw membership_error("point not in pattern");
}

} // namespace

int isolated_score(const PointPattern& pattern, const MarkedPoint& x, double u) {
    if (!contains_id(pattern, x.id)) throw membership_error("isolated_score: x not in pattern");
    for (const auto& y : pattern.points) {
        if (y.id == x.id) continue;
        if (distance_sq(y.position, x.position) <= u * u) return 0;
    }
    return 1;
}

double knn_score(const PointPattern& pattern, const MarkedPoint& x, int k) {
    if (k < 1) throw validation_error("k must be >= 1");
    if (pattern.size() < static_cast<std::size_t>(k) + 1)
        throw insufficient_points_error("knn_score needs at least k+1 points");
    const std::size_t i = index_of(pattern, x);
    // symmetric kNN graph: edge when either endpoint lists the other
    std::vector<std::vector<std::size_t>> lists(pattern.size());
    for (std::size_t j = 0; j < pattern.size(); ++j) lists[j] = knn_of(pattern, j, k);
    double half_len = 0.0;
    for (std::size_t j = 0; j < pattern.size(); ++j) {
        if (j == i) continue;
        bool edge = std::find(lists[i].begin(), lists[i].end(), j) != lists[i].end() ||
                    std::find(lists[j].begin(), lists[j].end(), i) != lists[j].end();
        if (edge) half_len += 0.5 * distance(pattern.points[i].position, pattern.points[j].position);
    }
    return half_len;
}

int gilbert_score(const PointPattern& pattern, const MarkedPoint& x) {
    if (!x.mark) throw mark_error("gilbert_score requires radius marks");
    int count = 0;
    for (const auto& y : pattern.points) {
        if (y.id == x.id) continue;
        if (!y.mark) throw mark_error("gilbert_score requires radius marks on every point");
        double reach = *x.mark + *y.mark;
        if (distance_sq(y.position, x.position) <= reach * reach && *y.mark < *x.mark) ++count;
    }
    return count;
}

ScoreMeasure score_sum(const PointPattern& pattern, const ScoreSpec& spec) {
    ScoreMeasure out;
    for (std::size_t i = 0; i < pattern.size(); ++i) {
        const auto& p = pattern.points[i];
        if (!spec.window.contains(p.position)) continue;
        double s = 0.0;
        switch (spec.kind) {
            case ScoreKind::isolated:
                s = isolated_score(pattern, p, spec.isolation_radius);
                break;
            case ScoreKind::knn_length:
                s = knn_score(pattern, p, spec.k);
                break;
            case ScoreKind::gilbert_edges:
                s = gilbert_score(pattern, p);
                break;
        }
        out.ids.push_back(p.id);
        out.scores.push_back(s);
        out.total += s;
    }
    return out;
}

double stabilization_radius(const ScoreSpec& spec, const PointPattern& pattern,
                            const MarkedPoint& x) {
    switch (spec.kind) {
        case ScoreKind::isolated:
            return spec.isolation_radius;
        case ScoreKind::gilbert_edges:
            if (!x.mark) throw mark_error("stabilization radius needs the mark");
            return 2.0 * *x.mark;
        case ScoreKind::knn_length: {
            // conservative certified radius: twice the distance to the k-th
            // nearest neighbor (covers both edge directions)
            const std::size_t i = index_of(pattern, x);
            auto nn = knn_of(pattern, i, spec.k);
            if (nn.size() < static_cast<std::size_t>(spec.k))
                throw insufficient_points_error("knn stabilization needs k neighbors");
            double dk = distance(pattern.points[i].position, pattern.points[nn.back()].position);
            return 2.0 * dk;
        }
    }
    throw unsupported_error("unknown score kind");
}

double unit_ball_volume(int d) {
    // kappa_d = pi^{d/2} / Gamma(d/2 + 1)
    return std::pow(M_PI, 0.5 * d) / std::tgamma(0.5 * d + 1.0);
}

double matern_isolation_radius(double alpha, int d, double lambda_qn, double beta2) {
    if (!(alpha > 0.0) || !(lambda_qn > 0.0) || !(beta2 > 0.0))
        throw validation_error("matern_isolation_radius needs positive inputs");
    double target = std::log(lambda_qn / beta2);
    if (target <= 0.0) return 0.0;
    return std::pow(target / (alpha * unit_ball_volume(d)), 1.0 / d);
}

} // namespace gibbs
