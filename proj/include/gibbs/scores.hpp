#pragma once

#include <cstdint>
#include <vector>

#include "gibbs/geometry.hpp"

namespace gibbs {

// Stabilizing score functions: isolation indicators (Matern-I thinning),
// half-lengths of k-nearest-neighbor edges, and smaller-mark neighbor counts
// in the radius-marked germ-grain graph.

enum class ScoreKind { isolated, knn_length, gilbert_edges };

struct ScoreSpec {
    ScoreKind kind = ScoreKind::isolated;
    double isolation_radius = 0.1;  // u for isolated
    int k = 1;                      // for knn_length
    Window window;                  // observation window Q_n
};

struct ScoreMeasure {
    std::vector<PointId> ids;
    std::vector<double> scores;
    double total = 0.0;
};

// 1 iff no other point of `pattern` lies within distance u of x.
int isolated_score(const PointPattern& pattern, const MarkedPoint& x, double u);

// Half of the total length of kNN edges incident to x; an edge is present
// when either endpoint ranks the other among its k nearest (ties broken by
// distance, then id).
double knn_score(const PointPattern& pattern, const MarkedPoint& x, int k);

// Number of neighbors with a strictly smaller mark in the graph with edge
// rule ||x - y|| <= m_x + m_y.
int gilbert_score(const PointPattern& pattern, const MarkedPoint& x);

// Evaluate the spec's score on every point of `pattern` inside the window;
// points outside the window still influence the scores of inside points.
ScoreMeasure score_sum(const PointPattern& pattern, const ScoreSpec& spec);

// Certified stabilization radius for the score at x.
double stabilization_radius(const ScoreSpec& spec, const PointPattern& pattern,
                            const MarkedPoint& x);

// Matern-I isolation radius calibrated so the dominating void probability
// exp(-alpha * kappa_d * u^d) equals beta2 / lambda(Q_n).
double matern_isolation_radius(double alpha, int d, double lambda_qn, double beta2 = 1.0);

double unit_ball_volume(int d);

} // namespace gibbs
