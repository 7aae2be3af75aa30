#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gibbs/graphs.hpp"
#include "gibbs/model.hpp"
#include "gibbs/partition.hpp"
#include "gibbs/scores.hpp"
#include "gibbs/thinning.hpp"

namespace gibbs {

// ---------------------------------------------------------------------------
// Replication bookkeeping
// ---------------------------------------------------------------------------

struct ReplicationRow {
    std::uint64_t rep = 0;
    std::uint64_t seed = 0;
    std::string statistic;
    double value = 0.0;
};

struct ReplicationTable {
    std::vector<ReplicationRow> rows;
    void add(std::uint64_t rep, std::uint64_t seed, const std::string& stat, double value) {
        rows.push_back({rep, seed, stat, value});
    }
};

// ---------------------------------------------------------------------------
// Simulation front door used by the experiments
// ---------------------------------------------------------------------------

enum class ThinningAlgorithm { standard, rcm, cluster, rcm_cluster };

ThinningResult run_thinning(ThinningAlgorithm alg, const InteractionModel& m, const Window& window,
                            const BoundaryConditions& psi, const DominatingConfiguration& config,
                            const RatioEstimator& est, std::uint64_t seed);

// Sample a dominating configuration and thin it; seed drives both.
PointPattern simulate_gibbs(const InteractionModel& m, const Window& window,
                            const BoundaryConditions& psi, const RatioEstimator& est,
                            std::uint64_t seed,
                            ThinningAlgorithm alg = ThinningAlgorithm::standard);

// ---------------------------------------------------------------------------
// Elementary statistics
// ---------------------------------------------------------------------------

// sup_u |F_hat(u) - Phi(u)| against the standard normal.
double kolmogorov_distance(const std::vector<double>& sample);

struct DispersionResult {
    double index = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
};

// Variance-to-mean ratio with a bootstrap percentile CI (fixed resample seed).
DispersionResult dispersion_index(const std::vector<std::int64_t>& counts,
                                  std::uint64_t boot_seed = 0x9d1ce, int resamples = 1000);

struct TailFit {
    double rate = 0.0;       // -slope of the log-linear fit
    double intercept = 0.0;  // at r = 0
    double r_lo = 0.0, r_hi = 0.0;
    double residual_rms = 0.0;
    std::size_t points_used = 0;
};

TailFit tail_slope(const std::vector<TailPoint>& tail);

double normal_cdf(double x);

// ---------------------------------------------------------------------------
// GNZ balance
// ---------------------------------------------------------------------------

enum class GnzTestKind { void_indicator, neighbor_count, constant_one };

struct GnzTestFn {
    GnzTestKind kind = GnzTestKind::void_indicator;
    double r = 0.1;
};

struct GnzResult {
    double lhs = 0.0;
    double rhs = 0.0;
    double se = 0.0;  // of the paired difference
    double z = 0.0;
    std::uint64_t reps = 0;
};

// Paired test of E[sum_x f(x, X \ x)] = alpha * integral E[f(x, X ∪ x)
// kappa(x, X)] dx, using one fresh uniform location per replication.
GnzResult gnz_residual(const InteractionModel& m, const Window& window,
                       const BoundaryConditions& psi, const GnzTestFn& fn, std::uint64_t reps,
                       const RatioEstimator& est, std::uint64_t seed, int threads = 0,
                       ReplicationTable* table = nullptr);

// ---------------------------------------------------------------------------
// Experiments
// ---------------------------------------------------------------------------

struct CltRow {
    double window_side = 0.0;
    double lambda_q = 0.0;
    double mean = 0.0;
    double variance = 0.0;
    double var_per_lambda = 0.0;
    double d_k = 0.0;
    double max_stab_radius = 0.0;
    std::vector<double> totals;
};

// Score-sum CLT diagnostics over increasing windows: simulate on a buffered
// window, standardize empirically, report the Kolmogorov distance and the
// Var/lambda(Q_n) trend.
std::vector<CltRow> clt_experiment(const InteractionModel& m, const ScoreSpec& spec_template,
                                   const std::vector<double>& window_sides, std::uint64_t reps,
                                   const RatioEstimator& est, std::uint64_t seed, double buffer,
                                   int threads = 0, ReplicationTable* table = nullptr);

struct PoissonApproxReport {
    double u_n = 0.0;
    DispersionResult total_dispersion;
    double max_cell_corr = 0.0;
    double mean_total = 0.0;
    double mean_total_se = 0.0;
    double lambda_gnz = 0.0;
    double lambda_gnz_se = 0.0;
    double z_mean_vs_lambda = 0.0;
    std::vector<std::int64_t> totals;
};

// Matern-I thinning diagnostics: dispersion of the isolated-point counts,
// cross-cell count correlations, and the mean count against the
// GNZ-estimated intensity.
PoissonApproxReport poisson_approx_experiment(const InteractionModel& m, const Window& window,
                                              int cells, std::uint64_t reps,
                                              const RatioEstimator& est, std::uint64_t seed,
                                              double beta2 = 1.0, int threads = 0,
                                              ReplicationTable* table = nullptr);

// Basic two-sample z for means.
double two_sample_z(const std::vector<double>& a, const std::vector<double>& b);

double mean_of(const std::vector<double>& xs);
double variance_of(const std::vector<double>& xs);

} // namespace gibbs
