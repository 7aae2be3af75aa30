#include "gibbs/partition.hpp"

#include <cmath>

#include "gibbs/rng.hpp"

namespace gibbs {

namespace {

double poisson_tail_above(double lambda, int n_max) {
    // P(Pois(lambda) > n_max)
    double pmf = std::exp(-lambda);
    double cdf = pmf;
    for (int n = 1; n <= n_max; ++n) {
        pmf *= lambda / n;
        cdf += pmf;
    }
    return std::max(0.0, 1.0 - cdf);
}

void draw_pattern(CounterStream& cs, const Window& box, const ReferenceMeasure& ref,
                  std::vector<MarkedPoint>& out) {
    out.clear();
    const int d = box.dimension();
    double vol = 1.0;
    for (int k = 0; k < d; ++k) vol *= std::max(box.side[k], 0.0);
    const std::uint64_t n = cs.next_poisson(ref.activity * vol);
    out.reserve(n);
    for (std::uint64_t j = 0; j < n; ++j) {
        MarkedPoint p;
        p.position.d = d;
        for (int k = 0; k < d; ++k) p.position[k] = box.lo(k) + cs.next_unit() * box.side[k];
        if (ref.has_marks()) p.mark = ref.mark_from_unit(cs.next_unit());
        p.id.hi = 0x4000000000000000ull;  // scratch namespace; never persisted
        p.id.lo = j;
        out.push_back(p);
    }
}

} // namespace

RatioEstimator validate_estimator(const RatioEstimator& est) {
    if (est.mode == EstimatorMode::common_random_numbers_mc && est.mc_samples < 100)
        throw validation_error("mc_samples must be at least 100");
    if (est.mode == EstimatorMode::exact_expansion && est.n_max < 0)
        throw validation_error("n_max must be non-negative");
    return est;
}

double sequential_weight(const InteractionModel& m, const std::vector<MarkedPoint>& draws,
                         const PointPattern& phi) {
    if (has_pair_potential(m)) {
        double acc = 1.0;
        for (std::size_t i = 0; i < draws.size(); ++i) {
            for (const auto& y : phi.points) {
                acc *= 1.0 - connection_prob(m, draws[i], y);
                if (acc == 0.0) return 0.0;
            }
            for (std::size_t j = 0; j < i; ++j) {
                acc *= 1.0 - connection_prob(m, draws[i], draws[j]);
                if (acc == 0.0) return 0.0;
            }
        }
        return acc;
    }
    // Local families: product of Papangelou intensities along a fixed order;
    // the cocycle condition makes the product order-free.
    double acc = 1.0;
    PointPattern state = phi;
    for (const auto& p : draws) {
        acc *= papangelou(m, p, state);
        if (acc == 0.0) return 0.0;
        state.points.push_back(p);
    }
    return acc;
}

double noedge_weight(const InteractionModel& m, const PointPattern& phi, const PointPattern& psi) {
    double acc = 1.0;
    for (std::size_t i = 0; i < phi.size(); ++i) {
        for (std::size_t j = i + 1; j < phi.size(); ++j) {
            acc *= 1.0 - connection_prob(m, phi.points[i], phi.points[j]);
            if (acc == 0.0) return 0.0;
        }
        for (const auto& y : psi.points) {
            acc *= 1.0 - connection_prob(m, phi.points[i], y);
            if (acc == 0.0) return 0.0;
        }
    }
    return acc;
}

PartitionEstimate estimate_partition(const InteractionModel& m, const Window& window,
                                     const BoundaryConditions& psi, const RatioEstimator& est,
                                     std::uint64_t seed) {
    validate_model(m);
    validate_window(window);
    validate_estimator(est);
    const double lambda_q = m.reference.activity * window.volume();

    if (est.mode == EstimatorMode::common_random_numbers_mc) {
        std::vector<MarkedPoint> draws;
        double sum = 0.0, sum_sq = 0.0;
        for (std::uint64_t s = 0; s < est.mc_samples; ++s) {
            CounterStream cs(prf64(seed, 0x51, s));
            draw_pattern(cs, window, m.reference, draws);
            double w = sequential_weight(m, draws, psi.points);
            sum += w;
            sum_sq += w * w;
        }
        const double n = static_cast<double>(est.mc_samples);
        PartitionEstimate out;
        out.value = sum / n;
        out.stderr_ = std::sqrt(std::max(0.0, sum_sq / n - out.value * out.value) / n);
        out.samples = est.mc_samples;
        return out;
    }

    // Expansion mode: Z = sum_n e^{-lambda} lambda^n / n! E[kappa~({U_1..U_n}, psi)].
    const double tail = poisson_tail_above(lambda_q, est.n_max);
    if (tail > est.tail_tol)
        throw truncation_error("Poisson tail above n_max is " + std::to_string(tail));
    const std::uint64_t per_n = std::max<std::uint64_t>(1, est.integral_samples / (est.n_max + 1));
    double value = 0.0, var = 0.0;
    double pois_w = std::exp(-lambda_q);
    std::vector<MarkedPoint> draws;
    for (int n = 0; n <= est.n_max; ++n) {
        if (n > 0) pois_w *= lambda_q / n;
        double sum = 0.0, sum_sq = 0.0;
        if (n == 0) {
            sum = static_cast<double>(per_n);
            sum_sq = static_cast<double>(per_n);
        } else {
            for (std::uint64_t s = 0; s < per_n; ++s) {
                CounterStream cs(prf64(seed, 0x52, static_cast<std::uint64_t>(n), s));
                draws.clear();
                for (int j = 0; j < n; ++j) {
                    MarkedPoint p;
                    p.position.d = window.dimension();
                    for (int k = 0; k < window.dimension(); ++k)
                        p.position[k] = window.lo(k) + cs.next_unit() * window.side[k];
                    if (m.reference.has_marks())
                        p.mark = m.reference.mark_from_unit(cs.next_unit());
                    p.id.hi = 0x4000000000000001ull;
                    p.id.lo = static_cast<std::uint64_t>(j);
                    draws.push_back(p);
                }
                double w = sequential_weight(m, draws, psi.points);
                sum += w;
                sum_sq += w * w;
            }
        }
        const double mean = sum / static_cast<double>(per_n);
        const double se2 =
            std::max(0.0, sum_sq / static_cast<double>(per_n) - mean * mean) /
            static_cast<double>(per_n);
        value += pois_w * mean;
        var += pois_w * pois_w * se2;
    }
    PartitionEstimate out;
    out.value = value;
    out.stderr_ = std::sqrt(var);
    out.samples = per_n * (est.n_max + 1);
    return out;
}

double ratio_on_domain(const InteractionModel& m, const SamplingRegion& region,
                       const PointPattern& phi, const MarkedPoint& x, const RatioEstimator& est,
                       std::uint64_t seed, const IntensityThinner& rho) {
    std::vector<MarkedPoint> draws, kept;
    // Locality cutoff: clip the box to B_local(x) and drop far conditioning
    // points; weights lose only factors that are exactly 1 at these ranges
    // and the ratio's x-sensitivity is local.
    Window box = region.box;
    PointPattern phi_local;
    const PointPattern* phi_used = &phi;
    if (est.local_radius > 0.0) {
        const double r = est.local_radius;
        for (int k = 0; k < box.dimension(); ++k) {
            double lo = std::max(box.lo(k), x.position[k] - r);
            double hi = std::min(box.hi(k), x.position[k] + r);
            if (hi < lo) hi = lo;
            box.center[k] = 0.5 * (lo + hi);
            box.side[k] = hi - lo;
        }
        const double reach = r + pi_support_radius(m);
        phi_local.dimension = phi.dimension;
        for (const auto& y : phi.points)
            if (distance(y.position, x.position) <= reach) phi_local.points.push_back(y);
        phi_used = &phi_local;
    }

    double sum_num = 0.0, sum_den = 0.0;
    for (std::uint64_t s = 0; s < est.mc_samples; ++s) {
        CounterStream cs(prf64(seed, 0x53, s));
        draw_pattern(cs, box, m.reference, draws);
        kept.clear();
        for (auto& p : draws) {
            if (est.local_radius > 0.0 &&
                distance_sq(p.position, x.position) > est.local_radius * est.local_radius)
                continue;
            if (!region.accepts(p)) continue;
            if (rho) {
                double keep_p = rho(p);
                if (keep_p <= 0.0) continue;
                if (keep_p < 1.0 && cs.next_unit() >= keep_p) continue;
            }
            kept.push_back(p);
        }
        const double w_den = sequential_weight(m, kept, *phi_used);
        double w_num = 0.0;
        if (w_den > 0.0) {
            if (has_pair_potential(m)) {
                w_num = w_den;
                for (const auto& p : kept) {
                    w_num *= 1.0 - connection_prob(m, p, x);
                    if (w_num == 0.0) break;
                }
            } else {
                PointPattern phi_x = *phi_used;
                phi_x.points.push_back(x);
                w_num = sequential_weight(m, kept, phi_x);
            }
        }
        if (w_num > w_den + 1e-12)
            throw inconsistency_error("numerator weight exceeded denominator weight");
        sum_num += w_num;
        sum_den += w_den;
    }
    if (sum_den <= 0.0) {
        if (sum_num > 0.0) throw inconsistency_error("positive numerator with zero denominator");
        return 0.0;  // convention 0/0 := 0
    }
    double ratio = sum_num / sum_den;
    if (ratio < 0.0) ratio = 0.0;
    if (ratio > 1.0) ratio = 1.0;
    return ratio;
}

double estimate_ratio(const InteractionModel& m, const Window& window, const PointPattern& psi,
                      const MarkedPoint& x, const RatioEstimator& est, std::uint64_t seed) {
    validate_model(m);
    validate_window(window);
    validate_estimator(est);
    CellLayout layout{default_cell_side(m)};
    const ShellKey kx = shell_order_key(x, layout);
    SamplingRegion region;
    region.box = shell_suffix_box(kx, layout, window);
    region.accept = [kx, layout, window](const MarkedPoint& p) {
        if (!window.contains(p.position)) return false;
        return shell_key_less(kx, shell_order_key(p, layout));
    };
    return ratio_on_domain(m, region, psi, x, est, seed);
}

std::uint64_t decision_seed(std::uint64_t base, const PointId& id) {
    return prf64(base, id.hi, id.lo, 0xdec1510full);
}

} // namespace gibbs
