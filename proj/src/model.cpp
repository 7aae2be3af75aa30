#include "gibbs/model.hpp"

#include <cmath>
#include <cstring>
#include <limits>

#include "gibbs/rng.hpp"

namespace gibbs {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double require_mark(const MarkedPoint& p, const char* who) {
    if (!p.mark) throw mark_error(std::string(who) + " requires radius marks");
    return *p.mark;
}

} // namespace

double ReferenceMeasure::mark_from_unit(double u) const {
    switch (mark_law) {
        case MarkLaw::none: return 0.0;
        case MarkLaw::uniform: return u * mark_param;
        case MarkLaw::exponential: return -std::log1p(-u) / mark_param;
    }
    return 0.0;
}

ReferenceMeasure validate_reference(const ReferenceMeasure& ref) {
    if (!(ref.activity > 0.0) && ref.activity != 0.0)
        throw validation_error("activity must be non-negative");
    if (ref.mark_law != MarkLaw::none && !(ref.mark_param > 0.0))
        throw validation_error("mark law parameter must be positive");
    return ref;
}

InteractionModel InteractionModel::poisson_model(int d, double alpha) {
    InteractionModel m;
    m.family = Family::poisson;
    m.dimension = d;
    m.reference.activity = alpha;
    return m;
}

InteractionModel InteractionModel::strauss_model(int d, double alpha, double gamma, double R) {
    InteractionModel m;
    m.family = Family::strauss;
    m.dimension = d;
    m.reference.activity = alpha;
    m.gamma = gamma;
    m.range = R;
    return m;
}

InteractionModel InteractionModel::hard_sphere_model(int d, double alpha, double R) {
    InteractionModel m;
    m.family = Family::hard_sphere;
    m.dimension = d;
    m.reference.activity = alpha;
    m.gamma = 0.0;
    m.range = R;
    return m;
}

InteractionModel InteractionModel::soft_pair_model(int d, double alpha, double beta, double ell) {
    InteractionModel m;
    m.family = Family::soft_pair;
    m.dimension = d;
    m.reference.activity = alpha;
    m.soft_beta = beta;
    m.soft_ell = ell;
    return m;
}

InteractionModel InteractionModel::local_relation_model(int d, double alpha, LocalRule rule,
                                                        double r0, double gamma,
                                                        RelationKind rel) {
    InteractionModel m;
    m.family = Family::local_relation;
    m.dimension = d;
    m.reference.activity = alpha;
    m.rule = rule;
    m.local_range = r0;
    m.local_gamma = gamma;
    m.relation = rel;
    return m;
}

InteractionModel validate_model(const InteractionModel& m) {
    if (m.dimension < 1 || m.dimension > kMaxDim)
        throw dimension_error("model dimension must be in [1," + std::to_string(kMaxDim) + "]");
    validate_reference(m.reference);
    switch (m.family) {
        case Family::poisson: break;
        case Family::strauss:
            if (!(m.gamma >= 0.0 && m.gamma < 1.0))
                throw validation_error("strauss gamma must be in [0,1)");
            if (!(m.range > 0.0)) throw validation_error("strauss R must be positive");
            break;
        case Family::hard_sphere:
            if (!(m.range > 0.0)) throw validation_error("hard_sphere R must be positive");
            break;
        case Family::soft_pair:
            if (!(m.soft_beta > 0.0) || !(m.soft_ell > 0.0))
                throw validation_error("soft_pair parameters must be positive");
            break;
        case Family::local_relation:
            if (!(m.local_range > 0.0)) throw validation_error("local range must be positive");
            if (m.rule == LocalRule::geometric && !(m.local_gamma > 0.0 && m.local_gamma <= 1.0))
                throw validation_error("local geometric gamma must be in (0,1]");
            if (m.relation == RelationKind::radius_sum && !m.reference.has_marks())
                throw validation_error("radius_sum relation requires a mark law");
            break;
    }
    return m;
}

bool has_pair_potential(const InteractionModel& m) {
    return m.family == Family::poisson || m.family == Family::strauss ||
           m.family == Family::hard_sphere || m.family == Family::soft_pair;
}

bool has_relation(const InteractionModel& m) {
    switch (m.family) {
        case Family::local_relation: return true;
        case Family::strauss:
        case Family::hard_sphere: return true;  // finite range: x ~ y iff v(x,y) > 0
        case Family::poisson: return true;      // empty relation
        case Family::soft_pair: return false;   // unbounded range, handled by the RCM
    }
    return false;
}

std::optional<double> relation_range(const InteractionModel& m) {
    switch (m.family) {
        case Family::poisson: return 0.0;
        case Family::strauss:
        case Family::hard_sphere: return m.range;
        case Family::soft_pair: return std::nullopt;
        case Family::local_relation:
            if (m.relation == RelationKind::fixed_range) return m.local_range;
            if (m.reference.mark_law == MarkLaw::uniform) return 2.0 * m.reference.mark_param;
            return std::nullopt;
    }
    return std::nullopt;
}

double pi_support_radius(const InteractionModel& m, double eps) {
    switch (m.family) {
        case Family::poisson: return 0.0;
        case Family::strauss:
        case Family::hard_sphere: return m.range;
        case Family::soft_pair:
            // pi(r) <= v(r) = beta exp(-r/ell); solve beta exp(-r/ell) = eps.
            return m.soft_ell * std::log(m.soft_beta / eps);
        case Family::local_relation: {
            auto r = relation_range(m);
            return r ? *r : 1.0;
        }
    }
    return 1.0;
}

double default_cell_side(const InteractionModel& m) {
    auto r = relation_range(m);
    if (m.family == Family::soft_pair) return 1.0;
    if (!r || *r <= 0.0) return 1.0;
    return *r;
}

double potential_value(const InteractionModel& m, const MarkedPoint& x, const MarkedPoint& y) {
    if (!has_pair_potential(m))
        throw unsupported_error("family " + family_name(m.family) + " has no pair potential");
    if (x.position.d != y.position.d) throw dimension_error("potential_value dimension mismatch");
    switch (m.family) {
        case Family::poisson: return 0.0;
        case Family::strauss: {
            if (distance_sq(x.position, y.position) > m.range * m.range) return 0.0;
            if (m.gamma == 0.0) return kInf;
            return -std::log(m.gamma);
        }
        case Family::hard_sphere:
            return distance_sq(x.position, y.position) <= m.range * m.range ? kInf : 0.0;
        case Family::soft_pair:
            return m.soft_beta * std::exp(-distance(x.position, y.position) / m.soft_ell);
        default: return 0.0;
    }
}

double connection_prob(const InteractionModel& m, const MarkedPoint& x, const MarkedPoint& y) {
    double v = potential_value(m, x, y);
    if (std::isinf(v)) return 1.0;
    return -std::expm1(-v);
}

namespace {

int relation_neighbor_count(const InteractionModel& m, const MarkedPoint& x,
                            const PointPattern& pattern) {
    int n = 0;
    for (const auto& y : pattern.points) {
        if (y.id == x.id) continue;
        if (relation_holds(m, x, y)) ++n;
    }
    return n;
}

} // namespace

double papangelou(const InteractionModel& m, const MarkedPoint& x, const PointPattern& pattern) {
    if (pattern.dimension != 0 && x.position.d != pattern.dimension)
        throw dimension_error("papangelou dimension mismatch");
    if (m.family == Family::local_relation) {
        int n = relation_neighbor_count(m, x, pattern);
        if (m.rule == LocalRule::hard) return n == 0 ? 1.0 : 0.0;
        return std::pow(m.local_gamma, n);
    }
    double acc = 1.0;
    for (const auto& y : pattern.points) {
        if (y.id == x.id) continue;
        double v = potential_value(m, x, y);
        if (std::isinf(v)) return 0.0;
        if (v != 0.0) acc *= std::exp(-v);
        if (acc == 0.0) return 0.0;
    }
    return acc;
}

double thinned_intensity(const InteractionModel& m, const MarkedPoint& x,
                         const PointPattern& nu) {
    if (!has_pair_potential(m))
        throw unsupported_error("thinned_intensity requires a pair potential");
    double acc = 1.0;
    for (const auto& y : nu.points) {
        if (y.id == x.id) continue;
        acc *= 1.0 - connection_prob(m, x, y);
        if (acc == 0.0) return 0.0;
    }
    return acc;
}

bool relation_holds(const InteractionModel& m, const MarkedPoint& x, const MarkedPoint& y) {
    if (!has_relation(m))
        throw unsupported_error("family " + family_name(m.family) +
                                " has no finite-range relation; use the RCM");
    if (x.position.d != y.position.d) throw dimension_error("relation_holds dimension mismatch");
    switch (m.family) {
        case Family::poisson: return false;
        case Family::strauss:
        case Family::hard_sphere:
            return distance_sq(x.position, y.position) <= m.range * m.range;
        case Family::local_relation: {
            if (m.relation == RelationKind::fixed_range)
                return distance_sq(x.position, y.position) <= m.local_range * m.local_range;
            double mx = require_mark(x, "radius_sum relation");
            double my = require_mark(y, "radius_sum relation");
            double r = mx + my;
            return distance_sq(x.position, y.position) <= r * r;
        }
        default: return false;
    }
}

BoundaryConditions validate_boundary(const BoundaryConditions& b, const Window& window) {
    for (const auto& p : b.points.points) {
        bool inside = true;
        for (int k = 0; k < window.dimension(); ++k)
            if (p.position[k] < window.lo(k) || p.position[k] >= window.hi(k)) inside = false;
        if (inside) throw validation_error("boundary point lies inside the window");
    }
    return b;
}

PointId boundary_point_id(const Vec& position, std::optional<double> mark) {
    std::uint64_t h = splitmix64(0xb07d4a11c0ffee00ull);
    for (int k = 0; k < position.d; ++k) {
        std::uint64_t bits;
        double v = position[k];
        static_assert(sizeof(bits) == sizeof(v));
        std::memcpy(&bits, &v, sizeof(bits));
        h = mix_in(h, bits);
    }
    std::uint64_t lo = splitmix64(h ^ 0x1234u);
    if (mark) {
        std::uint64_t bits;
        double v = *mark;
        std::memcpy(&bits, &v, sizeof(bits));
        lo = mix_in(lo, bits);
    }
    // Reserved namespace: top byte of hi is 0xB0 for boundary ids.
    return PointId{(h & 0x00ffffffffffffffull) | 0xb000000000000000ull, lo};
}

std::string family_name(Family f) {
    switch (f) {
        case Family::poisson: return "poisson";
        case Family::strauss: return "strauss";
        case Family::hard_sphere: return "hard_sphere";
        case Family::soft_pair: return "soft_pair";
        case Family::local_relation: return "local_relation";
    }
    return "?";
}

} // namespace gibbs
