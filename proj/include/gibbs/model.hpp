#pragma once

#include <optional>
#include <string>

#include "gibbs/geometry.hpp"

namespace gibbs {

// ---------------------------------------------------------------------------
// Reference measure
// ---------------------------------------------------------------------------

enum class MarkLaw { none, uniform, exponential };

struct ReferenceMeasure {
    double activity = 1.0;        // points per unit volume
    MarkLaw mark_law = MarkLaw::none;
    double mark_param = 1.0;      // m_max for uniform, rate for exponential

    double mark_from_unit(double u) const;
    bool has_marks() const { return mark_law != MarkLaw::none; }
};

ReferenceMeasure validate_reference(const ReferenceMeasure& ref);

// ---------------------------------------------------------------------------
// Interaction models
// ---------------------------------------------------------------------------

enum class Family { poisson, strauss, hard_sphere, soft_pair, local_relation };

// Conditional-intensity rule for local_relation families, applied to the
// number of ~-neighbors: hard -> 1{n == 0}, geometric -> gamma^n.
enum class LocalRule { hard, geometric };

// Relation kind for finite-range relations: fixed range r0, or the
// radius-marked germ-grain rule ||x-y|| <= m_x + m_y.
enum class RelationKind { fixed_range, radius_sum };

struct InteractionModel {
    Family family = Family::poisson;
    int dimension = 2;
    ReferenceMeasure reference;

    // strauss / hard_sphere
    double gamma = 0.0;
    double range = 1.0;

    // soft_pair kernel v(x,y) = beta * exp(-||x-y|| / ell)
    double soft_beta = 1.0;
    double soft_ell = 1.0;

    // local_relation
    LocalRule rule = LocalRule::hard;
    RelationKind relation = RelationKind::fixed_range;
    double local_range = 1.0;
    double local_gamma = 0.5;

    static InteractionModel poisson_model(int d, double alpha);
    static InteractionModel strauss_model(int d, double alpha, double gamma, double R);
    static InteractionModel hard_sphere_model(int d, double alpha, double R);
    static InteractionModel soft_pair_model(int d, double alpha, double beta, double ell);
    static InteractionModel local_relation_model(int d, double alpha, LocalRule rule, double r0,
                                                 double gamma = 0.5,
                                                 RelationKind rel = RelationKind::fixed_range);
};

InteractionModel validate_model(const InteractionModel& m);

bool has_pair_potential(const InteractionModel& m);
bool has_relation(const InteractionModel& m);

// Interaction range for grid sizing: finite range where defined, 0 for the
// Poisson model. Unbounded kernels report the radius where pi drops below
// eps; radius-marked relations with unbounded marks report nullopt.
std::optional<double> relation_range(const InteractionModel& m);
double pi_support_radius(const InteractionModel& m, double eps = 1e-14);
double default_cell_side(const InteractionModel& m);

// Pair potential v(x,y) in [0, +inf]; +inf encodes a hard core.
double potential_value(const InteractionModel& m, const MarkedPoint& x, const MarkedPoint& y);

// Connection kernel pi = 1 - exp(-v).
double connection_prob(const InteractionModel& m, const MarkedPoint& x, const MarkedPoint& y);

// Papangelou intensity kappa(x, pattern) in [0,1]; activity lives in the
// reference measure.
double papangelou(const InteractionModel& m, const MarkedPoint& x, const PointPattern& pattern);

// rho_nu(x) = prod_{y in nu} (1 - pi(x, y)).
double thinned_intensity(const InteractionModel& m, const MarkedPoint& x, const PointPattern& nu);

bool relation_holds(const InteractionModel& m, const MarkedPoint& x, const MarkedPoint& y);

// ---------------------------------------------------------------------------
// Boundary conditions
// ---------------------------------------------------------------------------

struct BoundaryConditions {
    PointPattern points;
};

// Points must lie outside the (open) window.
BoundaryConditions validate_boundary(const BoundaryConditions& b, const Window& window);

// Deterministic id for a fixed boundary point, from a reserved namespace so
// pair marks between Poisson points and boundary points are well defined.
PointId boundary_point_id(const Vec& position, std::optional<double> mark);

std::string family_name(Family f);

} // namespace gibbs
