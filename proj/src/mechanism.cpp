#include "pricesim/mechanism.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace pricesim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
constexpr double kNormSlack = 1e-9;

bool close(double a, double b) {
    return std::abs(a - b) <= 1e-9 * std::max({std::abs(a), std::abs(b), 1.0});
}

// Support of x'theta over the current knowledge set. A direction along which
// the ellipsoid is numerically flat collapses to a zero-width interval at the
// center projection: the value is known exactly, nothing is left to refine.
SupportBounds knowledge_support(const MechanismState& state, const Vector& x) {
    if (state.is_interval()) {
        const auto& iv = state.interval();
        const double x0 = x[0];
        const double a = x0 * iv.lower;
        const double b = x0 * iv.upper;
        return SupportBounds{std::min(a, b), std::max(a, b), 0.5 * std::abs(b - a)};
    }
    const Ellipsoid& ell = state.ellipsoid();
    const double q = ell.quad_form(x);
    if (!(q > kFlatDirectionFloor)) {
        const double m = x.dot(ell.center());
        return SupportBounds{m, m, 0.0};
    }
    return ell.support_bounds(x);
}

// Reserve price mapped into the linear (pre-link) space; -inf when the
// reserve is ignored or sits below the link's range.
double linear_reserve(const MechanismConfig& config, double reserve) {
    if (!config.use_reserve) {
        return -kInf;
    }
    return LinkFunction::of(config.link).inverse_clamped(reserve);
}

DecisionKind expected_kind(const MechanismConfig& config, const SupportBounds& bounds,
                           double q_lin) {
    if (config.use_reserve && q_lin >= bounds.upper + config.delta) {
        return DecisionKind::Skip;
    }
    if (bounds.width() > config.epsilon) {
        return DecisionKind::Exploratory;
    }
    return DecisionKind::Conservative;
}

} // namespace

bool MechanismConfig::validate() const {
    if (dim < 1) {
        throw ConfigError("mechanism dimension must be >= 1, got " + std::to_string(dim));
    }
    if (!(knowledge_radius > 0.0)) {
        throw ConfigError("knowledge radius R must be positive");
    }
    if (!(feature_norm_bound > 0.0)) {
        throw ConfigError("feature norm bound S must be positive");
    }
    if (!(epsilon > 0.0)) {
        throw ConfigError("exploration threshold epsilon must be positive");
    }
    if (delta < 0.0) {
        throw ConfigError("uncertainty buffer delta must be nonnegative");
    }
    return !(delta > 0.0 && epsilon < 4.0 * dim * delta);
}

MechanismState new_state(const MechanismConfig& config) {
    config.validate();
    MechanismState state;
    if (config.dim == 1) {
        state.knowledge = IntervalKnowledge{-config.knowledge_radius, config.knowledge_radius};
    } else {
        state.knowledge = Ellipsoid::ball(config.dim, config.knowledge_radius);
    }
    return state;
}

PriceDecision decide_price(const MechanismConfig& config, const MechanismState& state,
                           const Vector& x, double reserve) {
    if (x.size() != config.dim) {
        throw InvalidDimension("query dimension does not match mechanism");
    }
    if (x.norm() > config.feature_norm_bound + kNormSlack) {
        throw FeatureNormError("feature norm " + std::to_string(x.norm()) +
                               " exceeds bound S = " + std::to_string(config.feature_norm_bound));
    }
    if (x.isZero(0.0)) {
        throw DegenerateDirection("query feature vector is zero");
    }
    const double q_lin = linear_reserve(config, reserve);
    const SupportBounds bounds = knowledge_support(state, x);
    const LinkFunction link = LinkFunction::of(config.link);

    PriceDecision decision;
    decision.bounds = bounds;
    decision.kind = expected_kind(config, bounds, q_lin);
    switch (decision.kind) {
    case DecisionKind::Skip:
        decision.linear_price = kNan;
        decision.posted_price = kNan;
        break;
    case DecisionKind::Exploratory:
        decision.linear_price = std::max(q_lin, bounds.midpoint());
        decision.posted_price = link.forward(decision.linear_price);
        break;
    case DecisionKind::Conservative:
        decision.linear_price = std::max(q_lin, bounds.lower - config.delta);
        decision.posted_price = link.forward(decision.linear_price);
        break;
    }
    return decision;
}

namespace {

// Applies the feedback cut to an ellipsoid state. Returns false when the
// guard range (or numerical flatness) blocks the update.
bool apply_ellipsoid_cut(const MechanismConfig& config, Ellipsoid& ell, const Vector& x,
                         double linear_price, bool accepted) {
    const double n = static_cast<double>(config.dim);
    const double q = ell.quad_form(x);
    if (!(q > kFlatDirectionFloor)) {
        return false;
    }
    const double h = std::sqrt(q);
    const double mid = x.dot(ell.center());
    if (!accepted) {
        // Effective price p + delta; retained halfspace x'theta <= p + delta.
        const double alpha = (mid - (linear_price + config.delta)) / h;
        const double hi = config.delta > 0.0 ? 1.0 : 0.0; // Alg. 2 wide vs Alg. 1 narrow guard
        if (alpha < -1.0 / n || alpha > hi || alpha >= 1.0 - kCutDegeneracyMargin) {
            return false;
        }
        ell = ell.cut(x, alpha, CutSide::RetainBelow);
        return true;
    }
    // Effective price p - delta; retained halfspace x'theta >= p - delta.
    const double alpha = (mid - (linear_price - config.delta)) / h;
    const double neg = -alpha;
    if (neg < -1.0 / n || neg >= 1.0 - kCutDegeneracyMargin) {
        return false;
    }
    ell = ell.cut(x, alpha, CutSide::RetainAbove);
    return true;
}

// One-dimensional endpoint replacement with the effective price, clamped so
// the interval never inverts.
bool apply_interval_cut(const MechanismConfig& config, IntervalKnowledge& iv, double x0,
                        double linear_price, bool accepted) {
    if (x0 == 0.0) {
        return false;
    }
    if (!accepted) {
        const double bound = (linear_price + config.delta) / x0;
        if (x0 > 0.0) {
            iv.upper = std::max(std::min(iv.upper, bound), iv.lower);
        } else {
            iv.lower = std::min(std::max(iv.lower, bound), iv.upper);
        }
    } else {
        const double bound = (linear_price - config.delta) / x0;
        if (x0 > 0.0) {
            iv.lower = std::min(std::max(iv.lower, bound), iv.upper);
        } else {
            iv.upper = std::max(std::min(iv.upper, bound), iv.lower);
        }
    }
    return true;
}

} // namespace

MechanismState observe(const MechanismConfig& config, const MechanismState& state,
                       const Vector& x, double reserve, const PriceDecision& decision,
                       Feedback feedback) {
    if (x.size() != config.dim) {
        throw InvalidDimension("query dimension does not match mechanism");
    }
    const double q_lin = linear_reserve(config, reserve);
    const SupportBounds bounds = knowledge_support(state, x);
    if (!close(bounds.lower, decision.bounds.lower) || !close(bounds.upper, decision.bounds.upper) ||
        decision.kind != expected_kind(config, bounds, q_lin)) {
        throw ProtocolError("decision does not match the current state and query");
    }

    MechanismState next = state;
    next.round = state.round + 1;
    if (decision.kind == DecisionKind::Skip) {
        return next;
    }
    if (decision.kind == DecisionKind::Exploratory) {
        next.exploratory_count = state.exploratory_count + 1;
    }
    const bool cut_allowed =
        decision.kind == DecisionKind::Exploratory || config.allow_conservative_cuts;
    if (!cut_allowed) {
        return next;
    }

    bool applied = false;
    if (next.is_interval()) {
        applied = apply_interval_cut(config, std::get<IntervalKnowledge>(next.knowledge), x[0],
                                     decision.linear_price, feedback.accepted);
    } else {
        applied = apply_ellipsoid_cut(config, std::get<Ellipsoid>(next.knowledge), x,
                                      decision.linear_price, feedback.accepted);
    }
    if (!applied) {
        next.guard_rejected_cuts = state.guard_rejected_cuts + 1;
    }
    return next;
}

double exploratory_round_bound(int n, double radius, double feature_norm_bound, double epsilon) {
    if (n < 2 || !(radius > 0.0) || !(feature_norm_bound > 0.0) || !(epsilon > 0.0)) {
        throw DomainError("exploratory_round_bound requires n >= 2 and positive R, S, epsilon");
    }
    const double nn = static_cast<double>(n);
    return 20.0 * nn * nn *
           std::log(20.0 * radius * feature_norm_bound * feature_norm_bound * (nn + 1.0) / epsilon);
}

double bisection_round_bound(double radius, double feature_norm_bound, double epsilon) {
    if (!(radius > 0.0) || !(feature_norm_bound > 0.0) || !(epsilon > 0.0)) {
        throw DomainError("bisection_round_bound requires positive R, S, epsilon");
    }
    return std::log2(2.0 * radius * feature_norm_bound / epsilon);
}

double default_epsilon(int n, long total_rounds, double delta) {
    if (n < 1 || total_rounds < 2) {
        throw DomainError("default_epsilon requires n >= 1 and T >= 2");
    }
    const double t = static_cast<double>(total_rounds);
    if (n == 1) {
        return std::floor(std::log2(t)) / t;
    }
    return std::max(static_cast<double>(n) * n / t, 4.0 * n * delta);
}

} // namespace pricesim
