#pragma once

#include <cstdint>
#include <variant>

#include "pricesim/ellipsoid.hpp"
#include "pricesim/valuation.hpp"

namespace pricesim {

struct MechanismConfig {
    int dim = 0;
    double knowledge_radius = 1.0;   // R: initial knowledge ball radius
    double feature_norm_bound = 1.0; // S: ||x|| <= S for every query
    double epsilon = 0.0;            // exploration threshold on upper - lower
    double delta = 0.0;              // uncertainty buffer
    bool use_reserve = true;
    bool allow_conservative_cuts = false; // adversarial demonstration only
    LinkKind link = LinkKind::Identity;
    long total_rounds_hint = 0;

    /// Throws ConfigError on invalid fields. Returns true when the
    /// Lemma-7 precondition epsilon >= 4 n delta holds (callers may warn
    /// when it does not; the run is still legal).
    bool validate() const;
};

/// One-dimensional knowledge set; the n = 1 specialization of the mechanism.
struct IntervalKnowledge {
    double lower = 0.0;
    double upper = 0.0;
};

struct MechanismState {
    std::variant<IntervalKnowledge, Ellipsoid> knowledge;
    long round = 0;
    long exploratory_count = 0;
    // Rounds where the guard range (or a flat direction) blocked a knowledge
    // update; surfaced in run metadata.
    long guard_rejected_cuts = 0;

    bool is_interval() const { return std::holds_alternative<IntervalKnowledge>(knowledge); }
    const IntervalKnowledge& interval() const { return std::get<IntervalKnowledge>(knowledge); }
    const Ellipsoid& ellipsoid() const { return std::get<Ellipsoid>(knowledge); }
};

enum class DecisionKind { Skip, Exploratory, Conservative };

struct PriceDecision {
    DecisionKind kind = DecisionKind::Skip;
    double posted_price = 0.0; // NaN for Skip
    double linear_price = 0.0; // pre-link price; NaN for Skip
    SupportBounds bounds;      // snapshot at decision time
};

/// Fresh state: ball of radius R for n >= 2, interval [-R, R] for n = 1.
MechanismState new_state(const MechanismConfig& config);

/// Chooses the posted price for query (x, reserve). Read-only on the state.
/// Reserve prices live in posted space and are mapped through the link
/// inverse before any comparison with the linear bounds.
PriceDecision decide_price(const MechanismConfig& config, const MechanismState& state,
                           const Vector& x, double reserve);

/// Folds the buyer's feedback into the knowledge set and returns the next
/// state. The decision must have been produced by decide_price from this
/// exact state and query, otherwise ProtocolError.
MechanismState observe(const MechanismConfig& config, const MechanismState& state,
                       const Vector& x, double reserve, const PriceDecision& decision,
                       Feedback feedback);

/// 20 n^2 ln(20 R S^2 (n+1) / epsilon), the exploratory-round budget (n >= 2).
double exploratory_round_bound(int n, double radius, double feature_norm_bound, double epsilon);

/// log2(2 R S / epsilon), the bisection budget for the n = 1 case.
double bisection_round_bound(double radius, double feature_norm_bound, double epsilon);

/// Default exploration threshold: floor(log2(T))/T for n = 1,
/// max(n^2/T, 4 n delta) for n >= 2.
double default_epsilon(int n, long total_rounds, double delta);

} // namespace pricesim
