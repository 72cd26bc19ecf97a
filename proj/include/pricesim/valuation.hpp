#pragma once

#include <optional>
#include <utility>

#include "pricesim/ellipsoid.hpp"
#include "pricesim/rng.hpp"

namespace pricesim {

enum class LinkKind { Identity, NaturalExp, LogisticSigmoid };
enum class FeatureMapKind { Identity, ElementwiseLog };
enum class NoiseFamily { None, Normal, Uniform };

/// Strictly increasing link g with its inverse and a Lipschitz constant on a
/// declared domain. All pricing decisions happen in the pre-link linear
/// space; only posted prices pass through g.
class LinkFunction {
public:
    static LinkFunction identity() { return LinkFunction(LinkKind::Identity); }
    static LinkFunction natural_exp() { return LinkFunction(LinkKind::NaturalExp); }
    static LinkFunction logistic_sigmoid() { return LinkFunction(LinkKind::LogisticSigmoid); }
    static LinkFunction of(LinkKind kind) { return LinkFunction(kind); }

    LinkKind kind() const { return kind_; }

    double forward(double z) const;
    double inverse(double y) const;

    /// Lipschitz constant of g on the declared domain.
    double lipschitz() const;

    /// Pre-link domain the Lipschitz declaration covers.
    std::pair<double, double> declared_domain() const { return {-30.0, 30.0}; }

    /// Inverse extended to the closure of g's range: values at or below the
    /// range infimum map to -inf, at or above the supremum to +inf. Used to
    /// bring posted-space reserve prices into the linear space.
    double inverse_clamped(double y) const;

private:
    explicit LinkFunction(LinkKind kind) : kind_(kind) {}
    LinkKind kind_;
};

/// phi(x); ElementwiseLog requires strictly positive coordinates.
Vector apply_feature_map(FeatureMapKind map, const Vector& x);

/// SubGaussian noise description: Pr(|d| > z) <= C exp(-z^2 / (2 sigma^2)).
struct NoiseSpec {
    NoiseFamily family = NoiseFamily::None;
    double sigma = 0.0;
    double tail_constant = 2.0; // C; the normal family satisfies the bound with C = 2

    /// One draw. Uniform is centered with standard deviation sigma, so its
    /// support is [-sqrt(3) sigma, sqrt(3) sigma].
    double sample(Substream& rng) const;

    /// Largest |draw| this family can produce (infinity for Normal).
    double support_bound() const;
};

/// The environment side: v = g(phi(x)' theta_star + noise).
struct MarketModel {
    Vector theta_star;
    LinkFunction link = LinkFunction::identity();
    FeatureMapKind feature_map = FeatureMapKind::Identity;
    NoiseSpec noise;
};

struct Feedback {
    bool accepted = false;
};

/// g(phi(x)' theta_star + noise_draw). The draw is supplied by the caller so
/// this stays deterministic.
double market_value(const MarketModel& model, const Vector& x, double noise_draw);

/// Pre-link market value phi(x)' theta_star (no noise, no link).
double linear_value(const MarketModel& model, const Vector& x);

/// Accepted iff price <= value (ties accept).
Feedback buyer_response(double value, double price);

/// sqrt(2 ln C) * sigma * ln T. Requires T >= 8 for the tail union bound.
double uncertainty_buffer(double sigma, double tail_constant, long total_rounds);

/// Regret of one round: 0 when reserve > value; full value when skipped or
/// rejected; value - price when sold.
double single_round_regret(double value, double reserve, std::optional<double> posted,
                           bool accepted);

} // namespace pricesim
