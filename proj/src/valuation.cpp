#include "pricesim/valuation.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace pricesim {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

double LinkFunction::forward(double z) const {
    switch (kind_) {
    case LinkKind::Identity:
        return z;
    case LinkKind::NaturalExp:
        return std::exp(z);
    case LinkKind::LogisticSigmoid:
        return 1.0 / (1.0 + std::exp(-z));
    }
    throw DomainError("unknown link kind");
}

double LinkFunction::inverse(double y) const {
    switch (kind_) {
    case LinkKind::Identity:
        return y;
    case LinkKind::NaturalExp:
        if (!(y > 0.0)) {
            throw DomainError("natural-exp link inverse requires y > 0");
        }
        return std::log(y);
    case LinkKind::LogisticSigmoid:
        if (!(y > 0.0 && y < 1.0)) {
            throw DomainError("logistic link inverse requires y in (0, 1)");
        }
        return std::log(y / (1.0 - y));
    }
    throw DomainError("unknown link kind");
}

double LinkFunction::inverse_clamped(double y) const {
    switch (kind_) {
    case LinkKind::Identity:
        return y;
    case LinkKind::NaturalExp:
        return y > 0.0 ? std::log(y) : -kInf;
    case LinkKind::LogisticSigmoid:
        if (y <= 0.0) return -kInf;
        if (y >= 1.0) return kInf;
        return std::log(y / (1.0 - y));
    }
    throw DomainError("unknown link kind");
}

double LinkFunction::lipschitz() const {
    switch (kind_) {
    case LinkKind::Identity:
        return 1.0;
    case LinkKind::NaturalExp:
        // sup of exp' over the declared domain [-30, 30]
        return std::exp(declared_domain().second);
    case LinkKind::LogisticSigmoid:
        return 0.25;
    }
    throw DomainError("unknown link kind");
}

Vector apply_feature_map(FeatureMapKind map, const Vector& x) {
    if (map == FeatureMapKind::Identity) {
        return x;
    }
    Vector out(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0)) {
            throw DomainError("elementwise-log feature map requires strictly positive "
                              "coordinates; coordinate " +
                              std::to_string(i) + " is " + std::to_string(x[i]));
        }
        out[i] = std::log(x[i]);
    }
    return out;
}

double NoiseSpec::sample(Substream& rng) const {
    switch (family) {
    case NoiseFamily::None:
        return 0.0;
    case NoiseFamily::Normal:
        return sigma * rng.next_normal();
    case NoiseFamily::Uniform: {
        const double half = std::sqrt(3.0) * sigma;
        return rng.next_uniform(-half, half);
    }
    }
    throw DomainError("unknown noise family");
}

double NoiseSpec::support_bound() const {
    switch (family) {
    case NoiseFamily::None:
        return 0.0;
    case NoiseFamily::Normal:
        return kInf;
    case NoiseFamily::Uniform:
        return std::sqrt(3.0) * sigma;
    }
    throw DomainError("unknown noise family");
}

double linear_value(const MarketModel& model, const Vector& x) {
    Vector phi = apply_feature_map(model.feature_map, x);
    if (phi.size() != model.theta_star.size()) {
        throw InvalidDimension("feature dimension does not match theta_star");
    }
    return phi.dot(model.theta_star);
}

double market_value(const MarketModel& model, const Vector& x, double noise_draw) {
    return model.link.forward(linear_value(model, x) + noise_draw);
}

Feedback buyer_response(double value, double price) { return Feedback{price <= value}; }

double uncertainty_buffer(double sigma, double tail_constant, long total_rounds) {
    if (sigma < 0.0) {
        throw DomainError("noise parameter sigma must be nonnegative");
    }
    if (tail_constant < 1.0) {
        throw DomainError("tail constant C must be >= 1");
    }
    if (total_rounds < 8) {
        throw DomainError("uncertainty buffer bound requires T >= 8");
    }
    if (sigma == 0.0 || tail_constant == 1.0) {
        return 0.0;
    }
    return std::sqrt(2.0 * std::log(tail_constant)) * sigma *
           std::log(static_cast<double>(total_rounds));
}

double single_round_regret(double value, double reserve, std::optional<double> posted,
                           bool accepted) {
    if (reserve > value) {
        return 0.0;
    }
    if (!posted.has_value() || !accepted) {
        return value;
    }
    return std::max(0.0, value - *posted);
}

} // namespace pricesim
