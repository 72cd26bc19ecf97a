#include "pricesim.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include "pricesim/config.hpp"
#include "pricesim/experiment.hpp"
#include "pricesim/market_sim.hpp"
#include "pricesim/mechanism.hpp"

using namespace pricesim;

extern "C" {
struct ps_mechanism {
    MechanismConfig config;
    MechanismState state;
};
}

namespace {

thread_local std::string t_last_error = "ok";

ps_status fail(ps_status code, const std::string& message) {
    t_last_error = message;
    return code;
}

template <typename Fn> ps_status guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const ConfigError& e) {
        return fail(PS_ERR_CONFIG, e.what());
    } catch (const IngestError& e) {
        return fail(PS_ERR_CONFIG, e.what());
    } catch (const Error& e) {
        return fail(PS_ERR_RUNTIME, e.what());
    } catch (const std::exception& e) {
        return fail(PS_ERR_RUNTIME, e.what());
    }
}

Vector to_vector(const double* data, int32_t dim) {
    Vector v(dim);
    std::memcpy(v.data(), data, sizeof(double) * static_cast<std::size_t>(dim));
    return v;
}

PriceDecision from_c(const ps_price_decision& d) {
    PriceDecision out;
    out.kind = static_cast<DecisionKind>(d.kind);
    out.posted_price = d.posted_price;
    out.linear_price = d.linear_price;
    out.bounds = SupportBounds{d.lower_bound, d.upper_bound, d.halfwidth};
    return out;
}

void to_c(const PriceDecision& d, ps_price_decision* out) {
    out->kind = static_cast<int32_t>(d.kind);
    out->posted_price = d.posted_price;
    out->linear_price = d.linear_price;
    out->lower_bound = d.bounds.lower;
    out->upper_bound = d.bounds.upper;
    out->halfwidth = d.bounds.halfwidth;
}

} // namespace

extern "C" {

const char* ps_last_error(void) { return t_last_error.c_str(); }

ps_status ps_mechanism_create(const ps_mechanism_params* params, ps_mechanism** out) {
    if (!params || !out) {
        return fail(PS_ERR_INVALID_ARGUMENT, "null argument");
    }
    return guarded([&]() -> ps_status {
        MechanismConfig cfg;
        cfg.dim = params->dim;
        cfg.knowledge_radius = params->knowledge_radius;
        cfg.feature_norm_bound = params->feature_norm_bound;
        cfg.delta = params->delta;
        cfg.use_reserve = params->use_reserve != 0;
        cfg.allow_conservative_cuts = params->allow_conservative_cuts != 0;
        if (params->link < 0 || params->link > 2) {
            return fail(PS_ERR_INVALID_ARGUMENT, "unknown link kind");
        }
        cfg.link = static_cast<LinkKind>(params->link);
        cfg.total_rounds_hint = params->total_rounds_hint;
        cfg.epsilon = params->epsilon > 0.0
                          ? params->epsilon
                          : default_epsilon(cfg.dim, std::max<long>(cfg.total_rounds_hint, 2),
                                            cfg.delta);
        auto* mech = new ps_mechanism{cfg, new_state(cfg)};
        *out = mech;
        return PS_OK;
    });
}

void ps_mechanism_destroy(ps_mechanism* mech) { delete mech; }

ps_status ps_mechanism_decide(const ps_mechanism* mech, const double* features, int32_t dim,
                              double reserve, ps_price_decision* out) {
    if (!mech || !features || !out || dim != mech->config.dim) {
        return fail(PS_ERR_INVALID_ARGUMENT, "null argument or dimension mismatch");
    }
    return guarded([&]() -> ps_status {
        PriceDecision d = decide_price(mech->config, mech->state, to_vector(features, dim), reserve);
        to_c(d, out);
        return PS_OK;
    });
}

ps_status ps_mechanism_observe(ps_mechanism* mech, const double* features, int32_t dim,
                               double reserve, const ps_price_decision* decision,
                               int32_t accepted) {
    if (!mech || !features || !decision || dim != mech->config.dim) {
        return fail(PS_ERR_INVALID_ARGUMENT, "null argument or dimension mismatch");
    }
    return guarded([&]() -> ps_status {
        mech->state = observe(mech->config, mech->state, to_vector(features, dim), reserve,
                              from_c(*decision), Feedback{accepted != 0});
        return PS_OK;
    });
}

ps_status ps_mechanism_round(const ps_mechanism* mech, int64_t* out) {
    if (!mech || !out) {
        return fail(PS_ERR_INVALID_ARGUMENT, "null argument");
    }
    *out = mech->state.round;
    return PS_OK;
}

ps_status ps_mechanism_exploratory_rounds(const ps_mechanism* mech, int64_t* out) {
    if (!mech || !out) {
        return fail(PS_ERR_INVALID_ARGUMENT, "null argument");
    }
    *out = mech->state.exploratory_count;
    return PS_OK;
}

ps_status ps_mechanism_contains(const ps_mechanism* mech, const double* theta, int32_t dim,
                                int32_t* out) {
    if (!mech || !theta || !out || dim != mech->config.dim) {
        return fail(PS_ERR_INVALID_ARGUMENT, "null argument or dimension mismatch");
    }
    return guarded([&]() -> ps_status {
        if (mech->state.is_interval()) {
            const auto& iv = mech->state.interval();
            *out = theta[0] >= iv.lower - 1e-12 && theta[0] <= iv.upper + 1e-12 ? 1 : 0;
        } else {
            *out = mech->state.ellipsoid().contains(to_vector(theta, dim)) ? 1 : 0;
        }
        return PS_OK;
    });
}

ps_status ps_exploratory_round_bound(int32_t n, double knowledge_radius,
                                     double feature_norm_bound, double epsilon, double* out) {
    if (!out) {
        return fail(PS_ERR_INVALID_ARGUMENT, "null argument");
    }
    return guarded([&]() -> ps_status {
        *out = exploratory_round_bound(n, knowledge_radius, feature_norm_bound, epsilon);
        return PS_OK;
    });
}

ps_status ps_default_epsilon(int32_t n, int64_t total_rounds, double delta, double* out) {
    if (!out) {
        return fail(PS_ERR_INVALID_ARGUMENT, "null argument");
    }
    return guarded([&]() -> ps_status {
        *out = default_epsilon(n, static_cast<long>(total_rounds), delta);
        return PS_OK;
    });
}

ps_status ps_run_experiment(const char* config_path, const char* output_dir, int32_t emit_trace) {
    if (!config_path) {
        return fail(PS_ERR_INVALID_ARGUMENT, "null config path");
    }
    return guarded([&]() -> ps_status {
        std::ifstream in(config_path);
        if (!in) {
            return fail(PS_ERR_CONFIG, std::string("cannot open config file ") + config_path);
        }
        std::stringstream buffer;
        buffer << in.rdbuf();
        ExperimentConfig cfg = parse_config(buffer.str());
        if (output_dir) {
            cfg.output_dir = output_dir;
        }
        if (emit_trace >= 0) {
            cfg.emit_trace = emit_trace != 0;
        }
        run_experiment(cfg);
        return PS_OK;
    });
}

ps_status ps_run_adversary_demo(int32_t n, int64_t total_rounds,
                                int32_t allow_conservative_cuts, ps_adversary_result* out) {
    if (!out) {
        return fail(PS_ERR_INVALID_ARGUMENT, "null argument");
    }
    if (n < 2 || total_rounds < 4) {
        return fail(PS_ERR_INVALID_ARGUMENT, "adversary demo needs n >= 2 and T >= 4");
    }
    return guarded([&]() -> ps_status {
        const long t_full = static_cast<long>(total_rounds);
        const long t_half = t_full / 2;
        auto half = adversarial_axes_setup(n, t_half, allow_conservative_cuts != 0);
        auto full = adversarial_axes_setup(n, t_full, allow_conservative_cuts != 0);
        RunSummary sh = run_scenario(half.scenario, half.mechanism).summary;
        RunSummary sf = run_scenario(full.scenario, full.mechanism).summary;
        out->regret_half = sh.cumulative_regret;
        out->regret_full = sf.cumulative_regret;
        out->growth_ratio = sh.cumulative_regret > 0.0
                                ? sf.cumulative_regret / sh.cumulative_regret
                                : std::numeric_limits<double>::infinity();
        out->exploratory_half = sh.exploratory_rounds;
        out->exploratory_full = sf.exploratory_rounds;
        return PS_OK;
    });
}

} // extern "C"
