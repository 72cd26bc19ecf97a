#include "pricesim/market_sim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

namespace pricesim {

namespace {

// Substream ids; features and noise must never share a counter.
constexpr std::uint64_t kThetaStream = 1;
constexpr std::uint64_t kFeatureStream = 2;
constexpr std::uint64_t kNoiseStream = 3;

Vector normalized_or_throw(Vector x, const std::string& what) {
    const double norm = x.norm();
    if (!(norm > 0.0)) {
        throw DomainError(what + ": cannot normalize a zero feature vector");
    }
    return x / norm;
}

double positive_draw(Dist dist, Substream& rng) {
    // Pseudo compensations are payments, hence nonnegative.
    return dist == Dist::Uniform ? rng.next_uniform01() : std::abs(rng.next_normal());
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) {
        out.push_back(field);
    }
    if (!line.empty() && line.back() == ',') {
        out.emplace_back();
    }
    return out;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

} // namespace

QueryStream::QueryStream(const Scenario& scenario) : scenario_(scenario) {
    const auto* csv = std::get_if<CsvStream>(&scenario.feature_gen);
    if (!csv) {
        return;
    }
    std::ifstream in(csv->path);
    if (!in) {
        throw IngestError("cannot open query file " + csv->path);
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw IngestError(csv->path + ": missing header row");
    }
    auto header = split_csv_line(trim(line));
    bool has_reserve = !header.empty() && trim(header.back()) == "reserve";
    const std::size_t n_features = header.size() - (has_reserve ? 1 : 0);
    if (n_features != static_cast<std::size_t>(scenario.dim)) {
        throw IngestError(csv->path + ": header declares " + std::to_string(n_features) +
                          " features, scenario dimension is " + std::to_string(scenario.dim));
    }
    long line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty()) {
            continue;
        }
        auto fields = split_csv_line(t);
        if (fields.size() != header.size()) {
            throw IngestError(csv->path + ":" + std::to_string(line_no) + ": expected " +
                              std::to_string(header.size()) + " fields, got " +
                              std::to_string(fields.size()));
        }
        std::vector<double> row(n_features);
        try {
            for (std::size_t i = 0; i < n_features; ++i) {
                row[i] = std::stod(fields[i]);
            }
            csv_reserves_.push_back(has_reserve ? std::optional<double>(std::stod(fields.back()))
                                                : std::nullopt);
        } catch (const std::exception&) {
            throw IngestError(csv->path + ":" + std::to_string(line_no) + ": unparsable number");
        }
        csv_rows_.push_back(std::move(row));
    }
    if (csv_rows_.empty()) {
        throw IngestError(csv->path + ": no query rows");
    }
}

bool QueryStream::reserve_uses_oracle() const {
    return std::holds_alternative<ValueRatio>(scenario_.reserve_policy);
}

Vector QueryStream::features(long round) const {
    const int n = scenario_.dim;
    Substream rng(scenario_.seed, kFeatureStream, static_cast<std::uint64_t>(round));

    if (const auto* agg = std::get_if<AggregatedCompensations>(&scenario_.feature_gen)) {
        if (agg->raw_dim < n) {
            throw DomainError("aggregated compensations need raw_dim >= dim");
        }
        std::vector<double> comp(agg->raw_dim);
        for (auto& c : comp) {
            c = positive_draw(agg->raw_dist, rng);
        }
        std::sort(comp.begin(), comp.end());
        Vector x = Vector::Zero(n);
        // Even partition; the first (raw_dim mod n) groups take the extra item.
        const int base = agg->raw_dim / n, extra = agg->raw_dim % n;
        std::size_t pos = 0;
        for (int g = 0; g < n; ++g) {
            const int len = base + (g < extra ? 1 : 0);
            for (int k = 0; k < len; ++k) {
                x[g] += comp[pos++];
            }
        }
        return normalized_or_throw(std::move(x), "aggregated compensations");
    }
    if (const auto* ru = std::get_if<RandomUnit>(&scenario_.feature_gen)) {
        Vector x(n);
        do {
            for (int i = 0; i < n; ++i) {
                x[i] = ru->dist == Dist::Normal ? rng.next_normal() : rng.next_uniform(-1.0, 1.0);
            }
        } while (!(x.norm() > 0.0));
        return x / x.norm();
    }
    if (std::holds_alternative<CsvStream>(scenario_.feature_gen)) {
        const auto& row = csv_rows_[static_cast<std::size_t>((round - 1) % csv_rows_.size())];
        Vector x(n);
        for (int i = 0; i < n; ++i) {
            x[i] = row[static_cast<std::size_t>(i)];
        }
        return normalized_or_throw(std::move(x), "csv row");
    }
    if (n < 2) {
        throw DomainError("adversarial axes need dim >= 2");
    }
    Vector x = Vector::Zero(n);
    x[round <= scenario_.rounds / 2 ? 0 : 1] = 1.0;
    return x;
}

double QueryStream::reserve(long round, const Vector& x,
                            std::optional<double> midpoint_hint) const {
    if (std::holds_alternative<NoReserve>(scenario_.reserve_policy)) {
        if (std::holds_alternative<CsvStream>(scenario_.feature_gen)) {
            const auto& r = csv_reserves_[static_cast<std::size_t>((round - 1) % csv_rows_.size())];
            if (r.has_value()) {
                return *r;
            }
        }
        return 0.0;
    }
    if (std::holds_alternative<SumOfFeatures>(scenario_.reserve_policy)) {
        return std::max(0.0, x.sum());
    }
    if (const auto* vr = std::get_if<ValueRatio>(&scenario_.reserve_policy)) {
        const double z = linear_value(scenario_.model, x);
        return scenario_.model.link.forward(vr->rho * z);
    }
    if (round <= scenario_.rounds / 2) {
        if (!midpoint_hint.has_value()) {
            throw ProtocolError("midpoint reserve policy needs the mechanism midpoint");
        }
        return *midpoint_hint;
    }
    return 0.0;
}

Query QueryStream::generate_query(long round, std::optional<double> midpoint_hint) const {
    Query q;
    q.x = features(round);
    q.reserve = reserve(round, q.x, midpoint_hint);
    return q;
}

Vector sample_theta_star(int n, double norm, Dist dist, std::uint64_t seed) {
    if (n < 1 || !(norm > 0.0)) {
        throw DomainError("sample_theta_star requires n >= 1 and positive norm");
    }
    Substream rng(seed, kThetaStream, 0);
    Vector v(n);
    do {
        for (int i = 0; i < n; ++i) {
            v[i] = dist == Dist::Normal ? rng.next_normal() : rng.next_uniform(-1.0, 1.0);
        }
    } while (!(v.norm() > 0.0));
    return v * (norm / v.norm());
}

double noise_draw_for_round(const Scenario& scenario, long round) {
    Substream rng(scenario.seed, kNoiseStream, static_cast<std::uint64_t>(round));
    return scenario.model.noise.sample(rng);
}

namespace {

RunSummary summarize(const std::vector<RoundRecord>& records, long exploratory_rounds,
                     long guard_rejected, double total_mech_us) {
    RunSummary s;
    s.rounds = static_cast<long>(records.size());
    long posted = 0, accepted = 0;
    double posted_sum = 0.0;
    for (const auto& r : records) {
        s.cumulative_regret += r.regret;
        s.cumulative_value += r.value;
        if (r.kind == DecisionKind::Skip) {
            ++s.skip_rounds;
        } else {
            ++posted;
            posted_sum += r.posted.value_or(0.0);
            if (r.accepted) {
                ++accepted;
            }
        }
    }
    s.regret_ratio = s.cumulative_value > 0.0 ? s.cumulative_regret / s.cumulative_value : 0.0;
    s.exploratory_rounds = exploratory_rounds;
    s.acceptance_rate = posted > 0 ? static_cast<double>(accepted) / posted : 0.0;
    s.mean_posted_price = posted > 0 ? posted_sum / posted : 0.0;
    s.mean_decide_observe_us = s.rounds > 0 ? total_mech_us / s.rounds : 0.0;
    s.guard_rejected_cuts = guard_rejected;
    return s;
}

} // namespace

RunResult run_scenario(const Scenario& scenario, const MechanismConfig& config) {
    if (scenario.dim != config.dim) {
        throw ConfigError("scenario and mechanism dimensions differ");
    }
    if (scenario.rounds < 1) {
        throw ConfigError("scenario needs at least one round");
    }
    QueryStream stream(scenario);
    MechanismState state = new_state(config);
    const LinkFunction link = scenario.model.link;

    std::vector<RoundRecord> records;
    records.reserve(static_cast<std::size_t>(scenario.rounds));
    double mech_us = 0.0;
    using clock = std::chrono::steady_clock;

    for (long t = 1; t <= scenario.rounds; ++t) {
        try {
            Vector x = stream.features(t);
            Vector phi = apply_feature_map(scenario.model.feature_map, x);
            std::optional<double> midpoint;
            if (std::holds_alternative<MidpointFirstHalf>(scenario.reserve_policy)) {
                // Mechanism midpoint along today's direction, in posted space.
                const double mid_lin = state.is_interval()
                                           ? 0.5 * (state.interval().lower + state.interval().upper) *
                                                 phi[0]
                                           : phi.dot(state.ellipsoid().center());
                midpoint = link.forward(mid_lin);
            }
            Query query;
            query.x = x;
            query.reserve = stream.reserve(t, x, midpoint);
            const double noise = noise_draw_for_round(scenario, t);
            const double value = market_value(scenario.model, query.x, noise);

            const auto t0 = clock::now();
            PriceDecision decision = decide_price(config, state, phi, query.reserve);
            const auto t1 = clock::now();

            RoundRecord rec;
            rec.round = t;
            rec.kind = decision.kind;
            rec.reserve = query.reserve;
            rec.value = value;
            rec.knowledge_width = decision.bounds.width();

            Feedback feedback{false};
            if (decision.kind != DecisionKind::Skip) {
                rec.posted = decision.posted_price;
                feedback = buyer_response(value, decision.posted_price);
                rec.accepted = feedback.accepted;
            }
            const double effective_reserve = config.use_reserve ? query.reserve : 0.0;
            rec.regret = single_round_regret(value, effective_reserve, rec.posted, rec.accepted);

            const auto t2 = clock::now();
            state = observe(config, state, phi, query.reserve, decision, feedback);
            const auto t3 = clock::now();

            mech_us += std::chrono::duration<double, std::micro>((t1 - t0) + (t3 - t2)).count();
            records.push_back(std::move(rec));
        } catch (const Error& e) {
            throw RunAborted(std::string("scenario aborted: ") + e.what(), t, std::move(records));
        }
    }

    RunResult result;
    result.summary =
        summarize(records, state.exploratory_count, state.guard_rejected_cuts, mech_us);
    result.records = std::move(records);
    return result;
}

RunResult run_risk_averse_baseline(const Scenario& scenario) {
    const bool csv_gen = std::holds_alternative<CsvStream>(scenario.feature_gen);
    if (std::holds_alternative<NoReserve>(scenario.reserve_policy) && !csv_gen) {
        throw ConfigError("risk-averse baseline needs a reserve policy");
    }
    if (std::holds_alternative<MidpointFirstHalf>(scenario.reserve_policy)) {
        throw ConfigError("risk-averse baseline has no knowledge set to take a midpoint from");
    }
    QueryStream stream(scenario);
    std::vector<RoundRecord> records;
    records.reserve(static_cast<std::size_t>(scenario.rounds));
    for (long t = 1; t <= scenario.rounds; ++t) {
        Query query = stream.generate_query(t);
        const double noise = noise_draw_for_round(scenario, t);
        const double value = market_value(scenario.model, query.x, noise);
        Feedback fb = buyer_response(value, query.reserve);
        RoundRecord rec;
        rec.round = t;
        rec.kind = DecisionKind::Conservative;
        rec.posted = query.reserve;
        rec.reserve = query.reserve;
        rec.value = value;
        rec.accepted = fb.accepted;
        rec.regret = single_round_regret(value, query.reserve, rec.posted, rec.accepted);
        rec.knowledge_width = 0.0;
        records.push_back(rec);
    }
    RunResult result;
    result.summary = summarize(records, 0, 0, 0.0);
    result.records = std::move(records);
    return result;
}

const char* variant_name(Variant v) {
    switch (v) {
    case Variant::Pure:
        return "pure";
    case Variant::Uncertainty:
        return "uncertainty";
    case Variant::Reserve:
        return "reserve";
    case Variant::ReserveUncertainty:
        return "reserve-uncertainty";
    case Variant::Baseline:
        return "baseline";
    }
    return "unknown";
}

MechanismConfig variant_config(const MechanismConfig& base, Variant v) {
    MechanismConfig c = base;
    switch (v) {
    case Variant::Pure:
        c.use_reserve = false;
        c.delta = 0.0;
        break;
    case Variant::Uncertainty:
        c.use_reserve = false;
        break;
    case Variant::Reserve:
        c.use_reserve = true;
        c.delta = 0.0;
        break;
    case Variant::ReserveUncertainty:
        c.use_reserve = true;
        break;
    case Variant::Baseline:
        break;
    }
    return c;
}

std::vector<SweepCell> variant_sweep(const Scenario& scenario, const MechanismConfig& base,
                                     const std::vector<long>& t_grid,
                                     const std::vector<Variant>& variants) {
    std::vector<SweepCell> cells;
    for (long t : t_grid) {
        Scenario s = scenario;
        s.rounds = t;
        for (Variant v : variants) {
            RunSummary summary;
            if (v == Variant::Baseline) {
                summary = run_risk_averse_baseline(s).summary;
            } else {
                summary = run_scenario(s, variant_config(base, v)).summary;
            }
            cells.push_back(SweepCell{v, t, summary});
        }
    }
    return cells;
}

namespace {

Vector positive_theta(int n, double norm, std::uint64_t seed) {
    Vector v = sample_theta_star(n, norm, Dist::Normal, seed);
    return v.cwiseAbs() * (norm / v.cwiseAbs().norm());
}

} // namespace

ExperimentSetup linear_query_setup(int n, long rounds, std::uint64_t seed, double noise_sigma,
                                   double noise_tail_constant) {
    ExperimentSetup setup;
    const double nn = static_cast<double>(n);
    setup.scenario.name = "linear-query";
    setup.scenario.dim = n;
    setup.scenario.rounds = rounds;
    setup.scenario.feature_gen = AggregatedCompensations{20 * n, Dist::Uniform};
    setup.scenario.reserve_policy = SumOfFeatures{};
    setup.scenario.seed = seed;
    setup.scenario.model.theta_star = positive_theta(n, std::sqrt(2.0 * nn), seed);
    setup.scenario.model.link = LinkFunction::identity();
    setup.scenario.model.feature_map = FeatureMapKind::Identity;
    if (noise_sigma > 0.0) {
        setup.scenario.model.noise = NoiseSpec{NoiseFamily::Normal, noise_sigma, noise_tail_constant};
    }

    setup.mechanism.dim = n;
    setup.mechanism.knowledge_radius = 2.0 * std::sqrt(nn);
    setup.mechanism.feature_norm_bound = 1.0;
    setup.mechanism.epsilon = default_epsilon(n, rounds, 0.0); // n^2/T, the evaluation choice
    setup.mechanism.delta =
        noise_sigma > 0.0 ? uncertainty_buffer(noise_sigma, noise_tail_constant, rounds) : 0.0;
    setup.mechanism.link = LinkKind::Identity;
    setup.mechanism.total_rounds_hint = rounds;
    return setup;
}

ExperimentSetup loglinear_rental_setup(int n, long rounds, double rho, std::uint64_t seed) {
    ExperimentSetup setup;
    setup.scenario.name = "loglinear-rental";
    setup.scenario.dim = n;
    setup.scenario.rounds = rounds;
    setup.scenario.feature_gen = AggregatedCompensations{20 * n, Dist::Uniform};
    setup.scenario.reserve_policy = ValueRatio{rho};
    setup.scenario.seed = seed;
    // Mild log-value scale; matches the reported baseline ratios at rho ~ 0.6.
    setup.scenario.model.theta_star = positive_theta(n, 0.65, seed);
    setup.scenario.model.link = LinkFunction::natural_exp();
    setup.scenario.model.feature_map = FeatureMapKind::Identity;

    setup.mechanism.dim = n;
    setup.mechanism.knowledge_radius = 1.0;
    setup.mechanism.feature_norm_bound = 1.0;
    setup.mechanism.epsilon = default_epsilon(n, rounds, 0.0);
    setup.mechanism.delta = 0.0;
    setup.mechanism.link = LinkKind::NaturalExp;
    setup.mechanism.total_rounds_hint = rounds;
    return setup;
}

ExperimentSetup logistic_impression_setup(int n, long rounds, bool dense, std::uint64_t seed) {
    ExperimentSetup setup;
    const double nn = static_cast<double>(n);
    setup.scenario.name = dense ? "logistic-impression-dense" : "logistic-impression-sparse";
    setup.scenario.dim = n;
    setup.scenario.rounds = rounds;
    setup.scenario.feature_gen = RandomUnit{Dist::Normal};
    setup.scenario.reserve_policy = NoReserve{};
    setup.scenario.seed = seed;
    Vector theta = sample_theta_star(n, std::sqrt(2.0 * nn), Dist::Normal, seed);
    if (!dense) {
        // Sparse case: keep ~n/6 coordinates, rescale to the same norm.
        Substream rng(seed, 17, 0);
        int kept = 0;
        for (int i = 0; i < n; ++i) {
            if (rng.next_uniform01() > 1.0 / 6.0) {
                theta[i] = 0.0;
            } else {
                ++kept;
            }
        }
        if (kept == 0) {
            theta[0] = 1.0;
        }
        theta *= std::sqrt(2.0 * nn) / theta.norm();
    }
    setup.scenario.model.theta_star = theta;
    setup.scenario.model.link = LinkFunction::logistic_sigmoid();
    setup.scenario.model.feature_map = FeatureMapKind::Identity;

    setup.mechanism.dim = n;
    setup.mechanism.knowledge_radius = 2.0 * std::sqrt(nn);
    setup.mechanism.feature_norm_bound = 1.0;
    setup.mechanism.epsilon = default_epsilon(n, rounds, 0.0);
    setup.mechanism.delta = 0.0;
    setup.mechanism.use_reserve = false;
    setup.mechanism.link = LinkKind::LogisticSigmoid;
    setup.mechanism.total_rounds_hint = rounds;
    return setup;
}

ExperimentSetup adversarial_axes_setup(int n, long rounds, bool allow_conservative_cuts) {
    ExperimentSetup setup;
    setup.scenario.name = "adversarial-axes";
    setup.scenario.dim = n;
    setup.scenario.rounds = rounds;
    setup.scenario.feature_gen = AdversarialAxes{};
    setup.scenario.reserve_policy = MidpointFirstHalf{};
    setup.scenario.seed = 7;
    // Deterministic weights with positive mass on the two probed axes.
    Vector theta = Vector::Zero(n);
    theta[0] = 0.6;
    theta[1] = 0.6;
    setup.scenario.model.theta_star = theta;
    setup.scenario.model.link = LinkFunction::identity();
    setup.scenario.model.feature_map = FeatureMapKind::Identity;

    setup.mechanism.dim = n;
    setup.mechanism.knowledge_radius = 1.0;
    setup.mechanism.feature_norm_bound = 1.0;
    setup.mechanism.epsilon = default_epsilon(n, rounds, 0.0);
    setup.mechanism.delta = 0.0;
    setup.mechanism.use_reserve = true;
    setup.mechanism.allow_conservative_cuts = allow_conservative_cuts;
    setup.mechanism.link = LinkKind::Identity;
    setup.mechanism.total_rounds_hint = rounds;
    return setup;
}

} // namespace pricesim
