#include "pricesim/config.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

namespace pricesim {

namespace {

const std::set<std::string> kKnownKeys = {
    "scenario.name",          "scenario.dim",        "scenario.rounds",
    "scenario.seed",          "scenario.feature_gen", "scenario.reserve_policy",
    "scenario.link",          "scenario.feature_map", "scenario.theta_norm",
    "scenario.noise_sigma",   "scenario.noise_C",     "mechanism.epsilon",
    "mechanism.delta",        "mechanism.R",          "mechanism.S",
    "mechanism.use_reserve",  "mechanism.allow_conservative_cuts",
    "output.dir",             "output.trace",         "output.repeats",
};

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

class KeyValues {
public:
    explicit KeyValues(const std::string& text) {
        std::stringstream in(text);
        std::string line;
        int line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            const auto hash = line.find('#');
            if (hash != std::string::npos) {
                line = line.substr(0, hash);
            }
            line = trim(line);
            if (line.empty()) {
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos) {
                throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
            }
            const std::string key = trim(line.substr(0, eq));
            const std::string value = trim(line.substr(eq + 1));
            if (!kKnownKeys.count(key)) {
                throw ConfigError("unknown config key '" + key + "'");
            }
            if (values_.count(key)) {
                throw ConfigError("duplicate config key '" + key + "'");
            }
            values_[key] = value;
        }
    }

    bool has(const std::string& key) const { return values_.count(key) > 0; }

    std::string str(const std::string& key, const std::string& fallback) const {
        auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }

    std::string required(const std::string& key) const {
        auto it = values_.find(key);
        if (it == values_.end()) {
            throw ConfigError("missing required config key '" + key + "'");
        }
        return it->second;
    }

    long integer(const std::string& key, long fallback) const {
        if (!has(key)) return fallback;
        return parse_integer(key, values_.at(key));
    }

    long required_integer(const std::string& key) const {
        return parse_integer(key, required(key));
    }

    double real(const std::string& key, double fallback) const {
        if (!has(key)) return fallback;
        const std::string& v = values_.at(key);
        try {
            std::size_t pos = 0;
            double out = std::stod(v, &pos);
            if (pos != v.size()) throw std::invalid_argument(v);
            return out;
        } catch (const std::exception&) {
            throw ConfigError("key '" + key + "': expected a number, got '" + v + "'");
        }
    }

    bool boolean(const std::string& key, bool fallback) const {
        if (!has(key)) return fallback;
        const std::string& v = values_.at(key);
        if (v == "true" || v == "1") return true;
        if (v == "false" || v == "0") return false;
        throw ConfigError("key '" + key + "': expected true/false, got '" + v + "'");
    }

private:
    long parse_integer(const std::string& key, const std::string& v) const {
        try {
            std::size_t pos = 0;
            long out = std::stol(v, &pos);
            if (pos != v.size()) throw std::invalid_argument(v);
            return out;
        } catch (const std::exception&) {
            throw ConfigError("key '" + key + "': expected an integer, got '" + v + "'");
        }
    }

    std::map<std::string, std::string> values_;
};

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string part;
    std::stringstream ss(s);
    while (std::getline(ss, part, sep)) {
        out.push_back(part);
    }
    return out;
}

Dist parse_dist(const std::string& key, const std::string& v) {
    if (v == "normal") return Dist::Normal;
    if (v == "uniform") return Dist::Uniform;
    throw ConfigError("key '" + key + "': unknown distribution '" + v + "'");
}

FeatureGenSpec parse_feature_gen(const std::string& v, int dim) {
    auto parts = split(v, ':');
    const std::string& head = parts[0];
    if (head == "aggregated") {
        if (parts.size() != 3) {
            throw ConfigError("scenario.feature_gen: aggregated needs aggregated:<raw_dim>:<dist>");
        }
        int raw_dim = 0;
        try {
            raw_dim = std::stoi(parts[1]);
        } catch (const std::exception&) {
            throw ConfigError("scenario.feature_gen: bad raw_dim '" + parts[1] + "'");
        }
        if (raw_dim < dim) {
            throw ConfigError("scenario.feature_gen: raw_dim must be >= scenario.dim");
        }
        return AggregatedCompensations{raw_dim, parse_dist("scenario.feature_gen", parts[2])};
    }
    if (head == "random-unit") {
        if (parts.size() != 2) {
            throw ConfigError("scenario.feature_gen: random-unit needs random-unit:<dist>");
        }
        return RandomUnit{parse_dist("scenario.feature_gen", parts[1])};
    }
    if (head == "csv") {
        if (parts.size() < 2 || parts[1].empty()) {
            throw ConfigError("scenario.feature_gen: csv needs csv:<path>");
        }
        // Re-join in case the path contains ':'.
        std::string path = v.substr(4);
        return CsvStream{path};
    }
    if (head == "adversarial-axes") {
        if (dim < 2) {
            throw ConfigError("scenario.feature_gen: adversarial-axes needs scenario.dim >= 2");
        }
        return AdversarialAxes{};
    }
    throw ConfigError("scenario.feature_gen: unknown generator '" + head + "'");
}

ReservePolicy parse_reserve_policy(const std::string& v) {
    auto parts = split(v, ':');
    const std::string& head = parts[0];
    if (head == "none") return NoReserve{};
    if (head == "sum-of-features") return SumOfFeatures{};
    if (head == "value-ratio") {
        if (parts.size() != 2) {
            throw ConfigError("scenario.reserve_policy: value-ratio needs value-ratio:<rho>");
        }
        double rho = 0.0;
        try {
            rho = std::stod(parts[1]);
        } catch (const std::exception&) {
            throw ConfigError("scenario.reserve_policy: bad rho '" + parts[1] + "'");
        }
        if (!(rho > 0.0 && rho < 1.0)) {
            throw ConfigError("scenario.reserve_policy: rho must be in (0, 1)");
        }
        return ValueRatio{rho};
    }
    if (head == "midpoint-first-half") return MidpointFirstHalf{};
    throw ConfigError("scenario.reserve_policy: unknown policy '" + v + "'");
}

LinkKind parse_link(const std::string& v) {
    if (v == "identity") return LinkKind::Identity;
    if (v == "natural-exp") return LinkKind::NaturalExp;
    if (v == "logistic-sigmoid") return LinkKind::LogisticSigmoid;
    throw ConfigError("scenario.link: unknown link '" + v + "'");
}

FeatureMapKind parse_feature_map(const std::string& v) {
    if (v == "identity") return FeatureMapKind::Identity;
    if (v == "elementwise-log") return FeatureMapKind::ElementwiseLog;
    throw ConfigError("scenario.feature_map: unknown map '" + v + "'");
}

std::string format_real(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string feature_gen_text(const FeatureGenSpec& spec) {
    if (const auto* agg = std::get_if<AggregatedCompensations>(&spec)) {
        return "aggregated:" + std::to_string(agg->raw_dim) + ":" +
               (agg->raw_dist == Dist::Normal ? "normal" : "uniform");
    }
    if (const auto* ru = std::get_if<RandomUnit>(&spec)) {
        return std::string("random-unit:") + (ru->dist == Dist::Normal ? "normal" : "uniform");
    }
    if (const auto* csv = std::get_if<CsvStream>(&spec)) {
        return "csv:" + csv->path;
    }
    return "adversarial-axes";
}

std::string reserve_policy_text(const ReservePolicy& policy) {
    if (std::holds_alternative<NoReserve>(policy)) return "none";
    if (std::holds_alternative<SumOfFeatures>(policy)) return "sum-of-features";
    if (const auto* vr = std::get_if<ValueRatio>(&policy)) {
        return "value-ratio:" + format_real(vr->rho);
    }
    return "midpoint-first-half";
}

std::string link_text(LinkKind link) {
    switch (link) {
    case LinkKind::Identity:
        return "identity";
    case LinkKind::NaturalExp:
        return "natural-exp";
    case LinkKind::LogisticSigmoid:
        return "logistic-sigmoid";
    }
    return "identity";
}

} // namespace

ExperimentConfig parse_config(const std::string& text) {
    KeyValues kv(text);
    ExperimentConfig cfg;

    cfg.scenario.name = kv.str("scenario.name", "experiment");
    const long dim = kv.required_integer("scenario.dim");
    if (dim < 1) {
        throw ConfigError("scenario.dim: must be >= 1");
    }
    cfg.scenario.dim = static_cast<int>(dim);
    cfg.scenario.rounds = kv.required_integer("scenario.rounds");
    if (cfg.scenario.rounds < 1) {
        throw ConfigError("scenario.rounds: must be >= 1");
    }
    const long seed = kv.required_integer("scenario.seed");
    if (seed < 0) {
        throw ConfigError("scenario.seed: must be nonnegative");
    }
    cfg.scenario.seed = static_cast<std::uint64_t>(seed);
    cfg.scenario.feature_gen =
        parse_feature_gen(kv.str("scenario.feature_gen", "random-unit:normal"), cfg.scenario.dim);
    cfg.scenario.reserve_policy = parse_reserve_policy(kv.str("scenario.reserve_policy", "none"));

    const LinkKind link = parse_link(kv.str("scenario.link", "identity"));
    cfg.scenario.model.link = LinkFunction::of(link);
    cfg.scenario.model.feature_map = parse_feature_map(kv.str("scenario.feature_map", "identity"));

    const double nn = static_cast<double>(cfg.scenario.dim);
    cfg.theta_norm = kv.real("scenario.theta_norm", std::sqrt(2.0 * nn));
    if (!(cfg.theta_norm > 0.0)) {
        throw ConfigError("scenario.theta_norm: must be positive");
    }
    const double sigma = kv.real("scenario.noise_sigma", 0.0);
    if (sigma < 0.0) {
        throw ConfigError("scenario.noise_sigma: must be nonnegative");
    }
    const double tail_c = kv.real("scenario.noise_C", 2.0);
    if (sigma > 0.0 && tail_c < 1.0) {
        throw ConfigError("scenario.noise_C: must be >= 1");
    }
    if (sigma > 0.0) {
        cfg.scenario.model.noise = NoiseSpec{NoiseFamily::Normal, sigma, tail_c};
    } else {
        cfg.scenario.model.noise = NoiseSpec{NoiseFamily::None, 0.0, tail_c};
    }

    // theta_star: half-normal direction for compensation features (cost-plus
    // alignment keeps values above reserves), signed normal otherwise.
    Vector theta = sample_theta_star(cfg.scenario.dim, cfg.theta_norm, Dist::Normal,
                                     cfg.scenario.seed);
    if (std::holds_alternative<AggregatedCompensations>(cfg.scenario.feature_gen)) {
        theta = theta.cwiseAbs();
        theta *= cfg.theta_norm / theta.norm();
    }
    cfg.scenario.model.theta_star = theta;

    cfg.mechanism.dim = cfg.scenario.dim;
    cfg.mechanism.knowledge_radius = kv.real("mechanism.R", 2.0 * std::sqrt(nn));
    cfg.mechanism.feature_norm_bound = kv.real("mechanism.S", 1.0);
    cfg.mechanism.delta = kv.real("mechanism.delta", 0.0);
    cfg.mechanism.use_reserve =
        kv.boolean("mechanism.use_reserve",
                   !std::holds_alternative<NoReserve>(cfg.scenario.reserve_policy));
    cfg.mechanism.allow_conservative_cuts = kv.boolean("mechanism.allow_conservative_cuts", false);
    cfg.mechanism.link = link;
    cfg.mechanism.total_rounds_hint = cfg.scenario.rounds;
    if (kv.has("mechanism.epsilon")) {
        cfg.mechanism.epsilon = kv.real("mechanism.epsilon", 0.0);
    } else {
        cfg.mechanism.epsilon =
            default_epsilon(cfg.scenario.dim, std::max(cfg.scenario.rounds, 2L), cfg.mechanism.delta);
        cfg.epsilon_was_defaulted = true;
    }

    // Cross-field checks.
    if (cfg.mechanism.knowledge_radius < cfg.theta_norm - 1e-12) {
        throw ConfigError("mechanism.R: knowledge radius is smaller than scenario.theta_norm, "
                          "the sampled weights would start outside the knowledge set");
    }
    if (cfg.scenario.model.feature_map == FeatureMapKind::ElementwiseLog &&
        (std::holds_alternative<RandomUnit>(cfg.scenario.feature_gen) ||
         std::holds_alternative<AdversarialAxes>(cfg.scenario.feature_gen))) {
        throw ConfigError("scenario.feature_map: elementwise-log requires strictly positive "
                          "features; pick an aggregated or csv generator");
    }
    if (cfg.scenario.dim == 1 && std::holds_alternative<AdversarialAxes>(cfg.scenario.feature_gen)) {
        throw ConfigError("scenario.feature_gen: adversarial-axes needs scenario.dim >= 2");
    }

    cfg.output_dir = kv.str("output.dir", "out");
    cfg.emit_trace = kv.boolean("output.trace", false);
    const long repeats = kv.integer("output.repeats", 1);
    if (repeats < 1) {
        throw ConfigError("output.repeats: must be >= 1");
    }
    cfg.repeats = static_cast<int>(repeats);

    cfg.lemma7_precondition_holds = cfg.mechanism.validate();
    return cfg;
}

std::string emit_config(const ExperimentConfig& cfg) {
    std::ostringstream out;
    out << "scenario.name = " << cfg.scenario.name << "\n";
    out << "scenario.dim = " << cfg.scenario.dim << "\n";
    out << "scenario.rounds = " << cfg.scenario.rounds << "\n";
    out << "scenario.seed = " << cfg.scenario.seed << "\n";
    out << "scenario.feature_gen = " << feature_gen_text(cfg.scenario.feature_gen) << "\n";
    out << "scenario.reserve_policy = " << reserve_policy_text(cfg.scenario.reserve_policy) << "\n";
    out << "scenario.link = " << link_text(cfg.mechanism.link) << "\n";
    out << "scenario.feature_map = "
        << (cfg.scenario.model.feature_map == FeatureMapKind::Identity ? "identity"
                                                                       : "elementwise-log")
        << "\n";
    out << "scenario.theta_norm = " << format_real(cfg.theta_norm) << "\n";
    out << "scenario.noise_sigma = " << format_real(cfg.scenario.model.noise.sigma) << "\n";
    out << "scenario.noise_C = " << format_real(cfg.scenario.model.noise.tail_constant) << "\n";
    out << "mechanism.epsilon = " << format_real(cfg.mechanism.epsilon) << "\n";
    out << "mechanism.delta = " << format_real(cfg.mechanism.delta) << "\n";
    out << "mechanism.R = " << format_real(cfg.mechanism.knowledge_radius) << "\n";
    out << "mechanism.S = " << format_real(cfg.mechanism.feature_norm_bound) << "\n";
    out << "mechanism.use_reserve = " << (cfg.mechanism.use_reserve ? "true" : "false") << "\n";
    out << "mechanism.allow_conservative_cuts = "
        << (cfg.mechanism.allow_conservative_cuts ? "true" : "false") << "\n";
    out << "output.dir = " << cfg.output_dir << "\n";
    out << "output.trace = " << (cfg.emit_trace ? "true" : "false") << "\n";
    out << "output.repeats = " << cfg.repeats << "\n";
    return out.str();
}

} // namespace pricesim
