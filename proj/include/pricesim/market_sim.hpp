#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "pricesim/mechanism.hpp"
#include "pricesim/valuation.hpp"

namespace pricesim {

enum class Dist { Normal, Uniform };

/// Pseudo privacy compensations: raw_dim positive draws, sorted, evenly
/// partitioned into dim groups, summed per group, normalized to unit norm.
struct AggregatedCompensations {
    int raw_dim = 0;
    Dist raw_dist = Dist::Uniform;
};
/// n iid draws normalized to the unit sphere.
struct RandomUnit {
    Dist dist = Dist::Normal;
};
/// Queries from a CSV file (header f1,...,fn[,reserve]); rows are normalized
/// on ingest.
struct CsvStream {
    std::string path;
};
/// First axis for rounds <= floor(T/2), second axis after (n >= 2).
struct AdversarialAxes {};

using FeatureGenSpec = std::variant<AggregatedCompensations, RandomUnit, CsvStream, AdversarialAxes>;

struct NoReserve {};
struct SumOfFeatures {};
/// Evaluation-only oracle: pins the pre-link reserve to rho times the
/// noiseless pre-link value, q = g(rho * g^-1(v)).
struct ValueRatio {
    double rho = 0.5;
};
/// Adversarial: the mechanism's current midpoint for the first half of the
/// run, zero afterwards.
struct MidpointFirstHalf {};

using ReservePolicy = std::variant<NoReserve, SumOfFeatures, ValueRatio, MidpointFirstHalf>;

struct Scenario {
    std::string name;
    int dim = 0;
    long rounds = 0;
    FeatureGenSpec feature_gen;
    ReservePolicy reserve_policy;
    MarketModel model;
    std::uint64_t seed = 0;
};

struct RoundRecord {
    long round = 0; // 1-based
    DecisionKind kind = DecisionKind::Skip;
    std::optional<double> posted;
    double reserve = 0.0;
    double value = 0.0;
    bool accepted = false;
    double regret = 0.0;
    double knowledge_width = 0.0; // upper - lower at decision time
};

struct RunSummary {
    long rounds = 0;
    double cumulative_regret = 0.0;
    double cumulative_value = 0.0;
    double regret_ratio = 0.0; // cumulative_regret / cumulative_value
    long exploratory_rounds = 0;
    long skip_rounds = 0;
    double acceptance_rate = 0.0;         // accepted / posted rounds
    double mean_posted_price = 0.0;       // over posted (non-skip) rounds
    double mean_decide_observe_us = 0.0;  // mechanism latency per round
    long guard_rejected_cuts = 0;
};

struct RunResult {
    std::vector<RoundRecord> records;
    RunSummary summary;
};

/// Aborted mid-run; carries the partial trace.
struct RunAborted : Error {
    RunAborted(const std::string& what, long round, std::vector<RoundRecord> partial)
        : Error(what + " (round " + std::to_string(round) + ")"),
          round(round),
          partial(std::move(partial)) {}
    long round;
    std::vector<RoundRecord> partial;
};

struct Query {
    Vector x;
    double reserve = 0.0;
};

/// Deterministic query source for a scenario. Feature and reserve draws for
/// round t are derived from (seed, t) counters, independent of any mechanism
/// decision, so paired variants see identical streams.
class QueryStream {
public:
    explicit QueryStream(const Scenario& scenario);

    /// Feature vector of round t (unit norm).
    Vector features(long round) const;

    /// Reserve price for round t given its features. midpoint_hint is the
    /// mechanism's current posted-space midpoint along the round's direction;
    /// only MidpointFirstHalf consumes it.
    double reserve(long round, const Vector& x,
                   std::optional<double> midpoint_hint = std::nullopt) const;

    Query generate_query(long round, std::optional<double> midpoint_hint = std::nullopt) const;

    /// True when the reserve policy reads the noiseless market value.
    bool reserve_uses_oracle() const;

private:
    const Scenario& scenario_;
    std::vector<std::vector<double>> csv_rows_; // features per row
    std::vector<std::optional<double>> csv_reserves_;
};

/// Direction from dist (componentwise N(0,1) or U(-1,1)), rescaled to the
/// requested norm exactly. n = 1 yields +/- norm.
Vector sample_theta_star(int n, double norm, Dist dist, std::uint64_t seed);

/// Noise draw for round t of a scenario (counter-based; shared across paired
/// variants).
double noise_draw_for_round(const Scenario& scenario, long round);

/// Full trading loop: generate -> decide -> respond -> account -> observe.
RunResult run_scenario(const Scenario& scenario, const MechanismConfig& config);

/// Posts the reserve price every round; no knowledge set.
RunResult run_risk_averse_baseline(const Scenario& scenario);

enum class Variant { Pure, Uncertainty, Reserve, ReserveUncertainty, Baseline };

const char* variant_name(Variant v);

/// Mechanism config for a variant, derived from the scenario-level base.
MechanismConfig variant_config(const MechanismConfig& base, Variant v);

struct SweepCell {
    Variant variant;
    long rounds;
    RunSummary summary;
};

/// One run per (variant, T) with shared seeds across variants.
std::vector<SweepCell> variant_sweep(const Scenario& scenario, const MechanismConfig& base,
                                     const std::vector<long>& t_grid,
                                     const std::vector<Variant>& variants);

struct ExperimentSetup {
    Scenario scenario;
    MechanismConfig mechanism;
};

// Desk-scale analogs of the evaluation setups.
ExperimentSetup linear_query_setup(int n, long rounds, std::uint64_t seed, double noise_sigma = 0.0,
                                   double noise_tail_constant = 2.0);
ExperimentSetup loglinear_rental_setup(int n, long rounds, double rho, std::uint64_t seed);
ExperimentSetup logistic_impression_setup(int n, long rounds, bool dense, std::uint64_t seed);
ExperimentSetup adversarial_axes_setup(int n, long rounds, bool allow_conservative_cuts);

} // namespace pricesim
