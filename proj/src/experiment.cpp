#include "pricesim/experiment.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace pricesim {

namespace fs = std::filesystem;

namespace {

std::string g9(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

const char* kind_text(DecisionKind k) {
    switch (k) {
    case DecisionKind::Skip:
        return "skip";
    case DecisionKind::Exploratory:
        return "exploratory";
    case DecisionKind::Conservative:
        return "conservative";
    }
    return "unknown";
}

DecisionKind parse_kind(const std::string& s) {
    if (s == "skip") return DecisionKind::Skip;
    if (s == "exploratory") return DecisionKind::Exploratory;
    if (s == "conservative") return DecisionKind::Conservative;
    throw IngestError("unknown decision kind '" + s + "'");
}

std::vector<long> default_checkpoints(long rounds) {
    std::vector<long> cps;
    for (long c = 1; c < rounds; c *= 2) {
        cps.push_back(c);
    }
    if (cps.empty() || cps.back() != rounds) {
        cps.push_back(rounds);
    }
    return cps;
}

// Removes every file this invocation created, then rethrows.
class OutputJanitor {
public:
    void track(const fs::path& p) { created_.push_back(p); }
    void cleanup() {
        for (const auto& p : created_) {
            std::error_code ec;
            fs::remove(p, ec);
        }
    }

private:
    std::vector<fs::path> created_;
};

} // namespace

std::vector<Variant> experiment_variants(const ExperimentConfig& cfg) {
    std::vector<Variant> variants;
    variants.push_back(Variant::Pure);
    if (cfg.mechanism.delta > 0.0) {
        variants.push_back(Variant::Uncertainty);
    }
    if (cfg.mechanism.use_reserve) {
        variants.push_back(Variant::Reserve);
        if (cfg.mechanism.delta > 0.0) {
            variants.push_back(Variant::ReserveUncertainty);
        }
    }
    const bool has_policy = !std::holds_alternative<NoReserve>(cfg.scenario.reserve_policy) &&
                            !std::holds_alternative<MidpointFirstHalf>(cfg.scenario.reserve_policy);
    if (cfg.mechanism.use_reserve && has_policy) {
        variants.push_back(Variant::Baseline);
    }
    return variants;
}

std::string emit_trace_csv(const std::vector<RoundRecord>& records) {
    std::ostringstream out;
    out << "round,kind,posted,reserve,value,accepted,regret,knowledge_width\n";
    for (const auto& r : records) {
        out << r.round << ',' << kind_text(r.kind) << ',';
        if (r.posted.has_value()) {
            out << g9(*r.posted);
        }
        out << ',' << g9(r.reserve) << ',' << g9(r.value) << ',' << (r.accepted ? 1 : 0) << ','
            << g9(r.regret) << ',' << g9(r.knowledge_width) << '\n';
    }
    return out.str();
}

std::vector<RoundRecord> parse_trace_csv(const std::string& text) {
    std::vector<RoundRecord> records;
    std::stringstream in(text);
    std::string line;
    if (!std::getline(in, line)) {
        throw IngestError("trace: missing header");
    }
    long line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::string f;
        std::stringstream ss(line);
        while (std::getline(ss, f, ',')) fields.push_back(f);
        if (line.back() == ',') fields.emplace_back();
        if (fields.size() != 8) {
            throw IngestError("trace:" + std::to_string(line_no) + ": expected 8 fields");
        }
        try {
            RoundRecord r;
            r.round = std::stol(fields[0]);
            r.kind = parse_kind(fields[1]);
            if (!fields[2].empty()) r.posted = std::stod(fields[2]);
            r.reserve = std::stod(fields[3]);
            r.value = std::stod(fields[4]);
            r.accepted = fields[5] == "1";
            r.regret = std::stod(fields[6]);
            r.knowledge_width = std::stod(fields[7]);
            records.push_back(r);
        } catch (const Error&) {
            throw;
        } catch (const std::exception&) {
            throw IngestError("trace:" + std::to_string(line_no) + ": unparsable field");
        }
    }
    return records;
}

std::string emit_regret_curve(const std::vector<RoundRecord>& records,
                              const std::vector<long>& checkpoints) {
    if (records.empty()) {
        throw EmptyRun("cannot emit a regret curve from an empty run");
    }
    for (std::size_t i = 0; i < checkpoints.size(); ++i) {
        if (checkpoints[i] < 1 || checkpoints[i] > static_cast<long>(records.size())) {
            throw DomainError("curve checkpoint out of range");
        }
        if (i > 0 && checkpoints[i] <= checkpoints[i - 1]) {
            throw DomainError("curve checkpoints must be ascending");
        }
    }
    std::ostringstream out;
    out << "t,cum_regret,cum_value,regret_ratio\n";
    double cum_regret = 0.0, cum_value = 0.0;
    std::size_t next = 0;
    for (const auto& r : records) {
        cum_regret += r.regret;
        cum_value += r.value;
        if (next < checkpoints.size() && r.round == checkpoints[next]) {
            const double ratio = cum_value > 0.0 ? cum_regret / cum_value : 0.0;
            out << r.round << ',' << g9(cum_regret) << ',' << g9(cum_value) << ',' << g9(ratio)
                << '\n';
            ++next;
        }
    }
    return out.str();
}

void run_experiment(const ExperimentConfig& cfg) {
    fs::path dir(cfg.output_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw Error("cannot create output directory " + dir.string() + ": " + ec.message());
    }

    OutputJanitor janitor;
    const auto write_file = [&](const fs::path& p, const std::string& content) {
        std::ofstream out(p, std::ios::trunc);
        if (!out) {
            throw Error("cannot open " + p.string() + " for writing");
        }
        out << content;
        out.flush();
        if (!out) {
            throw Error("write failed for " + p.string());
        }
        janitor.track(p);
    };

    try {
        const auto variants = experiment_variants(cfg);
        std::ostringstream summary;
        summary << "variant,repeat,seed,rounds,cumulative_regret,cumulative_value,regret_ratio,"
                   "exploratory_rounds,skip_rounds,acceptance_rate,mean_posted_price,"
                   "mean_decide_observe_us,guard_rejected_cuts\n";

        std::ostringstream meta;
        meta << "# config echo\n" << emit_config(cfg) << "\n";
        meta << "epsilon_defaulted = " << (cfg.epsilon_was_defaulted ? "true" : "false") << "\n";
        if (!cfg.lemma7_precondition_holds) {
            meta << "warning = epsilon below 4*n*delta; exploratory budget bound not guaranteed\n";
        }
        {
            QueryStream probe(cfg.scenario);
            meta << "reserve_policy_uses_oracle = "
                 << (probe.reserve_uses_oracle() ? "true" : "false") << "\n";
        }
        meta << "posted_price_mean_excludes_skips = true\n";
        meta << "variants =";
        for (auto v : variants) meta << ' ' << variant_name(v);
        meta << "\n";

        for (int rep = 0; rep < cfg.repeats; ++rep) {
            Scenario scenario = cfg.scenario;
            scenario.seed = cfg.repeats == 1 ? cfg.scenario.seed
                                             : derive_seed(cfg.scenario.seed,
                                                           static_cast<std::uint64_t>(rep));
            meta << "seed[" << rep << "] = " << scenario.seed << "\n";
            for (Variant v : variants) {
                RunResult result;
                if (v == Variant::Baseline) {
                    result = run_risk_averse_baseline(scenario);
                } else {
                    result = run_scenario(scenario, variant_config(cfg.mechanism, v));
                }
                const RunSummary& s = result.summary;
                summary << variant_name(v) << ',' << rep << ',' << scenario.seed << ','
                        << s.rounds << ',' << g9(s.cumulative_regret) << ','
                        << g9(s.cumulative_value) << ',' << g9(s.regret_ratio) << ','
                        << s.exploratory_rounds << ',' << s.skip_rounds << ','
                        << g9(s.acceptance_rate) << ',' << g9(s.mean_posted_price) << ','
                        << g9(s.mean_decide_observe_us) << ',' << s.guard_rejected_cuts << '\n';
                if (cfg.emit_trace) {
                    const std::string stem =
                        std::string(variant_name(v)) + "_" + std::to_string(rep);
                    write_file(dir / ("trace_" + stem + ".csv"), emit_trace_csv(result.records));
                    write_file(dir / ("curve_" + stem + ".csv"),
                               emit_regret_curve(result.records,
                                                 default_checkpoints(scenario.rounds)));
                }
            }
        }

        write_file(dir / "summary.csv", summary.str());
        write_file(dir / "meta.txt", meta.str());
    } catch (...) {
        janitor.cleanup();
        throw;
    }
}

} // namespace pricesim
