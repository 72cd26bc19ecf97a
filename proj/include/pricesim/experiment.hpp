#pragma once

#include <string>
#include <vector>

#include "pricesim/config.hpp"

namespace pricesim {

/// Variants an experiment executes, derived from the config: pure always;
/// uncertainty when delta > 0; reserve (+uncertainty) when use_reserve; the
/// risk-averse baseline when a reserve policy is present.
std::vector<Variant> experiment_variants(const ExperimentConfig& config);

/// Runs every variant x repeat, writing summary.csv, meta.txt and, when
/// requested, trace_<variant>_<rep>.csv and curve_<variant>_<rep>.csv under
/// output_dir. Partial outputs are removed on failure.
void run_experiment(const ExperimentConfig& config);

/// Plot-ready cumulative-regret curve: one `t,cum_regret,cum_value,
/// regret_ratio` row per checkpoint. Checkpoints must be ascending and within
/// the trace.
std::string emit_regret_curve(const std::vector<RoundRecord>& records,
                              const std::vector<long>& checkpoints);

/// RoundRecord trace in CSV form (fixed column order, 9 significant digits).
std::string emit_trace_csv(const std::vector<RoundRecord>& records);

/// Parses a trace back into records (used by consistency checks).
std::vector<RoundRecord> parse_trace_csv(const std::string& text);

} // namespace pricesim
