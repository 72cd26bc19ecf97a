// price-sim: batch driver for the pricing library. Talks to the core only
// through the C API in pricesim.h.

#include <cstdint>
#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "pricesim.h"

namespace {

int status_to_exit(ps_status st) {
    switch (st) {
    case PS_OK:
        return 0;
    case PS_ERR_CONFIG:
        return 2;
    default:
        return 3;
    }
}

int report(ps_status st) {
    if (st != PS_OK) {
        std::fprintf(stderr, "price-sim: %s\n", ps_last_error());
    }
    return status_to_exit(st);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"contextual posted-price mechanism simulator"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    bool trace = false;
    auto* run = app.add_subcommand("run", "run the experiment described by a config file");
    run->add_option("--config", config_path, "config file path")->required();
    run->add_option("--out", out_dir, "output directory (overrides output.dir)");
    run->add_flag("--trace", trace, "also write per-round trace and curve files");

    int bound_n = 0;
    double bound_r = 0.0, bound_s = 0.0, bound_eps = 0.0;
    auto* bound = app.add_subcommand("bound", "print the exploratory-round budget");
    bound->add_option("--n", bound_n, "feature dimension")->required();
    bound->add_option("--R", bound_r, "initial knowledge radius")->required();
    bound->add_option("--S", bound_s, "feature norm bound")->required();
    bound->add_option("--eps", bound_eps, "exploration threshold")->required();

    int adv_n = 0;
    std::int64_t adv_t = 0;
    bool adv_cuts = false;
    auto* adv = app.add_subcommand("adversary", "axis-aligned worst-case demonstration");
    adv->add_option("--n", adv_n, "feature dimension (>= 2)")->required();
    adv->add_option("--T", adv_t, "total rounds")->required();
    adv->add_flag("--allow-conservative-cuts", adv_cuts,
                  "let conservative prices refine the knowledge set");

    CLI11_PARSE(app, argc, argv);

    if (run->parsed()) {
        ps_status st = ps_run_experiment(config_path.c_str(),
                                         out_dir.empty() ? nullptr : out_dir.c_str(),
                                         trace ? 1 : -1);
        if (st == PS_OK) {
            std::printf("wrote %s\n", out_dir.empty() ? "configured output directory" : out_dir.c_str());
        }
        return report(st);
    }
    if (bound->parsed()) {
        double value = 0.0;
        ps_status st = ps_exploratory_round_bound(bound_n, bound_r, bound_s, bound_eps, &value);
        if (st == PS_OK) {
            std::printf("exploratory_round_bound(n=%d, R=%g, S=%g, eps=%g) = %.6f\n", bound_n,
                        bound_r, bound_s, bound_eps, value);
        }
        return report(st);
    }
    ps_adversary_result result;
    ps_status st = ps_run_adversary_demo(adv_n, adv_t, adv_cuts ? 1 : 0, &result);
    if (st == PS_OK) {
        std::printf("horizon %lld: cumulative regret %.6f (exploratory %lld)\n",
                    static_cast<long long>(adv_t / 2), result.regret_half,
                    static_cast<long long>(result.exploratory_half));
        std::printf("horizon %lld: cumulative regret %.6f (exploratory %lld)\n",
                    static_cast<long long>(adv_t), result.regret_full,
                    static_cast<long long>(result.exploratory_full));
        std::printf("growth ratio: %.4f (conservative cuts %s)\n", result.growth_ratio,
                    adv_cuts ? "enabled" : "disabled");
    }
    return report(st);
}
