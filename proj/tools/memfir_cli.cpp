#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "memfir/config.hpp"
#include "memfir/errors.hpp"
#include "memfir/scenario.hpp"

namespace {

struct CommonFlags {
    std::string config_path;
    std::string preset;
    std::optional<std::uint64_t> seed;
    std::string out;
};

void add_common(CLI::App* cmd, CommonFlags& flags, bool allow_config) {
    if (allow_config) {
        auto* config = cmd->add_option("--config", flags.config_path, "Scenario config file");
        auto* preset = cmd->add_option("--preset", flags.preset, "Built-in scenario preset")
                           ->check(CLI::IsMember(memfir::scenario_preset_names()));
        config->excludes(preset);
    }
    cmd->add_option("--seed", flags.seed, "Master seed (overrides the config)");
    cmd->add_option("--out", flags.out, "Output directory (overrides the config)");
}

memfir::ScenarioConfig resolve(const CommonFlags& flags, const std::string& fallback_preset) {
    memfir::ScenarioConfig cfg = !flags.config_path.empty() ? memfir::load_config(flags.config_path)
                                 : !flags.preset.empty()    ? memfir::scenario_preset(flags.preset)
                                                            : memfir::scenario_preset(fallback_preset);
    if (flags.seed) memfir::apply_master_seed(cfg, *flags.seed);
    if (!flags.out.empty()) cfg.out_dir = flags.out;
    memfir::validate(cfg);
    return cfg;
}

int report(const memfir::ScenarioResult& r, const std::filesystem::path& out) {
    for (const auto& [k, v] : r.metrics) std::cout << k << '=' << v << '\n';
    std::cout << "artifacts: " << out.string() << " (" << r.files.size() << " files)\n";
    if (!r.message.empty()) std::cerr << "memfir: " << r.message << '\n';
    return static_cast<int>(r.status);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Memristor-weight mixed-signal FIR filter simulator"};
    app.require_subcommand(1);

    CommonFlags sweep_flags, tune_flags, run_flags, freq_flags, demo_flags;
    auto* sweep = app.add_subcommand("sweep", "Quasi-DC I-V sweep family of one device");
    auto* tune = app.add_subcommand("tune", "Program the tap bank and report the write-verify traces");
    auto* run = app.add_subcommand("run", "Full scenario: tune, filter, measure, write artifacts");
    auto* freqresp = app.add_subcommand("freqresp", "Analytic and measured response curves only");
    auto* demo = app.add_subcommand("demo-paper", "Both filtering experiments plus the cutoff comparison");
    add_common(sweep, sweep_flags, true);
    add_common(tune, tune_flags, true);
    add_common(run, run_flags, true);
    add_common(freqresp, freq_flags, true);
    add_common(demo, demo_flags, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return static_cast<int>(memfir::ExitStatus::UsageError);
    }

    try {
        if (*sweep) {
            const auto cfg = resolve(sweep_flags, "paper-fig1");
            return report(memfir::export_sweep(cfg), cfg.out_dir);
        }
        if (*tune) {
            const auto cfg = resolve(tune_flags, "paper-exp1");
            return report(memfir::run_tune(cfg), cfg.out_dir);
        }
        if (*run) {
            const auto cfg = resolve(run_flags, "paper-exp1");
            return report(memfir::run_scenario(cfg), cfg.out_dir);
        }
        if (*freqresp) {
            const auto cfg = resolve(freq_flags, "paper-exp1");
            return report(memfir::run_freqresp(cfg), cfg.out_dir);
        }
        const std::uint64_t seed = demo_flags.seed.value_or(memfir::scenario_preset("paper-exp1").seed);
        const std::filesystem::path out = demo_flags.out.empty() ? "out/demo-paper" : demo_flags.out;
        return report(memfir::run_demo_paper(seed, out), out);
    } catch (const memfir::ConfigError& e) {
        std::cerr << "memfir: config error: " << e.what() << '\n';
        return static_cast<int>(memfir::ExitStatus::UsageError);
    } catch (const memfir::InvariantViolation& e) {
        std::cerr << "memfir: invariant violation: " << e.what() << '\n';
        return static_cast<int>(memfir::ExitStatus::InvariantViolation);
    } catch (const std::exception& e) {
        std::cerr << "memfir: " << e.what() << '\n';
        return static_cast<int>(memfir::ExitStatus::UsageError);
    }
}
