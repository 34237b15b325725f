#include <cstdio>
#include <cstdlib>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "vscdyn/error.hpp"
#include "vscdyn_app/commands.hpp"
#include "vscdyn_app/config.hpp"

using namespace vscdyn::app;

namespace {

unsigned default_threads() {
    if (const char* env = std::getenv("VSCDYN_THREADS")) {
        try {
            const long n = std::stol(env);
            if (n > 0)
                return static_cast<unsigned>(n);
        } catch (const std::exception&) {
        }
        std::fprintf(stderr, "warning: ignoring VSCDYN_THREADS=%s\n", env);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Vibrational strong coupling dynamics for a reactive molecular surrogate"};
    app.require_subcommand(1);

    std::string config_path;
    std::uint64_t seed = 0;
    std::string out_dir;
    unsigned threads = 0;
    std::string format;

    app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
    auto* seed_opt = app.add_option("--seed", seed, "Override ensemble.seed");
    auto* out_opt = app.add_option("--out", out_dir, "Override outputs.directory");
    auto* threads_opt = app.add_option("--threads", threads, "Worker threads (default: VSCDYN_THREADS or all cores)")
                            ->check(CLI::PositiveNumber);
    auto* format_opt =
        app.add_option("--format", format, "Output formats")->check(CLI::IsMember({"csv", "json", "both"}));

    struct Command {
        const char* name;
        const char* help;
    };
    for (const Command& c : {Command{"spectrum", "Bare and polaritonic IR spectra"},
                             Command{"run", "Propagate one trajectory"},
                             Command{"ensemble", "Propagate a thermal ensemble and collect reaction statistics"},
                             Command{"scan", "Resonance and coupling-strength scans"},
                             Command{"analyze", "Mode occupations and bond-force correlations of stored trajectories"},
                             Command{"calibrate", "Tune the surrogate and report its transition state"},
                             Command{"model-check", "Finite-difference and bookkeeping checks of the model"}})
        app.add_subcommand(c.name, c.help)->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? exit_ok : exit_validation;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    try {
        RunConfig config = config_path.empty() ? default_config() : load_config(config_path);
        if (*seed_opt)
            config.ensemble.seed = seed;
        if (*out_opt)
            config.outputs.directory = out_dir;
        if (*format_opt) {
            config.outputs.csv = format != "json";
            config.outputs.json = format != "csv";
        }
        const unsigned n_threads = *threads_opt ? threads : default_threads();

        if (command == "spectrum")
            return cmd_spectrum(config);
        if (command == "run")
            return cmd_run(config);
        if (command == "ensemble")
            return cmd_ensemble(config, n_threads);
        if (command == "scan")
            return cmd_scan(config, n_threads);
        if (command == "analyze")
            return cmd_analyze(config);
        if (command == "calibrate")
            return cmd_calibrate(config);
        return cmd_model_check(config);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "vscdyn %s: %s\n", command.c_str(), e.what());
        return exit_code_for(e);
    }
}
