// memsim — meminductor emulator simulation and analysis CLI.
//
// Usage: memsim run|sweep|mc|am|compose --config <file> --out <dir>
//                [--seed N] [--threads N]
// Exit codes: 0 ok, 1 configuration error, 2 numeric error, 3 I/O error.

#include "memsim/errors.hpp"
#include "memsim/runner.hpp"
#include "memsim/version.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace {

struct CliOptions {
    std::string config_file;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    int threads = 0;
};

int thread_count(const CliOptions& opt) {
    if (opt.threads > 0) return opt.threads;
    if (const char* env = std::getenv("MEMSIM_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    return 1;
}

int run(memsim::ExperimentKind kind, const CliOptions& opt) {
    std::ifstream in(opt.config_file, std::ios::binary);
    if (!in) {
        std::cerr << "memsim: cannot open config file " << opt.config_file << "\n";
        return 3;
    }
    std::stringstream buf;
    buf << in.rdbuf();

    try {
        memsim::ExperimentConfig cfg = memsim::parse_config(buf.str());
        if (cfg.kind != kind) {
            std::cerr << "memsim: config contains a '" << memsim::experiment_kind_name(cfg.kind)
                      << "' experiment, but the '" << memsim::experiment_kind_name(kind)
                      << "' subcommand was invoked\n";
            return 1;
        }
        if (opt.seed) cfg.mc.seed = *opt.seed;
        for (const auto& w : cfg.warnings) std::cerr << "memsim: warning: " << w << "\n";
        memsim::run_experiment(cfg, opt.out_dir, thread_count(opt));
        return 0;
    } catch (const memsim::ConfigError& e) {
        std::cerr << "memsim: config error: " << e.what() << "\n";
        return 1;
    } catch (const std::domain_error& e) {
        std::cerr << "memsim: numeric error: " << e.what() << "\n";
        return 2;
    } catch (const memsim::NumericError& e) {
        std::cerr << "memsim: numeric error: " << e.what() << "\n";
        return 2;
    } catch (const memsim::IoError& e) {
        std::cerr << "memsim: I/O error: " << e.what() << "\n";
        return 3;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"behavioral meminductor emulator simulator"};
    app.set_version_flag("--version", memsim::kVersion);
    app.require_subcommand(1);

    CliOptions opt;
    const std::vector<std::pair<std::string, memsim::ExperimentKind>> kinds = {
        {"run", memsim::ExperimentKind::Run},       {"sweep", memsim::ExperimentKind::Sweep},
        {"mc", memsim::ExperimentKind::Mc},         {"am", memsim::ExperimentKind::Am},
        {"compose", memsim::ExperimentKind::Compose}};

    memsim::ExperimentKind selected = memsim::ExperimentKind::Run;
    for (const auto& [name, kind] : kinds) {
        CLI::App* sub = app.add_subcommand(name, name + std::string(" experiment"));
        sub->add_option("--config", opt.config_file, "experiment JSON document")
            ->required()
            ->check(CLI::ExistingFile);
        sub->add_option("--out", opt.out_dir, "output directory")->required();
        sub->add_option_function<std::uint64_t>(
            "--seed", [&](std::uint64_t s) { opt.seed = s; }, "Monte Carlo seed override");
        sub->add_option("--threads", opt.threads, "worker threads (env MEMSIM_THREADS)");
        sub->callback([&selected, kind = kind] { selected = kind; });
    }

    CLI11_PARSE(app, argc, argv);
    return run(selected, opt);
}
