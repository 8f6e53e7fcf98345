#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "qmt/runner.hpp"

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct CommonFlags {
    std::string config_file;
    std::optional<std::uint64_t> seed;
    std::optional<int> samples;
    std::optional<std::string> delta;
    bool force = false;

    qmt::RunConfig build(const std::string& script_path) const {
        qmt::RunConfig cfg;
        if (const char* env = std::getenv("QMTOWER_SEED")) cfg.seed = std::strtoull(env, nullptr, 10);
        if (!config_file.empty()) qmt::load_config_file(config_file, cfg);
        if (seed) cfg.seed = *seed;  // flags override the file
        if (samples) cfg.samples = *samples;
        if (delta) {
            auto q = qmt::parse_rational(*delta);
            if (!q) throw std::runtime_error("bad --delta value");
            cfg.delta = *q;
        }
        if (force) cfg.force = true;
        auto slash = script_path.find_last_of('/');
        cfg.script_name = slash == std::string::npos ? script_path : script_path.substr(slash + 1);
        return cfg;
    }
};

int run_and_emit(const std::string& path, qmt::RunConfig cfg, const std::string& outdir,
                 bool quiet) {
    using clock = std::chrono::steady_clock;
    qmt::ProblemScript script;
    try {
        script = qmt::parse_script(slurp(path));
    } catch (const qmt::script_error& e) {
        std::cerr << path << ": " << e.what() << "\n";
        return 4;
    }
    auto t0 = clock::now();
    qmt::RunReport report = qmt::run_script(script, cfg);
    auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(clock::now() - t0).count();
    if (!quiet) {
        std::cout << report.text();
        std::cerr << "# time: " << ms << " ms\n";
    }
    if (!outdir.empty()) {
        for (const auto& f : qmt::emit_outputs(report, outdir))
            std::cerr << "# wrote " << outdir << "/" << f << "\n";
    }
    return report.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"qmtower: quadratic-module towers, image/variety gap diagnostics, and "
                 "sum-of-squares positivity certificates"};
    app.require_subcommand(1);

    CommonFlags flags;
    std::string script_path, outdir;
    std::string eps_text;
    int dmax = 0;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("script", script_path, "problem script")->required();
        cmd->add_option("--config", flags.config_file, "key=value configuration file");
        cmd->add_option("--seed", flags.seed, "RNG seed (overrides QMTOWER_SEED)");
        cmd->add_option("--samples", flags.samples, "default sample count");
        cmd->add_option("--delta", flags.delta, "default gap threshold (rational)");
        cmd->add_flag("--force", flags.force, "let failed/undecided regularity through");
    };

    CLI::App* run = app.add_subcommand("run", "execute a script");
    add_common(run);
    run->add_option("--out", outdir, "directory for report, tower, clouds, certificates");

    CLI::App* check = app.add_subcommand("check", "parse a script and report statement count");
    check->add_option("script", script_path, "problem script")->required();

    CLI::App* certify = app.add_subcommand("certify", "run with eps/dmax overrides");
    add_common(certify);
    certify->add_option("--eps", eps_text, "epsilon for every certify statement")->required();
    certify->add_option("--dmax", dmax, "degree budget for every certify statement")->required();
    certify->add_option("--out", outdir, "output directory");

    CLI::App* explore = app.add_subcommand("explore", "run with sampling overrides");
    add_common(explore);
    explore->add_option("--out", outdir, "output directory");

    CLI::App* fmt = app.add_subcommand("fmt", "print the canonical form of a script");
    fmt->add_option("script", script_path, "problem script")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (check->parsed()) {
            try {
                qmt::ProblemScript script = qmt::parse_script(slurp(script_path));
                std::cout << script.statements.size() << " statements\n";
                return 0;
            } catch (const qmt::script_error& e) {
                std::cerr << script_path << ": " << e.what() << "\n";
                return 4;
            }
        }
        if (fmt->parsed()) {
            try {
                std::cout << qmt::print_script(qmt::parse_script(slurp(script_path)));
                return 0;
            } catch (const qmt::script_error& e) {
                std::cerr << script_path << ": " << e.what() << "\n";
                return 4;
            }
        }
        qmt::RunConfig cfg = flags.build(script_path);
        if (certify->parsed()) {
            auto q = qmt::parse_rational(eps_text);
            if (!q) {
                std::cerr << "bad --eps value\n";
                return 1;
            }
            cfg.eps_override = *q;
            cfg.dmax_override = dmax;
        }
        if (explore->parsed()) {
            if (flags.samples) cfg.samples_override = flags.samples;
            if (flags.delta) cfg.delta_override = cfg.delta;
        }
        return run_and_emit(script_path, cfg, outdir, false);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
