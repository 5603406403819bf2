#include <cstdio>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"
#include "config.hpp"

using namespace qwg::cli;

namespace {

struct Preset {
    Command command;
    std::map<std::string, std::string> values;
};

const std::map<std::string, Preset>& presets() {
    static const std::map<std::string, Preset> p{
        {"kirchhoff-dispersion", {Command::dispersion, {{"theta", "0.7853981633974483"}, {"rho", "0"}, {"m", "4"}}}},
        {"breathing-demo", {Command::breathing, {{"sin2theta", "0.7"}, {"T", "2"}, {"rho", "-10:10:0.1"}}}},
        {"tee-scattering", {Command::scattering, {{"ell", "1.6"}, {"H", "2.5"}, {"h", "0.05"}}}},
        {"tee-track", {Command::track_H, {{"ell", "1.6"}, {"H", "1.5:6"}, {"h", "0.05"}}}},
        {"tee-bands", {Command::floquet_bands, {{"ell", "1.6"}, {"H", "2.5"}, {"eps", "0.1"}, {"p", "6"}}}},
        {"tee-ladder",
         {Command::spectrum_vs_H, {{"ell", "1.6"}, {"H", "2.5,2.9,3.047,3.2,3.5"}, {"eps", "0.05"}, {"p", "6"}}}},
        {"gap-opening", {Command::gap_model, {{"t", "-2:2"}, {"m-omega", "0.04"}, {"M-omega", "0.06"}}}},
    };
    return p;
}

const std::string& default_H(Command c) {
    static const std::string track = "1.5:6", ladder = "2.5,2.9,3.047,3.2,3.5", single = "2.5";
    if (c == Command::track_H) return track;
    if (c == Command::spectrum_vs_H) return ladder;
    return single;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"qwg: threshold scattering and Floquet bands of periodic tee waveguides"};
    app.set_help_flag("--help", "print this help message and exit");
    app.require_subcommand(0, 1);
    app.set_config("--config", "", "key = value file; command-line flags take precedence");

    RunConfig cfg;
    std::string rho = "0", eta = cfg.eta.text, t = cfg.t.text, H, preset;
    auto* o_preset = app.add_option("--preset", preset, "named parameter set")
                         ->check(CLI::IsMember([] {
                             std::vector<std::string> k;
                             for (const auto& [name, _] : presets()) k.push_back(name);
                             return k;
                         }()));
    std::map<std::string, CLI::Option*> opts;
    opts["ell"] = app.add_option("--ell", cfg.ell, "stub width, in (1, 2)");
    opts["H"] = app.add_option("--H", H, "stub height; a range for track-H and spectrum-vs-H");
    opts["L"] = app.add_option("--L", cfg.L, "truncation half-length of the near-field box");
    opts["eps"] = app.add_option("--eps", cfg.eps, "period scaling, in (0, 0.2]");
    opts["theta"] = app.add_option("--theta", cfg.theta, "junction angle in [0, pi)");
    opts["sin2theta"] = app.add_option("--sin2theta", cfg.sin2theta, "sin(2 theta); overrides --theta");
    opts["T"] = app.add_option("--T", cfg.T, "transmission weight, > 0");
    opts["rho"] = app.add_option("--rho", rho, "rho value or range a:b[:step]");
    opts["eta"] = app.add_option("--eta", eta, "quasi-momentum range for dispersion");
    opts["m"] = app.add_option("--m", cfg.m_max, "number of reduced-model bands");
    opts["t"] = app.add_option("--t", t, "detuning range for gap-model");
    opts["m-omega"] = app.add_option("--m-omega", cfg.m_omega, "gap-model coefficient m_Omega");
    opts["M-omega"] = app.add_option("--M-omega", cfg.M_omega, "gap-model coefficient M_Omega");
    opts["lambda0"] = app.add_option("--lambda0", cfg.lambda0, "unperturbed band-edge eigenvalue");
    opts["h"] = app.add_option("--h", cfg.h, "mesh size");
    opts["order"] = app.add_option("--order", cfg.order, "finite element order, 1 or 2");
    opts["p"] = app.add_option("--p", cfg.p_max, "number of Floquet eigenvalues per quasi-momentum");
    opts["eta-samples"] = app.add_option("--eta-samples", cfg.eta_samples, "uniform quasi-momentum samples on [0, 2 pi]");
    app.add_option("--out", cfg.out_dir, "output directory");
    app.add_option("--seed", cfg.seed, "seed for the random draws of validate");

    std::map<std::string, Command> commands{
        {"dispersion", Command::dispersion},       {"breathing", Command::breathing},
        {"scattering", Command::scattering},       {"track-H", Command::track_H},
        {"floquet-bands", Command::floquet_bands}, {"spectrum-vs-H", Command::spectrum_vs_H},
        {"gap-model", Command::gap_model},         {"validate", Command::validate},
    };
    const std::map<std::string, std::string> help{
        {"dispersion", "reduced-model dispersion curves nu_m(eta)"},
        {"breathing", "reduced-model band edges over a rho range"},
        {"scattering", "threshold scattering matrix of one tee"},
        {"track-H", "eigenphases of S over a range of stub heights"},
        {"floquet-bands", "band diagram of the periodic waveguide"},
        {"spectrum-vs-H", "band intervals over a list of stub heights"},
        {"gap-model", "first-order band-edge eigenvalues against detuning"},
        {"validate", "quick invariant suite with a pass/fail table"},
    };
    for (const auto& [name, _] : commands)
        app.add_subcommand(name, help.at(name))->fallthrough()->set_help_flag("--help", "print this help message and exit");

    try {
        app.parse(argc, argv);
        bool chosen = false;
        for (const auto& [name, c] : commands)
            if (app.got_subcommand(name)) {
                cfg.command = c;
                chosen = true;
            }
        if (*o_preset) {
            const auto& pr = presets().at(preset);
            if (chosen && pr.command != cfg.command)
                throw UsageError("preset " + preset + " belongs to " + command_name(pr.command));
            cfg.command = pr.command;
            chosen = true;
            for (const auto& [key, value] : pr.values) {
                auto* o = opts.at(key);
                if (o->count() > 0) continue;
                o->add_result(value);
                o->run_callback();
            }
        }
        if (!chosen) throw UsageError("a command is required (see --help)");

        cfg.has_sin2theta = opts["sin2theta"]->count() > 0;
        cfg.rho = Range::parse(rho, "rho");
        cfg.eta = Range::parse(eta, "eta");
        cfg.t = Range::parse(t, "t");
        cfg.H_range = Range::parse(H.empty() ? default_H(cfg.command) : H, "H");
        if (cfg.command != Command::track_H && cfg.command != Command::spectrum_vs_H) {
            if (cfg.H_range.values.size() != 1) throw UsageError(std::string(command_name(cfg.command)) + " takes a single H");
            cfg.H = cfg.H_range.values.front();
        }
        return run(cfg);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const UsageError& e) {
        std::fprintf(stderr, "qwg: usage error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "qwg: error: %s\n", e.what());
        return 1;
    }
}
