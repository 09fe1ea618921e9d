// Command-line surface: `coexist <command> [flags]`. Every command writes
// through io::write_atomic when --out is given, otherwise to stdout.
#pragma once

#include <cstdint>
#include <iostream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "coexist/analytic.hpp"
#include "coexist/circuits.hpp"
#include "coexist/error.hpp"
#include "coexist/experiments.hpp"
#include "coexist/io.hpp"
#include "coexist/observables.hpp"
#include "coexist/validation.hpp"

namespace coexist::cli {

constexpr int exit_code(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::Usage: return 2;
        case ErrorCode::Io: return 3;
        case ErrorCode::InvalidCycle: return 4;
        case ErrorCode::IndexOutOfRange: return 5;
        case ErrorCode::EmptyGrid: return 6;
        case ErrorCode::NoIntersection: return 7;
        case ErrorCode::NotNormalized: return 8;
        case ErrorCode::NotHermitian: return 9;
        case ErrorCode::NotUnitary: return 10;
        case ErrorCode::ImaginaryResidue: return 11;
        case ErrorCode::DimensionMismatch: return 12;
    }
    return 1;
}

inline constexpr int kValidationFailed = 1;

inline const char* kExitCodeHelp =
    "Exit codes:\n"
    "  0  success\n"
    "  1  validate: at least one check failed\n"
    "  2  usage error (bad or missing flags)\n"
    "  3  I/O error (output not written)\n"
    "  4  invalid cycle size (n must be odd and >= 5)\n"
    "  5  index out of range\n"
    "  6  empty grid or range\n"
    "  7  no margin crossing on (0, pi/2)\n"
    "  8  state not normalized\n"
    "  9  operator not Hermitian\n"
    " 10  operator not unitary\n"
    " 11  imaginary residue in an expectation value\n"
    " 12  dimension mismatch\n"
    " 70  unexpected internal error\n";

/// Effective parameters of one invocation, after config file and flags.
struct RunConfig {
    std::string command;
    std::string n = "5";
    std::string theta = "0:180:181";
    std::string phi = "0:360:361";
    std::string mode = "analytic";
    std::optional<std::uint64_t> shots;
    std::optional<std::uint64_t> seed;
    double theta_deg = 90.0;
    double phi_deg = 0.0;
    std::string alice = "w0";
    std::string bob = "b0";
    std::string out;
    unsigned threads = 1;
    bool no_timestamp = false;
};

namespace detail {

inline io::Metadata metadata(const RunConfig& cfg, std::initializer_list<const char*> keys) {
    io::Metadata m;
    m.emplace_back("command", cfg.command);
    for (std::string_view k : keys) {
        if (k == "n") m.emplace_back("n", cfg.n);
        else if (k == "theta") m.emplace_back("theta", cfg.theta);
        else if (k == "phi") m.emplace_back("phi", cfg.phi);
        else if (k == "mode") m.emplace_back("mode", cfg.mode);
        else if (k == "shots") m.emplace_back("shots", cfg.shots ? std::to_string(*cfg.shots) : "");
        else if (k == "seed") m.emplace_back("seed", cfg.seed ? std::to_string(*cfg.seed) : "");
        else if (k == "theta_deg") m.emplace_back("theta_deg", io::format_double(cfg.theta_deg));
        else if (k == "phi_deg") m.emplace_back("phi_deg", io::format_double(cfg.phi_deg));
        else if (k == "alice") m.emplace_back("alice", cfg.alice);
        else if (k == "bob") m.emplace_back("bob", cfg.bob);
    }
    if (!cfg.no_timestamp) m.emplace_back("generated", io::utc_timestamp());
    return m;
}

inline void emit(const RunConfig& cfg, const std::string& content, std::ostream& out) {
    if (cfg.out.empty()) out << content;
    else io::write_atomic(cfg.out, content);
}

inline int single_n(const RunConfig& cfg) {
    const auto ns = io::parse_n_range(cfg.n);
    if (ns.size() != 1) throw Error(ErrorCode::Usage, "this command takes a single n");
    return ns.front();
}

inline int run_observables(const RunConfig& cfg, std::ostream& out) {
    const int n = single_n(cfg);
    const auto g = cycle_geometry(n);
    io::json j;
    j["meta"] = io::metadata_json(metadata(cfg, {"n"}));
    j["n"] = n;
    j["geometry"] = {{"c", g.c}, {"s2", g.s2}, {"c2", g.c2}, {"m", g.m}, {"lambda1", g.lambda1},
                     {"lambda3", g.lambda3}};
    io::json vecs = io::json::array(), bs = io::json::array();
    for (int k = 0; k < n; ++k) {
        const auto v = kcbs_vector(n, k);
        const cplx vc[] = {v[0], v[1], v[2]};
        vecs.push_back(io::state_to_json(vc));
        bs.push_back(io::matrix_to_json(kcbs_observable(n, k).matrix));
    }
    j["vectors"] = std::move(vecs);
    j["B"] = std::move(bs);
    j["B0"] = io::matrix_to_json(b0_closed_form(n).matrix);
    j["BmBm1"] = io::matrix_to_json(bm_bm1_closed_form(n).matrix);
    j["S"] = io::matrix_to_json(s_operator(n).matrix);
    emit(cfg, j.dump(2) + "\n", out);
    return 0;
}

inline int run_threshold(const RunConfig& cfg, std::ostream& out) {
    const auto ns = io::parse_n_range(cfg.n);
    std::string text;
    if (ns.size() == 1) {
        text = io::format_fixed(p2_threshold(ns.front()), 6) + "\n";
    } else {
        for (int n : ns) text += std::to_string(n) + " " + io::format_fixed(p2_threshold(n), 6) + "\n";
    }
    emit(cfg, text, out);
    return 0;
}

inline int run_landscape(const RunConfig& cfg, std::ostream& out) {
    const int n = single_n(cfg);
    LandscapeOptions opt;
    if (cfg.mode == "analytic") opt.mode = ScanMode::Analytic;
    else if (cfg.mode == "circuit") opt.mode = ScanMode::Circuit;
    else throw Error(ErrorCode::Usage, "mode must be analytic or circuit");
    opt.shots = cfg.shots;
    opt.seed = cfg.seed;
    opt.threads = cfg.threads;
    const auto thetas = io::parse_grid(cfg.theta);
    const auto phis = io::parse_grid(cfg.phi);
    const auto recs = landscape_scan(n, thetas, phis, opt);
    emit(cfg, io::landscape_csv(recs, metadata(cfg, {"n", "theta", "phi", "mode", "shots", "seed"})), out);
    return 0;
}

inline int run_coexist(const RunConfig& cfg, std::ostream& out) {
    const auto ns = io::parse_n_range(cfg.n);
    const auto recs = coexistence_table(ns, cfg.threads);
    emit(cfg, io::coexist_csv(recs, metadata(cfg, {"n"})), out);
    return 0;
}

inline int run_scaling(const RunConfig& cfg, std::ostream& out) {
    const auto ns = io::parse_n_range(cfg.n);
    const auto study = scaling_study(ns, cfg.threads);
    emit(cfg, io::scaling_csv(study, metadata(cfg, {"n"})), out);
    return 0;
}

inline ComplexMatrix bob_operator(const std::string& spec, int n) {
    if (spec == "b0") return b0_closed_form(n).matrix;
    if (spec == "bmbm1") return bm_bm1_closed_form(n).matrix;
    if (spec.rfind("pair:", 0) == 0) {
        const int j = static_cast<int>(io::parse_int(std::string_view(spec).substr(5)));
        return kcbs_pair(n, j).matrix;
    }
    throw Error(ErrorCode::Usage, "bob must be b0, bmbm1 or pair:J");
}

inline int run_fourier_test(const RunConfig& cfg, std::ostream& out) {
    const int n = single_n(cfg);
    const double theta = deg_to_rad(cfg.theta_deg);
    const double phi = deg_to_rad(cfg.phi_deg);
    const JointState psi = prepare_state1(theta, phi);
    const auto k = chsh_coefficients(psi, n);

    ComplexMatrix alice;
    if (cfg.alice == "w0") alice = alice_rotation(k.omega0).matrix;
    else if (cfg.alice == "w2") alice = alice_rotation(k.omega2).matrix;
    else if (cfg.alice == "id") alice = ComplexMatrix::identity(2);
    else throw Error(ErrorCode::Usage, "alice must be w0, w2 or id");
    const auto bob = bob_operator(cfg.bob, n);

    const auto exact = fourier_test(alice, bob, psi);
    const double reference = expectation(psi, tensor(alice, bob));

    FourierTestReport rep = exact;
    if (cfg.shots) {
        if (*cfg.shots == 0) throw Error(ErrorCode::Usage, "shots must be positive");
        rep = sample_shots(exact, *cfg.shots, cfg.seed.value_or(0));
    }

    io::json j;
    j["meta"] = io::metadata_json(metadata(cfg, {"n", "theta_deg", "phi_deg", "alice", "bob", "shots", "seed"}));
    j["n"] = n;
    j["theta_deg"] = cfg.theta_deg;
    j["phi_deg"] = cfg.phi_deg;
    j["alice"] = cfg.alice;
    j["bob"] = cfg.bob;
    j["omega0"] = k.omega0;
    j["omega2"] = k.omega2;
    j["probabilities"] = {exact.p0, exact.p1, exact.p2};
    j["shots"] = rep.shots ? io::json(*rep.shots) : io::json(nullptr);
    j["counts"] = rep.counts ? io::json(*rep.counts) : io::json(nullptr);
    j["estimators"] = {{"combined", rep.estimator_combined}, {"p0", rep.estimator_p0}, {"p1", rep.estimator_p1}};
    if (rep.shots) j["standard_error"] = combined_standard_error(exact, *rep.shots);
    j["exact_value"] = reference;
    j["seed"] = rep.seed ? io::json(*rep.seed) : io::json(nullptr);
    emit(cfg, j.dump(2) + "\n", out);
    return 0;
}

inline int run_validate(const RunConfig&, std::ostream& out) {
    return report_validation(run_validation(), out) ? 0 : kValidationFailed;
}

}  // namespace detail

/// Parses argv (argv[0] is the program name) and runs one command.
inline int parse_and_dispatch(int argc, const char* const* argv, std::ostream& out = std::cout,
                              std::ostream& err = std::cerr) {
    CLI::App app{"Hybrid CHSH-KCBS toolkit for a qubit-qutrit system", "coexist"};
    app.footer(kExitCodeHelp);
    app.set_config("--config", "", "Read options from a TOML/INI file; flags override file values");
    app.require_subcommand(1);

    RunConfig cfg;
    app.add_flag("--no-timestamp", cfg.no_timestamp, "Omit the generation timestamp from outputs");
    app.add_option("--threads", cfg.threads, "Worker threads for grid and n-range commands")
        ->check(CLI::Range(1u, 256u));

    auto add_out = [&](CLI::App* sub) { sub->add_option("--out", cfg.out, "Output file (default: stdout)"); };

    auto* observables = app.add_subcommand("observables", "Dump KCBS vectors, observables, B0, BmBm+1 and S as JSON");
    observables->add_option("--n", cfg.n, "Odd cycle size >= 5")->required();
    add_out(observables);

    auto* threshold = app.add_subcommand("threshold", "Print the p2 threshold for KCBS violation");
    threshold->add_option("--n", cfg.n, "Cycle size, or first:last:step")->required();
    add_out(threshold);

    auto* landscape = app.add_subcommand("landscape", "Scan CHSH/KCBS margins of state I over (theta, phi)");
    landscape->add_option("--n", cfg.n, "Odd cycle size >= 5")->capture_default_str();
    landscape->add_option("--theta", cfg.theta, "theta grid in degrees, start:stop:count")->capture_default_str();
    landscape->add_option("--phi", cfg.phi, "phi grid in degrees, start:stop:count")->capture_default_str();
    landscape->add_option("--mode", cfg.mode, "analytic | circuit")
        ->check(CLI::IsMember({"analytic", "circuit"}))
        ->capture_default_str();
    landscape->add_option("--shots", cfg.shots, "Shots per correlator (circuit mode)");
    landscape->add_option("--seed", cfg.seed, "Master seed (circuit mode)");
    add_out(landscape);

    auto* coexist = app.add_subcommand("coexist", "Solve the CHSH = KCBS margin crossing for each n");
    coexist->add_option("--n", cfg.n, "Cycle size, or first:last:step")->required();
    add_out(coexist);

    auto* scaling = app.add_subcommand("scaling", "Coexistence points, psi_n margins and asymptotics over n");
    scaling->add_option("--n", cfg.n, "first:last:step")->required();
    add_out(scaling);

    auto* fourier = app.add_subcommand("fourier-test", "Run the ancilla Fourier test for one correlator");
    fourier->add_option("--n", cfg.n, "Odd cycle size >= 5")->capture_default_str();
    fourier->add_option("--theta", cfg.theta_deg, "State I theta in degrees")->capture_default_str();
    fourier->add_option("--phi", cfg.phi_deg, "State I phi in degrees")->capture_default_str();
    fourier->add_option("--alice", cfg.alice, "w0 | w2 | id")
        ->check(CLI::IsMember({"w0", "w2", "id"}))
        ->capture_default_str();
    fourier->add_option("--bob", cfg.bob, "b0 | bmbm1 | pair:J")->capture_default_str();
    fourier->add_option("--shots", cfg.shots, "Sample this many shots (omit for exact probabilities)");
    fourier->add_option("--seed", cfg.seed, "Sampling seed");
    add_out(fourier);

    auto* validate = app.add_subcommand("validate", "Run the invariant suite; exit 0 iff all checks pass");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return exit_code(ErrorCode::Usage);
    }

    try {
        if (observables->parsed()) { cfg.command = "observables"; return detail::run_observables(cfg, out); }
        if (threshold->parsed()) { cfg.command = "threshold"; return detail::run_threshold(cfg, out); }
        if (landscape->parsed()) { cfg.command = "landscape"; return detail::run_landscape(cfg, out); }
        if (coexist->parsed()) { cfg.command = "coexist"; return detail::run_coexist(cfg, out); }
        if (scaling->parsed()) { cfg.command = "scaling"; return detail::run_scaling(cfg, out); }
        if (fourier->parsed()) { cfg.command = "fourier-test"; return detail::run_fourier_test(cfg, out); }
        if (validate->parsed()) { cfg.command = "validate"; return detail::run_validate(cfg, out); }
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code(e.code());
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return 70;
    }
    return exit_code(ErrorCode::Usage);
}

/// Convenience overload; `args` excludes the program name.
inline int parse_and_dispatch(const std::vector<std::string>& args, std::ostream& out = std::cout,
                              std::ostream& err = std::cerr) {
    std::vector<const char*> argv{"coexist"};
    for (const auto& a : args) argv.push_back(a.c_str());
    return parse_and_dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace coexist::cli
