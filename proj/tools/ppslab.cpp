// ppslab: scenario runner and scripting front-end for the connection-state
// library. Exit codes: 0 success, 1 numerical/domain error, 2 usage error.

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "ppslab/ppslab.hpp"

namespace {

using ppslab::CMatrix;
using ppslab::Complex;
using ppslab::json;

constexpr int kExitSuccess = 0;
constexpr int kExitDomainError = 1;
constexpr int kExitUsageError = 2;

void emit_error(const std::string& kind, const std::string& message, const std::string& context) {
    json err{{"error", kind}, {"message", message}, {"context", context}};
    std::cerr << err.dump() << "\n";
}

CMatrix load_matrix(const std::string& path) {
    return ppslab::matrix_from_json(ppslab::json_from_file(path));
}

void emit(const json& j, const std::string& out_path) {
    if (out_path.empty())
        std::cout << j.dump(2) << "\n";
    else
        ppslab::write_file(out_path, j.dump(2) + "\n");
}

json complex_json(Complex v) { return json{{"re", v.real()}, {"im", v.imag()}}; }

struct ScenarioArgs {
    std::string config_path;
    std::string out_path;
    std::string format = "csv";
    std::uint64_t seed = 0;
};

void add_scenario(CLI::App& app, const std::string& name, const std::string& description,
                  std::vector<std::pair<std::string, ScenarioArgs>>& requests,
                  const std::string& default_format = "csv") {
    auto args = std::make_shared<ScenarioArgs>();
    args->format = default_format;
    CLI::App* cmd = app.add_subcommand(name, description);
    cmd->add_option("--config", args->config_path, "scenario config JSON file");
    cmd->add_option("--out", args->out_path, "output file path")->required();
    cmd->add_option("--format", args->format, "output format")
        ->check(CLI::IsMember({"csv", "json"}));
    cmd->add_option("--seed", args->seed, "seed for stochastic scenarios");
    cmd->callback([name, args, &requests] { requests.emplace_back(name, *args); });
}

int run_scenario_request(const std::string& name, const ScenarioArgs& args) {
    ppslab::ScenarioConfig config;
    config.name = name;
    config.params = args.config_path.empty() ? json::object()
                                             : ppslab::json_from_file(args.config_path);
    config.out_path = args.out_path;
    config.format = args.format == "json" ? ppslab::OutputFormat::Json
                                          : ppslab::OutputFormat::Csv;
    config.seed = args.seed;
    ppslab::run_scenario(config);
    return kExitSuccess;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"connection-state toolkit for pre- and post-selected measurements"};
    app.require_subcommand(1);

    std::vector<std::pair<std::string, ScenarioArgs>> scenario_requests;
    for (const char* name : {"uncertainty-scan", "amplification-scan", "dynamics-trace",
                             "meter-sweep"})
        add_scenario(app, name, std::string("run the ") + name + " scenario", scenario_requests);
    for (const char* name : {"tomography-roundtrip", "detector-tomography"})
        add_scenario(app, name, std::string("run the ") + name + " scenario", scenario_requests,
                     "json");

    // Common option state for the single-purpose operation subcommands.
    std::string rho_path, effect_path, observable_path, matrix_path, matrix_b_path;
    std::string projector_path, unitary_path, schedule_path, meter_path, data_path, out_path;
    std::string picture_name = "schroedinger", basis_name;
    double tol = ppslab::kHermTol;
    double t_value = 0.0, t_ref = 0.0, t_from = 0.0, t_to = 0.0, dt_value = 0.0;
    double noise_sigma = 0.0, post_prob = 0.0;
    std::uint64_t seed = 0;
    int dim = 2;
    bool herm_part = false;
    std::vector<double> prior, likelihood;

    auto add_out = [&out_path](CLI::App* cmd) {
        cmd->add_option("--out", out_path, "write JSON here instead of stdout");
    };

    CLI::App* cmd;

    cmd = app.add_subcommand("is-hermitian", "Hermiticity check of a matrix file");
    cmd->add_option("--matrix", matrix_path)->required();
    cmd->add_option("--tol", tol);
    add_out(cmd);

    cmd = app.add_subcommand("norm", "operator norm (largest singular value)");
    cmd->add_option("--matrix", matrix_path)->required();
    add_out(cmd);

    cmd = app.add_subcommand("commutes", "commutation check of two matrices");
    cmd->add_option("--a", matrix_path)->required();
    cmd->add_option("--b", matrix_b_path)->required();
    cmd->add_option("--tol", tol);
    add_out(cmd);

    cmd = app.add_subcommand("spectral", "spectral decomposition of a Hermitian matrix");
    cmd->add_option("--matrix", matrix_path)->required();
    double deg_tol = -1.0;
    cmd->add_option("--deg-tol", deg_tol, "degeneracy grouping threshold");
    add_out(cmd);

    cmd = app.add_subcommand("expm", "unitary exp(-i H dt) from a Hamiltonian");
    cmd->add_option("--hamiltonian", matrix_path)->required();
    cmd->add_option("--dt", dt_value)->required();
    add_out(cmd);

    cmd = app.add_subcommand("connection-state", "w = rho E / Tr(rho E)");
    cmd->add_option("--rho", rho_path)->required();
    cmd->add_option("--effect", effect_path)->required();
    add_out(cmd);

    cmd = app.add_subcommand("weak-value", "A_w = Tr(A w)");
    cmd->add_option("--rho", rho_path)->required();
    cmd->add_option("--effect", effect_path)->required();
    cmd->add_option("--observable", observable_path)->required();
    add_out(cmd);

    cmd = app.add_subcommand("classify", "usual/unusual classification of w");
    cmd->add_option("--rho", rho_path)->required();
    cmd->add_option("--effect", effect_path)->required();
    cmd->add_option("--tol", tol);
    add_out(cmd);

    cmd = app.add_subcommand("norm-bound", "c' + c'' >= ||w|| check");
    cmd->add_option("--rho", rho_path)->required();
    cmd->add_option("--effect", effect_path)->required();
    add_out(cmd);

    cmd = app.add_subcommand("retrodictive", "retrodictive state E / Tr E");
    cmd->add_option("--effect", effect_path)->required();
    add_out(cmd);

    std::vector<std::string> effect_paths;
    cmd = app.add_subcommand("posterior-family", "posterior family of a complete POVM");
    cmd->add_option("--rho", rho_path)->required();
    cmd->add_option("--effect", effect_paths, "POVM element files (repeat)")->required();
    add_out(cmd);

    cmd = app.add_subcommand("classical-posterior", "classical Bayes update");
    cmd->add_option("--prior", prior, "prior probabilities")->required()->delimiter(',');
    cmd->add_option("--likelihood", likelihood, "outcome column e_{i,l}")
        ->required()
        ->delimiter(',');
    add_out(cmd);

    cmd = app.add_subcommand("born", "P = Tr(rho E)");
    cmd->add_option("--rho", rho_path)->required();
    cmd->add_option("--effect", effect_path)->required();
    add_out(cmd);

    cmd = app.add_subcommand("expectation", "Abar = Tr(A rho)");
    cmd->add_option("--rho", rho_path)->required();
    cmd->add_option("--observable", observable_path)->required();
    add_out(cmd);

    cmd = app.add_subcommand("projective-posterior", "Pi rho Pi / Tr(rho Pi)");
    cmd->add_option("--rho", rho_path)->required();
    cmd->add_option("--projector", projector_path)->required();
    add_out(cmd);

    cmd = app.add_subcommand("md-posterior", "minimally disturbing posterior");
    cmd->add_option("--rho", rho_path)->required();
    cmd->add_option("--effect", effect_path)->required();
    add_out(cmd);

    cmd = app.add_subcommand("abl", "strong PPS outcome probabilities");
    cmd->add_option("--rho", rho_path)->required();
    cmd->add_option("--observable", observable_path)->required();
    cmd->add_option("--effect", effect_path)->required();
    add_out(cmd);

    cmd = app.add_subcommand("strong-pps", "strong PPS probabilities via Tr(Pi_i w)");
    cmd->add_option("--rho", rho_path)->required();
    cmd->add_option("--observable", observable_path)->required();
    cmd->add_option("--effect", effect_path)->required();
    add_out(cmd);

    cmd = app.add_subcommand("weak-value-spectral", "sum_i a_i Tr(Pi_i w)");
    cmd->add_option("--rho", rho_path)->required();
    cmd->add_option("--observable", observable_path)->required();
    cmd->add_option("--effect", effect_path)->required();
    add_out(cmd);

    cmd = app.add_subcommand("pointer-preselected", "preselected pointer expectation");
    cmd->add_option("--rho", rho_path)->required();
    cmd->add_option("--observable", observable_path)->required();
    cmd->add_option("--meter", meter_path)->required();
    add_out(cmd);

    cmd = app.add_subcommand("pointer-pps", "PPS pointer expectation");
    cmd->add_option("--rho", rho_path)->required();
    cmd->add_option("--effect", effect_path)->required();
    cmd->add_option("--observable", observable_path)->required();
    cmd->add_option("--meter", meter_path)->required();
    add_out(cmd);

    cmd = app.add_subcommand("pointer-connection", "pointer expectation from w");
    cmd->add_option("--rho", rho_path)->required();
    cmd->add_option("--effect", effect_path)->required();
    cmd->add_option("--observable", observable_path)->required();
    cmd->add_option("--meter", meter_path)->required();
    cmd->add_flag("--herm-part", herm_part, "use w' instead of w");
    add_out(cmd);

    cmd = app.add_subcommand("propagator", "time-ordered propagator of a schedule");
    cmd->add_option("--schedule", schedule_path)->required();
    cmd->add_option("--from", t_from)->required();
    cmd->add_option("--to", t_to)->required();
    add_out(cmd);

    cmd = app.add_subcommand("evolve-state", "rho -> U rho U^dag");
    cmd->add_option("--rho", rho_path)->required();
    cmd->add_option("--unitary", unitary_path)->required();
    add_out(cmd);

    cmd = app.add_subcommand("heisenberg-effect", "E -> U^dag E U");
    cmd->add_option("--effect", effect_path)->required();
    cmd->add_option("--unitary", unitary_path)->required();
    add_out(cmd);

    cmd = app.add_subcommand("connection-at", "time-dependent connection state w(t)");
    cmd->add_option("--rho", rho_path)->required();
    cmd->add_option("--effect", effect_path)->required();
    cmd->add_option("--schedule", schedule_path)->required();
    cmd->add_option("--t", t_value)->required();
    double t0_val = 0.0, t1_val = 0.0;
    CLI::Option* t0_opt_flag = cmd->add_option("--t0", t0_val, "preparation time");
    CLI::Option* t1_opt_flag = cmd->add_option("--t1", t1_val, "post-selection time");
    add_out(cmd);

    cmd = app.add_subcommand("weak-value-picture", "A_w in a chosen picture");
    cmd->add_option("--rho", rho_path)->required();
    cmd->add_option("--effect", effect_path)->required();
    cmd->add_option("--observable", observable_path)->required();
    cmd->add_option("--schedule", schedule_path)->required();
    cmd->add_option("--t", t_value)->required();
    cmd->add_option("--picture", picture_name)
        ->check(CLI::IsMember({"schroedinger", "forward", "backward", "heisenberg"}));
    cmd->add_option("--t-ref", t_ref, "reference time for --picture heisenberg");
    add_out(cmd);

    cmd = app.add_subcommand("retrodictive-at", "time-dependent retrodictive state");
    cmd->add_option("--effect", effect_path)->required();
    cmd->add_option("--schedule", schedule_path)->required();
    cmd->add_option("--t", t_value)->required();
    add_out(cmd);

    cmd = app.add_subcommand("evolve-ode", "RK4 trajectory of the von Neumann equation");
    cmd->add_option("--rho", rho_path)->required();
    cmd->add_option("--effect", effect_path)->required();
    cmd->add_option("--schedule", schedule_path)->required();
    cmd->add_option("--dt", dt_value)->required();
    cmd->add_option("--out", out_path, "trajectory CSV path")->required();

    cmd = app.add_subcommand("design-matrix", "design matrix of the standard basis");
    cmd->add_option("--dim", dim)->required();
    cmd->add_option("--basis", basis_name)->check(CLI::IsMember({"pauli", "gell-mann"}));
    add_out(cmd);

    cmd = app.add_subcommand("simulate-weak-data", "weak-value data for the standard probes");
    cmd->add_option("--rho", rho_path)->required();
    cmd->add_option("--effect", effect_path)->required();
    cmd->add_option("--noise-sigma", noise_sigma);
    cmd->add_option("--seed", seed);
    cmd->add_option("--basis", basis_name)->check(CLI::IsMember({"pauli", "gell-mann"}));
    cmd->add_option("--out", out_path, "data CSV path")->required();

    cmd = app.add_subcommand("reconstruct", "connection state from weak-value data CSV");
    cmd->add_option("--data", data_path)->required();
    cmd->add_option("--dim", dim)->required();
    cmd->add_option("--basis", basis_name)->check(CLI::IsMember({"pauli", "gell-mann"}));
    add_out(cmd);

    cmd = app.add_subcommand("reconstruct-detector", "POVM element from post-selected-only data");
    cmd->add_option("--data", data_path)->required();
    cmd->add_option("--dim", dim)->required();
    cmd->add_option("--p", post_prob, "measured post-selection probability")->required();
    cmd->add_option("--noise-sigma", noise_sigma);
    cmd->add_option("--basis", basis_name)->check(CLI::IsMember({"pauli", "gell-mann"}));
    add_out(cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        emit_error("usage", e.what(), "argument parsing");
        return kExitUsageError;
    }

    std::string active = app.get_subcommands().front()->get_name();
    try {
        if (!scenario_requests.empty()) {
            const auto& [name, args] = scenario_requests.front();
            return run_scenario_request(name, args);
        }

        auto basis_for_dim = [&](int d) {
            if (basis_name == "pauli") {
                if (d != 2) throw ppslab::ConfigError("basis \"pauli\" requires dim 2");
                return ppslab::OperatorBasis::pauli();
            }
            if (basis_name == "gell-mann") return ppslab::OperatorBasis::gell_mann(d);
            return ppslab::OperatorBasis::standard(d);
        };

        if (active == "is-hermitian") {
            emit(json{{"hermitian", ppslab::validate_hermitian(load_matrix(matrix_path), tol)}},
                 out_path);
        } else if (active == "norm") {
            emit(json{{"operator_norm", ppslab::operator_norm(load_matrix(matrix_path))}},
                 out_path);
        } else if (active == "commutes") {
            emit(json{{"commutes", ppslab::commutes(load_matrix(matrix_path),
                                                    load_matrix(matrix_b_path), tol)}},
                 out_path);
        } else if (active == "spectral") {
            ppslab::Observable a(load_matrix(matrix_path), deg_tol);
            json projectors = json::array();
            for (const auto& p : a.projectors()) projectors.push_back(ppslab::matrix_to_json(p));
            emit(json{{"eigenvalues", a.eigenvalues()}, {"projectors", projectors}}, out_path);
        } else if (active == "expm") {
            emit(ppslab::matrix_to_json(
                     ppslab::unitary_from_hamiltonian(load_matrix(matrix_path), dt_value)),
                 out_path);
        } else if (active == "connection-state") {
            ppslab::ConnectionState w = ppslab::connection_state(
                ppslab::DensityMatrix(load_matrix(rho_path)),
                ppslab::PovmElement(load_matrix(effect_path)));
            emit(ppslab::connection_to_json(w), out_path);
        } else if (active == "weak-value") {
            ppslab::ConnectionState w = ppslab::connection_state(
                ppslab::DensityMatrix(load_matrix(rho_path)),
                ppslab::PovmElement(load_matrix(effect_path)));
            emit(complex_json(
                     ppslab::weak_value(ppslab::Observable(load_matrix(observable_path)), w)),
                 out_path);
        } else if (active == "classify") {
            ppslab::ConnectionState w = ppslab::connection_state(
                ppslab::DensityMatrix(load_matrix(rho_path)),
                ppslab::PovmElement(load_matrix(effect_path)));
            ppslab::Classification c = ppslab::classify(w, tol);
            emit(json{{"class", c.kind == ppslab::StateClass::Usual ? "usual" : "unusual"},
                      {"antiherm_norm", c.antiherm_norm},
                      {"herm_min_eigenvalue", c.herm_min_eigenvalue}},
                 out_path);
        } else if (active == "norm-bound") {
            ppslab::ConnectionState w = ppslab::connection_state(
                ppslab::DensityMatrix(load_matrix(rho_path)),
                ppslab::PovmElement(load_matrix(effect_path)));
            ppslab::NormBound b = ppslab::norm_bound_check(w);
            emit(json{{"c_prime", b.c_prime},
                      {"c_doubleprime", b.c_doubleprime},
                      {"w_norm", b.w_norm},
                      {"holds", b.holds}},
                 out_path);
        } else if (active == "retrodictive") {
            emit(ppslab::connection_to_json(
                     ppslab::retrodictive_state(ppslab::PovmElement(load_matrix(effect_path)))),
                 out_path);
        } else if (active == "posterior-family") {
            std::vector<ppslab::PovmElement> elements;
            for (const auto& path : effect_paths)
                elements.emplace_back(load_matrix(path));
            ppslab::PosteriorFamily fam = ppslab::posterior_family(
                ppslab::DensityMatrix(load_matrix(rho_path)), ppslab::Povm(elements));
            json states = json::array();
            for (const auto& w : fam.states) states.push_back(ppslab::connection_to_json(w));
            emit(json{{"probs", fam.probs}, {"states", states}, {"excluded", fam.excluded}},
                 out_path);
        } else if (active == "classical-posterior") {
            std::vector<std::vector<double>> table;
            for (double e : likelihood) table.push_back({e});
            ppslab::ClassicalPosterior post =
                ppslab::classical_posterior(ppslab::ClassicalEnsemble(prior, table), 0);
            emit(json{{"outcome_prob", post.outcome_prob}, {"posterior", post.posterior}},
                 out_path);
        } else if (active == "born") {
            emit(json{{"probability",
                       ppslab::born_probability(ppslab::DensityMatrix(load_matrix(rho_path)),
                                                ppslab::PovmElement(load_matrix(effect_path)))}},
                 out_path);
        } else if (active == "expectation") {
            emit(json{{"expectation",
                       ppslab::expectation(ppslab::Observable(load_matrix(observable_path)),
                                           ppslab::DensityMatrix(load_matrix(rho_path)))}},
                 out_path);
        } else if (active == "projective-posterior") {
            emit(ppslab::matrix_to_json(
                     ppslab::projective_posterior(ppslab::DensityMatrix(load_matrix(rho_path)),
                                                  load_matrix(projector_path))
                         .matrix()),
                 out_path);
        } else if (active == "md-posterior") {
            emit(ppslab::matrix_to_json(ppslab::minimally_disturbing_posterior(
                                            ppslab::DensityMatrix(load_matrix(rho_path)),
                                            ppslab::PovmElement(load_matrix(effect_path)))
                                            .matrix()),
                 out_path);
        } else if (active == "abl" || active == "strong-pps" || active == "weak-value-spectral") {
            ppslab::DensityMatrix rho(load_matrix(rho_path));
            ppslab::Observable a(load_matrix(observable_path));
            ppslab::PovmElement effect(load_matrix(effect_path));
            if (active == "abl") {
                emit(json{{"eigenvalues", a.eigenvalues()},
                          {"probabilities", ppslab::abl_probabilities(rho, a, effect)}},
                     out_path);
            } else {
                ppslab::ConnectionState w = ppslab::connection_state(rho, effect);
                if (active == "strong-pps")
                    emit(json{{"eigenvalues", a.eigenvalues()},
                              {"probabilities", ppslab::strong_pps_via_connection(a, w)}},
                         out_path);
                else
                    emit(json{{"weak_value", ppslab::weak_value_spectral(a, w)}}, out_path);
            }
        } else if (active == "pointer-preselected") {
            emit(json{{"pointer_expectation",
                       ppslab::pointer_expectation_preselected(
                           ppslab::DensityMatrix(load_matrix(rho_path)),
                           ppslab::Observable(load_matrix(observable_path)),
                           ppslab::meter_from_json(ppslab::json_from_file(meter_path)))}},
                 out_path);
        } else if (active == "pointer-pps") {
            emit(json{{"pointer_expectation",
                       ppslab::pointer_expectation_pps(
                           ppslab::DensityMatrix(load_matrix(rho_path)),
                           ppslab::PovmElement(load_matrix(effect_path)),
                           ppslab::Observable(load_matrix(observable_path)),
                           ppslab::meter_from_json(ppslab::json_from_file(meter_path)))}},
                 out_path);
        } else if (active == "pointer-connection") {
            ppslab::ConnectionState w = ppslab::connection_state(
                ppslab::DensityMatrix(load_matrix(rho_path)),
                ppslab::PovmElement(load_matrix(effect_path)));
            emit(json{{"pointer_expectation",
                       ppslab::pointer_expectation_connection(
                           w, ppslab::Observable(load_matrix(observable_path)),
                           ppslab::meter_from_json(ppslab::json_from_file(meter_path)),
                           herm_part)}},
                 out_path);
        } else if (active == "propagator") {
            emit(ppslab::matrix_to_json(ppslab::propagator(
                     ppslab::schedule_from_json(ppslab::json_from_file(schedule_path)), t_from,
                     t_to)),
                 out_path);
        } else if (active == "evolve-state") {
            emit(ppslab::matrix_to_json(
                     ppslab::evolve_state(ppslab::DensityMatrix(load_matrix(rho_path)),
                                          load_matrix(unitary_path))
                         .matrix()),
                 out_path);
        } else if (active == "heisenberg-effect") {
            emit(ppslab::matrix_to_json(
                     ppslab::heisenberg_effect(ppslab::PovmElement(load_matrix(effect_path)),
                                               load_matrix(unitary_path))
                         .matrix()),
                 out_path);
        } else if (active == "connection-at") {
            ppslab::HamiltonianSchedule sched =
                ppslab::schedule_from_json(ppslab::json_from_file(schedule_path));
            double t0 = t0_opt_flag->count() ? t0_val : sched.t0();
            double t1 = t1_opt_flag->count() ? t1_val : sched.t1();
            emit(ppslab::connection_to_json(ppslab::connection_state_at(
                     ppslab::DensityMatrix(load_matrix(rho_path)),
                     ppslab::PovmElement(load_matrix(effect_path)), sched, t0, t_value, t1)),
                 out_path);
        } else if (active == "weak-value-picture") {
            ppslab::Picture picture = ppslab::Picture::schroedinger();
            if (picture_name == "forward") picture = ppslab::Picture::forward_heisenberg();
            if (picture_name == "backward") picture = ppslab::Picture::backward_heisenberg();
            if (picture_name == "heisenberg") picture = ppslab::Picture::heisenberg_at(t_ref);
            emit(complex_json(ppslab::weak_value_in_picture(
                     ppslab::Observable(load_matrix(observable_path)),
                     ppslab::DensityMatrix(load_matrix(rho_path)),
                     ppslab::PovmElement(load_matrix(effect_path)),
                     ppslab::schedule_from_json(ppslab::json_from_file(schedule_path)), t_value,
                     picture)),
                 out_path);
        } else if (active == "retrodictive-at") {
            ppslab::HamiltonianSchedule sched =
                ppslab::schedule_from_json(ppslab::json_from_file(schedule_path));
            emit(ppslab::connection_to_json(
                     ppslab::retrodictive_at(ppslab::PovmElement(load_matrix(effect_path)), sched,
                                             t_value, sched.t1())),
                 out_path);
        } else if (active == "evolve-ode") {
            ppslab::HamiltonianSchedule sched =
                ppslab::schedule_from_json(ppslab::json_from_file(schedule_path));
            ppslab::ConnectionState w0 = ppslab::connection_state(
                ppslab::DensityMatrix(load_matrix(rho_path)),
                ppslab::PovmElement(load_matrix(effect_path)));
            auto traj = ppslab::evolve_connection_ode(w0, sched, sched.t0(), sched.t1(), dt_value);
            std::vector<double> times;
            std::vector<ppslab::ConnectionState> states;
            for (auto& p : traj) {
                times.push_back(p.t);
                states.push_back(p.state);
            }
            ppslab::write_file(out_path, ppslab::trajectory_csv(times, states));
        } else if (active == "design-matrix") {
            ppslab::OperatorBasis basis = basis_for_dim(dim);
            emit(ppslab::matrix_to_json(ppslab::design_matrix(basis.as_observables(), basis)),
                 out_path);
        } else if (active == "simulate-weak-data") {
            ppslab::ConnectionState w = ppslab::connection_state(
                ppslab::DensityMatrix(load_matrix(rho_path)),
                ppslab::PovmElement(load_matrix(effect_path)));
            ppslab::OperatorBasis basis = basis_for_dim(w.dim());
            ppslab::write_file(out_path, ppslab::weak_data_to_csv(ppslab::simulate_weak_value_data(
                                             w, basis.as_observables(), noise_sigma, seed)));
        } else if (active == "reconstruct") {
            std::ifstream in(data_path);
            if (!in) throw ppslab::ParseError("cannot open data file: " + data_path);
            std::vector<Complex> data = ppslab::weak_data_from_csv(in);
            ppslab::OperatorBasis basis = basis_for_dim(dim);
            emit(ppslab::reconstruction_report(
                     ppslab::reconstruct_connection(data, basis.as_observables(), basis)),
                 out_path);
        } else if (active == "reconstruct-detector") {
            std::ifstream in(data_path);
            if (!in) throw ppslab::ParseError("cannot open data file: " + data_path);
            std::vector<Complex> data = ppslab::weak_data_from_csv(in);
            ppslab::OperatorBasis basis = basis_for_dim(dim);
            ppslab::DetectorReconstruction rec = ppslab::detector_tomography(
                data, basis.as_observables(), basis, post_prob, dim, noise_sigma);
            emit(json{{"effect", ppslab::matrix_to_json(rec.effect.matrix())},
                      {"trace", rec.effect.trace()},
                      {"min_eigenvalue", rec.min_eigenvalue},
                      {"herm_deviation", rec.herm_deviation}},
                 out_path);
        } else {
            emit_error("usage", "unhandled subcommand " + active, active);
            return kExitUsageError;
        }
        return kExitSuccess;
    } catch (const ppslab::ConfigError& e) {
        emit_error(e.kind(), e.what(), active);
        return kExitUsageError;
    } catch (const ppslab::ParseError& e) {
        emit_error(e.kind(), e.what(), active);
        return kExitUsageError;
    } catch (const ppslab::Error& e) {
        emit_error(e.kind(), e.what(), active);
        return kExitDomainError;
    } catch (const std::exception& e) {
        emit_error("internal", e.what(), active);
        return kExitDomainError;
    }
}
