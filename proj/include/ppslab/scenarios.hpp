#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "ppslab/connection.hpp"
#include "ppslab/core.hpp"
#include "ppslab/dynamics.hpp"
#include "ppslab/io.hpp"
#include "ppslab/measurement.hpp"
#include "ppslab/meter.hpp"
#include "ppslab/tomography.hpp"

namespace ppslab {

// Bounded worker pool over independent row indices. Each index writes its own
// output slot, so row order is deterministic regardless of completion order.
inline void parallel_rows(std::size_t n, const std::function<void(std::size_t)>& body,
                          unsigned max_workers = 8) {
    unsigned hw = std::thread::hardware_concurrency();
    unsigned workers = std::min<unsigned>({max_workers, hw == 0 ? 1 : hw,
                                           static_cast<unsigned>(std::max<std::size_t>(n, 1))});
    if (workers <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (;;) {
                std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                    return;
                }
            }
        });
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

// --- uncertainty scan (qubit sum-uncertainty violation) ---

struct UncertaintyRow {
    double lambda1;
    double lambda2;
    double var_sum;         // variance of sigma_1 plus variance of sigma_2 under w'
    double wprime_min_eig;  // smallest eigenvalue of w'
    bool violates;          // var_sum < 1 - 1e-12
    bool w_unusual;
};

// rho = (I + lambda1 sigma_1)/2 and E = (I + lambda2 sigma_2)/2 on a
// grid_n x grid_n grid over [-1, 1]^2.
inline std::vector<UncertaintyRow> uncertainty_scan(int grid_n) {
    if (grid_n < 2) throw ConfigError("uncertainty_scan: grid_n must be at least 2");
    const Observable sigma1 = Observable::pauli_x();
    const Observable sigma2 = Observable::pauli_y();
    std::vector<UncertaintyRow> rows(static_cast<std::size_t>(grid_n) * grid_n);
    auto lambda = [grid_n](int k) { return -1.0 + 2.0 * k / (grid_n - 1); };

    parallel_rows(rows.size(), [&](std::size_t idx) {
        int i = static_cast<int>(idx) / grid_n;
        int j = static_cast<int>(idx) % grid_n;
        double l1 = lambda(i), l2 = lambda(j);
        CMatrix id = CMatrix::Identity(2, 2);
        DensityMatrix rho(0.5 * (id + l1 * sigma1.matrix()));
        PovmElement effect(0.5 * (id + l2 * sigma2.matrix()));
        ConnectionState w = connection_state(rho, effect);
        UncertaintyRow row{};
        row.lambda1 = l1;
        row.lambda2 = l2;
        row.var_sum = weak_variance(sigma1, w) + weak_variance(sigma2, w);
        Classification c = classify(w);
        row.wprime_min_eig = c.herm_min_eigenvalue;
        row.violates = row.var_sum < 1.0 - 1e-12;
        row.w_unusual = c.kind == StateClass::Unusual;
        rows[idx] = row;
    });
    return rows;
}

// --- amplification scan (norm growth at small pre/post overlap) ---

struct AmplificationRow {
    double overlap;
    double w_norm;
    double c_prime;
    double c_doubleprime;
    bool bound_holds;
};

// |psi> = |0>, |phi> = cos(theta)|0> + sin(theta)|1> with cos(theta) given by
// the overlap; ||w|| = 1/overlap.
inline std::vector<AmplificationRow> amplification_scan(const std::vector<double>& overlaps) {
    if (overlaps.empty()) throw ConfigError("amplification_scan: no overlaps given");
    for (double v : overlaps)
        if (!(v > kPostSelectionEps) || v > 1.0)
            throw ConfigError("amplification_scan: overlaps must lie in (eps, 1]");
    std::vector<AmplificationRow> rows(overlaps.size());
    parallel_rows(rows.size(), [&](std::size_t i) {
        double overlap = overlaps[i];
        CVector psi(2), phi(2);
        psi << 1, 0;
        double sine = std::sqrt(std::max(0.0, 1.0 - overlap * overlap));
        phi << overlap, sine;
        ConnectionState w =
            connection_state(DensityMatrix::pure(psi), PovmElement::projector(phi));
        NormBound b = norm_bound_check(w);
        rows[i] = AmplificationRow{overlap, b.w_norm, b.c_prime, b.c_doubleprime, b.holds};
    });
    return rows;
}

// --- CSV renderers (headers fixed per scenario) ---

inline std::string uncertainty_csv(const std::vector<UncertaintyRow>& rows) {
    std::string out = "lambda1,lambda2,var_sum,wprime_min_eig,violates,w_unusual\n";
    for (const auto& r : rows)
        out += format_real(r.lambda1) + "," + format_real(r.lambda2) + "," +
               format_real(r.var_sum) + "," + format_real(r.wprime_min_eig) + "," +
               (r.violates ? "1" : "0") + "," + (r.w_unusual ? "1" : "0") + "\n";
    return out;
}

inline std::string amplification_csv(const std::vector<AmplificationRow>& rows) {
    std::string out = "overlap,w_norm,c_prime,c_doubleprime,bound_holds\n";
    for (const auto& r : rows)
        out += format_real(r.overlap) + "," + format_real(r.w_norm) + "," +
               format_real(r.c_prime) + "," + format_real(r.c_doubleprime) + "," +
               (r.bound_holds ? "1" : "0") + "\n";
    return out;
}

inline json uncertainty_json(const std::vector<UncertaintyRow>& rows) {
    json arr = json::array();
    for (const auto& r : rows)
        arr.push_back(json{{"lambda1", r.lambda1},
                           {"lambda2", r.lambda2},
                           {"var_sum", r.var_sum},
                           {"wprime_min_eig", r.wprime_min_eig},
                           {"violates", r.violates},
                           {"w_unusual", r.w_unusual}});
    return arr;
}

inline json amplification_json(const std::vector<AmplificationRow>& rows) {
    json arr = json::array();
    for (const auto& r : rows)
        arr.push_back(json{{"overlap", r.overlap},
                           {"w_norm", r.w_norm},
                           {"c_prime", r.c_prime},
                           {"c_doubleprime", r.c_doubleprime},
                           {"bound_holds", r.bound_holds}});
    return arr;
}

// --- dynamics trace ---

// Samples w(t) of a (rho, E, schedule) configuration on a uniform grid.
struct DynamicsTrace {
    std::vector<double> times;
    std::vector<ConnectionState> states;
};

inline DynamicsTrace dynamics_trace(const DensityMatrix& rho, const PovmElement& effect,
                                    const HamiltonianSchedule& sched, int samples) {
    if (samples < 2) throw ConfigError("dynamics_trace: need at least 2 samples");
    DynamicsTrace trace;
    double t0 = sched.t0(), t1 = sched.t1();
    trace.times.resize(samples);
    trace.states.reserve(samples);
    for (int k = 0; k < samples; ++k) {
        double t = t0 + (t1 - t0) * k / (samples - 1);
        trace.times[k] = t;
        trace.states.push_back(connection_state_at(rho, effect, sched, t0, t, t1));
    }
    return trace;
}

// Columns: t, then row-major re/im entries of w(t).
inline std::string trajectory_csv(const std::vector<double>& times,
                                  const std::vector<ConnectionState>& states) {
    int d = states.front().dim();
    std::string out = "t";
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            out += ",re_w_" + std::to_string(i) + "_" + std::to_string(j);
            out += ",im_w_" + std::to_string(i) + "_" + std::to_string(j);
        }
    out += "\n";
    for (std::size_t k = 0; k < times.size(); ++k) {
        out += format_real(times[k]);
        const CMatrix& w = states[k].w();
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                out += "," + format_real(w(i, j).real());
                out += "," + format_real(w(i, j).imag());
            }
        out += "\n";
    }
    return out;
}

// --- meter sweep ---

struct MeterSweepRow {
    double g;
    double rbar_pps;        // exact arbitrary-strength PPS pointer expectation
    double shift_over_g;    // (rbar_pps - undisturbed pointer) / g
    double rbar_spectral;   // sum_i Re Tr(Pi_i w) Rbar_{f,i}
    double re_weak_value;   // Re Tr(A w), constant reference column
};

inline std::vector<MeterSweepRow> meter_sweep(const DensityMatrix& rho, const PovmElement& effect,
                                              const Observable& a, const MeterModel& meter,
                                              const std::vector<double>& g_values) {
    if (g_values.empty()) throw ConfigError("meter_sweep: no g values given");
    ConnectionState w = connection_state(rho, effect);
    double baseline = trace_of_product(meter.pointer.matrix(), meter.rho_m.matrix()).real();
    double re_aw = weak_value(a, w).real();
    std::vector<MeterSweepRow> rows(g_values.size());
    parallel_rows(rows.size(), [&](std::size_t i) {
        MeterModel m = meter;
        m.g = g_values[i];
        MeterSweepRow row{};
        row.g = m.g;
        row.rbar_pps = pointer_expectation_pps(rho, effect, a, m);
        row.shift_over_g = m.g == 0.0 ? 0.0 : (row.rbar_pps - baseline) / m.g;
        row.rbar_spectral = 0.0;
        for (std::size_t k = 0; k < a.spectrum_size(); ++k)
            row.rbar_spectral += trace_of_product(a.projectors()[k], w.w()).real() *
                                 pointer_eigenvalue_response(a.eigenvalues()[k], m);
        row.re_weak_value = re_aw;
        rows[i] = row;
    });
    return rows;
}

inline std::string meter_sweep_csv(const std::vector<MeterSweepRow>& rows) {
    std::string out = "g,rbar_pps,shift_over_g,rbar_spectral,re_weak_value\n";
    for (const auto& r : rows)
        out += format_real(r.g) + "," + format_real(r.rbar_pps) + "," +
               format_real(r.shift_over_g) + "," + format_real(r.rbar_spectral) + "," +
               format_real(r.re_weak_value) + "\n";
    return out;
}

inline json meter_sweep_json(const std::vector<MeterSweepRow>& rows) {
    json arr = json::array();
    for (const auto& r : rows)
        arr.push_back(json{{"g", r.g},
                           {"rbar_pps", r.rbar_pps},
                           {"shift_over_g", r.shift_over_g},
                           {"rbar_spectral", r.rbar_spectral},
                           {"re_weak_value", r.re_weak_value}});
    return arr;
}

// --- scenario runner ---

enum class OutputFormat { Csv, Json };

struct ScenarioConfig {
    std::string name;
    json params;
    std::string out_path;
    OutputFormat format = OutputFormat::Csv;
    std::uint64_t seed = 0;
};

namespace detail {

inline const json& require_param(const json& params, const char* key, const char* scenario) {
    if (!params.is_object() || !params.contains(key))
        throw ConfigError(std::string(scenario) + ": config missing parameter \"" + key + "\"");
    return params.at(key);
}

inline OperatorBasis basis_for(const json& params, int d) {
    if (params.is_object() && params.contains("basis")) {
        std::string name = params.at("basis").get<std::string>();
        if (name == "pauli") {
            if (d != 2) throw ConfigError("basis \"pauli\" requires dim 2");
            return OperatorBasis::pauli();
        }
        if (name == "gell-mann") return OperatorBasis::gell_mann(d);
        throw ConfigError("unknown basis \"" + name + "\"");
    }
    return OperatorBasis::standard(d);
}

}  // namespace detail

// Executes a scenario and writes its output file. All numerical columns come
// from direct library calls; stochastic scenarios are seeded.
inline void run_scenario(const ScenarioConfig& config) {
    const json& params = config.params;

    if (config.name == "uncertainty-scan") {
        int grid_n = detail::require_param(params, "grid_n", "uncertainty-scan").get<int>();
        auto rows = uncertainty_scan(grid_n);
        write_file(config.out_path, config.format == OutputFormat::Csv
                                        ? uncertainty_csv(rows)
                                        : uncertainty_json(rows).dump(2) + "\n");
        return;
    }

    if (config.name == "amplification-scan") {
        auto overlaps = detail::require_param(params, "overlaps", "amplification-scan")
                            .get<std::vector<double>>();
        auto rows = amplification_scan(overlaps);
        write_file(config.out_path, config.format == OutputFormat::Csv
                                        ? amplification_csv(rows)
                                        : amplification_json(rows).dump(2) + "\n");
        return;
    }

    if (config.name == "dynamics-trace") {
        DensityMatrix rho(matrix_from_json(detail::require_param(params, "rho", "dynamics-trace")));
        PovmElement effect(
            matrix_from_json(detail::require_param(params, "effect", "dynamics-trace")));
        HamiltonianSchedule sched =
            schedule_from_json(detail::require_param(params, "schedule", "dynamics-trace"));
        int samples = params.contains("samples") ? params.at("samples").get<int>() : 50;
        DynamicsTrace trace = dynamics_trace(rho, effect, sched, samples);
        if (config.format == OutputFormat::Csv) {
            write_file(config.out_path, trajectory_csv(trace.times, trace.states));
        } else {
            json arr = json::array();
            for (std::size_t k = 0; k < trace.times.size(); ++k)
                arr.push_back(json{{"t", trace.times[k]},
                                   {"w", matrix_to_json(trace.states[k].w())}});
            write_file(config.out_path, arr.dump(2) + "\n");
        }
        return;
    }

    if (config.name == "tomography-roundtrip") {
        DensityMatrix rho(
            matrix_from_json(detail::require_param(params, "rho", "tomography-roundtrip")));
        PovmElement effect(
            matrix_from_json(detail::require_param(params, "effect", "tomography-roundtrip")));
        double sigma =
            params.contains("noise_sigma") ? params.at("noise_sigma").get<double>() : 0.0;
        OperatorBasis basis = detail::basis_for(params, rho.dim());
        std::vector<Observable> probes = basis.as_observables();
        ConnectionState truth = connection_state(rho, effect);
        std::vector<Complex> data = simulate_weak_value_data(truth, probes, sigma, config.seed);
        if (params.contains("data_out"))
            write_file(params.at("data_out").get<std::string>(), weak_data_to_csv(data));
        Reconstruction rec = reconstruct_connection(data, probes, basis);
        json report = reconstruction_report(rec);
        report["error_norm"] = operator_norm(rec.state.w() - truth.w());
        report["noise_sigma"] = sigma;
        report["seed"] = config.seed;
        if (config.format == OutputFormat::Csv)
            throw ConfigError("tomography-roundtrip emits a JSON report; use --format json");
        write_file(config.out_path, report.dump(2) + "\n");
        return;
    }

    if (config.name == "detector-tomography") {
        PovmElement truth(matrix_from_json(
            detail::require_param(params, "effect_true", "detector-tomography")));
        double sigma =
            params.contains("noise_sigma") ? params.at("noise_sigma").get<double>() : 0.0;
        int d = truth.dim();
        OperatorBasis basis = detail::basis_for(params, d);
        std::vector<Observable> probes = basis.as_observables();
        ConnectionState retr = retrodictive_state(truth);
        double p = truth.trace() / d;  // Tr E = P d
        std::vector<Complex> data = simulate_weak_value_data(retr, probes, sigma, config.seed);
        if (params.contains("data_out"))
            write_file(params.at("data_out").get<std::string>(), weak_data_to_csv(data));
        DetectorReconstruction rec = detector_tomography(data, probes, basis, p, d, sigma);
        json report{{"effect", matrix_to_json(rec.effect.matrix())},
                    {"post_selection_prob", p},
                    {"trace", rec.effect.trace()},
                    {"min_eigenvalue", rec.min_eigenvalue},
                    {"herm_deviation", rec.herm_deviation},
                    {"error_norm", operator_norm(rec.effect.matrix() - truth.matrix())},
                    {"noise_sigma", sigma},
                    {"seed", config.seed}};
        if (config.format == OutputFormat::Csv)
            throw ConfigError("detector-tomography emits a JSON report; use --format json");
        write_file(config.out_path, report.dump(2) + "\n");
        return;
    }

    if (config.name == "meter-sweep") {
        DensityMatrix rho(matrix_from_json(detail::require_param(params, "rho", "meter-sweep")));
        PovmElement effect(
            matrix_from_json(detail::require_param(params, "effect", "meter-sweep")));
        Observable a(matrix_from_json(detail::require_param(params, "observable", "meter-sweep")));
        MeterModel meter = meter_from_json(detail::require_param(params, "meter", "meter-sweep"));
        auto g_values = detail::require_param(params, "g_values", "meter-sweep")
                            .get<std::vector<double>>();
        auto rows = meter_sweep(rho, effect, a, meter, g_values);
        write_file(config.out_path, config.format == OutputFormat::Csv
                                        ? meter_sweep_csv(rows)
                                        : meter_sweep_json(rows).dump(2) + "\n");
        return;
    }

    throw ConfigError("unknown scenario \"" + config.name + "\"");
}

}  // namespace ppslab
