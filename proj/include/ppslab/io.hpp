#pragma once

#include <json.hpp>

#include <cctype>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ppslab/connection.hpp"
#include "ppslab/core.hpp"
#include "ppslab/dynamics.hpp"
#include "ppslab/meter.hpp"
#include "ppslab/tomography.hpp"

namespace ppslab {

using nlohmann::json;

// Full 17-significant-digit decimal formatting; makes byte-determinism of
// CSV output meaningful.
inline std::string format_real(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// --- matrix JSON: {"dim": d, "re": [d*d row-major], "im": [d*d row-major]} ---

inline json matrix_to_json(const CMatrix& m) {
    json re = json::array(), im = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            re.push_back(m(i, j).real());
            im.push_back(m(i, j).imag());
        }
    return json{{"dim", m.rows()}, {"re", re}, {"im", im}};
}

inline CMatrix matrix_from_json(const json& j) {
    if (!j.is_object() || !j.contains("dim") || !j.contains("re") || !j.contains("im"))
        throw ParseError("matrix JSON must be an object with dim, re, im");
    if (!j["dim"].is_number_integer())
        throw ParseError("matrix JSON: dim must be an integer");
    long d = j["dim"].get<long>();
    if (d < 1 || d > kMaxDim)
        throw ParseError("matrix JSON: dim outside [1, " + std::to_string(kMaxDim) + "]");
    const json& re = j["re"];
    const json& im = j["im"];
    if (!re.is_array() || !im.is_array() ||
        re.size() != static_cast<std::size_t>(d * d) ||
        im.size() != static_cast<std::size_t>(d * d))
        throw ParseError("matrix JSON: re/im must be arrays of length dim*dim");
    CMatrix m(d, d);
    for (long i = 0; i < d; ++i)
        for (long k = 0; k < d; ++k) {
            const json& a = re[static_cast<std::size_t>(i * d + k)];
            const json& b = im[static_cast<std::size_t>(i * d + k)];
            if (!a.is_number() || !b.is_number())
                throw ParseError("matrix JSON: non-numeric entry");
            m(i, k) = Complex(a.get<double>(), b.get<double>());
        }
    if (!m.allFinite()) throw ParseError("matrix JSON: non-finite entry");
    return m;
}

// --- connection-state JSON: w / w_herm / w_antiherm / post_selection_prob ---

inline json connection_to_json(const ConnectionState& w) {
    json j{{"w", matrix_to_json(w.w())},
           {"w_herm", matrix_to_json(w.herm_part())},
           {"w_antiherm", matrix_to_json(w.antiherm_part())}};
    if (w.post_selection_prob())
        j["post_selection_prob"] = *w.post_selection_prob();
    else
        j["post_selection_prob"] = nullptr;
    return j;
}

inline ConnectionState connection_from_json(const json& j) {
    if (!j.is_object() || !j.contains("w"))
        throw ParseError("connection-state JSON must contain w");
    CMatrix w = matrix_from_json(j.at("w"));
    if (j.contains("w_herm")) {
        CMatrix herm = matrix_from_json(j.at("w_herm"));
        if (operator_norm(herm - hermitian_part(w)) > 1e-10 * std::max(1.0, operator_norm(w)))
            throw ParseError("connection-state JSON: w_herm inconsistent with w");
    }
    if (j.contains("w_antiherm")) {
        CMatrix anti = matrix_from_json(j.at("w_antiherm"));
        if (operator_norm(anti - antihermitian_part(w)) >
            1e-10 * std::max(1.0, operator_norm(w)))
            throw ParseError("connection-state JSON: w_antiherm inconsistent with w");
    }
    std::optional<double> prob;
    if (j.contains("post_selection_prob") && !j.at("post_selection_prob").is_null())
        prob = j.at("post_selection_prob").get<double>();
    return ConnectionState(w, prob);
}

// --- schedule JSON: {"segments": [{"t_start", "t_end", "H"}, ...]} ---

inline json schedule_to_json(const HamiltonianSchedule& sched) {
    json segs = json::array();
    for (const auto& s : sched.segments())
        segs.push_back(json{{"t_start", s.t_start}, {"t_end", s.t_end},
                            {"H", matrix_to_json(s.h)}});
    return json{{"segments", segs}};
}

inline HamiltonianSchedule schedule_from_json(const json& j) {
    if (!j.is_object() || !j.contains("segments") || !j["segments"].is_array() ||
        j["segments"].empty())
        throw ParseError("schedule JSON must contain a nonempty segments array");
    std::vector<ScheduleSegment> segments;
    for (const json& s : j["segments"]) {
        if (!s.is_object() || !s.contains("t_start") || !s.contains("t_end") || !s.contains("H"))
            throw ParseError("schedule segment must contain t_start, t_end, H");
        if (!s["t_start"].is_number() || !s["t_end"].is_number())
            throw ParseError("schedule segment times must be numbers");
        segments.push_back(ScheduleSegment{s["t_start"].get<double>(), s["t_end"].get<double>(),
                                           matrix_from_json(s["H"])});
    }
    return HamiltonianSchedule(std::move(segments));
}

// --- meter config JSON: {"dim_M", "L", "width", "g", "profile"} ---

inline MeterModel meter_from_json(const json& j) {
    if (!j.is_object()) throw ParseError("meter JSON must be an object");
    for (const char* key : {"dim_M", "L", "width", "g", "profile"})
        if (!j.contains(key))
            throw ParseError(std::string("meter JSON missing field ") + key);
    if (!j["profile"].is_string() || j["profile"].get<std::string>() != "gaussian")
        throw ParseError("meter JSON: profile must be \"gaussian\"");
    if (!j["dim_M"].is_number_integer())
        throw ParseError("meter JSON: dim_M must be an integer");
    return gaussian_meter(j["dim_M"].get<int>(), j["L"].get<double>(), j["width"].get<double>(),
                          j["g"].get<double>());
}

inline json meter_to_json(const MeterModel& meter, double half_extent, double width) {
    return json{{"dim_M", meter.dim_m}, {"L", half_extent}, {"width", width},
                {"g", meter.g}, {"profile", "gaussian"}};
}

// --- reconstruction report JSON ---

inline json reconstruction_report(const Reconstruction& rec) {
    json j = connection_to_json(rec.state);
    j["residual_norm"] = rec.residual_norm;
    j["trace_deviation"] = rec.trace_deviation;
    j["trace_flagged"] = rec.trace_flagged;
    return j;
}

// --- weak-value data CSV: probe_index,re_weak_value,im_weak_value ---

inline std::string weak_data_to_csv(const std::vector<Complex>& data) {
    std::string out = "probe_index,re_weak_value,im_weak_value\n";
    for (std::size_t i = 0; i < data.size(); ++i)
        out += std::to_string(i) + "," + format_real(data[i].real()) + "," +
               format_real(data[i].imag()) + "\n";
    return out;
}

inline std::vector<Complex> weak_data_from_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) ||
        line.find("probe_index,re_weak_value,im_weak_value") != 0)
        throw ParseError("weak-value CSV: missing header");
    std::vector<Complex> data;
    std::size_t expected = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string idx, re, im;
        if (!std::getline(row, idx, ',') || !std::getline(row, re, ',') ||
            !std::getline(row, im, ','))
            throw ParseError("weak-value CSV: malformed row: " + line);
        try {
            if (std::stoul(idx) != expected)
                throw ParseError("weak-value CSV: probe indices must be 0,1,2,...");
            data.emplace_back(std::stod(re), std::stod(im));
        } catch (const std::invalid_argument&) {
            throw ParseError("weak-value CSV: non-numeric field in row: " + line);
        } catch (const std::out_of_range&) {
            throw ParseError("weak-value CSV: value out of range in row: " + line);
        }
        ++expected;
    }
    if (data.empty()) throw ParseError("weak-value CSV: no data rows");
    return data;
}

// --- small file helpers ---

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline void write_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot open file for writing: " + path);
    out << contents;
    if (!out) throw ParseError("write failed: " + path);
}

inline json json_from_file(const std::string& path) {
    try {
        return json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw ParseError("invalid JSON in " + path + ": " + e.what());
    }
}

}  // namespace ppslab
