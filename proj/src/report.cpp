#include "permacheck/report.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "permacheck/matrix_io.hpp"

namespace permacheck {

using nlohmann::json;

namespace {

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json one_based(const std::vector<std::size_t>& idx) {
    json a = json::array();
    for (auto i : idx) a.push_back(i + 1);
    return a;
}

}  // namespace

json defaults_table() {
    const auto scan = default_scan_options();
    return {
        {"version", defaults_version},
        {"tolerances",
         {{"identity", tol::identity},
          {"inversion", tol::inversion},
          {"condition_cap", tol::condition_cap},
          {"imag_cutoff", tol::imag_cutoff},
          {"symmetry", tol::symmetry},
          {"psd", tol::psd},
          {"sign_zero", tol::sign_zero},
          {"lattice", lattice_tolerance},
          {"monotonicity", 1e-10}}},
        {"scan", {{"beta_grid", scan.beta_grid}, {"alpha_grid", scan.alpha_grid}, {"m_max", scan.m_max}}},
        {"battery_alphas", default_battery_alphas()},
        {"permanent_cap", default_permanent_cap},
        {"c_grid", default_c_grid()},
        {"association", {{"z_threshold", association_z_threshold}, {"jackknife_groups", 100},
                         {"quantile_levels", IncreasingFunctionFamily{}.quantile_levels}}},
        {"lattice_points", 40},
        {"seed", 42},
    };
}

json to_json(const Witness& w) {
    return {{"reason", w.reason}, {"indices", one_based(w.indices)}, {"values", w.values},
            {"alpha", optional_number(w.alpha)}, {"beta", optional_number(w.beta)}};
}

json to_json(const Verdict& v) {
    json j{{"outcome", to_string(v.outcome)}, {"note", v.note}};
    j["witness"] = v.witness ? to_json(*v.witness) : json(nullptr);
    return j;
}

json to_json(const IdVerdict& v) {
    json j{{"kind", "id-verdict"}, {"verdict", to_json(v.verdict)}, {"method", to_string(v.method)}};
    j["signature"] = v.signature ? json(v.signature->signs()) : json(nullptr);
    return j;
}

json to_json(const PositivityReport& r) {
    json j{{"kind", "positivity-scan"},
           {"verdict", to_json(r.verdict)},
           {"scanned", r.scanned},
           {"beta_grid", r.beta_grid},
           {"alpha_grid", r.alpha_grid},
           {"m_max", r.m_max},
           {"convention", r.convention == ExponentConvention::cycle_count ? "cycle-count" : "signature"}};
    if (r.witness) {
        j["witness"] = {{"alpha", r.witness->alpha},
                        {"beta", r.witness->beta},
                        {"indices", one_based(r.witness->indices.indices())},
                        {"value", r.witness->value}};
    } else {
        j["witness"] = nullptr;
    }
    return j;
}

json to_json(const GreenVerdict& v) {
    json j{{"kind", "green-check"}, {"verdict", to_json(v.verdict)}, {"class", to_string(v.cls)}};
    j["density"] = v.density ? json(std::vector<double>(v.density->data(), v.density->data() + v.density->size()))
                             : json(nullptr);
    return j;
}

json to_json(const PlusConstantReport& r) {
    json entries = json::array();
    for (const auto& e : r.entries) {
        entries.push_back({{"c", e.c},
                           {"outcome", to_string(e.id.verdict.outcome)},
                           {"method", to_string(e.id.method)},
                           {"verdict", to_json(e.id.verdict)}});
    }
    return {{"kind", "plus-constant"}, {"verdict", to_json(r.verdict)}, {"beta", r.beta}, {"entries", entries}};
}

json to_json(const AssociationReport& r) {
    json pairs = json::array();
    for (const auto& p : r.pairs) {
        pairs.push_back({{"first", r.functions.at(p.first)},
                         {"second", r.functions.at(p.second)},
                         {"covariance", p.covariance},
                         {"se", p.se},
                         {"z", p.z}});
    }
    return {{"kind", "association"},
            {"verdict", to_json(r.verdict)},
            {"functions", r.functions},
            {"pairs", pairs},
            {"draws", r.draws},
            {"seed", r.seed},
            {"jackknife_groups", r.jackknife_groups},
            {"z_threshold", association_z_threshold}};
}

json to_json(const MonotonicityReport& r) {
    json j{{"kind", "monotonicity-scan"}, {"verdict", to_json(r.verdict)}, {"scalings_tried", r.scalings_tried}};
    if (r.witness) {
        const auto& w = *r.witness;
        j["witness"] = {{"scaling_index", w.scaling + 1},
                        {"i", w.i + 1},
                        {"j", w.j + 1},
                        {"alpha_from", w.alpha_from},
                        {"alpha_to", w.alpha_to},
                        {"value_from", w.value_from},
                        {"value_to", w.value_to}};
        const auto& d = *r.witness_scaling;
        j["witness"]["scaling"] = std::vector<double>(d.data(), d.data() + d.size());
    } else {
        j["witness"] = nullptr;
    }
    return j;
}

json to_json(const ShiftedOrderReport& r) {
    json pairs = json::array();
    for (const auto& [a, b] : r.r_pairs) pairs.push_back({{"r", a}, {"r_prime", b}});
    json j{{"kind", "shifted-order"},
           {"verdict", to_json(r.verdict)},
           {"green", to_json(r.green)},
           {"r_pairs", pairs},
           {"grid_points", r.grid_points}};
    j["failing_pair"] = r.failing_pair ? json{{"r", r.failing_pair->first}, {"r_prime", r.failing_pair->second}}
                                       : json(nullptr);
    return j;
}

json batch_summary(const SampleBatch& b) {
    json j{{"kind", "sample-batch"},
           {"rows", b.size()},
           {"cols", b.dim()},
           {"seed", b.seed},
           {"batch_kind", to_string(b.kind)},
           {"index_beta", b.spec.index_beta},
           {"kernel", to_json(b.spec.kernel)}};
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(b.dim()));
    for (std::size_t r = 0; r < b.size(); ++r) mean += b.weights(static_cast<Eigen::Index>(r)) * b.psi(r);
    mean /= b.weights.sum();
    j["psi_mean"] = std::vector<double>(mean.data(), mean.data() + mean.size());
    j["tilt_alpha"] = optional_number(b.tilt_alpha);
    if (b.weighted()) {
        j["ess"] = effective_sample_size(b);
        j["raw_normalizer"] = b.raw_normalizer;
        j["raw_normalizer_se"] = b.raw_normalizer_se;
    }
    return j;
}

json make_report(const std::string& command, json result) {
    return {{"schema", report_schema}, {"command", command}, {"defaults", defaults_table()},
            {"result", std::move(result)}};
}

namespace {

/// Known record columns, so empty arrays still render a header.
const std::map<std::string, std::vector<std::string>>& known_columns() {
    static const std::map<std::string, std::vector<std::string>> cols{
        {"pairs", {"first", "second", "covariance", "se", "z"}},
        {"entries", {"c", "outcome", "method"}},
        {"r_pairs", {"r", "r_prime"}},
    };
    return cols;
}

std::string cell(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_null()) return "-";
    return v.dump();
}

void flatten(const json& obj, const std::string& prefix, std::vector<std::pair<std::string, std::string>>& rows,
             std::vector<std::pair<std::string, const json*>>& tables) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
        const json& v = it.value();
        if (v.is_object()) {
            flatten(v, key, rows, tables);
        } else if (v.is_array() && (known_columns().count(it.key()) || (!v.empty() && v.front().is_object()))) {
            tables.emplace_back(key, &v);
        } else {
            rows.emplace_back(key, cell(v));
        }
    }
}

void render_records(std::ostringstream& os, const std::string& title, const json& arr) {
    const auto leaf = title.substr(title.rfind('.') == std::string::npos ? 0 : title.rfind('.') + 1);
    std::vector<std::string> cols;
    if (auto it = known_columns().find(leaf); it != known_columns().end()) {
        cols = it->second;
    } else {
        for (auto c = arr.front().begin(); c != arr.front().end(); ++c)
            if (!c.value().is_object()) cols.push_back(c.key());
    }
    std::vector<std::vector<std::string>> body;
    for (const auto& rec : arr) {
        std::vector<std::string> r;
        for (const auto& c : cols) r.push_back(rec.contains(c) ? cell(rec.at(c)) : "-");
        body.push_back(std::move(r));
    }
    std::vector<std::size_t> width(cols.size());
    for (std::size_t k = 0; k < cols.size(); ++k) {
        width[k] = cols[k].size();
        for (const auto& r : body) width[k] = std::max(width[k], r[k].size());
    }
    const auto line = [&](const std::vector<std::string>& r) {
        for (std::size_t k = 0; k < r.size(); ++k) {
            os << (k ? " | " : "") << r[k];
            if (k + 1 < r.size()) os << std::string(width[k] - r[k].size(), ' ');
        }
        os << '\n';
    };
    os << "\n[" << title << "]\n";
    line(cols);
    for (const auto& r : body) line(r);
}

}  // namespace

std::string report_render(const json& report, RenderFormat format) {
    if (!report.is_object() || !report.contains("schema") || report.at("schema") != report_schema ||
        !report.contains("result"))
        throw SchemaError("expected a schema-1 report");
    if (format == RenderFormat::json) return report.dump(2) + "\n";

    std::ostringstream os;
    os << "command: " << cell(report.value("command", json("?"))) << '\n';
    std::vector<std::pair<std::string, std::string>> rows;
    std::vector<std::pair<std::string, const json*>> tables;
    if (report.at("result").is_object()) {
        flatten(report.at("result"), "", rows, tables);
    } else {
        rows.emplace_back("result", cell(report.at("result")));
    }
    std::size_t w = 0;
    for (const auto& [k, v] : rows) w = std::max(w, k.size());
    for (const auto& [k, v] : rows) os << k << std::string(w - k.size(), ' ') << " | " << v << '\n';
    for (const auto& [title, arr] : tables) render_records(os, title, *arr);
    return os.str();
}

}  // namespace permacheck
