#include "permacheck/matrix_io.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace permacheck {
namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

double parse_number(std::string_view field, std::size_t line) {
    field = trim(field);
    if (field.empty()) throw ParseError("empty field on line " + std::to_string(line));
    if (field.front() == '+') field.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || ptr != field.data() + field.size())
        throw ParseError("not a number on line " + std::to_string(line) + ": '" + std::string(field) + "'");
    if (!std::isfinite(v)) throw ParseError("non-finite value on line " + std::to_string(line));
    return v;
}

}  // namespace

Eigen::MatrixXd parse_csv_rows(std::string_view text) {
    std::vector<std::vector<double>> rows;
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        line = trim(line);
        if (line.empty() || line.front() == '#') continue;
        std::vector<double> row;
        while (true) {
            const auto comma = line.find(',');
            row.push_back(parse_number(line.substr(0, comma), line_no));
            if (comma == std::string_view::npos) break;
            line = line.substr(comma + 1);
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw ParseError("ragged row on line " + std::to_string(line_no));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ParseError("no matrix rows found");
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return m;
}

KernelMatrix kernel_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("entries")) throw ParseError("matrix JSON needs an 'entries' array");
    const auto& e = j.at("entries");
    if (!e.is_array() || e.empty()) throw ParseError("'entries' must be a nonempty array of rows");
    const std::size_t n = e.size();
    if (j.contains("dim") && j.at("dim").get<std::size_t>() != n) throw ParseError("'dim' does not match entries");
    Eigen::MatrixXd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t r = 0; r < n; ++r) {
        const auto& row = e[r];
        if (!row.is_array() || row.size() != n) throw ParseError("ragged or non-square 'entries'");
        for (std::size_t c = 0; c < n; ++c) {
            if (!row[c].is_number()) throw ParseError("non-numeric entry");
            const double v = row[c].get<double>();
            if (!std::isfinite(v)) throw ParseError("non-finite entry");
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v;
        }
    }
    std::optional<bool> sym;
    if (j.contains("symmetric")) sym = j.at("symmetric").get<bool>();
    try {
        return KernelMatrix(std::move(m), sym);
    } catch (const DomainError& ex) {
        throw ParseError(ex.what());
    }
}

KernelMatrix parse_matrix(std::string_view text) {
    const auto body = trim(text);
    if (!body.empty() && body.front() == '{') {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(body);
        } catch (const nlohmann::json::exception& ex) {
            throw ParseError(std::string("invalid matrix JSON: ") + ex.what());
        }
        return kernel_from_json(j);
    }
    Eigen::MatrixXd m = parse_csv_rows(body);
    if (m.rows() != m.cols()) throw ParseError("matrix must be square");
    return KernelMatrix(std::move(m));
}

KernelMatrix read_matrix_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_matrix(ss.str());
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string to_csv(const Eigen::MatrixXd& m) {
    std::string out;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) out += ',';
            out += format_double(m(i, j));
        }
        out += '\n';
    }
    return out;
}

nlohmann::json to_json(const KernelMatrix& g) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < g.dim(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (std::size_t j = 0; j < g.dim(); ++j) row.push_back(g(i, j));
        rows.push_back(std::move(row));
    }
    return {{"dim", g.dim()}, {"symmetric", g.symmetric()}, {"entries", std::move(rows)}};
}

}  // namespace permacheck
