#include "permacheck/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "permacheck/assoc.hpp"
#include "permacheck/betaperm.hpp"
#include "permacheck/green.hpp"
#include "permacheck/idcheck.hpp"
#include "permacheck/matrix_io.hpp"
#include "permacheck/report.hpp"
#include "permacheck/sampler.hpp"

namespace permacheck {

namespace {

using nlohmann::json;

/// Every flag, the module parameter it feeds, and its help text. Help output
/// is generated from this table.
struct FlagDoc {
    const char* flag;
    const char* parameter;
    const char* help;
};

constexpr FlagDoc flag_table[] = {
    {"--input", "matrix_io.read_matrix_file", "kernel matrix file (CSV rows or JSON {dim, symmetric, entries})"},
    {"--kernel", "matrix_io.read_matrix_file", "kernel matrix file (CSV rows or JSON)"},
    {"--chain", "green.TransientChain", "sub-Markov one-step matrix Q (CSV)"},
    {"--beta", "index beta", "index beta (check-id, perm), Hadamard exponent (green power)"},
    {"--convention", "betaperm.ExponentConvention", "cycle-count (default) or signature"},
    {"--betas", "ScanOptions.beta_grid", "beta grid: lo:hi:step or comma list"},
    {"--alphas", "alpha grid", "alpha grid: lo:hi:step or comma list"},
    {"--m-max", "ScanOptions.m_max", "largest multiset size scanned"},
    {"--grid", "plus_constant_check.c_grid", "c grid for G + cJ: comma list"},
    {"--keep", "restriction.subset", "1-based indices kept, comma list"},
    {"--reference", "green_from_chain / green_with_reference", "counting (default) or excessive"},
    {"--k", "PermanentalSpec.index_beta = 2/k", "number of squared Gaussian vectors summed"},
    {"--n", "sample size N", "number of draws (accepts 1e6)"},
    {"--seed", "RNG seed", "64-bit seed; PERMACHECK_SEED overrides the default"},
    {"--threads", "worker cap", "maximum worker threads"},
    {"--alpha", "tilt_resolvent.alpha", "tilt the batch to resolvent(G, alpha)"},
    {"--gaussian", "sample_gaussian", "emit eta instead of psi"},
    {"--groups", "AssociationOptions.jackknife_groups", "jackknife groups"},
    {"--scalings", "resolvent_monotonicity_scan.D_set", "identity or random:COUNT"},
    {"--r-pairs", "shifted_strong_order_test.r_pairs", "semicolon-separated r,r' pairs"},
    {"--points", "lattice grid points", "lattice points per axis"},
    {"--vx", "shifted_pair_id_test.v_x", "variance v_x"},
    {"--c", "shifted_pair_id_test.c", "covariance c"},
    {"--vy", "shifted_pair_id_test.v_y", "variance v_y"},
    {"--out", "output path", "output file (matrix CSV or binary batch)"},
    {"--report", "report path", "write the JSON report here instead of stdout"},
    {"--format", "report_render.format", "json or table"},
};

std::string help_for(const std::string& flag) {
    for (const auto& f : flag_table)
        if (flag == f.flag) return std::string(f.help) + " [" + f.parameter + "]";
    throw std::logic_error("undocumented flag " + flag);
}

template <class T>
CLI::Option* add(CLI::App* app, const std::string& flag, T& var) {
    return app->add_option(flag, var, help_for(flag));
}

struct RunConfig {
    std::string command;
    std::string input;
    std::string chain;
    double beta = 2.0;
    std::string convention = "cycle-count";
    std::string betas;
    std::string alphas;
    std::size_t m_max = 5;
    std::string grid;
    std::string keep;
    std::string reference = "counting";
    int k = 1;
    std::string n = "100000";
    std::optional<std::uint64_t> seed;
    unsigned threads = 1;
    std::optional<double> alpha;
    bool gaussian = false;
    std::size_t groups = 100;
    std::string scalings = "random:100";
    std::string r_pairs = "1,0.5;2,1";
    std::size_t points = 40;
    double vx = 1.0;
    double c = 0.0;
    double vy = 1.0;
    std::string out;
    std::string report;
    std::string format = "json";
};

double parse_number(const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw ParseError("not a number: '" + s + "'");
    }
    if (used != s.size() || !std::isfinite(v)) throw ParseError("not a finite number: '" + s + "'");
    return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep))
        if (!cur.empty()) parts.push_back(cur);
    return parts;
}

/// "lo:hi:step" (inclusive) or "a,b,c".
std::vector<double> parse_grid(const std::string& s) {
    if (s.find(':') != std::string::npos) {
        const auto p = split(s, ':');
        if (p.size() != 3) throw ParseError("range must be lo:hi:step");
        const double lo = parse_number(p[0]);
        const double hi = parse_number(p[1]);
        const double step = parse_number(p[2]);
        if (!(step > 0.0) || hi < lo) throw DomainError("range needs step > 0 and hi >= lo");
        const auto count = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
        std::vector<double> out;
        for (long i = 0; i <= count; ++i) out.push_back(lo + static_cast<double>(i) * step);
        return out;
    }
    std::vector<double> out;
    for (const auto& t : split(s, ',')) out.push_back(parse_number(t));
    if (out.empty()) throw ParseError("empty grid");
    return out;
}

std::size_t parse_count(const std::string& s) {
    const double v = parse_number(s);
    if (!(v >= 1.0) || v != std::floor(v) || v > 1e12) throw DomainError("count must be a positive integer: " + s);
    return static_cast<std::size_t>(v);
}

std::vector<std::size_t> parse_indices(const std::string& s) {
    std::vector<std::size_t> out;
    for (const auto& t : split(s, ',')) {
        const std::size_t v = parse_count(t);
        out.push_back(v - 1);
    }
    if (out.empty()) throw ParseError("empty index list");
    return out;
}

std::vector<std::pair<double, double>> parse_r_pairs(const std::string& s) {
    std::vector<std::pair<double, double>> out;
    for (const auto& item : split(s, ';')) {
        const auto p = split(item, ',');
        if (p.size() != 2) throw ParseError("r pair must be r,r'");
        out.emplace_back(parse_number(p[0]), parse_number(p[1]));
    }
    if (out.empty()) throw ParseError("no r pairs");
    return out;
}

std::uint64_t default_seed() {
    if (const char* env = std::getenv("PERMACHECK_SEED")) {
        try {
            std::size_t used = 0;
            const auto v = std::stoull(env, &used);
            if (used == std::string(env).size()) return v;
        } catch (const std::exception&) {
        }
        throw ParseError("PERMACHECK_SEED is not an unsigned integer");
    }
    return 42;
}

std::string read_text(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ParseError("cannot open " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

KernelMatrix load_kernel(const std::string& path) {
    if (path.empty()) throw ParseError("missing --input/--kernel");
    return read_matrix_file(path);
}

int exit_for(const Verdict& v) {
    switch (v.outcome) {
    case Outcome::holds: return exit_holds;
    case Outcome::fails: return exit_fails;
    case Outcome::inconclusive: return exit_inconclusive;
    }
    return exit_numeric;
}

ScanOptions scan_options(const RunConfig& cfg) {
    ScanOptions o = default_scan_options();
    if (!cfg.betas.empty()) o.beta_grid = parse_grid(cfg.betas);
    if (!cfg.alphas.empty()) o.alpha_grid = parse_grid(cfg.alphas);
    o.m_max = cfg.m_max;
    if (cfg.convention == "signature") {
        o.convention = ExponentConvention::signature;
    } else if (cfg.convention != "cycle-count") {
        throw DomainError("convention must be cycle-count or signature");
    }
    o.threads = cfg.threads;
    return o;
}

struct Outcome_ {
    json result;
    int code = exit_holds;
};

void write_file(const std::string& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ParseError("cannot write " + path);
    os << text;
}

Outcome_ run_green(const RunConfig& cfg, const std::string& sub) {
    Outcome_ o;
    std::optional<KernelMatrix> matrix;
    if (sub == "gen") {
        if (cfg.chain.empty()) throw ParseError("missing --chain");
        const TransientChain chain(parse_csv_rows(read_text(cfg.chain)));
        if (cfg.reference == "counting") {
            matrix = green_from_chain(chain);
        } else if (cfg.reference == "excessive") {
            matrix = green_with_reference(chain);
        } else {
            throw DomainError("reference must be counting or excessive");
        }
        const GreenVerdict gv = is_green(*matrix);
        o.result = to_json(gv);
        o.result["kind"] = "green-gen";
        o.code = exit_for(gv.verdict);
    } else if (sub == "check") {
        const GreenVerdict gv = is_green(load_kernel(cfg.input));
        o.result = to_json(gv);
        o.code = exit_for(gv.verdict);
    } else if (sub == "power") {
        auto hp = hadamard_power(load_kernel(cfg.input), cfg.beta);
        o.result = to_json(hp.green);
        o.result["kind"] = "hadamard-power";
        o.result["beta"] = cfg.beta;
        o.code = exit_for(hp.green.verdict);
        matrix = std::move(hp.power);
    } else if (sub == "plus-c") {
        const auto grid = cfg.grid.empty() ? default_c_grid() : parse_grid(cfg.grid);
        IdOptions opts;
        opts.scan.threads = cfg.threads;
        const auto r = plus_constant_check(load_kernel(cfg.input), grid, cfg.beta, opts);
        o.result = to_json(r);
        o.code = exit_for(r.verdict);
    } else if (sub == "restrict") {
        const auto keep = parse_indices(cfg.keep);
        matrix = restriction(load_kernel(cfg.input), keep);
        const GreenVerdict gv = is_green(*matrix);
        o.result = to_json(gv);
        o.result["kind"] = "restriction";
        o.code = exit_for(gv.verdict);
    }
    if (matrix) {
        o.result["matrix"] = to_json(*matrix);
        if (!cfg.out.empty()) write_file(cfg.out, to_csv(matrix->entries()));
    }
    return o;
}

Outcome_ run(const RunConfig& cfg, const std::string& green_sub, std::ostream& out) {
    const std::string& cmd = cfg.command;
    Outcome_ o;
    const std::uint64_t seed = cfg.seed ? *cfg.seed : default_seed();
    if (cmd == "check-id") {
        IdOptions opts;
        opts.scan = scan_options(cfg);
        const auto v = id_verdict(load_kernel(cfg.input), cfg.beta, opts);
        o.result = to_json(v);
        o.result["beta"] = cfg.beta;
        o.code = exit_for(v.verdict);
    } else if (cmd == "perm") {
        const auto opts = scan_options(cfg);
        const KernelMatrix a = load_kernel(cfg.input);
        const double value = beta_permanent(a.entries(), cfg.beta, opts.convention);
        o.result = {{"kind", "beta-permanent"}, {"value", value}, {"beta", cfg.beta}, {"convention", cfg.convention}};
        if (cfg.report.empty()) out << format_double(value) << '\n';
    } else if (cmd == "scan-vj") {
        const auto r = beta_positivity_scan(load_kernel(cfg.input), scan_options(cfg));
        o.result = to_json(r);
        o.code = exit_for(r.verdict);
    } else if (cmd == "green") {
        o = run_green(cfg, green_sub);
    } else if (cmd == "sample") {
        const KernelMatrix g = load_kernel(cfg.input);
        const std::size_t n = parse_count(cfg.n);
        if (cfg.k < 1) throw DomainError("invalid-index", "--k must be >= 1");
        SampleBatch b = cfg.gaussian ? sample_gaussian(g, n, seed, cfg.threads)
                                     : sample_permanental(PermanentalSpec{g, 2.0 / cfg.k}, n, seed, cfg.threads);
        if (cfg.alpha) b = tilt_resolvent(b, *cfg.alpha);
        if (!cfg.out.empty()) {
            std::ofstream os(cfg.out, std::ios::binary);
            if (!os) throw ParseError("cannot write " + cfg.out);
            write_batch(os, b);
        }
        o.result = batch_summary(b);
    } else if (cmd == "check-assoc") {
        if (cfg.k < 1) throw DomainError("invalid-index", "--k must be >= 1");
        AssociationOptions opts;
        opts.jackknife_groups = cfg.groups;
        opts.threads = cfg.threads;
        const auto r = association_mc_test(PermanentalSpec{load_kernel(cfg.input), 2.0 / cfg.k}, {},
                                           parse_count(cfg.n), seed, opts);
        o.result = to_json(r);
        o.code = exit_for(r.verdict);
    } else if (cmd == "scan-monotone") {
        const KernelMatrix g = load_kernel(cfg.input);
        const auto alphas = parse_grid(cfg.alphas.empty() ? "0:5:0.25" : cfg.alphas);
        std::vector<Eigen::VectorXd> ds;
        if (cfg.scalings == "identity") {
            ds.push_back(Eigen::VectorXd::Ones(static_cast<Eigen::Index>(g.dim())));
        } else if (cfg.scalings.rfind("random:", 0) == 0) {
            ds = random_scalings(g.dim(), parse_count(cfg.scalings.substr(7)), seed);
        } else {
            throw ParseError("--scalings must be identity or random:COUNT");
        }
        const auto r = resolvent_monotonicity_scan(g, alphas, ds);
        o.result = to_json(r);
        o.code = exit_for(r.verdict);
    } else if (cmd == "shifted-order") {
        const auto pairs = parse_r_pairs(cfg.r_pairs);
        const auto r = shifted_strong_order_test(load_kernel(cfg.input), pairs, cfg.points);
        o.result = to_json(r);
        o.code = exit_for(r.verdict);
    } else if (cmd == "shifted-pair") {
        const Verdict v = shifted_pair_id_test(cfg.vx, cfg.c, cfg.vy);
        o.result = {{"kind", "shifted-pair"}, {"verdict", to_json(v)}, {"v_x", cfg.vx}, {"c", cfg.c}, {"v_y", cfg.vy}};
        o.code = exit_for(v);
    }
    return o;
}

void emit_error(std::ostream& err, const std::string& kind, const std::string& message) {
    err << json{{"error", {{"kind", kind}, {"message", message}}}}.dump() << '\n';
}

}  // namespace

int parse_and_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    std::string green_sub;
    std::string render_input;

    CLI::App app{"Infinite divisibility, association and Green-matrix checks for permanental vectors", "permacheck"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "expand help for every subcommand");

    const auto common = [&](CLI::App* s) {
        add(s, "--threads", cfg.threads);
        add(s, "--report", cfg.report);
    };
    const auto input = [&](CLI::App* s, const std::string& flag) { add(s, flag, cfg.input)->required(); };
    const auto scan_flags = [&](CLI::App* s) {
        add(s, "--betas", cfg.betas);
        add(s, "--alphas", cfg.alphas);
        add(s, "--m-max", cfg.m_max);
        add(s, "--convention", cfg.convention);
    };

    auto* check_id = app.add_subcommand("check-id", "infinite divisibility verdict for (G, beta)");
    input(check_id, "--input");
    add(check_id, "--beta", cfg.beta);
    scan_flags(check_id);
    common(check_id);

    auto* perm = app.add_subcommand("perm", "beta-permanent of a square matrix");
    input(perm, "--input");
    add(perm, "--beta", cfg.beta)->required();
    add(perm, "--convention", cfg.convention);
    add(perm, "--report", cfg.report);

    auto* scan = app.add_subcommand("scan-vj", "beta-positivity scan over resolvents");
    input(scan, "--input");
    scan_flags(scan);
    common(scan);

    auto* green = app.add_subcommand("green", "Green matrices: gen, check, power, plus-c, restrict");
    green->require_subcommand(1);
    auto* gen = green->add_subcommand("gen", "potential matrix of a transient chain");
    add(gen, "--chain", cfg.chain)->required();
    add(gen, "--reference", cfg.reference);
    add(gen, "--out", cfg.out);
    common(gen);
    auto* gcheck = green->add_subcommand("check", "recognize a Green matrix");
    input(gcheck, "--input");
    common(gcheck);
    auto* power = green->add_subcommand("power", "Hadamard power and its Green verdict");
    input(power, "--input");
    add(power, "--beta", cfg.beta)->required();
    add(power, "--out", cfg.out);
    common(power);
    auto* plus = green->add_subcommand("plus-c", "ID verdicts of G + cJ over a grid");
    input(plus, "--input");
    add(plus, "--grid", cfg.grid);
    add(plus, "--beta", cfg.beta);
    common(plus);
    auto* restrict_cmd = green->add_subcommand("restrict", "principal submatrix and its Green verdict");
    input(restrict_cmd, "--input");
    add(restrict_cmd, "--keep", cfg.keep)->required();
    add(restrict_cmd, "--out", cfg.out);
    common(restrict_cmd);

    auto* sample = app.add_subcommand("sample", "sample permanental or Gaussian vectors");
    add(sample, "--kernel", cfg.input)->required();
    add(sample, "--k", cfg.k);
    add(sample, "--n", cfg.n);
    add(sample, "--seed", cfg.seed);
    add(sample, "--alpha", cfg.alpha);
    sample->add_flag("--gaussian", cfg.gaussian, help_for("--gaussian"));
    add(sample, "--out", cfg.out);
    common(sample);

    auto* assoc = app.add_subcommand("check-assoc", "Monte Carlo association test");
    add(assoc, "--kernel", cfg.input)->required();
    add(assoc, "--k", cfg.k);
    add(assoc, "--n", cfg.n);
    add(assoc, "--seed", cfg.seed);
    add(assoc, "--groups", cfg.groups);
    common(assoc);

    auto* mono = app.add_subcommand("scan-monotone", "resolvent monotonicity of E|eta_i eta_j|");
    add(mono, "--kernel", cfg.input)->required();
    add(mono, "--alphas", cfg.alphas);
    add(mono, "--scalings", cfg.scalings);
    add(mono, "--seed", cfg.seed);
    common(mono);

    auto* shifted = app.add_subcommand("shifted-order", "strong stochastic order of shifted squares (2x2)");
    add(shifted, "--kernel", cfg.input)->required();
    add(shifted, "--r-pairs", cfg.r_pairs);
    add(shifted, "--points", cfg.points);
    common(shifted);

    auto* pair = app.add_subcommand("shifted-pair", "two-point shifted ID criterion");
    add(pair, "--vx", cfg.vx)->required();
    add(pair, "--c", cfg.c)->required();
    add(pair, "--vy", cfg.vy)->required();
    add(pair, "--report", cfg.report);

    auto* render = app.add_subcommand("render", "render a JSON report");
    add(render, "--input", render_input)->required();
    add(render, "--format", cfg.format);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success)) {
            app.exit(e, out, err);
            return exit_holds;
        }
        emit_error(err, "usage", e.what());
        return exit_usage;
    }

    try {
        if (render->parsed()) {
            RenderFormat fmt = RenderFormat::json;
            if (cfg.format == "table") {
                fmt = RenderFormat::table;
            } else if (cfg.format != "json") {
                throw DomainError("format must be json or table");
            }
            json report;
            try {
                report = json::parse(read_text(render_input));
            } catch (const json::exception& ex) {
                throw ParseError(ex.what());
            }
            out << report_render(report, fmt);
            return exit_holds;
        }
        for (auto* s : app.get_subcommands()) cfg.command = s->get_name();
        if (green->parsed())
            for (auto* s : green->get_subcommands()) green_sub = s->get_name();

        const Outcome_ o = run(cfg, green_sub, out);
        const std::string name = green_sub.empty() ? cfg.command : cfg.command + " " + green_sub;
        const std::string text = report_render(make_report(name, o.result), RenderFormat::json);
        if (!cfg.report.empty()) {
            write_file(cfg.report, text);
        } else if (cfg.command != "perm") {
            out << text;
        }
        return o.code;
    } catch (const Error& e) {
        emit_error(err, e.kind(), e.what());
        return e.numeric() ? exit_numeric : exit_usage;
    } catch (const json::exception& e) {
        emit_error(err, "parse", e.what());
        return exit_usage;
    } catch (const std::exception& e) {
        emit_error(err, "internal", e.what());
        return exit_numeric;
    }
}

}  // namespace permacheck
