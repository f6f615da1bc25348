#include <hubtail/hubtail.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdint>
#include <ctime>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr int schema_version = 1;

/// Config files are flat JSON objects keyed by long flag names. Values fill
/// in flags absent from the command line, so explicit flags win; arrays
/// repeat the flag once per element. Unknown keys surface as parse errors.
std::vector<std::string> apply_config_file(std::vector<std::string> args) {
    std::string path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        const std::string& t = args[i];
        if (t == "--config" && i + 1 < args.size()) {
            path = args[i + 1];
        } else if (t.rfind("--config=", 0) == 0) {
            path = t.substr(9);
        }
    }
    if (path.empty()) return args;

    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file: " + path);
    nlohmann::json parsed;
    try {
        in >> parsed;
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("config file is not valid json: ") +
                                    e.what());
    }
    if (!parsed.is_object()) {
        throw std::invalid_argument("config file must hold a single json object");
    }

    std::set<std::string> given;
    for (const std::string& t : args) {
        if (t.rfind("--", 0) != 0) continue;
        const auto eq = t.find('=');
        given.insert(eq == std::string::npos ? t : t.substr(0, eq));
    }

    const auto as_text = [](const nlohmann::json& v) {
        return v.is_string() ? v.get<std::string>() : v.dump();
    };
    for (const auto& [key, value] : parsed.items()) {
        const std::string flag = "--" + key;
        if (key == "config" || given.count(flag) != 0) continue;
        if (value.is_boolean()) {
            args.push_back(flag + "=" + as_text(value));
        } else if (value.is_array()) {
            for (const auto& v : value) {
                args.push_back(flag);
                args.push_back(as_text(v));
            }
        } else {
            args.push_back(flag);
            args.push_back(as_text(value));
        }
    }
    return args;
}

std::string utc_timestamp() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_text(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(out_path);
    if (!f) throw std::invalid_argument("cannot open output file: " + out_path);
    f << text;
}

/// The timestamp is appended last so it occupies its own line in the pretty
/// dump: consumers comparing runs drop exactly that line.
void emit_json(ordered_json j, const std::string& out_path) {
    j["timestamp"] = utc_timestamp();
    write_text(j.dump(2) + "\n", out_path);
}

struct csv_document {
    std::vector<std::pair<std::string, std::string>> metadata;
    std::string header;
    std::vector<std::string> rows;

    void meta(const std::string& key, const std::string& value) {
        metadata.emplace_back(key, value);
    }

    std::string render() const {
        std::ostringstream out;
        out << "# schema_version=" << schema_version << "\n";
        for (const auto& [k, v] : metadata) out << "# " << k << "=" << v << "\n";
        out << "# timestamp=" << utc_timestamp() << "\n";
        out << header << "\n";
        for (const auto& r : rows) out << r << "\n";
        return out.str();
    }
};

std::string fmt(double x) { return hubtail::format_double(x); }

/// Options shared by the estimator-backed subcommands.
struct run_options {
    std::string dist_spec;
    std::uint64_t trials = 100000;
    std::uint64_t seed = 42;
    int workers = 0;
    std::uint64_t batch = hubtail::default_batch;
    std::string eps_text = "auto";
    std::string output; // json or csv, defaulted per command
    std::string out_path;
    std::string config_path;
};

void add_dist_option(CLI::App* cmd, run_options& opt) {
    cmd->add_option("--dist", opt.dist_spec,
                    "weight distribution, pareto:alpha=A,xmin=X or "
                    "grid:values=v1,v2;probs=p1,p2")
        ->required();
}

void add_run_options(CLI::App* cmd, run_options& opt, const std::string& default_output) {
    opt.output = default_output;
    cmd->add_option("--trials", opt.trials, "Monte Carlo trial count")
        ->capture_default_str();
    cmd->add_option("--seed", opt.seed, "root seed; every published number is a pure "
                                        "function of it")
        ->capture_default_str();
    cmd->add_option("--workers", opt.workers,
                    "worker threads (0: HUBTAIL_WORKERS or hardware); never changes "
                    "numeric results");
    cmd->add_option("--batch", opt.batch, "trials per work batch; scheduling only")
        ->capture_default_str();
    cmd->add_option("--output,--emit", opt.output, "output format: json or csv")
        ->check(CLI::IsMember({"json", "csv"}))
        ->capture_default_str();
    cmd->add_option("--out", opt.out_path, "write to this file instead of stdout");
    cmd->add_option("--config", opt.config_path,
                    "JSON config file; keys mirror the long flags, explicit flags win");
}

void require_format(const run_options& opt, const std::string& format,
                    const std::string& command) {
    if (opt.output != format) {
        throw CLI::ValidationError(command + " emits " + format + " only");
    }
}

std::optional<double> parse_eps(const std::string& text) {
    if (text == "auto") return std::nullopt;
    std::size_t used = 0;
    double value = 0.0;
    try {
        value = std::stod(text, &used);
    } catch (const std::exception&) {
        throw CLI::ValidationError("--eps takes a real number or 'auto', got '" + text + "'");
    }
    if (used != text.size()) {
        throw CLI::ValidationError("--eps takes a real number or 'auto', got '" + text + "'");
    }
    return value;
}

// --- constants -------------------------------------------------------------

int run_constants(const run_options& opt, double a) {
    require_format(opt, "json", "constants");
    const auto d = hubtail::weight_distribution::parse(opt.dist_spec);
    const auto params =
        hubtail::k_of_a_constant(d, a, opt.trials, opt.seed, opt.workers, opt.batch);
    ordered_json j;
    j["schema_version"] = schema_version;
    j["dist"] = d.canonical();
    j["a"] = a;
    j["mu"] = d.mean();
    j["k"] = params.k;
    j["eta"] = params.eta;
    j["K_hat"] = params.K_hat;
    j["K_stderr"] = params.K_stderr;
    j["trials"] = params.trials;
    j["seed"] = opt.seed;
    emit_json(std::move(j), opt.out_path);
    return 0;
}

// --- simulate ----------------------------------------------------------------

int run_simulate(const run_options& opt, std::uint64_t n, double eps) {
    require_format(opt, "csv", "simulate");
    const auto d = hubtail::weight_distribution::parse(opt.dist_spec);
    if (!(eps > 0.0)) throw std::invalid_argument("simulate needs --eps > 0");

    csv_document doc;
    doc.meta("command", "simulate");
    doc.meta("dist", d.canonical());
    doc.meta("n", std::to_string(n));
    doc.meta("trials", std::to_string(opt.trials));
    doc.meta("seed", std::to_string(opt.seed));
    doc.meta("eps", fmt(eps));
    doc.header = "trial,S_n,M_n,E_n,N_eps,top1,top2";
    for (std::uint64_t t = 0; t < opt.trials; ++t) {
        hubtail::random_stream wrng(opt.seed, t, hubtail::stream_purpose::simulate);
        const auto wv = hubtail::sample_weights(d, n, wrng);
        hubtail::random_stream erng(opt.seed, t, hubtail::stream_purpose::edges);
        const auto g = hubtail::summarize(wv, eps, erng);
        std::ostringstream row;
        row << t << ',' << fmt(g.s_n) << ',' << fmt(g.m_n) << ',';
        if (g.e_n) row << *g.e_n;
        row << ',' << g.n_eps << ',' << fmt(g.top_weights.at(0)) << ',';
        if (g.top_weights.size() > 1) row << fmt(g.top_weights[1]);
        doc.rows.push_back(row.str());
    }
    write_text(doc.render(), opt.out_path);
    return 0;
}

// --- estimate ----------------------------------------------------------------

int run_estimate(const run_options& opt, std::uint64_t n, double a, const std::string& target,
                 const std::string& method, std::optional<int> k_override, bool total) {
    require_format(opt, "json", "estimate");
    const auto d = hubtail::weight_distribution::parse(opt.dist_spec);

    hubtail::estimator_config cfg;
    cfg.trials = opt.trials;
    cfg.seed = opt.seed;
    cfg.workers = opt.workers;
    cfg.batch = opt.batch;
    cfg.eps = parse_eps(opt.eps_text);
    cfg.k_override = k_override;
    cfg.include_total = total;

    hubtail::tail_estimate est;
    if (target == "sn" || target == "mn") {
        // M_n = S_n / (mu n), so its tail at excess a is the pair-statistic
        // tail at excess mu*a.
        const double pair_a = target == "mn" ? d.mean() * a : a;
        est = method == "naive" ? hubtail::estimate_sn_tail_naive(d, n, pair_a, cfg)
                                : hubtail::estimate_sn_tail_planted(d, n, pair_a, cfg);
    } else {
        est = method == "naive" ? hubtail::estimate_en_tail_naive(d, n, a, cfg)
                                : hubtail::estimate_en_tail_planted(d, n, a, cfg);
    }

    ordered_json j;
    j["schema_version"] = schema_version;
    j["command"] = "estimate";
    j["target"] = target;
    j["method"] = method;
    j["dist"] = d.canonical();
    j["n"] = n;
    j["a"] = a;
    j["trials"] = est.trials;
    j["seed"] = opt.seed;
    j["eps"] = opt.eps_text;
    if (est.eps_used) j["eps_resolved"] = *est.eps_used;
    if (est.k_used) j["k"] = *est.k_used;
    j["total"] = total;
    j["p_hat"] = est.p_hat;
    j["stderr"] = est.std_err;
    j["ci_lo"] = est.ci_lo;
    j["ci_hi"] = est.ci_hi;
    j["hits_or_ess"] = est.hits_or_ess;
    if (!est.components.empty()) {
        ordered_json comp;
        for (const auto& [key, value] : est.components) comp[key] = value;
        j["components"] = std::move(comp);
    }
    emit_json(std::move(j), opt.out_path);
    return 0;
}

// --- convergence ---------------------------------------------------------------

int run_convergence(const run_options& opt, const std::vector<std::uint64_t>& n_list,
                    double a) {
    require_format(opt, "csv", "convergence");
    if (n_list.empty()) throw std::invalid_argument("convergence needs a non-empty --n list");
    const auto d = hubtail::weight_distribution::parse(opt.dist_spec);

    hubtail::estimator_config cfg;
    cfg.trials = opt.trials;
    cfg.seed = opt.seed;
    cfg.workers = opt.workers;
    cfg.batch = opt.batch;
    cfg.eps = parse_eps(opt.eps_text);

    const auto rows = hubtail::convergence_table(d, a, n_list, cfg);
    csv_document doc;
    doc.meta("command", "convergence");
    doc.meta("dist", d.canonical());
    doc.meta("a", fmt(a));
    doc.meta("trials", std::to_string(opt.trials));
    doc.meta("seed", std::to_string(opt.seed));
    doc.meta("eps", opt.eps_text);
    doc.header = "n,p_hat,stderr,asymptote,ratio,ratio_err";
    for (const auto& r : rows) {
        std::ostringstream row;
        row << r.n << ',' << fmt(r.p_hat) << ',' << fmt(r.std_err) << ','
            << fmt(r.asymptote) << ',' << fmt(r.ratio) << ',' << fmt(r.ratio_err);
        doc.rows.push_back(row.str());
    }
    write_text(doc.render(), opt.out_path);
    return 0;
}

// --- hublaw --------------------------------------------------------------------

int run_hublaw(const run_options& opt, std::uint64_t n, double a, std::uint64_t count) {
    require_format(opt, "csv", "hublaw");
    const auto d = hubtail::weight_distribution::parse(opt.dist_spec);

    hubtail::estimator_config cfg;
    cfg.trials = opt.trials;
    cfg.seed = opt.seed;
    cfg.workers = opt.workers;
    cfg.batch = opt.batch;
    cfg.eps = parse_eps(opt.eps_text);

    const auto empirical = hubtail::hub_empirical_law(d, n, a, cfg);
    // A disjoint stream purpose keeps the rejection draws independent of the
    // planted trials under the shared seed.
    const auto limit = hubtail::limit_hub_law_sample(d, a, count, opt.seed);

    csv_document doc;
    doc.meta("command", "hublaw");
    doc.meta("dist", d.canonical());
    doc.meta("n", std::to_string(n));
    doc.meta("a", fmt(a));
    doc.meta("trials", std::to_string(opt.trials));
    doc.meta("count", std::to_string(count));
    doc.meta("seed", std::to_string(opt.seed));
    doc.meta("eps", opt.eps_text);
    doc.meta("k", std::to_string(empirical.k));
    doc.meta("hits", std::to_string(empirical.hits));
    doc.meta("ess", fmt(empirical.ess));
    // Coordinates are sorted ascending inside each tuple, so coordinate j is
    // the j-th smallest hub; the last one is the top weight.
    const auto k = static_cast<std::size_t>(empirical.k);
    for (std::size_t c = 0; c < k; ++c) {
        double ks = std::numeric_limits<double>::quiet_NaN();
        if (!empirical.tuples.empty()) {
            std::vector<double> xs, ys;
            xs.reserve(empirical.tuples.size());
            ys.reserve(limit.size());
            for (const auto& t : empirical.tuples) xs.push_back(t[c]);
            for (const auto& t : limit) ys.push_back(t[c]);
            ks = hubtail::ks_distance(xs, ys);
        }
        doc.meta("ks_coord_" + std::to_string(c + 1), fmt(ks));
        if (c + 1 == k) doc.meta("ks_top", fmt(ks));
    }

    std::string header = "source,tuple";
    for (std::size_t c = 0; c < k; ++c) header += ",c" + std::to_string(c + 1);
    doc.header = header;
    const auto push_rows = [&](const char* source,
                               const std::vector<std::vector<double>>& tuples) {
        for (std::size_t i = 0; i < tuples.size(); ++i) {
            std::ostringstream row;
            row << source << ',' << i;
            for (double v : tuples[i]) row << ',' << fmt(v);
            doc.rows.push_back(row.str());
        }
    };
    push_rows("empirical", empirical.tuples);
    push_rows("limit", limit);
    write_text(doc.render(), opt.out_path);
    return 0;
}

// --- oracle --------------------------------------------------------------------

int run_oracle(const std::string& check) {
    if (check != "all") {
        throw CLI::ValidationError("only --check all is supported");
    }
    const auto results = hubtail::run_all_checks();
    bool all_passed = true;
    for (const auto& r : results) {
        std::cout << (r.passed ? "[PASS] " : "[FAIL] ") << r.name << ": " << r.detail << "\n";
        all_passed = all_passed && r.passed;
    }
    std::cout << (all_passed ? "all checks passed" : "CHECK FAILURES PRESENT") << "\n";
    return all_passed ? 0 : 3;
}

int dispatch(int argc, char** argv) {
    CLI::App app{"asymptotic tail constants and rare-event estimators for "
                 "Chung-Lu random graphs with heavy-tailed weights"};
    app.require_subcommand(1);

    // constants
    run_options const_opt;
    const_opt.trials = 1000000;
    double const_a = 0.0;
    auto* constants = app.add_subcommand(
        "constants", "tail-curve constants k, eta(a), K(a) for one excess level");
    add_dist_option(constants, const_opt);
    constants->add_option("--a", const_a, "excess level a > 0")->required();
    add_run_options(constants, const_opt, "json");

    // simulate
    run_options sim_opt;
    sim_opt.trials = 1000;
    std::uint64_t sim_n = 0;
    double sim_eps = 0.0;
    auto* simulate = app.add_subcommand(
        "simulate", "per-instance statistics S_n, M_n, E_n, hub counts as CSV");
    add_dist_option(simulate, sim_opt);
    simulate->add_option("--n", sim_n, "graph size")->required();
    simulate->add_option("--eps", sim_eps, "hub cut as a fraction of n")->required();
    add_run_options(simulate, sim_opt, "csv");

    // estimate
    run_options est_opt;
    std::uint64_t est_n = 0;
    double est_a = 0.0;
    std::string est_target = "sn";
    std::string est_method = "planted";
    int est_k = 0;
    bool est_total = false;
    auto* estimate = app.add_subcommand(
        "estimate", "Monte Carlo tail probability for one (n, a) point");
    add_dist_option(estimate, est_opt);
    estimate->add_option("--n", est_n, "graph size")->required();
    estimate->add_option("--a", est_a, "excess level a > 0")->required();
    estimate->add_option("--target", est_target, "tail statistic: sn, mn, or en")
        ->check(CLI::IsMember({"sn", "mn", "en"}))
        ->capture_default_str();
    estimate->add_option("--method", est_method, "estimator: naive or planted")
        ->check(CLI::IsMember({"naive", "planted"}))
        ->capture_default_str();
    estimate->add_option("--eps", est_opt.eps_text,
                         "hub cut as a fraction of n, or 'auto' for eta(a)/2")
        ->capture_default_str();
    auto* k_opt = estimate->add_option(
        "--k", est_k, "override the planted hub count (requires explicit --eps)");
    estimate->add_flag("--total", est_total,
                       "fold the naive off-hub-count remainder into p_hat");
    add_run_options(estimate, est_opt, "json");

    // convergence
    run_options conv_opt;
    std::vector<std::uint64_t> conv_n;
    double conv_a = 0.0;
    auto* convergence = app.add_subcommand(
        "convergence", "planted estimates against the asymptotic curve over n");
    add_dist_option(convergence, conv_opt);
    convergence->add_option("--n", conv_n, "comma-separated ladder of graph sizes")
        ->required()
        ->delimiter(',');
    convergence->add_option("--a", conv_a, "excess level a > 0")->required();
    convergence->add_option("--eps", conv_opt.eps_text,
                            "hub cut as a fraction of n, or 'auto' for eta(a)/2")
        ->capture_default_str();
    add_run_options(convergence, conv_opt, "csv");

    // hublaw
    run_options law_opt;
    law_opt.trials = 40000;
    std::uint64_t law_n = 0;
    double law_a = 0.0;
    std::uint64_t law_count = 10000;
    auto* hublaw = app.add_subcommand(
        "hublaw", "empirical hub weights on the rare event vs the limiting law");
    add_dist_option(hublaw, law_opt);
    hublaw->add_option("--n", law_n, "graph size")->required();
    hublaw->add_option("--a", law_a, "excess level a > 0")->required();
    hublaw->add_option("--count", law_count, "rejection-sampled tuples from the limit law")
        ->capture_default_str();
    hublaw->add_option("--eps", law_opt.eps_text,
                       "hub cut as a fraction of n, or 'auto' for eta(a)/2")
        ->capture_default_str();
    add_run_options(hublaw, law_opt, "csv");

    // oracle
    std::string oracle_check = "all";
    auto* oracle = app.add_subcommand("oracle", "deterministic self-verification suite");
    oracle->add_option("--check", oracle_check, "which checks to run (only: all)")
        ->capture_default_str();

    std::vector<std::string> args = apply_config_file({argv + 1, argv + argc});
    std::reverse(args.begin(), args.end()); // CLI11 consumes the vector back to front
    try {
        app.parse(std::move(args));
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    if (constants->parsed()) return run_constants(const_opt, const_a);
    if (simulate->parsed()) return run_simulate(sim_opt, sim_n, sim_eps);
    if (estimate->parsed()) {
        const std::optional<int> k =
            k_opt->count() > 0 ? std::optional<int>(est_k) : std::nullopt;
        return run_estimate(est_opt, est_n, est_a, est_target, est_method, k, est_total);
    }
    if (convergence->parsed()) return run_convergence(conv_opt, conv_n, conv_a);
    if (hublaw->parsed()) return run_hublaw(law_opt, law_n, law_a, law_count);
    if (oracle->parsed()) return run_oracle(oracle_check);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return dispatch(argc, argv);
    } catch (const CLI::ParseError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const std::domain_error& e) {
        std::cerr << "computation error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "computation error: " << e.what() << "\n";
        return 2;
    }
}
