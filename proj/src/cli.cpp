#include "spectral_econ/cli.hpp"

#include "spectral_econ/centrality.hpp"
#include "spectral_econ/degroot.hpp"
#include "spectral_econ/figures.hpp"
#include "spectral_econ/json_format.hpp"
#include "spectral_econ/market_robust.hpp"
#include "spectral_econ/matrix_io.hpp"
#include "spectral_econ/network_game.hpp"
#include "spectral_econ/parallel.hpp"
#include "spectral_econ/public_goods.hpp"

#include <CLI11.hpp>
#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>

namespace spectral_econ::cli {

namespace fs = std::filesystem;

namespace {

enum class OptKind { value, path, flag };

struct OptDecl {
    std::string name;  // config key; the flag is --name with '_' -> '-'
    OptKind kind = OptKind::value;
    std::string help;
    std::string fallback;  // empty: no default
};

// Path options that may instead hold one of these keywords.
const std::set<std::string> kKeywords = {"ones", "zeros", "top_eigenvector"};

class Params {
public:
    void set(const std::string& key, std::string value) { values_[key] = std::move(value); }
    void set_default(const std::string& key, std::string value) { defaults_[key] = std::move(value); }

    [[nodiscard]] bool has(const std::string& key) const { return values_.count(key) > 0; }

    [[nodiscard]] std::optional<std::string> get(const std::string& key) const {
        if (auto it = values_.find(key); it != values_.end()) return it->second;
        if (auto it = defaults_.find(key); it != defaults_.end()) return it->second;
        return std::nullopt;
    }

    [[nodiscard]] std::string str(const std::string& key) const {
        auto v = get(key);
        if (!v) throw InvalidInput(fmt::format("missing required option --{}", flag_name(key)));
        return *v;
    }

    [[nodiscard]] double num(const std::string& key) const { return to_double(key, str(key)); }

    [[nodiscard]] long integer(const std::string& key) const {
        const double v = num(key);
        if (v != std::floor(v) || std::abs(v) > 9e15) {
            throw InvalidInput(fmt::format("--{} must be an integer", flag_name(key)));
        }
        return static_cast<long>(v);
    }

    [[nodiscard]] std::size_t count(const std::string& key) const {
        const long v = integer(key);
        if (v < 0) throw InvalidInput(fmt::format("--{} must be nonnegative", flag_name(key)));
        return static_cast<std::size_t>(v);
    }

    [[nodiscard]] std::uint64_t u64(const std::string& key) const {
        const std::string s = str(key);
        std::uint64_t v = 0;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || ptr != s.data() + s.size()) {
            throw InvalidInput(fmt::format("--{} must be a nonnegative integer, got '{}'", flag_name(key), s));
        }
        return v;
    }

    [[nodiscard]] bool flag(const std::string& key) const {
        auto v = get(key);
        return v && (*v == "true" || *v == "1");
    }

    static std::string flag_name(std::string key) {
        std::replace(key.begin(), key.end(), '_', '-');
        return key;
    }

private:
    static double to_double(const std::string& key, const std::string& s) {
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
            throw InvalidInput(fmt::format("--{} must be a finite number, got '{}'", flag_name(key), s));
        }
        return v;
    }

    std::map<std::string, std::string> values_;
    std::map<std::string, std::string> defaults_;
};

struct Context {
    Params params;
    std::ostream& out;
    std::ostream& err;

    [[nodiscard]] int threads() const {
        if (params.has("threads")) {
            const long t = params.integer("threads");
            if (t < 1) throw InvalidInput("--threads must be >= 1");
            return static_cast<int>(t);
        }
        return default_thread_count();
    }

    [[nodiscard]] std::string format(const std::string& fallback) const {
        if (auto f = params.get("format")) return *f;
        if (auto o = params.get("out")) {
            const auto ext = fs::path(*o).extension().string();
            if (ext == ".json") return "json";
            if (ext == ".csv") return "csv";
            if (ext == ".svg") return "svg";
        }
        return fallback;
    }

    void emit(const std::string& text) const {
        if (auto o = params.get("out")) {
            io::write_text(*o, text);
        } else {
            out << text;
        }
    }

    void emit(const Json& j) const { emit(dump_json(j)); }
};

using Handler = std::function<void(Context&)>;

struct Command {
    std::string group;
    std::string name;
    std::string help;
    std::vector<OptDecl> options;
    Handler handler;
};

const std::vector<OptDecl> kCommon = {
    {"seed", OptKind::value, "RNG seed", "0"},
    {"threads", OptKind::value, "worker threads (default: SPECTRAL_ECON_THREADS or 1)", ""},
    {"out", OptKind::path, "output file (default: stdout)", ""},
    {"format", OptKind::value, "json|csv|svg (default: from --out extension)", ""},
};

// ---------------------------------------------------------------- inputs

SquareMatrix read_graph(const Params& p, const std::string& key = "graph") {
    return io::read_matrix(p.str(key));
}

Vector read_vector_or(const Params& p, const std::string& key, std::size_t n) {
    const std::string v = p.str(key);
    Vector out;
    if (v == "ones") {
        out = Vector::Ones(static_cast<Eigen::Index>(n));
    } else if (v == "zeros") {
        out = Vector::Zero(static_cast<Eigen::Index>(n));
    } else if (fs::path(v).extension() == ".json") {
        out = vector_from_json(io::read_json(v), key.c_str());
    } else {
        out = io::parse_vector_csv(io::read_text(v));
    }
    if (static_cast<std::size_t>(out.size()) != n) {
        throw InvalidInput(fmt::format("--{} has {} entries, expected {}", Params::flag_name(key), out.size(), n));
    }
    return out;
}

degroot::StochasticMatrix read_stochastic(const Params& p) {
    const SquareMatrix m = read_graph(p, "matrix");
    return p.flag("normalize") ? degroot::StochasticMatrix::normalize_rows(m)
                               : degroot::StochasticMatrix(m);
}

game::NormalizedGame read_game(const Params& p) {
    if (p.has("game")) return game::normalize(game::game_spec_from_json(io::read_json(p.str("game"))));
    if (!p.has("matrix")) throw InvalidInput("game commands need --game or --matrix with --b");
    const SquareMatrix m = read_graph(p, "matrix");
    return game::normalized_from(read_vector_or(p, "b", m.size()), m);
}

std::unique_ptr<goods::UtilityModel> read_model(const Params& p) {
    return goods::utility_model_from_json(io::read_json(p.str("model")));
}

market::MarketScenario read_scenario(const Params& p) {
    market::MarketScenario s;
    if (p.has("scenario")) {
        s = market::scenario_from_json(io::read_json(p.str("scenario")));
    } else {
        s = market::block_example(p.count("n"));
        if (p.has("noise_sd")) s.noise_sd = p.num("noise_sd");
    }
    if (p.has("seed")) s.seed = p.u64("seed");
    return s;
}

market::DesignOptions design_options(const Params& p, const market::MarketScenario& s) {
    market::DesignOptions o;
    if (p.has("tau")) {
        o.tau = p.num("tau");
    } else if (s.noise_sd > 0.0) {
        o.tau = market::default_tau(s.noise_sd, s.m.size());
    } else {
        // noiseless observation: keep every eigenspace that is not numerically zero
        const double top = market::symmetric_spectrum(s.m).values.cwiseAbs().maxCoeff();
        o.tau = 1e-9 * std::max(1.0, top);
    }
    o.target = p.num("target");
    o.margin = p.num("margin");
    return o;
}

std::vector<figures::Point> read_layout(const Params& p, const SquareMatrix& m) {
    if (p.has("coords")) return figures::read_coordinates(p.str("coords"), m.size());
    return figures::spectral_layout(m);
}

Vector read_scores(const std::string& path, std::size_t n) {
    Vector scores;
    if (fs::path(path).extension() == ".json") {
        scores = centrality_from_json(io::read_json(path)).scores;
    } else {
        std::istringstream in(io::read_text(path));
        std::string line;
        std::vector<double> values;
        bool header = true;
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            if (header) {
                header = false;
                if (line.rfind("node", 0) == 0) continue;
            }
            const auto comma = line.rfind(',');
            values.push_back(io::parse_vector_csv(line.substr(comma + 1))[0]);
        }
        scores = Eigen::Map<Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
    }
    if (static_cast<std::size_t>(scores.size()) != n) {
        throw InvalidInput(fmt::format("score file has {} entries for {} nodes", scores.size(), n));
    }
    return scores;
}

DegreeDirection parse_direction(const std::string& s) {
    if (s == "in") return DegreeDirection::in;
    if (s == "out") return DegreeDirection::out;
    if (s == "undirected") return DegreeDirection::undirected;
    throw InvalidInput(fmt::format("unknown degree direction '{}'", s));
}

CentralityResult compute_centrality(const Params& p, const SquareMatrix& m, const std::string& measure) {
    if (measure == "degree") return degree_centrality(m, parse_direction(p.str("direction")));
    if (measure == "eigenvector") return eigenvector_centrality(m);
    if (measure == "katz") {
        Orientation o = Orientation::as_given;
        const std::string os = p.str("orientation");
        if (os == "transposed") {
            o = Orientation::transposed;
        } else if (os != "as_given") {
            throw InvalidInput(fmt::format("unknown orientation '{}'", os));
        }
        return katz_bonacich(m, p.num("delta"), read_vector_or(p, "z", m.size()), o);
    }
    throw InvalidInput(fmt::format("unknown centrality measure '{}'", measure));
}

template <class Report>
void emit_market(Context& ctx, const Report& r) {
    const std::string f = ctx.format("json");
    if (f == "json") {
        ctx.emit(market::to_json(r));
    } else if (f == "csv") {
        ctx.emit(market::to_csv(r));
    } else {
        throw InvalidInput(fmt::format("market reports are json or csv, not '{}'", f));
    }
}

void emit_centrality(Context& ctx, const CentralityResult& r) {
    const std::string f = ctx.format("csv");
    if (f == "csv") {
        ctx.emit(to_csv(r));
    } else if (f == "json") {
        ctx.emit(to_json(r));
    } else {
        throw InvalidInput(fmt::format("centrality reports are csv or json, not '{}'", f));
    }
}

std::vector<std::size_t> parse_sizes(const std::string& s) {
    const Vector v = io::parse_vector_csv(s);
    std::vector<std::size_t> out;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (v[i] < 1 || v[i] != std::floor(v[i])) throw InvalidInput("--sizes must be positive integers");
        out.push_back(static_cast<std::size_t>(v[i]));
    }
    if (out.empty()) throw InvalidInput("--sizes is empty");
    return out;
}

// ---------------------------------------------------------------- handlers

const OptDecl kGraph{"graph", OptKind::path, "matrix file (.csv dense, .tsv edge list, .json)", ""};
const OptDecl kStochastic{"matrix", OptKind::path, "row-stochastic matrix file", ""};
const OptDecl kNormalize{"normalize", OptKind::flag, "row-normalize the matrix first", ""};
const OptDecl kGameFile{"game", OptKind::path, "game spec JSON {gamma, beta, g}", ""};
const OptDecl kGameMatrix{"matrix", OptKind::path, "normalized interaction matrix M", ""};
const OptDecl kGameB{"b", OptKind::path, "standalone vector b: ones or a file", "ones"};
const OptDecl kModel{"model", OptKind::path, "utility model JSON", ""};
const OptDecl kPoint{"x", OptKind::path, "action profile: zeros or a file", "zeros"};
const OptDecl kScenario{"scenario", OptKind::path, "market scenario JSON", ""};
const OptDecl kBlockN{"n", OptKind::value, "block example size when no --scenario", "300"};
const OptDecl kNoiseSd{"noise_sd", OptKind::value, "noise sd for the block example", ""};
const OptDecl kTau{"tau", OptKind::value, "eigenvalue threshold (default 2.5 sd sqrt(n))", ""};
const OptDecl kTarget{"target", OptKind::value, "welfare target", "1"};
const OptDecl kMargin{"margin", OptKind::value, "design margin", "2"};
const OptDecl kReplicate{"replicate", OptKind::value, "noise replicate index", "0"};

std::vector<Command> commands() {
    std::vector<Command> c;

    c.push_back({"centrality", "degree", "degree centrality",
                 {kGraph, {"direction", OptKind::value, "in|out|undirected", "out"}},
                 [](Context& ctx) {
                     emit_centrality(ctx, compute_centrality(ctx.params, read_graph(ctx.params), "degree"));
                 }});
    c.push_back({"centrality", "eigenvector", "eigenvector centrality (sum 1)", {kGraph},
                 [](Context& ctx) {
                     emit_centrality(ctx, compute_centrality(ctx.params, read_graph(ctx.params), "eigenvector"));
                 }});
    c.push_back({"centrality", "katz", "Katz-Bonacich centrality",
                 {kGraph,
                  {"delta", OptKind::value, "decay, 0 <= delta < 1/rho", ""},
                  {"z", OptKind::path, "base vector: ones or a file", "ones"},
                  {"orientation", OptKind::value, "as_given|transposed", "as_given"}},
                 [](Context& ctx) {
                     emit_centrality(ctx, compute_centrality(ctx.params, read_graph(ctx.params), "katz"));
                 }});

    c.push_back({"degroot", "simulate", "iterate x(t+1) = M x(t)",
                 {kStochastic, kNormalize,
                  {"x0", OptKind::path, "initial opinions (CSV or JSON vector)", ""},
                  {"t_max", OptKind::value, "step limit", "100000"},
                  {"tol", OptKind::value, "consensus tolerance", "1e-9"},
                  {"stride", OptKind::value, "keep every stride-th state", "1"}},
                 [](Context& ctx) {
                     const auto& p = ctx.params;
                     const auto m = read_stochastic(p);
                     const Matrix x0 = read_vector_or(p, "x0", m.size());
                     degroot::SimulateOptions o;
                     o.t_max = p.integer("t_max");
                     o.tol = p.num("tol");
                     o.stride = p.integer("stride");
                     const auto traj = degroot::simulate(m, x0, o);
                     const std::string f = ctx.format("json");
                     if (f == "csv") {
                         ctx.emit(degroot::trajectory_to_csv(traj));
                     } else {
                         ctx.emit(degroot::to_json(traj));
                     }
                 }});
    c.push_back({"degroot", "consensus", "limit consensus c^T x(0) and influence weights",
                 {kStochastic, kNormalize, {"x0", OptKind::path, "initial opinions", ""}},
                 [](Context& ctx) {
                     const auto& p = ctx.params;
                     const auto m = read_stochastic(p);
                     const Matrix x0 = read_vector_or(p, "x0", m.size());
                     Json j;
                     j["consensus"] = vector_to_json(degroot::consensus_value(m, x0));
                     j["influence"] = to_json(degroot::influence_weights(m));
                     ctx.emit(j);
                 }});
    c.push_back({"degroot", "wisdom", "max influence weight along a growing sequence",
                 {{"family", OptKind::value, "uniform|celebrity|erdos_renyi", "uniform"},
                  {"sizes", OptKind::value, "comma-separated sizes", "10,20,40,80,160"},
                  {"celebrity_weight", OptKind::value, "weight on the celebrity", "0.5"}},
                 [](Context& ctx) {
                     const auto& p = ctx.params;
                     const auto sizes = parse_sizes(p.str("sizes"));
                     const std::string family = p.str("family");
                     degroot::MatrixSequence seq;
                     if (family == "uniform") {
                         seq = degroot::uniform_sequence(sizes);
                     } else if (family == "celebrity") {
                         seq = degroot::celebrity_sequence(sizes, p.num("celebrity_weight"));
                     } else if (family == "erdos_renyi") {
                         seq = degroot::erdos_renyi_sequence(sizes, p.u64("seed"));
                     } else {
                         throw InvalidInput(fmt::format("unknown sequence family '{}'", family));
                     }
                     Json pts = Json::array();
                     for (const auto& w : degroot::wisdom_trend(seq, ctx.threads())) {
                         pts.push_back({{"n", w.n}, {"max_influence", w.max_influence}});
                     }
                     ctx.emit(Json{{"family", family}, {"description", seq.description}, {"points", pts}});
                 }});

    const std::vector<OptDecl> game_inputs = {kGameFile, kGameMatrix, kGameB};
    auto with = [](std::vector<OptDecl> base, std::initializer_list<OptDecl> extra) {
        base.insert(base.end(), extra);
        return base;
    };
    c.push_back({"game", "nash", "equilibrium, welfare, keyness", game_inputs, [](Context& ctx) {
                     ctx.emit(game::to_json(game::analyze(read_game(ctx.params))));
                 }});
    c.push_back({"game", "dynamics", "simultaneous best responses",
                 with(game_inputs, {{"x0", OptKind::path, "start: zeros or a file", "zeros"},
                                    {"t_max", OptKind::value, "step limit", "1000"},
                                    {"tol", OptKind::value, "step tolerance", "1e-12"}}),
                 [](Context& ctx) {
                     const auto& p = ctx.params;
                     const auto g = read_game(p);
                     const auto trace = game::best_response_dynamics(
                         g, read_vector_or(p, "x0", g.m.size()), static_cast<int>(p.integer("t_max")),
                         p.num("tol"));
                     Json steps = Json::array();
                     for (const auto& x : trace.trajectory) steps.push_back(vector_to_json(x));
                     ctx.emit(Json{{"converged", trace.converged},
                                   {"diverging", trace.diverging},
                                   {"steps", trace.trajectory.size() - 1},
                                   {"final", vector_to_json(trace.trajectory.back())},
                                   {"trajectory", steps}});
                 }});
    c.push_back({"game", "keyness", "dX*/db_i for every agent", game_inputs, [](Context& ctx) {
                     ctx.emit(Json{{"keyness", vector_to_json(game::keyness(read_game(ctx.params)))}});
                 }});
    c.push_back({"game", "poa", "price of anarchy",
                 with(game_inputs, {{"mode", OptKind::value, "closed_form|empirical", "closed_form"},
                                    {"starts", OptKind::value, "empirical search starts", "32"},
                                    {"max_iterations", OptKind::value, "ascent steps per start", "2000"}}),
                 [](Context& ctx) {
                     const auto& p = ctx.params;
                     const std::string mode = p.str("mode");
                     game::PoaMode m = game::PoaMode::closed_form;
                     if (mode == "empirical") {
                         m = game::PoaMode::empirical;
                     } else if (mode != "closed_form") {
                         throw InvalidInput(fmt::format("unknown PoA mode '{}'", mode));
                     }
                     game::PoaSearchOptions o;
                     o.starts = static_cast<int>(p.integer("starts"));
                     o.max_iterations = static_cast<int>(p.integer("max_iterations"));
                     o.seed = p.u64("seed");
                     o.threads = ctx.threads();
                     const auto g = read_game(p);
                     Json j = game::to_json(game::price_of_anarchy(g, m, o));
                     j["rho"] = g.rho;
                     ctx.emit(j);
                 }});

    c.push_back({"goods", "classify", "Pareto classification from rho(B(x))",
                 {kModel, kPoint, {"tol", OptKind::value, "efficiency tolerance", "1e-6"}},
                 [](Context& ctx) {
                     const auto& p = ctx.params;
                     const auto u = read_model(p);
                     ctx.emit(goods::to_json(goods::pareto_classify(*u, read_vector_or(p, "x", u->size()), p.num("tol"))));
                 }});
    c.push_back({"goods", "essential", "agents whose removal kills all Pareto improvements",
                 {kModel}, [](Context& ctx) {
                     const auto u = read_model(ctx.params);
                     ctx.emit(goods::to_json(goods::essential_agents(*u, ctx.threads())));
                 }});
    c.push_back({"goods", "improve", "check the Perron-direction improvement",
                 {kModel, kPoint, {"eta", OptKind::value, "step along the direction", "1e-4"}},
                 [](Context& ctx) {
                     const auto& p = ctx.params;
                     const auto u = read_model(p);
                     const Vector x = read_vector_or(p, "x", u->size());
                     const auto verdict = goods::pareto_classify(*u, x);
                     if (!verdict.direction) {
                         throw PreconditionViolation("x is Pareto efficient; there is no improving direction");
                     }
                     const auto check = goods::verify_improvement(*u, x, *verdict.direction, p.num("eta"));
                     ctx.emit(Json{{"verdict", goods::to_json(verdict)}, {"check", goods::to_json(check)}});
                 }});

    const std::vector<OptDecl> market_inputs = {kScenario, kBlockN, kNoiseSd, kTau, kTarget, kMargin};
    c.push_back({"market", "design", "design an intervention from one noisy observation",
                 with(market_inputs, {kReplicate}), [](Context& ctx) {
                     const auto& p = ctx.params;
                     const auto s = read_scenario(p);
                     auto report = market::design_intervention(market::observe(s, p.count("replicate")),
                                                               design_options(p, s));
                     market::evaluate(s, report);
                     emit_market(ctx, report);
                 }});
    c.push_back({"market", "certify", "Monte Carlo certification over noise replicates",
                 with(market_inputs, {{"replicates", OptKind::value, "number of replicates", "200"},
                                      {"epsilon", OptKind::value, "allowed failure rate", "0.05"}}),
                 [](Context& ctx) {
                     const auto& p = ctx.params;
                     const auto s = read_scenario(p);
                     emit_market(ctx, market::certify(s, design_options(p, s), p.count("replicates"),
                                                      p.num("epsilon"), ctx.threads()));
                 }});
    c.push_back({"market", "block-demo", "the three-group block market",
                 {kBlockN, kNoiseSd, kTau, kTarget, kMargin, kReplicate}, [](Context& ctx) {
                     const auto& p = ctx.params;
                     const auto s = read_scenario(p);
                     const auto obs = market::observe(s, p.count("replicate"));
                     const auto opts = design_options(p, s);
                     auto report = market::design_intervention(obs, opts);
                     market::evaluate(s, report);
                     const Eigen::SelfAdjointEigenSolver<Matrix> noise(obs.m_hat.entries() - s.m.entries(),
                                                                       Eigen::EigenvaluesOnly);
                     const auto truth = market::symmetric_spectrum(s.m);
                     ctx.emit(Json{{"n", s.m.size()},
                                   {"seed", s.seed},
                                   {"tau", opts.tau},
                                   {"largest_eigenvalue", truth.values[0]},
                                   {"noise_norm", noise.eigenvalues().cwiseAbs().maxCoeff()},
                                   {"success", *report.true_welfare >= opts.target},
                                   {"report", market::to_json(report)}});
                 }});

    c.push_back({"figures", "fig1", "node-link diagram sized by centrality",
                 {kGraph,
                  {"scores", OptKind::path, "centrality report (CSV or JSON)", ""},
                  {"measure", OptKind::value, "degree|eigenvector|katz when no --scores", "degree"},
                  {"direction", OptKind::value, "degree direction", "out"},
                  {"delta", OptKind::value, "Katz decay", "0.3333333333333333"},
                  {"z", OptKind::path, "Katz base vector", "ones"},
                  {"orientation", OptKind::value, "as_given|transposed", "as_given"},
                  {"coords", OptKind::path, "node coordinates CSV node,x,y", ""}},
                 [](Context& ctx) {
                     const auto& p = ctx.params;
                     const auto m = read_graph(p);
                     const std::string measure = p.str("measure");
                     const Vector scores = p.has("scores") ? read_scores(p.str("scores"), m.size())
                                                           : compute_centrality(p, m, measure).scores;
                     ctx.emit(figures::render_fig1(m, scores, read_layout(p, m),
                                                   p.has("scores") ? "" : measure + " centrality"));
                 }});
    c.push_back({"figures", "fig2", "weighted digraph of B(0)",
                 {kModel, kGraph, {"coords", OptKind::path, "node coordinates CSV node,x,y", ""}},
                 [](Context& ctx) {
                     const auto& p = ctx.params;
                     SquareMatrix b;
                     if (p.has("model")) {
                         const auto u = read_model(p);
                         b = goods::benefits_matrix(*u, Vector::Zero(static_cast<Eigen::Index>(u->size()))).b;
                     } else if (p.has("graph")) {
                         b = read_graph(p);
                     } else {
                         throw InvalidInput("fig2 needs --model or --graph");
                     }
                     ctx.emit(figures::render_fig2(b, read_layout(p, b)));
                 }});
    c.push_back({"figures", "fig4", "true vs estimated market heatmaps",
                 {kScenario, kBlockN, kNoiseSd, kReplicate,
                  {"max_cells", OptKind::value, "heatmap resolution cap", "100"}},
                 [](Context& ctx) {
                     const auto& p = ctx.params;
                     const auto s = read_scenario(p);
                     const auto obs = market::observe(s, p.count("replicate"));
                     figures::HeatmapPanels panels{s.m.entries(), market::symmetric_spectrum(s.m).vectors.col(0),
                                                   obs.m_hat.entries(),
                                                   market::symmetric_spectrum(obs.m_hat).vectors.col(0)};
                     ctx.emit(figures::render_fig4(panels, p.count("max_cells")));
                 }});
    return c;
}

// ---------------------------------------------------------------- config

std::string config_value(const std::string& key, const Json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number_integer() || v.is_number_unsigned()) return v.dump();
    if (v.is_number_float()) return format_double(v.get<double>());
    if (v.is_array()) {
        std::string out;
        for (const auto& e : v) {
            if (!e.is_number()) throw InvalidInput(fmt::format("config key '{}' must be a numeric array", key));
            if (!out.empty()) out += ',';
            out += config_value(key, e);
        }
        return out;
    }
    throw InvalidInput(fmt::format("config key '{}' has an unsupported value", key));
}

struct Config {
    std::string group;
    std::string name;
    Json body;
    fs::path dir;
};

Config load_config(const fs::path& path) {
    Json j = io::read_json(path);
    if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
        throw InvalidInput(fmt::format("{}: config needs a string \"kind\" such as \"market.certify\"",
                                       path.string()));
    }
    const std::string kind = j["kind"].get<std::string>();
    const auto dot = kind.find('.');
    if (dot == std::string::npos) {
        throw InvalidInput(fmt::format("config kind '{}' must look like <command>.<action>", kind));
    }
    Config c{kind.substr(0, dot), kind.substr(dot + 1), j, fs::absolute(path).parent_path()};
    return c;
}

void apply_config(const Config& cfg, const Command& cmd, Params& params) {
    std::map<std::string, OptKind> known;
    for (const auto& o : cmd.options) known[o.name] = o.kind;
    for (const auto& o : kCommon) known[o.name] = o.kind;
    for (auto it = cfg.body.begin(); it != cfg.body.end(); ++it) {
        if (it.key() == "kind") continue;
        auto k = known.find(it.key());
        if (k == known.end()) {
            throw InvalidInput(fmt::format("unknown key '{}' in {}.{} config", it.key(), cmd.group, cmd.name));
        }
        std::string value = config_value(it.key(), it.value());
        if (k->second == OptKind::path && !kKeywords.count(value) && fs::path(value).is_relative()) {
            value = (cfg.dir / value).lexically_normal().string();
        }
        params.set(it.key(), std::move(value));
    }
}

// `spectral_econ --config exp.json [flags]` runs the command named by the config's kind.
std::vector<std::string> expand_config_kind(const std::vector<std::string>& args) {
    if (args.empty() || args[0].rfind("--config", 0) != 0) return args;
    std::string path;
    if (args[0] == "--config") {
        if (args.size() < 2) return args;
        path = args[1];
    } else if (args[0].rfind("--config=", 0) == 0) {
        path = args[0].substr(9);
    } else {
        return args;
    }
    const Config cfg = load_config(path);
    std::vector<std::string> out{cfg.group, cfg.name};
    out.insert(out.end(), args.begin(), args.end());
    return out;
}

int dispatch(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
    const auto args = expand_config_kind(raw_args);
    CLI::App app{"Spectral tools for network economics.\n"
                 "Run `spectral_econ --config exp.json` to dispatch on the config's \"kind\".",
                 "spectral_econ"};
    app.require_subcommand(1, 1);

    const auto table = commands();
    std::map<std::string, CLI::App*> groups;
    std::vector<std::map<std::string, std::string>> raw(table.size());
    std::vector<std::string> configs(table.size());
    std::vector<CLI::App*> subs(table.size());
    for (std::size_t i = 0; i < table.size(); ++i) {
        const auto& cmd = table[i];
        auto& g = groups[cmd.group];
        if (!g) {
            g = app.add_subcommand(cmd.group, cmd.group + " analyses");
            g->require_subcommand(1);
        }
        auto* sub = g->add_subcommand(cmd.name, cmd.help);
        subs[i] = sub;
        auto add = [&](const OptDecl& o) {
            const std::string flag = "--" + Params::flag_name(o.name);
            std::string help = o.help;
            if (!o.fallback.empty()) help += fmt::format(" [{}]", o.fallback);
            if (o.kind == OptKind::flag) {
                sub->add_flag_function(flag, [&raw, i, name = o.name](std::int64_t) { raw[i][name] = "true"; },
                                       help);
            } else {
                sub->add_option_function<std::string>(
                    flag, [&raw, i, name = o.name](const std::string& v) { raw[i][name] = v; }, help);
            }
        };
        for (const auto& o : cmd.options) add(o);
        for (const auto& o : kCommon) add(o);
        sub->add_option("--config", configs[i], "experiment config JSON; overrides flags");
    }

    try {
        app.parse(std::vector<std::string>(args.rbegin(), args.rend()));
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return kExitOk;
        }
        err << "error: " << e.what() << '\n';
        return kExitInvalidInput;
    }

    std::optional<std::size_t> chosen;
    for (std::size_t i = 0; i < table.size(); ++i) {
        if (subs[i]->parsed()) chosen = i;
    }

    if (!chosen) {
        err << app.help();
        err << "error: a subcommand is required\n";
        return kExitInvalidInput;
    }
    std::optional<Config> cfg;
    if (!configs[*chosen].empty()) {
        cfg = load_config(configs[*chosen]);
        const auto& cmd = table[*chosen];
        if (cfg->group != cmd.group || cfg->name != cmd.name) {
            throw InvalidInput(fmt::format("config kind '{}.{}' does not match command '{} {}'", cfg->group,
                                           cfg->name, cmd.group, cmd.name));
        }
    }

    const auto& cmd = table[*chosen];
    Context ctx{Params{}, out, err};
    for (const auto& o : cmd.options) {
        if (!o.fallback.empty()) ctx.params.set_default(o.name, o.fallback);
    }
    for (const auto& o : kCommon) {
        if (!o.fallback.empty()) ctx.params.set_default(o.name, o.fallback);
    }
    for (const auto& [k, v] : raw[*chosen]) ctx.params.set(k, v);
    if (cfg) apply_config(*cfg, cmd, ctx.params);
    cmd.handler(ctx);
    return kExitOk;
}

}  // namespace

int exit_code(ErrorCategory category) {
    switch (category) {
        case ErrorCategory::invalid_input: return kExitInvalidInput;
        case ErrorCategory::precondition: return kExitPrecondition;
        case ErrorCategory::numeric_failure: return kExitNumeric;
    }
    return kExitNumeric;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    try {
        return dispatch(args, out, err);
    } catch (const Error& e) {
        const char* label = e.category() == ErrorCategory::invalid_input  ? "invalid input"
                            : e.category() == ErrorCategory::precondition ? "precondition violated"
                                                                          : "numeric failure";
        err << "error (" << label << "): " << e.what() << '\n';
        return exit_code(e.category());
    } catch (const fs::filesystem_error& e) {
        err << "error (invalid input): " << e.what() << '\n';
        return kExitInvalidInput;
    } catch (const nlohmann::json::exception& e) {
        err << "error (invalid input): " << e.what() << '\n';
        return kExitInvalidInput;
    } catch (const std::bad_alloc&) {
        err << "error (numeric failure): out of memory\n";
        return kExitNumeric;
    } catch (const std::exception& e) {
        err << "error (numeric failure): " << e.what() << '\n';
        return kExitNumeric;
    }
}

int run(int argc, const char* const* argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args, std::cout, std::cerr);
}

}  // namespace spectral_econ::cli
