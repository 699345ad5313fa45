// polyflow: command-line front end.
//
// Exit codes: 0 success, 1 bad configuration, 2 domain error (invalid
// manifold, bad start point, ...), 3 experiment failure. On exit 3 the
// partial report is still written.

#include "polyflow/report.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

using namespace polyflow;
using nlohmann::json;
namespace rp = polyflow::report;

namespace {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ExperimentFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Options {
    std::string command;
    std::string manifold;
    std::string dir;
    double tmax = 10;
    double eps = 0.25;
    double radius = 0.25;
    int grid = 8;
    std::size_t samples = 0;  // 0: per-command default
    std::uint64_t seed = 0;
    double horizon = 1000;
    unsigned threads = 0;
    std::string out;
    std::string format;
    double maxlen = 1.5;
    long long bound = 1000000;
    std::string cell;
    std::string start;
    std::string center;
    std::string white = "0";
    std::string lengths = "1,4";
    std::string c1, c2;
    bool exact = false;
    bool stabilize = false;
};

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(item);
    return out;
}

std::vector<double> doubles(const std::string& s, const char* what)
{
    std::vector<double> out;
    try {
        for (const auto& p : split(s, ',')) out.push_back(to_double(parse_rational(p)));
    } catch (const std::exception&) {
        throw ConfigError(std::string("malformed ") + what + " '" + s + "'");
    }
    return out;
}

CellId parse_cell(const Manifold& m, const std::string& s)
{
    if (s.empty()) return m.cells().front();
    CellId c;
    auto parts = split(s, ',');
    if (parts.size() != 2 && parts.size() != 3) throw ConfigError("cell must be i,j[,k]");
    try {
        for (std::size_t i = 0; i < parts.size(); ++i) c.index[i] = std::stoi(parts[i]);
    } catch (const std::exception&) {
        throw ConfigError("malformed cell '" + s + "'");
    }
    return c;
}

Vec3<double> parse_local(const std::string& s, int dim, double fallback)
{
    Vec3<double> p{fallback, fallback, dim == 3 ? fallback : 0};
    if (s.empty()) return p;
    auto v = doubles(s, "point");
    if (static_cast<int>(v.size()) != dim) throw ConfigError("point needs " + std::to_string(dim) + " coordinates");
    for (int a = 0; a < dim; ++a) p[a] = v[a];
    return p;
}

template <class T>
Direction<T> parse_dir(const Options& o, int dim)
{
    std::string spec = o.dir.empty() ? (dim == 3 ? "sqrt:2,sqrt:3,1" : "phi") : o.dir;
    try {
        return parse_direction<T>(spec, dim);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

json echo(const Options& o, const Manifold* m)
{
    json j{{"command", o.command}, {"seed", o.seed}};
    if (!o.manifold.empty()) j["manifold"] = o.manifold;
    if (m) j["manifold_name"] = m->name();
    auto put = [&](const char* k, const auto& v) { j[k] = v; };
    const std::string& c = o.command;
    if (c != "validate" && c != "saddles" && c != "lines") put("dir", o.dir.empty() ? (m && m->dim() == 2 ? "phi" : "sqrt:2,sqrt:3,1") : o.dir);
    if (c == "trace" || c == "split" || c == "evolve" || c == "multiplicity" || c == "noreturn") put("tmax", o.tmax);
    if (c == "density") put("eps", o.eps);
    if (c == "density" || c == "tstar" || c == "frequency" || c == "classify") put("horizon", o.horizon);
    if (c == "split" || c == "evolve" || c == "multiplicity" || c == "tstar" || c == "frequency") put("radius", o.radius);
    if (c == "multiplicity") put("grid", o.grid), put("stabilize", o.stabilize);
    if (c == "saddles") put("maxlen", o.maxlen);
    if (c == "kronecker" || c == "lines") put("bound", o.bound);
    if (c == "split") put("white", o.white);
    if (c == "frequency") put("lengths", o.lengths);
    if (c == "trace" || c == "noreturn") put("exact", o.exact);
    if (!o.cell.empty()) put("cell", o.cell);
    if (!o.start.empty()) put("start", o.start);
    if (!o.center.empty()) put("center", o.center);
    if (o.samples) put("samples", o.samples);
    if (!o.format.empty()) put("format", o.format);
    return j;
}

class Output {
public:
    explicit Output(const std::string& path)
    {
        if (path.empty() || path == "-") return;
        file_ = std::make_unique<std::ofstream>(path);
        if (!*file_) throw ConfigError("cannot write '" + path + "'");
    }
    std::ostream& stream() { return file_ ? *file_ : std::cout; }

private:
    std::unique_ptr<std::ofstream> file_;
};

std::string format_of(const Options& o, const std::string& fallback, std::initializer_list<const char*> allowed)
{
    std::string f = o.format.empty() ? fallback : o.format;
    for (const char* a : allowed)
        if (f == a) return f;
    throw ConfigError("format '" + f + "' is not available for " + o.command);
}

void write_json(const Options& o, json body, const json& config)
{
    body["config"] = config;
    Output out(o.out);
    out.stream() << body.dump(2) << '\n';
}

Manifold load(const Options& o)
{
    if (o.manifold.empty()) throw ConfigError("--manifold is required");
    return load_manifold(o.manifold);
}

// ---------------------------------------------------------------------------

int cmd_validate(const Options& o)
{
    Manifold m = load(o);
    std::size_t explicit_pairs = 0;
    for (const auto& p : m.pairings()) explicit_pairs += !p.generated;
    std::size_t singular = 0;
    for (const auto& v : m.vertices()) singular += v.singular;
    std::cout << m.name() << ": s=" << m.size() << ", pairings=" << m.pairings().size() << '\n';
    std::cout << "  dim=" << m.dim() << " gated_faces=" << m.gated_faces().size() << " explicit_pairings=" << explicit_pairs
              << " splitting_edges=" << m.splitting_edges().size();
    if (m.dim() == 2) std::cout << " vertices=" << m.vertices().size() << " singular=" << singular;
    std::cout << '\n';
    return 0;
}

template <class T>
int run_trace(const Options& o, const Manifold& m)
{
    Direction<T> d = parse_dir<T>(o, m.dim());
    const CellId cell = parse_cell(m, o.cell);
    ManifoldPoint<T> start{cell, {T(0), T(0), T(0)}};
    if constexpr (ScalarTraits<T>::exact) {
        std::vector<std::string> parts = o.start.empty() ? std::vector<std::string>(m.dim(), "1/10") : split(o.start, ',');
        if (static_cast<int>(parts.size()) != m.dim()) throw ConfigError("point needs " + std::to_string(m.dim()) + " coordinates");
        try {
            for (int a = 0; a < m.dim(); ++a) start.local[a] = parse_rational(parts[a]);
        } catch (const std::invalid_argument&) {
            throw ConfigError("malformed point '" + o.start + "'");
        }
    } else {
        start.local = parse_local(o.start, m.dim(), 0.1);
    }
    T t_max;
    if constexpr (ScalarTraits<T>::exact) t_max = parse_rational(report::num(o.tmax));
    else t_max = o.tmax;
    const std::string fmt = format_of(o, "csv", {"csv", "json", "svg"});
    Trace<T> tr = trace(m, start, d, t_max);
    const json config = echo(o, &m);
    if (fmt == "json") {
        write_json(o, rp::trace_json(tr), config);
        return 0;
    }
    Output out(o.out);
    if (fmt == "svg") rp::trace_svg(out.stream(), m, tr);
    else rp::trace_csv(out.stream(), tr, config);
    return 0;
}

int cmd_trace(const Options& o)
{
    Manifold m = load(o);
    return o.exact ? run_trace<Rational>(o, m) : run_trace<double>(o, m);
}

int cmd_kronecker(const Options& o)
{
    if (o.dir.empty()) throw ConfigError("--dir is required");
    const int dim = split(o.dir, ',').size() == 1 ? 2 : 3;
    Direction<double> d = parse_dir<double>(o, dim);
    if (o.bound < 1) throw ConfigError("--bound must be at least 1");
    KroneckerVerdict v = kronecker_test(d, o.bound);
    write_json(o, rp::kronecker_json(v), echo(o, nullptr));
    return 0;
}

int cmd_saddles(const Options& o)
{
    Manifold m = load(o);
    const std::string fmt = format_of(o, "csv", {"csv", "json"});
    auto cs = saddle_connections(m, o.maxlen, o.threads);
    if (fmt == "json") {
        json rows = json::array();
        for (const auto& c : cs) {
            auto [n, dd] = c.slope();
            rows.push_back({{"slope", dd == 0 ? std::string("inf") : to_string(Rational(n, dd))},
                            {"length", c.length},
                            {"v0", c.v0},
                            {"v1", c.v1},
                            {"dx", to_string(c.dx)},
                            {"dy", to_string(c.dy)}});
        }
        write_json(o, {{"connections", rows}, {"count", cs.size()}}, echo(o, &m));
        return 0;
    }
    Output out(o.out);
    rp::saddles_csv(out.stream(), cs, echo(o, &m));
    return 0;
}

int cmd_lines(const Options& o)
{
    std::vector<std::pair<Rational, Rational>> coeffs;
    if (!o.c1.empty() || !o.c2.empty()) {
        try {
            coeffs.push_back({parse_rational(o.c1.empty() ? "0" : o.c1), parse_rational(o.c2.empty() ? "0" : o.c2)});
        } catch (const std::invalid_argument&) {
            throw ConfigError("malformed --c1/--c2");
        }
    } else {
        Manifold m = load(o);
        std::set<std::pair<Rational, Rational>> seen;
        for (const auto& e : m.splitting_edges())
            if (e.kind == EdgeKind::FaceEdge && seen.insert({e.c1, e.c2}).second) coeffs.push_back({e.c1, e.c2});
    }
    if (o.bound < 1 || o.bound > 50) throw ConfigError("--bound for lines must lie in [1, 50]");
    std::vector<ExceptionalLine> all;
    for (const auto& [a, b] : coeffs) {
        auto ls = exceptional_lines(a, b, o.bound);
        all.insert(all.end(), ls.begin(), ls.end());
    }
    Output out(o.out);
    rp::lines_csv(out.stream(), all, echo(o, nullptr));
    return 0;
}

ManifoldPoint<double> start_point(const Options& o, const Manifold& m) { return {parse_cell(m, o.cell), parse_local(o.start, m.dim(), 0.1)}; }

TargetSet target(const Options& o, const Manifold& m)
{
    TargetSet g = TargetSet::ball(parse_cell(m, o.cell), parse_local(o.center, m.dim(), 0.5), o.radius);
    validate_target(m, g);
    return g;
}

int cmd_density(const Options& o)
{
    Manifold m = load(o);
    Direction<double> d = parse_dir<double>(o, m.dim());
    const std::string fmt = format_of(o, "json", {"json", "csv", "svg"});
    CoverageReport r = coverage_time(m, start_point(o, m), d, o.eps, o.horizon);
    if (fmt == "json") write_json(o, rp::coverage_json(r), echo(o, &m));
    else {
        Output out(o.out);
        if (fmt == "csv") rp::coverage_csv(out.stream(), m, r, echo(o, &m));
        else rp::coverage_svg(out.stream(), m, r);
    }
    if (!r.complete) {
        std::cerr << "coverage incomplete at horizon " << o.horizon << " (" << r.visited << " of " << r.first_visit.size() << " subcells)\n";
        return 3;
    }
    return 0;
}

int cmd_classify(const Options& o)
{
    Manifold m = load(o);
    Direction<double> d = parse_dir<double>(o, m.dim());
    StartClass c = classify_start(m, start_point(o, m), d, o.horizon);
    json j{{"result", c.pathological ? "Pathological" : "NonPathological"}, {"horizon", c.horizon}};
    if (c.pathological) {
        j["t_hit"] = c.t_hit;
        if (c.vertex) j["vertex"] = *c.vertex;
        if (c.edge) j["edge_from"] = {rp::num(c.edge->from[0]), rp::num(c.edge->from[1]), rp::num(c.edge->from[2])};
    }
    write_json(o, j, echo(o, &m));
    return 0;
}

int cmd_tstar(const Options& o)
{
    Manifold m = load(o);
    Direction<double> d = parse_dir<double>(o, m.dim());
    TargetSet g = target(o, m);
    json body{{"target", rp::target_json(g)}};
    try {
        TStarReport r = o.samples ? estimate_t_star(m, d, g, o.samples, o.horizon, o.seed, o.threads)
                                  : estimate_t_star_stable(m, d, g, o.horizon, 25600, o.seed, o.threads);
        body["t_star"] = rp::tstar_json(r);
    } catch (const HorizonTooSmall& e) {
        body["error"] = std::string("HorizonTooSmall: ") + e.what();
        body["missed_fraction"] = e.missed_fraction;
        write_json(o, body, echo(o, &m));
        std::cerr << "HorizonTooSmall: " << e.what() << '\n';
        return 3;
    }
    write_json(o, body, echo(o, &m));
    return 0;
}

int cmd_frequency(const Options& o)
{
    Manifold m = load(o);
    Direction<double> d = parse_dir<double>(o, m.dim());
    TargetSet g = target(o, m);
    const auto multiples = doubles(o.lengths, "lengths");
    const std::string fmt = format_of(o, "json", {"json", "csv"});
    const json config = echo(o, &m);
    json body{{"target", rp::target_json(g)}};
    TStarReport ts;
    try {
        ts = estimate_t_star_stable(m, d, g.halved(), o.horizon, 25600, o.seed, o.threads);
    } catch (const HorizonTooSmall& e) {
        body["error"] = std::string("HorizonTooSmall: ") + e.what();
        body["missed_fraction"] = e.missed_fraction;
        if (fmt == "json") write_json(o, body, config);
        else {
            Output out(o.out);
            rp::csv_config(out.stream(), config);
            out.stream() << "# HorizonTooSmall: " << e.what() << '\n';
        }
        std::cerr << "HorizonTooSmall: " << e.what() << '\n';
        return 3;
    }
    std::vector<double> lengths;
    for (double k : multiples) {
        if (k < 1) throw ConfigError("segment lengths are multiples of 2 T* and must be at least 1");
        lengths.push_back(k * 2 * ts.t_star);
    }
    if (ts.t_star == 0) lengths.assign(multiples.size(), 1.0);
    FrequencyReport r = visiting_frequency(m, d, g, ts.t_star, lengths, o.samples ? o.samples : 20, o.seed, o.threads);
    if (fmt == "csv") {
        Output out(o.out);
        rp::frequency_csv(out.stream(), r, config);
    } else {
        body["t_star"] = rp::tstar_json(ts);
        body["frequency"] = rp::frequency_json(r);
        write_json(o, body, config);
    }
    if (r.chain_failures > 0 || !ts.stable) {
        std::cerr << (ts.stable ? "" : "T* did not stabilise; ") << r.chain_failures << " segments violate the frequency bound\n";
        return 3;
    }
    return 0;
}

ColourOptions colour_options(const Options& o, const Manifold& m)
{
    ColourOptions c;
    c.radius = o.radius;
    c.seed = o.seed;
    c.threads = o.threads;
    c.white.clear();
    for (double w : doubles(o.white, "white set")) {
        if (w < 0 || w >= static_cast<double>(m.size()) || w != std::floor(w)) throw ConfigError("white set holds cell indices in [0, s)");
        c.white.insert(static_cast<int>(w));
    }
    if (m.dim() == 2) c.position = {0.5, 0.5, 0};
    return c;
}

int cmd_split(const Options& o)
{
    Manifold m = load(o);
    Direction<double> d = parse_dir<double>(o, m.dim());
    ColourReport r = colour_experiment(m, d, o.tmax, o.samples ? o.samples : 200, colour_options(o, m));
    write_json(o, rp::colour_json(m, r), echo(o, &m));
    if (r.result == SplitCase::Inconclusive) {
        std::cerr << "Inconclusive: " << r.samples_lost << " of " << r.samples << " samples hit a splitting edge\n";
        return 3;
    }
    return 0;
}

Ball ball_option(const Options& o, const Manifold& m) { return Ball{{parse_cell(m, o.cell), parse_local(o.start, m.dim(), 0.5)}, o.radius, Colour::White}; }

int cmd_evolve(const Options& o)
{
    Manifold m = load(o);
    Direction<double> d = parse_dir<double>(o, m.dim());
    const std::string fmt = format_of(o, "json", {"json", "csv"});
    EvolveResult r = evolve_ball(m, ball_option(o, m), d, o.tmax, o.samples ? o.samples : 400, o.seed, o.threads);
    if (fmt == "csv") {
        Output out(o.out);
        rp::fragments_csv(out.stream(), r, echo(o, &m));
    } else {
        write_json(o, rp::evolve_json(r), echo(o, &m));
    }
    return 0;
}

int cmd_multiplicity(const Options& o)
{
    Manifold m = load(o);
    Direction<double> d = parse_dir<double>(o, m.dim());
    const std::string fmt = format_of(o, "json", {"json", "csv"});
    Ball b = ball_option(o, m);
    const std::size_t n = o.samples ? o.samples : 200;
    MultiplicityReport r = o.stabilize ? estimate_multiplicity_stable(m, b, d, o.tmax, o.grid, n, 8, o.seed, o.threads)
                                       : estimate_multiplicity(m, b, d, o.tmax, o.grid, n, o.seed, o.threads);
    if (fmt == "csv") {
        Output out(o.out);
        rp::multiplicity_csv(out.stream(), r, m.dim(), echo(o, &m));
    } else {
        write_json(o, rp::multiplicity_json(r), echo(o, &m));
    }
    if (!r.stable) {
        std::cerr << "multiplicity estimate did not stabilise\n";
        return 3;
    }
    return 0;
}

template <class T>
int run_noreturn(const Options& o, const Manifold& m)
{
    Direction<T> d = parse_dir<T>(o, m.dim());
    T t_max;
    if constexpr (ScalarTraits<T>::exact) t_max = parse_rational(rp::num(o.tmax));
    else t_max = o.tmax;
    json edges = json::array();
    bool any = false;
    for (const auto& e : y_edges(m)) {
        auto r = check_no_return(m, d, e, t_max, o.samples ? o.samples : 16, o.threads);
        json j = rp::noreturn_json(r);
        j["edge"] = {{"from", {rp::num(e.from[0]), rp::num(e.from[1]), rp::num(e.from[2])}}, {"to", {rp::num(e.to[0]), rp::num(e.to[1]), rp::num(e.to[2])}}};
        any = any || r.returned;
        edges.push_back(j);
    }
    write_json(o, {{"result", any ? "ReturnAt" : "NoReturn"}, {"edges", edges}}, echo(o, &m));
    return 0;
}

int cmd_noreturn(const Options& o)
{
    Manifold m = load(o);
    if (m.dim() != 3) throw ConfigError("noreturn needs a 3-manifold");
    return o.exact ? run_noreturn<Rational>(o, m) : run_noreturn<double>(o, m);
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Straight-line flows on polysquare surfaces and polycube 3-manifolds"};
    app.require_subcommand(1);
    Options o;

    struct Cmd {
        const char* name;
        const char* help;
        int (*run)(const Options&);
    };
    const Cmd cmds[] = {
        {"validate", "build a manifold description and print a summary", cmd_validate},
        {"trace", "trace one flow line", cmd_trace},
        {"kronecker", "test alpha1, alpha2, 1 for rational relations", cmd_kronecker},
        {"saddles", "list saddle connections of a surface", cmd_saddles},
        {"lines", "list exceptional direction lines of oblique face edges", cmd_lines},
        {"density", "epsilon-grid coverage time", cmd_density},
        {"classify", "check whether a start point is pathological", cmd_classify},
        {"tstar", "largest hitting time of a target ball", cmd_tstar},
        {"frequency", "visiting frequency of a target ball", cmd_frequency},
        {"split", "colour-splitting experiment", cmd_split},
        {"evolve", "spread one ball and list its fragments", cmd_evolve},
        {"multiplicity", "estimate the multiplicity function", cmd_multiplicity},
        {"noreturn", "check that no flow line returns to a y-edge", cmd_noreturn},
    };
    std::map<CLI::App*, const Cmd*> by_app;
    for (const auto& c : cmds) {
        CLI::App* sub = app.add_subcommand(c.name, c.help);
        by_app[sub] = &c;
        const std::string n = c.name;
        if (n != "kronecker") sub->add_option("--manifold,-m", o.manifold, "manifold description (JSON)")->check(CLI::ExistingFile);
        if (n == "lines") {
            sub->add_option("--c1", o.c1, "edge coefficient c1 (instead of --manifold)");
            sub->add_option("--c2", o.c2, "edge coefficient c2");
        }
        if (n != "validate" && n != "saddles" && n != "lines") sub->add_option("--dir,-d", o.dir, "direction, e.g. sqrt:2,sqrt:3,1 or a surface slope");
        if (n == "trace" || n == "split" || n == "evolve" || n == "multiplicity" || n == "noreturn") sub->add_option("--tmax", o.tmax, "flow time")->check(CLI::NonNegativeNumber);
        if (n == "density") sub->add_option("--eps", o.eps, "grid resolution");
        if (n == "density" || n == "tstar" || n == "frequency" || n == "classify") sub->add_option("--horizon", o.horizon, "longest flow time")->check(CLI::PositiveNumber);
        if (n == "split" || n == "evolve" || n == "multiplicity" || n == "tstar" || n == "frequency") sub->add_option("--radius", o.radius, "ball radius")->check(CLI::PositiveNumber);
        if (n == "multiplicity") {
            sub->add_option("--grid", o.grid, "torus grid per axis");
            sub->add_flag("--stabilize", o.stabilize, "double tmax until the estimate settles");
        }
        if (n == "split" || n == "evolve" || n == "multiplicity" || n == "tstar" || n == "frequency" || n == "noreturn")
            sub->add_option("--samples", o.samples, "sample count (starts, points per ball or per edge)");
        if (n == "split" || n == "evolve" || n == "multiplicity" || n == "tstar" || n == "frequency") sub->add_option("--seed", o.seed, "sequence offset");
        if (n == "saddles") sub->add_option("--maxlen", o.maxlen, "longest connection");
        if (n == "kronecker" || n == "lines") sub->add_option("--bound", o.bound, "coefficient bound");
        if (n == "trace" || n == "density" || n == "classify" || n == "evolve" || n == "multiplicity" || n == "tstar" || n == "frequency")
            sub->add_option("--cell", o.cell, "cell i,j,k");
        if (n == "trace" || n == "density" || n == "classify" || n == "evolve" || n == "multiplicity") sub->add_option("--start", o.start, "local point x,y,z");
        if (n == "tstar" || n == "frequency") sub->add_option("--center", o.center, "target centre in --cell");
        if (n == "split") sub->add_option("--white", o.white, "cell indices coloured white");
        if (n == "frequency") sub->add_option("--lengths", o.lengths, "segment lengths as multiples of 2 T*");
        if (n == "trace" || n == "noreturn") sub->add_flag("--exact", o.exact, "exact rational arithmetic");
        sub->add_option("--threads", o.threads, "worker threads (default POLYFLOW_THREADS or all cores)");
        sub->add_option("--out,-o", o.out, "output file (default stdout)");
        sub->add_option("--format", o.format, "csv, json or svg");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    const Cmd* cmd = nullptr;
    for (auto* sub : app.get_subcommands()) cmd = by_app.at(sub);
    o.command = cmd->name;
    set_default_threads(o.threads);
    try {
        return cmd->run(o);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const GeometryError& e) {
        std::cerr << e.what() << '\n';
        return 2;
    } catch (const TraceError& e) {
        std::cerr << "trace error: " << e.what() << '\n';
        return 2;
    } catch (const StartPathological& e) {
        std::cerr << "StartPathological: " << e.what() << '\n';
        return 2;
    } catch (const HorizonTooSmall& e) {
        std::cerr << "HorizonTooSmall: " << e.what() << '\n';
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
