#include "sobdub/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <numbers>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "sobdub/chain.hpp"
#include "sobdub/constants.hpp"
#include "sobdub/cutoffs.hpp"
#include "sobdub/error.hpp"
#include "sobdub/measures.hpp"
#include "sobdub/parallel.hpp"
#include "sobdub/sobolev_opt.hpp"
#include "sobdub/subelliptic.hpp"

namespace sobdub::cli {

namespace {

using json = nlohmann::ordered_json;

struct Options {
    std::string space = "lebesgue";
    int dim = 1;
    std::string center;
    std::string centers;
    double radius = 1.0;
    std::string radii;
    double p = 2.0;
    double sigma = 2.0;
    double s = 8.0;
    double nu = 0.5;
    double bign = 2.0;
    double K = 1.0;
    std::string grid;
    std::string domain;
    std::uint64_t seed = 1;
    std::string out;
    std::string format;
    int J = 0;
    double cs = 0.0;
    int restarts = 4;
    int iters = 200;
    std::string phi;
    std::string field = "grushin";
    int stencil = 5;
    std::string config;
};

// ---- parsing helpers -------------------------------------------------------

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, sep)) parts.push_back(item);
    if (!text.empty() && text.back() == sep) parts.emplace_back();
    return parts;
}

double parse_real(const std::string& text, const std::string& what) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used == text.size() && std::isfinite(v)) return v;
    } catch (const std::exception&) {
    }
    throw InvalidInput("malformed number '" + text + "' in " + what);
}

std::size_t parse_count(const std::string& text, const std::string& what) {
    const double v = parse_real(text, what);
    if (!(v >= 1.0) || v != std::floor(v) || v > 1e8)
        throw InvalidInput("expected a positive integer in " + what + ", got '" + text + "'");
    return static_cast<std::size_t>(v);
}

std::vector<double> parse_reals(const std::string& text, const std::string& what) {
    std::vector<double> values;
    for (const auto& part : split(text, ',')) values.push_back(parse_real(part, what));
    return values;
}

/// "lo:hi:n" (n evenly spaced values, ends included) or "a,b,c".
std::vector<double> parse_radii(const std::string& text) {
    std::vector<double> radii;
    if (text.find(':') != std::string::npos) {
        const auto parts = split(text, ':');
        if (parts.size() != 3) throw InvalidInput("--radii expects lo:hi:n");
        const double lo = parse_real(parts[0], "--radii");
        const double hi = parse_real(parts[1], "--radii");
        const std::size_t n = parse_count(parts[2], "--radii");
        if (n == 1 && lo != hi) throw InvalidInput("--radii lo:hi:1 needs lo == hi");
        for (std::size_t i = 0; i < n; ++i)
            radii.push_back(n == 1 ? lo
                                   : lo + (hi - lo) * static_cast<double>(i) /
                                              static_cast<double>(n - 1));
    } else {
        radii = parse_reals(text, "--radii");
    }
    for (double r : radii)
        if (!(r > 0.0)) throw InvalidInput("radii must be positive");
    std::sort(radii.begin(), radii.end());
    radii.erase(std::unique(radii.begin(), radii.end()), radii.end());
    return radii;
}

std::array<std::size_t, 2> parse_grid(const std::string& text, int dim, std::size_t fallback) {
    if (text.empty()) return {fallback, fallback};
    const auto parts = split(text, ',');
    if (parts.size() == 1) {
        const auto n = parse_count(parts[0], "--grid");
        return {n, n};
    }
    if (parts.size() == 2 && dim == 2)
        return {parse_count(parts[0], "--grid"), parse_count(parts[1], "--grid")};
    throw InvalidInput("--grid expects n or nx,ny (2D only)");
}

std::optional<Box> parse_domain(const std::string& text, int dim) {
    if (text.empty()) return std::nullopt;
    const auto axes = split(text, ',');
    if (static_cast<int>(axes.size()) != dim)
        throw InvalidInput("--domain expects one lo:hi range per axis");
    Box box;
    box.dim = dim;
    for (int k = 0; k < dim; ++k) {
        const auto ends = split(axes[static_cast<std::size_t>(k)], ':');
        if (ends.size() != 2) throw InvalidInput("--domain expects lo:hi");
        box.lo[k] = parse_real(ends[0], "--domain");
        box.hi[k] = parse_real(ends[1], "--domain");
        if (!(box.hi[k] > box.lo[k])) throw InvalidInput("--domain needs lo < hi");
    }
    if (dim == 1) box.lo[1] = box.hi[1] = 0.0;
    return box;
}

std::string format_real(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return json(v).dump();
}

// ---- spaces and balls ------------------------------------------------------

/// Builds one space per ball (grid families without --domain are sized to
/// centre +- 2.5 R so that B* sits well inside) or a single shared one.
class SpaceSource {
public:
    SpaceSource(const Options& opt, std::size_t default_resolution)
        : family_(parse_family(opt.space, opt.dim)) {
        if (family_.kind == WeightKind::table) {
            shared_ = load_table_space(family_);
            dim_ = shared_->dim();
            return;
        }
        dim_ = opt.dim;
        resolution_ = parse_grid(opt.grid, dim_, default_resolution);
        if (auto box = parse_domain(opt.domain, dim_)) shared_ = build_grid(*box, resolution_, family_);
    }

    int dim() const { return dim_; }
    const WeightFamily& family() const { return family_; }
    bool is_table() const { return family_.kind == WeightKind::table; }
    const DiscreteSpace* shared() const { return shared_ ? &*shared_ : nullptr; }

    DiscreteSpace for_ball(const Point& center, double R) const {
        if (shared_) return *shared_;
        Box box;
        box.dim = dim_;
        for (int k = 0; k < dim_; ++k) {
            box.lo[k] = center[k] - 2.5 * R;
            box.hi[k] = center[k] + 2.5 * R;
        }
        return build_grid(box, resolution_, family_);
    }

    json describe() const {
        json j;
        j["family"] = family_.to_string();
        j["dim"] = dim_;
        if (!is_table()) {
            j["grid"] = dim_ == 1 ? json(resolution_[0]) : json({resolution_[0], resolution_[1]});
            j["domain"] = shared_ ? "fixed" : "per-ball";
        }
        return j;
    }

private:
    WeightFamily family_;
    int dim_ = 1;
    std::array<std::size_t, 2> resolution_{0, 0};
    std::optional<DiscreteSpace> shared_;
};

struct CenterSpec {
    std::string text;
    std::optional<std::string> id;
    Point position{0.0, 0.0};
};

CenterSpec parse_center(const std::string& text, const SpaceSource& source) {
    CenterSpec c;
    c.text = text.empty() ? (source.dim() == 2 ? "0,0" : "0") : text;
    if (const auto* space = source.shared(); space && space->has_ids()) {
        try {
            space->index_of(c.text);
            c.id = c.text;
            return c;
        } catch (const InvalidInput&) {
        }
    }
    const auto coords = parse_reals(c.text, "--center");
    if (static_cast<int>(coords.size()) != source.dim())
        throw InvalidInput("--center needs " + std::to_string(source.dim()) + " coordinate(s)");
    for (std::size_t k = 0; k < coords.size(); ++k) c.position[k] = coords[k];
    return c;
}

Center resolve(const CenterSpec& c, const DiscreteSpace& space) {
    if (c.id) return space.index_of(*c.id);
    if (space.metric_kind() == MetricKind::euclidean) return c.position;
    return space.locate(c.position);
}

json center_json(const CenterSpec& c, int dim) {
    if (c.id) return *c.id;
    return dim == 1 ? json(c.position[0]) : json({c.position[0], c.position[1]});
}

std::string center_csv(const CenterSpec& c, int dim) {
    if (c.id) return *c.id;
    return dim == 1 ? format_real(c.position[0])
                    : format_real(c.position[0]) + " " + format_real(c.position[1]);
}

std::optional<int> level_count(const Options& opt) {
    if (opt.J == 0) return std::nullopt;
    if (opt.J < 0) throw InvalidInput("--J must be positive");
    return opt.J;
}

json constant_json(const PositiveConstant& c) {
    return c.overflows() ? json(nullptr) : json(c.value());
}

// ---- output ----------------------------------------------------------------

class Report {
public:
    Report(const Options& opt, std::ostream& fallback) : out_(&fallback) {
        if (!opt.out.empty()) {
            file_.open(opt.out);
            if (!file_) throw InvalidInput("cannot open output file '" + opt.out + "'");
            out_ = &file_;
        }
    }

    void json_doc(const json& doc) { *out_ << doc.dump(2) << '\n'; }

    void csv(const std::vector<std::string>& header,
             const std::vector<std::vector<std::string>>& rows) {
        auto line = [&](const std::vector<std::string>& cells) {
            for (std::size_t i = 0; i < cells.size(); ++i) *out_ << (i ? "," : "") << cells[i];
            *out_ << '\n';
        };
        line(header);
        for (const auto& r : rows) line(r);
    }

private:
    std::ofstream file_;
    std::ostream* out_;
};

bool wants_csv(const Options& opt, bool csv_default = false) {
    if (opt.format.empty()) return csv_default;
    if (opt.format == "csv") return true;
    if (opt.format == "json") return false;
    throw InvalidInput("--format must be json or csv");
}

// ---- subcommands -----------------------------------------------------------

int cmd_constants(const Options& opt, const std::set<std::string>& given, std::ostream& out) {
    const SobolevParams params{opt.p, opt.sigma};
    params.validate();
    json doc;
    doc["command"] = "constants";
    doc["p"] = opt.p;
    doc["sigma"] = opt.sigma;
    doc["S"] = series_S(opt.sigma);
    const auto k1 = K1(params);
    doc["log2_K1"] = k1.log2;
    doc["K1"] = constant_json(k1);
    doc["constant_exponent"] = params.constant_exponent();
    if (given.count("cs")) {
        if (!(opt.cs > 0.0)) throw InvalidInput("--cs must be positive");
        const auto cd = doubling_constant(params, opt.cs);
        doc["cs"] = opt.cs;
        doc["log2_C_D"] = cd.log2;
        doc["C_D"] = constant_json(cd);
    }
    if (given.count("s")) {
        const SubellipticParams sub{opt.p, opt.sigma, opt.s, opt.K, opt.bign, opt.nu};
        sub.validate();
        const auto bound = subelliptic_doubling_constant(sub);
        doc["s"] = opt.s;
        doc["K"] = opt.K;
        doc["N"] = opt.bign;
        doc["beta"] = subelliptic_beta(sub);
        doc["log2_subelliptic_bound"] = bound.log2;
        doc["subelliptic_bound"] = constant_json(bound);
    }
    Report report(opt, out);
    if (wants_csv(opt)) {
        std::vector<std::string> header, row;
        for (const auto& [key, value] : doc.items()) {
            if (key == "command") continue;
            header.push_back(key);
            row.push_back(value.is_null() ? "inf" : format_real(value.get<double>()));
        }
        report.csv(header, {row});
    } else {
        report.json_doc(doc);
    }
    return kExitOk;
}

int cmd_doubling(const Options& opt, std::ostream& out) {
    const SobolevParams params{opt.p, opt.sigma};
    params.validate();
    SpaceSource source(opt, opt.dim == 1 ? 2001 : 201);
    const auto c = parse_center(opt.center, source);
    const auto space = source.for_ball(c.position, opt.radius);
    const auto center = resolve(c, space);
    const double mu_ball = measure(space, Ball::open(center, opt.radius));
    const double mu_star = measure(space, Ball::open(center, 2.0 * opt.radius));
    const double ratio = mu_star / mu_ball;

    json doc;
    doc["command"] = "doubling";
    doc["space"] = source.describe();
    doc["center"] = center_json(c, source.dim());
    doc["radius"] = opt.radius;
    doc["mu_ball"] = mu_ball;
    doc["mu_star"] = mu_star;
    doc["ratio"] = ratio;
    std::optional<double> analytic;
    if (!c.id && !source.is_table()) {
        const auto a1 = analytic_ball_measure(source.family(), c.position, opt.radius);
        const auto a2 = analytic_ball_measure(source.family(), c.position, 2.0 * opt.radius);
        if (a1 && a2) analytic = *a2 / *a1;
    }
    doc["analytic_ratio"] = analytic ? json(*analytic) : json(nullptr);
    doc["sobolev_lower_bound"] = sobolev_lower_bound(ratio, params);

    Report report(opt, out);
    if (wants_csv(opt))
        report.csv({"center", "R", "mu_ball", "mu_star", "ratio", "analytic_ratio"},
                   {{center_csv(c, source.dim()), format_real(opt.radius), format_real(mu_ball),
                     format_real(mu_star), format_real(ratio),
                     analytic ? format_real(*analytic) : ""}});
    else
        report.json_doc(doc);
    return kExitOk;
}

bool chain_ok(const ChainReport& r) {
    return r.certificate && r.certificate->pass && r.bound &&
           std::log2(r.actual_doubling) <= r.bound->log2 + kLogSlack;
}

int cmd_chain(const Options& opt, std::ostream& out) {
    const SobolevParams params{opt.p, opt.sigma};
    params.validate();
    SpaceSource source(opt, opt.dim == 1 ? 2001 : 201);
    const auto c = parse_center(opt.center, source);
    const auto space = source.for_ball(c.position, opt.radius);
    const auto r = run_chain(space, Ball::open(resolve(c, space), opt.radius), params, level_count(opt));
    const bool ok = chain_ok(r);

    Report report(opt, out);
    if (wants_csv(opt)) {
        std::vector<std::vector<std::string>> rows;
        for (const auto& row : r.rows)
            rows.push_back({std::to_string(row.j), format_real(row.mu), format_real(row.m),
                            format_real(row.a_next), format_real(row.rho)});
        report.csv({"j", "mu", "m", "a_next", "rho"}, rows);
    } else {
        json doc;
        doc["command"] = "chain";
        doc["space"] = source.describe();
        doc["center"] = center_json(c, source.dim());
        doc["radius"] = opt.radius;
        doc["p"] = opt.p;
        doc["sigma"] = opt.sigma;
        doc["J"] = r.J;
        doc["mu_ball"] = r.mu_ball;
        doc["mu_star"] = r.mu_star;
        doc["mu_last"] = r.mu_last;
        doc["c_min"] = r.c_min;
        doc["log_c_min"] = r.log_c_min;
        doc["argmax_j"] = r.argmax_j;
        json rows = json::array();
        for (const auto& row : r.rows)
            rows.push_back({{"j", row.j}, {"mu", row.mu}, {"m", row.m}, {"a_next", row.a_next},
                            {"rho", row.rho}});
        doc["rows"] = rows;
        if (r.certificate)
            doc["certificate"] = {{"log_lhs", r.certificate->log_lhs},
                                  {"log_rhs", r.certificate->log_rhs},
                                  {"argmax_residual", r.certificate->argmax_residual},
                                  {"pass", r.certificate->pass}};
        doc["actual_doubling"] = r.actual_doubling;
        doc["log2_theorem_bound"] = r.bound ? json(r.bound->log2) : json(nullptr);
        doc["theorem_bound"] = r.bound ? constant_json(*r.bound) : json(nullptr);
        doc["sobolev_lower_bound"] = sobolev_lower_bound(r.actual_doubling, params);
        doc["pass"] = ok;
        report.json_doc(doc);
    }
    return ok ? kExitOk : kExitCertificate;
}

int cmd_estimate(const Options& opt, std::ostream& out) {
    const SobolevParams params{opt.p, opt.sigma};
    params.validate();
    OptimizerConfig config;
    config.restarts = opt.restarts;
    config.max_iters = opt.iters;
    config.seed = opt.seed;
    config.validate();
    SpaceSource source(opt, opt.dim == 1 ? 401 : 61);
    const auto c = parse_center(opt.center, source);
    const auto space = source.for_ball(c.position, opt.radius);
    const auto result =
        estimate_lower_bound(space, Ball::open(resolve(c, space), opt.radius), params, config);

    if (!opt.phi.empty()) {
        std::ofstream file(opt.phi);
        if (!file) throw InvalidInput("cannot open output file '" + opt.phi + "'");
        file << (space.dim() == 2 ? "x,y,phi\n" : "x,phi\n");
        for (PointId i = 0; i < space.size(); ++i) {
            const auto& x = space.point(i);
            file << format_real(x[0]) << ',';
            if (space.dim() == 2) file << format_real(x[1]) << ',';
            file << format_real(result.best_phi[i]) << '\n';
        }
    }

    Report report(opt, out);
    if (wants_csv(opt)) {
        std::vector<std::vector<std::string>> rows;
        for (const auto& s : result.seeds)
            rows.push_back({s.kind, format_real(s.initial_ratio), format_real(s.final_ratio),
                            std::to_string(s.iterations), std::to_string(s.restarts)});
        report.csv({"seed_kind", "initial_ratio", "final_ratio", "iterations", "restarts"}, rows);
    } else {
        json doc;
        doc["command"] = "estimate";
        doc["space"] = source.describe();
        doc["center"] = center_json(c, source.dim());
        doc["radius"] = opt.radius;
        doc["p"] = opt.p;
        doc["sigma"] = opt.sigma;
        doc["seed"] = result.seed;
        doc["best_ratio"] = result.best_ratio;
        doc["best_kind"] = result.best_kind;
        doc["iterations"] = result.iterations;
        json seeds = json::array();
        for (const auto& s : result.seeds)
            seeds.push_back({{"kind", s.kind},
                             {"initial_ratio", s.initial_ratio},
                             {"final_ratio", s.final_ratio},
                             {"iterations", s.iterations},
                             {"restarts", s.restarts}});
        doc["seeds"] = seeds;
        doc["trace"] = result.trace;
        report.json_doc(doc);
    }
    return kExitOk;
}

int cmd_sweep(const Options& opt, std::ostream& out) {
    const SobolevParams params{opt.p, opt.sigma};
    params.validate();
    SpaceSource source(opt, opt.dim == 1 ? 2001 : 201);
    std::vector<CenterSpec> centers;
    for (const auto& text : split(opt.centers.empty() ? opt.center : opt.centers, ';'))
        centers.push_back(parse_center(text, source));
    if (centers.empty()) centers.push_back(parse_center("", source));
    std::sort(centers.begin(), centers.end(), [](const CenterSpec& a, const CenterSpec& b) {
        if (a.id || b.id) return a.text < b.text;
        return a.position < b.position;
    });
    const auto radii = opt.radii.empty() ? std::vector<double>{opt.radius} : parse_radii(opt.radii);
    const auto J = level_count(opt);

    struct Row {
        std::size_t center = 0;
        double R = 0.0;
        ChainReport chain;
    };
    std::vector<Row> rows;
    for (std::size_t i = 0; i < centers.size(); ++i)
        for (double R : radii) rows.push_back({i, R, {}});
    parallel_for(rows.size(), [&](std::size_t k) {
        auto& row = rows[k];
        const auto& c = centers[row.center];
        const auto space = source.for_ball(c.position, row.R);
        row.chain = run_chain(space, Ball::open(resolve(c, space), row.R), params, J);
    });

    bool all_ok = true;
    Report report(opt, out);
    const bool csv = wants_csv(opt, true);
    std::vector<std::vector<std::string>> table;
    json list = json::array();
    for (const auto& row : rows) {
        const auto& r = row.chain;
        const bool ok = chain_ok(r);
        all_ok = all_ok && ok;
        const double lower = sobolev_lower_bound(r.actual_doubling, params);
        const double bound = r.bound ? r.bound->value() : std::nan("");
        const auto& c = centers[row.center];
        if (csv) {
            table.push_back({center_csv(c, source.dim()), format_real(row.R), std::to_string(r.J),
                             format_real(r.c_min), format_real(r.actual_doubling),
                             format_real(bound), format_real(lower), ok ? "true" : "false"});
        } else {
            list.push_back({{"center", center_json(c, source.dim())},
                            {"R", row.R},
                            {"J", r.J},
                            {"c_min", r.c_min},
                            {"doubling", r.actual_doubling},
                            {"log2_theorem_bound", r.bound ? json(r.bound->log2) : json(nullptr)},
                            {"lower_bound", lower},
                            {"pass", ok}});
        }
    }
    if (csv) {
        report.csv({"center", "R", "J", "c_min", "doubling", "theorem_bound", "lower_bound", "pass"},
                   table);
    } else {
        json doc;
        doc["command"] = "sweep";
        doc["space"] = source.describe();
        doc["p"] = opt.p;
        doc["sigma"] = opt.sigma;
        doc["rows"] = list;
        report.json_doc(doc);
    }
    return all_ok ? kExitOk : kExitCertificate;
}

int cmd_cutoff_check(const Options& opt, std::ostream& out) {
    if (!(opt.p >= 1.0) || !std::isfinite(opt.p)) throw InvalidInput("p must be >= 1");
    SpaceSource source(opt, opt.dim == 1 ? 2001 : 201);
    const auto c = parse_center(opt.center, source);
    const auto space = source.for_ball(c.position, opt.radius);
    const Ball ball = Ball::open(resolve(c, space), opt.radius);
    const int J = level_count(opt).value_or(default_J(ball, space));
    const auto family = build_cutoff_family(space, ball, J);
    const auto r = verify_cutoff_properties(space, family, opt.p);

    Report report(opt, out);
    if (wants_csv(opt)) {
        std::vector<std::vector<std::string>> rows;
        auto flag = [](bool b) { return std::string(b ? "true" : "false"); };
        for (const auto& l : r.levels)
            rows.push_back({std::to_string(l.j), flag(l.below_resolution), format_real(l.slope),
                            format_real(l.max_lip), format_real(l.lip_bound),
                            format_real(l.max_pairwise), format_real(l.energy),
                            format_real(l.energy_bound),
                            flag(l.support_ok && l.plateau_ok && l.range_ok && l.lip_ok &&
                                 l.pairwise_ok && l.energy_ok)});
        report.csv({"j", "below_resolution", "slope", "max_lip", "lip_bound", "max_pairwise",
                    "energy", "energy_bound", "pass"},
                   rows);
    } else {
        json doc;
        doc["command"] = "cutoff-check";
        doc["space"] = source.describe();
        doc["center"] = center_json(c, source.dim());
        doc["radius"] = opt.radius;
        doc["p"] = opt.p;
        doc["J"] = J;
        doc["h_lip"] = r.h_lip;
        doc["tau_grid"] = r.tau_grid;
        doc["resolved_J"] = r.resolved_J;
        json levels = json::array();
        for (const auto& l : r.levels)
            levels.push_back({{"j", l.j},
                              {"below_resolution", l.below_resolution},
                              {"support", l.support_ok},
                              {"plateau", l.plateau_ok},
                              {"range", l.range_ok},
                              {"lip", l.lip_ok},
                              {"pairwise", l.pairwise_ok},
                              {"energy", l.energy_ok},
                              {"slope", l.slope},
                              {"max_lip", l.max_lip},
                              {"lip_bound", l.lip_bound},
                              {"max_pairwise", l.max_pairwise},
                              {"energy_value", l.energy},
                              {"energy_bound", l.energy_bound}});
        doc["levels"] = levels;
        json failures = json::array();
        for (const auto& f : r.failures)
            failures.push_back({{"j", f.j},
                                {"point", f.point},
                                {"check", f.check},
                                {"value", f.value},
                                {"bound", f.bound}});
        doc["failures"] = failures;
        doc["pass"] = r.pass();
        report.json_doc(doc);
    }
    return r.pass() ? kExitOk : kExitCertificate;
}

struct PlanarSetup {
    MatrixField field;
    DiscreteSpace space;
    std::array<std::size_t, 2> resolution;
    Box box;
};

PlanarSetup planar_setup(const Options& opt, const std::string& field_name) {
    auto field = parse_matrix_field(field_name);
    if (opt.space != "lebesgue") throw InvalidInput("subunit spaces carry Lebesgue measure only");
    const auto resolution = parse_grid(opt.grid, 2, 401);
    Box box;
    if (auto given = parse_domain(opt.domain, 2)) {
        box = *given;
    } else if (field.name() == "grushin") {
        // Contains the subunit ball B(0, 1) with room to spare vertically.
        const double X = 1.05;
        box = Box{2, {-X, -X * X / std::numbers::pi}, {X, X * X / std::numbers::pi}};
    } else {
        box = Box::square(-1.05, 1.05);
    }
    auto grid = build_grid(box, resolution, WeightFamily::lebesgue(2));
    auto space = subunit_metric(grid, field, opt.stencil);
    return {std::move(field), std::move(space), resolution, box};
}

json planar_json(const PlanarSetup& s, const Options& opt) {
    return {{"field", s.field.name()},
            {"grid", {s.resolution[0], s.resolution[1]}},
            {"domain", {{s.box.lo[0], s.box.hi[0]}, {s.box.lo[1], s.box.hi[1]}}},
            {"stencil", opt.stencil}};
}

Point planar_center(const Options& opt) {
    const auto coords = parse_reals(opt.center.empty() ? "0,0" : opt.center, "--center");
    if (coords.size() != 2) throw InvalidInput("--center needs 2 coordinates");
    return {coords[0], coords[1]};
}

int cmd_grushin(const Options& opt, std::ostream& out) {
    const auto setup = planar_setup(opt, opt.field);
    const Point c = planar_center(opt);
    const auto dist = setup.space.distances_from(c);
    const auto radii = parse_radii(opt.radii.empty() ? "0.2,0.35,0.5" : opt.radii);

    struct Row {
        double R, volume, volume_double, ratio;
    };
    std::vector<Row> rows;
    for (double R : radii) {
        const double v1 = measure(setup.space, dist, R, false);
        const double v2 = measure(setup.space, dist, 2.0 * R, false);
        rows.push_back({R, v1, v2, v2 / v1});
    }
    Report report(opt, out);
    if (wants_csv(opt)) {
        std::vector<std::vector<std::string>> table;
        for (const auto& r : rows)
            table.push_back({format_real(r.R), format_real(r.volume), format_real(r.volume_double),
                             format_real(r.ratio)});
        report.csv({"R", "volume", "volume_double", "ratio"}, table);
    } else {
        json doc;
        doc["command"] = "grushin";
        doc["space"] = planar_json(setup, opt);
        doc["center"] = {c[0], c[1]};
        json list = json::array();
        for (const auto& r : rows)
            list.push_back({{"R", r.R},
                            {"volume", r.volume},
                            {"volume_double", r.volume_double},
                            {"ratio", r.ratio}});
        doc["rows"] = list;
        report.json_doc(doc);
    }
    return kExitOk;
}

int cmd_subelliptic(const Options& opt, const std::set<std::string>& given, std::ostream& out) {
    const SubellipticParams params{opt.p, opt.sigma, opt.s, opt.K, opt.bign, opt.nu};
    params.validate();
    const auto setup = planar_setup(opt, opt.field);
    const Point c = planar_center(opt);
    const double R = given.count("radius") ? opt.radius : 0.15;
    const auto cert = subelliptic_chain_certify(setup.space, setup.field,
                                                Ball::open(setup.space.locate(c), R), params,
                                                level_count(opt));
    const bool ok = cert.pass && cert.bound_holds && cert.family_check.pass();

    Report report(opt, out);
    if (wants_csv(opt)) {
        std::vector<std::vector<std::string>> table;
        for (const auto& r : cert.rows)
            table.push_back({std::to_string(r.j), format_real(r.volume), format_real(r.m),
                             format_real(r.c)});
        report.csv({"j", "volume", "m", "c"}, table);
    } else {
        json doc;
        doc["command"] = "subelliptic";
        doc["space"] = planar_json(setup, opt);
        doc["center"] = {c[0], c[1]};
        doc["radius"] = R;
        doc["p"] = opt.p;
        doc["sigma"] = opt.sigma;
        doc["s"] = opt.s;
        doc["N"] = opt.bign;
        doc["nu"] = opt.nu;
        doc["beta"] = cert.beta;
        doc["J"] = cert.J;
        json rows = json::array();
        for (const auto& r : cert.rows)
            rows.push_back({{"j", r.j}, {"volume", r.volume}, {"m", r.m}, {"c", r.c}});
        doc["rows"] = rows;
        doc["volume_ball"] = cert.volume_ball;
        doc["volume_star"] = cert.volume_star;
        doc["c_hat"] = cert.c_hat;
        doc["argmax_j"] = cert.argmax_j;
        doc["argmax_residual"] = cert.argmax_residual;
        doc["log_lhs"] = cert.log_lhs;
        doc["log_rhs"] = cert.log_rhs;
        doc["certificate_pass"] = cert.pass;
        doc["log2_limit_bound"] = cert.limit_bound.log2;
        doc["actual_ratio"] = cert.actual_ratio;
        doc["bound_holds"] = cert.bound_holds;
        doc["fitted_K"] = cert.fit.K;
        doc["log2_fitted_bound"] = cert.fitted_constant.log2;
        doc["family_failures"] = cert.family_check.failures;
        doc["pass"] = ok;
        report.json_doc(doc);
    }
    return ok ? kExitOk : kExitCertificate;
}

// ---- config files ----------------------------------------------------------

std::string config_value(const json& v, const std::string& key) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number() || v.is_boolean()) return v.dump();
    throw InvalidInput("config key '" + key + "' must be a string, number or boolean");
}

/// Appends `--key value` for every config entry not given on the command line.
std::vector<std::string> merge_config(std::vector<std::string> args) {
    std::string path;
    std::set<std::string> explicit_keys;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i].rfind("--", 0) != 0) continue;
        auto key = args[i].substr(2);
        if (const auto eq = key.find('='); eq != std::string::npos) {
            if (key.substr(0, eq) == "config") path = key.substr(eq + 1);
            key = key.substr(0, eq);
        } else if (key == "config" && i + 1 < args.size()) {
            path = args[i + 1];
        }
        explicit_keys.insert(key);
    }
    if (path.empty()) return args;
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot read config file '" + path + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw InvalidInput("malformed config file '" + path + "': " + e.what());
    }
    if (!doc.is_object()) throw InvalidInput("config file must hold a JSON object");
    for (const auto& [key, value] : doc.items()) {
        if (key == "config") throw InvalidInput("config files cannot nest --config");
        if (explicit_keys.count(key)) continue;
        args.push_back("--" + key);
        args.push_back(config_value(value, key));
    }
    return args;
}

void add_common(CLI::App* sub, Options& o) {
    sub->add_option("--space", o.space, "lebesgue | power:alpha=A | exp:rate=L | gauss:s=S | table:path=F[,edges=E]");
    sub->add_option("--dim", o.dim, "dimension of gridded spaces (1 or 2)");
    sub->add_option("--center", o.center, "ball centre: x, x,y or a point id");
    sub->add_option("--radius", o.radius, "ball radius R");
    sub->add_option("--p", o.p, "exponent p >= 1");
    sub->add_option("--sigma", o.sigma, "gain sigma > 1");
    sub->add_option("--s", o.s, "integrability exponent of Q-gradients");
    sub->add_option("--nu", o.nu, "core fraction of accumulating families");
    sub->add_option("--bign", o.bign, "growth base N > 1");
    sub->add_option("--K", o.K, "gradient constant K >= 0");
    sub->add_option("--grid", o.grid, "points per axis: n or nx,ny");
    sub->add_option("--domain", o.domain, "lo:hi per axis, comma separated");
    sub->add_option("--seed", o.seed, "random seed");
    sub->add_option("--out", o.out, "write the report to this file");
    sub->add_option("--format", o.format, "json or csv");
    sub->add_option("--J", o.J, "number of iteration levels (default: resolvable maximum)");
    sub->add_option("--config", o.config, "JSON file with flag values");
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
    Options opt;
    CLI::App app{"Numerical checks of the Sobolev-to-doubling iteration", "sobdub"};
    app.require_subcommand(1);

    auto* constants = app.add_subcommand("constants", "explicit constants K1, C_D, beta");
    auto* doubling = app.add_subcommand("doubling", "doubling ratio of one ball");
    auto* chain = app.add_subcommand("chain", "chain constant and finite-J certificate");
    auto* estimate = app.add_subcommand("estimate", "lower bound on the Sobolev constant of a ball");
    auto* sweep = app.add_subcommand("sweep", "chain reports over centres x radii");
    auto* cutoff = app.add_subcommand("cutoff-check", "verify the cutoff family of a ball");
    auto* grushin = app.add_subcommand("grushin", "subunit ball volumes and doubling ratios");
    auto* subelliptic = app.add_subcommand("subelliptic", "beta-iteration certificate on a subunit space");
    for (auto* sub : app.get_subcommands({})) add_common(sub, opt);
    constants->add_option("--cs", opt.cs, "Sobolev constant for C_D");
    estimate->add_option("--restarts", opt.restarts, "random bump seeds");
    estimate->add_option("--iters", opt.iters, "ascent steps per seed");
    estimate->add_option("--phi", opt.phi, "write the best test function as CSV");
    sweep->add_option("--centers", opt.centers, "centres separated by ';'");
    sweep->add_option("--radii", opt.radii, "lo:hi:n or a comma list");
    grushin->add_option("--radii", opt.radii, "comma list or lo:hi:n");
    for (auto* sub : {grushin, subelliptic}) {
        sub->add_option("--field", opt.field, "identity or grushin");
        sub->add_option("--stencil", opt.stencil, "neighbour offsets up to this size");
    }

    try {
        auto args = merge_config(raw_args);
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitInvalid;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitInvalid;
    }

    std::set<std::string> given;
    for (auto* sub : app.get_subcommands())
        for (const auto* o : sub->get_options())
            if (o->count() > 0) given.insert(o->get_name().substr(2));

    try {
        if (constants->parsed()) return cmd_constants(opt, given, out);
        if (doubling->parsed()) return cmd_doubling(opt, out);
        if (chain->parsed()) return cmd_chain(opt, out);
        if (estimate->parsed()) return cmd_estimate(opt, out);
        if (sweep->parsed()) return cmd_sweep(opt, out);
        if (cutoff->parsed()) return cmd_cutoff_check(opt, out);
        if (grushin->parsed()) return cmd_grushin(opt, out);
        if (subelliptic->parsed()) return cmd_subelliptic(opt, given, out);
    } catch (const CertificateFailure& e) {
        err << "certificate failure: " << e.what() << '\n';
        return kExitCertificate;
    } catch (const InvalidInput& e) {
        err << "error: " << e.what() << '\n';
        return kExitInvalid;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitInvalid;
    }
    return kExitInvalid;
}

}  // namespace sobdub::cli
