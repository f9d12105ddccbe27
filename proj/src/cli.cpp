#include "rankforge/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>

#include "rankforge/analytic_rank.hpp"
#include "rankforge/convolutions.hpp"
#include "rankforge/errors.hpp"
#include "rankforge/forms_json.hpp"
#include "rankforge/parallel.hpp"
#include "rankforge/partition_rank.hpp"
#include "rankforge/polarization.hpp"
#include "rankforge/rng.hpp"
#include "rankforge/varieties.hpp"

namespace rankforge::cli {

using nlohmann::json;

namespace {

json big_json(const BigInt& v) {
    if (v >= std::numeric_limits<std::int64_t>::min() && v <= std::numeric_limits<std::int64_t>::max()) {
        return v.convert_to<std::int64_t>();
    }
    return v.str();
}

json complex_json(std::complex<double> z) { return {{"re", z.real()}, {"im", z.imag()}}; }

// 12 significant digits.
double round12(double v) {
    if (!std::isfinite(v)) return v;
    if (v == 0) return 0.0;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return std::strtod(buf, nullptr);
}

json real_json(double v) { return std::isfinite(v) ? json(round12(v)) : json(nullptr); }

json histogram_json(const ValueHistogram& h) { return {{"p", h.p}, {"counts", h.counts}, {"total", h.total}}; }

MultilinearMap require_multilinear(const MultiaffineMap& f) {
    if (!f.is_multilinear()) throw PreconditionError("command needs a multilinear map (only the top part may be nonzero)");
    return f.top_part();
}

MultilinearMap require_form(const MultiaffineMap& f) {
    if (!f.is_form()) throw PreconditionError("command needs a scalar form (target_dim 1)");
    return require_multilinear(f);
}

json decomposition_json(const PartitionDecomposition& d) {
    json summands = json::array();
    for (const auto& s : d.summands) {
        summands.push_back({{"subset", subset_to_json(s.subset)}, {"beta", map_to_json(s.beta)}, {"gamma", map_to_json(s.gamma)}});
    }
    return summands;
}

std::vector<std::uint32_t> parse_list(const std::string& text, const char* what) {
    std::vector<std::uint32_t> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        unsigned long v = 0;
        try {
            v = std::stoul(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (item.empty() || used != item.size() || v > std::numeric_limits<std::uint32_t>::max()) {
            throw InputError(std::string("malformed ") + what + " list \"" + text + "\"");
        }
        out.push_back(static_cast<std::uint32_t>(v));
    }
    if (out.empty()) throw InputError(std::string("empty ") + what + " list");
    return out;
}

struct Outcome {
    json result;
    bool ok = true;
    std::string summary;
};

struct Common {
    std::string out_path;
    std::string format = "json";
    bool summary = false;
};

struct Inputs {
    std::string map_path;
    std::string poly_path;
    std::uint64_t seed = 0;
    std::size_t rmax = 4;
    std::uint64_t budget_nodes = 1'000'000;
    std::size_t s = 1;
    std::string layer;
    std::string chain;
    bool nonzero = false;
    bool table = false;
    bool check = false;
    std::uint64_t count = 1000;
    std::optional<std::uint32_t> degree;
    bool substitute = false;
    std::uint32_t p = 2;
    std::string dims = "2,2,2";
    bool exhaustive = false;
    bool timing = false;
};

struct Loaded {
    json doc;
    MultiaffineMap map;
};

Loaded load(const std::string& path) {
    if (path.empty()) throw InputError("--map is required");
    Loaded l;
    l.doc = read_json_file(path);
    l.map = map_from_json(l.doc);
    return l;
}

FVec layer_of(const MultiaffineMap& f, const std::string& text) {
    if (text.empty()) return FVec(f.target_dim(), 0);
    const auto values = parse_list(text, "layer");
    if (values.size() != f.target_dim()) throw InputError("layer needs target_dim entries");
    FVec out;
    for (auto v : values) out.push_back(v % f.p());
    return out;
}

Outcome cmd_arank(const Inputs& in, json& config) {
    const Loaded l = load(in.map_path);
    config["map"] = l.doc;
    const BiasReport r = bias_report(l.map);
    Outcome o;
    o.result = {{"histogram", histogram_json(r.histogram)}, {"bias", complex_json(r.bias)}};
    if (r.exact_bias) o.result["bias_exact"] = rational_json(*r.exact_bias);
    if (r.arank) {
        o.result["arank"] = real_json(*r.arank);
        o.result["arank_infinite"] = std::isinf(*r.arank);
    }
    if (r.vanishing_count) o.result["vanishing_count"] = *r.vanishing_count;
    o.summary = "bias " + (r.exact_bias ? to_string(*r.exact_bias) : std::to_string(std::abs(r.bias)));
    return o;
}

Outcome cmd_prank(const Inputs& in, json& config) {
    const Loaded l = load(in.map_path);
    config["map"] = l.doc;
    config["rmax"] = in.rmax;
    config["budget_nodes"] = in.budget_nodes;
    const MultilinearMap alpha = require_form(l.map);
    const RankReport r = prank_exact(alpha, PrankOptions{in.rmax, in.budget_nodes});
    Outcome o;
    o.result = {{"lo", r.lo},
                {"hi", r.hi},
                {"exact", r.exact()},
                {"lovett_lower", r.lovett_lower},
                {"flattening_bound", r.flattening_bound},
                {"nodes", r.nodes},
                {"witness", decomposition_json(r.witness)}};
    o.ok = r.lovett_lower <= r.hi && r.witness.reconstruct() == alpha;
    o.summary = r.exact() ? "prank " + std::to_string(r.lo)
                          : "prank in [" + std::to_string(r.lo) + ", " + std::to_string(r.hi) + "]";
    return o;
}

Outcome cmd_boxnorm(const Inputs& in, json& config) {
    const Loaded l = load(in.map_path);
    config["map"] = l.doc;
    if (!l.map.is_form()) throw PreconditionError("box norm needs a scalar map");
    const double norm = box_norm(character_table(l.map));
    const double power = std::pow(norm, static_cast<double>(std::uint64_t{1} << l.map.arity()));
    Outcome o;
    o.result = {{"box_norm", norm}, {"box_norm_power", power}};
    o.summary = "box norm " + std::to_string(norm);
    if (l.map.is_multilinear()) {
        const Rational b = exact_bias(l.map.top_part());
        const bool identity = std::abs(power - to_double(b)) <= kCharacterTolerance;
        o.result["bias_exact"] = rational_json(b);
        o.result["identity_holds"] = identity;
        o.ok = identity;
    }
    return o;
}

Outcome cmd_variety(const std::string& mode, const Inputs& in, json& config) {
    const Loaded l = load(in.map_path);
    config["map"] = l.doc;
    Outcome o;
    if (mode == "bohr") {
        config["s"] = in.s;
        config["seed"] = in.seed;
        const BohrReport r = bohr_external(l.map, in.s, in.seed);
        const Rational exceptional(BigInt(r.exceptional), BigInt(l.map.shape().domain_size()));
        o.result = {{"phi", map_to_json(r.phi)},
                    {"a_zero", r.a_zero},
                    {"phi_zero", r.phi_zero},
                    {"exceptional", r.exceptional},
                    {"exceptional_density", rational_json(exceptional)},
                    {"contained", r.contained},
                    {"linearity_preserved", r.linearity_preserved}};
        o.ok = r.contained && r.linearity_preserved;
        o.summary = "exceptional density " + to_string(exceptional);
        return o;
    }
    const FVec layer = layer_of(l.map, in.layer);
    config["layer"] = layer;
    const Variety v(l.map, layer);
    if (mode == "density") {
        const DensityReport r = density_bound_check(v);
        o.result = {{"codim", v.codim()},
                    {"size", r.size},
                    {"density", rational_json(r.density)},
                    {"bound", rational_json(r.bound)},
                    {"holds", r.holds}};
        o.ok = r.holds;
        o.summary = "density " + to_string(r.density);
        return o;
    }
    config["nonzero"] = in.nonzero;
    const PointSet set = in.nonzero ? zero_set(l.map).complement() : v.points();
    const ConnectivityReport r = connectivity(set);
    o.result = {{"size", r.size},
                {"connected", r.connected},
                {"components", r.components},
                {"diameter_lower", r.diameter_lower ? json(*r.diameter_lower) : json(nullptr)},
                {"diameter_upper", r.diameter_upper ? json(*r.diameter_upper) : json(nullptr)},
                {"diameter_exact", r.diameter_exact},
                {"bfs_runs", r.bfs_runs}};
    o.summary = std::string(r.connected ? "connected" : "disconnected") + ", " + std::to_string(r.components) + " components";
    return o;
}

Outcome cmd_conv(const Inputs& in, json& config) {
    const Loaded l = load(in.map_path);
    config["map"] = l.doc;
    const std::size_t k = l.map.arity();
    std::vector<std::size_t> dirs;
    if (in.chain.empty()) {
        for (std::size_t i = 0; i < k; ++i) dirs.push_back(i);
    } else {
        for (auto d : parse_list(in.chain, "chain")) {
            if (d == 0 || d > k) throw InputError("chain directions must lie in [1, k]");
            dirs.push_back(d - 1);
        }
    }
    std::vector<std::size_t> one_based;
    for (auto d : dirs) one_based.push_back(d + 1);
    config["chain"] = one_based;
    const FVec layer = layer_of(l.map, in.layer);
    config["layer"] = layer;
    const PointSet z = Variety(l.map, layer).points();
    const RationalTable t = conv_chain(z, dirs);
    std::map<std::int64_t, std::uint64_t> hist;
    for (auto v : t.num) ++hist[v];
    json h = json::array();
    for (const auto& [num, count] : hist) {
        h.push_back({{"value", rational_json(Rational(BigInt(num), BigInt(t.den)))}, {"count", count}});
    }
    Outcome o;
    o.result = {{"density", rational_json(Rational(BigInt(z.size()), BigInt(z.shape().domain_size())))},
                {"mean", rational_json(t.mean())},
                {"histogram", h}};
    if (in.table) o.result["table"] = {{"den", t.den}, {"num", t.num}};
    o.summary = "mean " + to_string(t.mean());
    return o;
}

Outcome cmd_arrange(const Inputs& in, json& config) {
    if (!in.check) throw InputError("arrange needs --check");
    config["count"] = in.count;
    config["seed"] = in.seed;
    const ArrangementSuiteReport r = arrangement_suite(in.count, in.seed);
    Outcome o;
    o.result = {{"checks", r.checks},
                {"identity_mismatches", r.identity_mismatches},
                {"position_mismatches", r.position_mismatches},
                {"propagation_violations", r.propagation_violations},
                {"propagation_nontrivial", r.propagation_nontrivial},
                {"holds", r.holds}};
    o.ok = r.holds;
    o.summary = std::to_string(r.checks) + " checks, " + (r.holds ? "no mismatches" : "MISMATCHES");
    return o;
}

Outcome cmd_polarize(const Inputs& in, json& config) {
    if (in.poly_path.empty()) throw InputError("--poly is required");
    const json doc = read_json_file(in.poly_path);
    config["poly"] = doc;
    if (in.degree) config["degree"] = *in.degree;
    const PolyDense f = poly_from_json(doc);
    const MultilinearMap alpha = polarize(f, in.degree);
    const std::uint32_t d = static_cast<std::uint32_t>(alpha.arity());
    const bool symmetric = is_symmetric(alpha);
    const bool round_trip = diagonal(alpha) == f.homogeneous_part(d);
    Outcome o;
    o.result = {{"degree", d}, {"form", map_to_json(alpha)}, {"symmetric", symmetric}, {"round_trip", round_trip}};
    o.ok = symmetric && round_trip;
    if (d >= 2) {
        const CsAmplificationReport a = cs_amplification_check(f, d);
        o.result["amplification"] = {{"abs_bias", a.abs_bias},
                                     {"lhs", a.lhs},
                                     {"signed_sum_mean", complex_json(a.signed_sum_mean)},
                                     {"alpha_bias", rational_json(a.alpha_bias)},
                                     {"alpha_bound", a.alpha_bound},
                                     {"first_holds", a.first_holds},
                                     {"second_holds", a.second_holds}};
        o.ok = o.ok && a.holds;
    }
    if (in.substitute) {
        config["rmax"] = in.rmax;
        config["budget_nodes"] = in.budget_nodes;
        const RankReport r = prank_exact(alpha, PrankOptions{in.rmax, in.budget_nodes});
        json sub = {{"prank_lo", r.lo}, {"prank_hi", r.hi}, {"exact", r.exact()}};
        const SubstitutionReport s = substitute_decomposition(f, r.witness, d);
        json factors = json::array();
        for (const auto& [beta, gamma] : s.factors) factors.push_back({{"beta", poly_to_json(beta)}, {"gamma", poly_to_json(gamma)}});
        sub["factors"] = factors;
        sub["remainder"] = poly_to_json(s.remainder);
        sub["verified"] = s.verified;
        o.result["substitution"] = sub;
        o.ok = o.ok && s.verified;
    }
    o.summary = "degree " + std::to_string(d) + (o.ok ? ", verified" : ", FAILED");
    return o;
}

std::string fmt_millis(double ms) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", ms);
    return buf;
}

struct ScatterRecord {
    std::uint64_t index = 0;
    std::uint64_t seed = 0;
    Rational bias;
    double arank = 0;
    RankReport rank;
    double millis = 0;
};

const char* const kScatterColumns =
    "index,seed,bias_num,bias_den,arank,lovett_lower,prank_lo,prank_hi,exact,witness_size,nodes";

Outcome cmd_scatter(const Inputs& in, json& config, const Common& common, std::string& csv) {
    const auto dims = parse_list(in.dims, "dims");
    const Shape shape(in.p, dims);
    config["p"] = in.p;
    config["dims"] = dims;
    config["seed"] = in.seed;
    config["exhaustive"] = in.exhaustive;
    config["timing"] = in.timing;
    config["rmax"] = in.rmax;
    config["budget_nodes"] = in.budget_nodes;
    std::uint64_t coeffs = 1;
    for (auto d : dims) coeffs = checked_mul(coeffs, d);
    std::uint64_t count = in.count;
    if (in.exhaustive) {
        count = checked_pow(in.p, coeffs);
        require_within(count, std::uint64_t{1} << 20, "exhaustive ensemble");
    }
    config["count"] = count;

    std::vector<ScatterRecord> records(count);
    parallel_for(count, [&](std::size_t i) {
        ScatterRecord& rec = records[i];
        rec.index = i;
        MultilinearMap alpha;
        if (in.exhaustive) {
            rec.seed = i;
            std::vector<Residue> c(coeffs);
            std::uint64_t code = i;
            for (auto& v : c) {
                v = static_cast<Residue>(code % in.p);
                code /= in.p;
            }
            alpha = MultilinearMap(shape, 1, std::move(c));
        } else {
            rec.seed = derive_seed(in.seed, i);
            alpha = random_multilinear(shape, 1, rec.seed);
        }
        const auto start = std::chrono::steady_clock::now();
        rec.bias = exact_bias(alpha);
        rec.arank = arank(alpha);
        rec.rank = prank_exact(alpha, PrankOptions{in.rmax, in.budget_nodes});
        rec.millis = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    });

    Outcome o;
    json rows = json::array();
    std::ostringstream table;
    table << "# rankforge " << kVersion << " scatter " << config.dump() << "\n" << kScatterColumns << (in.timing ? ",millis" : "") << "\n";
    for (const auto& rec : records) {
        const bool lovett_ok = rec.rank.lovett_lower <= rec.rank.hi;
        o.ok = o.ok && lovett_ok;
        char arank_text[32];
        std::snprintf(arank_text, sizeof arank_text, "%.12g", rec.arank == 0 ? 0.0 : rec.arank);
        table << rec.index << ',' << rec.seed << ',' << numerator_of(rec.bias).str() << ','
              << denominator_of(rec.bias).str() << ',' << arank_text << ',' << rec.rank.lovett_lower << ','
              << rec.rank.lo << ',' << rec.rank.hi << ',' << (rec.rank.exact() ? 1 : 0) << ','
              << rec.rank.witness.size() << ',' << rec.rank.nodes;
        if (in.timing) table << ',' << fmt_millis(rec.millis);
        table << "\n";
        rows.push_back({{"index", rec.index},
                        {"seed", rec.seed},
                        {"bias_exact", rational_json(rec.bias)},
                        {"arank", real_json(rec.arank)},
                        {"lovett_lower", rec.rank.lovett_lower},
                        {"prank_lo", rec.rank.lo},
                        {"prank_hi", rec.rank.hi},
                        {"exact", rec.rank.exact()},
                        {"witness_size", rec.rank.witness.size()},
                        {"nodes", rec.rank.nodes}});
        if (in.timing) rows.back()["millis"] = rec.millis;
    }
    if (common.format == "csv") csv = table.str();
    o.result = {{"records", rows}};
    o.summary = std::to_string(count) + " records" + (o.ok ? "" : ", LOVETT VIOLATION");
    return o;
}

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--out", c.out_path, "Write output to this file instead of standard output");
    sub->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
    sub->add_flag("--summary", c.summary, "Print a one-line summary to standard error");
}

} // namespace

json rational_json(const Rational& q) { return {{"num", big_json(numerator_of(q))}, {"den", big_json(denominator_of(q))}}; }

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app("Exact analytic and partition rank experiments over prime fields", "rankforge");
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);
    Common common;
    Inputs in;
    std::string variety_mode;

    auto map_opt = [&](CLI::App* sub) { sub->add_option("--map", in.map_path, "Map JSON file")->required(); };
    auto seed_opt = [&](CLI::App* sub) { sub->add_option("--seed", in.seed, "Root seed"); };
    auto prank_opts = [&](CLI::App* sub) {
        sub->add_option("--rmax", in.rmax, "Largest partition rank searched");
        sub->add_option("--budget-nodes", in.budget_nodes, "Search budget in membership tests");
    };

    auto* arank_cmd = app.add_subcommand("arank", "Bias and analytic rank of a form");
    map_opt(arank_cmd);
    auto* prank_cmd = app.add_subcommand("prank", "Exact partition rank with witness");
    map_opt(prank_cmd);
    prank_opts(prank_cmd);
    auto* box_cmd = app.add_subcommand("boxnorm", "Box norm of chi composed with a form");
    map_opt(box_cmd);
    auto* variety_cmd = app.add_subcommand("variety", "Variety density, connectivity and Bohr approximation");
    variety_cmd->add_option("mode", variety_mode, "density, connect or bohr")
        ->required()
        ->check(CLI::IsMember({"density", "connect", "bohr"}));
    map_opt(variety_cmd);
    seed_opt(variety_cmd);
    variety_cmd->add_option("--s", in.s, "Number of random directions for bohr");
    variety_cmd->add_option("--layer", in.layer, "Layer value, comma separated (default 0)");
    variety_cmd->add_flag("--nonzero", in.nonzero, "connect: use {A != 0} instead of the variety");
    auto* conv_cmd = app.add_subcommand("conv", "Convolution chain of a variety indicator");
    map_opt(conv_cmd);
    conv_cmd->add_option("--chain", in.chain, "Directions, 1-based, comma separated (default 1,...,k)");
    conv_cmd->add_option("--layer", in.layer, "Layer value, comma separated (default 0)");
    conv_cmd->add_flag("--table", in.table, "Include the full table");
    auto* arrange_cmd = app.add_subcommand("arrange", "Arrangement count identities");
    arrange_cmd->add_flag("--check", in.check, "Run the randomized identity suite");
    arrange_cmd->add_option("--count", in.count, "Instances per identity");
    seed_opt(arrange_cmd);
    auto* pol_cmd = app.add_subcommand("polarize", "Polarization of a polynomial");
    pol_cmd->add_option("--poly", in.poly_path, "Polynomial JSON file")->required();
    pol_cmd->add_option("--degree", in.degree, "Degree to polarize at (default: degree of f)");
    pol_cmd->add_flag("--substitute", in.substitute, "Search a partition rank witness and substitute it");
    prank_opts(pol_cmd);
    auto* scatter_cmd = app.add_subcommand("scatter", "Analytic rank versus partition rank over an ensemble");
    scatter_cmd->add_option("--p", in.p, "Field characteristic");
    scatter_cmd->add_option("--dims", in.dims, "Dimensions, comma separated");
    scatter_cmd->add_option("--count", in.count, "Ensemble size");
    scatter_cmd->add_flag("--exhaustive", in.exhaustive, "Every form on the shape instead of random ones");
    scatter_cmd->add_flag("--timing", in.timing, "Append wall-clock milliseconds per record (not reproducible)");
    seed_opt(scatter_cmd);
    prank_opts(scatter_cmd);
    for (auto* sub : app.get_subcommands([](CLI::App*) { return true; })) add_common(sub, common);
    in.count = 1000;

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }
    if (scatter_cmd->parsed() && scatter_cmd->count("--count") == 0) in.count = 100;
    if (scatter_cmd->parsed() && scatter_cmd->count("--format") == 0) common.format = "csv";

    const std::string command = app.get_subcommands().front()->get_name();
    try {
        if (common.format == "csv" && command != "scatter") throw InputError("--format csv is only available for scatter");
        json config;
        std::string csv;
        Outcome o;
        if (command == "arank") o = cmd_arank(in, config);
        else if (command == "prank") o = cmd_prank(in, config);
        else if (command == "boxnorm") o = cmd_boxnorm(in, config);
        else if (command == "variety") o = cmd_variety(variety_mode, in, config);
        else if (command == "conv") o = cmd_conv(in, config);
        else if (command == "arrange") o = cmd_arrange(in, config);
        else if (command == "polarize") o = cmd_polarize(in, config);
        else o = cmd_scatter(in, config, common, csv);

        std::string text;
        if (!csv.empty()) {
            text = csv;
        } else {
            std::string name = command;
            if (command == "variety") name += " " + variety_mode;
            const json doc = {{"provenance", {{"tool", "rankforge"}, {"version", kVersion}, {"command", name}, {"config", config}}},
                              {"result", o.result},
                              {"ok", o.ok}};
            text = doc.dump(2) + "\n";
        }
        if (common.out_path.empty()) {
            out << text;
        } else {
            std::ofstream file(common.out_path, std::ios::binary);
            if (!file || !(file << text)) throw InputError("cannot write " + common.out_path);
        }
        if (common.summary) err << command << ": " << o.summary << "\n";
        if (!o.ok) {
            err << "error: verification failed\n";
            return 1;
        }
        return 0;
    } catch (const ResourceError& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    } catch (const VerificationError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::bad_alloc&) {
        err << "error: out of memory\n";
        return 3;
    }
}

} // namespace rankforge::cli
