#pragma once

// Shared plumbing for the test binaries: bundled-data access, a synthetic
// operator universe for graph-generation properties, and the independent
// oracles (brute-force tours, minute scans, law-of-cosines distances) the
// suites check the real implementations against. Oracles here are written
// from the contract, not from the implementation headers, so a bug cannot
// hide in both places at once.

#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "geoflow/factorize.hpp"
#include "geoflow/fsio.hpp"
#include "geoflow/geo.hpp"
#include "geoflow/graph.hpp"
#include "geoflow/graph_io.hpp"
#include "geoflow/hours.hpp"
#include "geoflow/registry.hpp"
#include "geoflow/transform_table.hpp"
#include "geoflow/tsp.hpp"

namespace testsupport {

// --------------------------------------------------------------- bundled data

inline std::filesystem::path data_dir() { return GEOFLOW_DATA_DIR; }

inline std::string cli_path() { return GEOFLOW_CLI_PATH; }

inline geoflow::GeoFlowGraph load_graph(const std::string& name) {
    return geoflow::parse_graph(
        geoflow::read_text_file(data_dir() / "graphs" / (name + ".json")));
}

inline const geoflow::OperatorRegistry& bundled_registry() {
    static geoflow::OperatorRegistry r = geoflow::parse_registry(
        geoflow::read_text_file(data_dir() / "registry.json"));
    return r;
}

inline const geoflow::TransformTable& bundled_table() {
    static geoflow::TransformTable t = geoflow::parse_transform_table(
        geoflow::read_text_file(data_dir() / "transform_table.json"));
    return t;
}

/// Names of every graph file shipped under data/graphs, sorted.
inline std::vector<std::string> corpus_names() {
    std::vector<std::string> names;
    for (const auto& entry : std::filesystem::directory_iterator(data_dir() / "graphs"))
        if (entry.path().extension() == ".json")
            names.push_back(entry.path().stem().string());
    std::sort(names.begin(), names.end());
    return names;
}

// ------------------------------------------------- synthetic graph universe
//
// A small closed world of operators and admissible concept pairs, rich
// enough to exercise every factorization mechanism: single-input chains,
// same-concept merges (blend), mixed-concept merges (join), an ambiguous
// pair that forces explicit edge bindings (Location->Object), required
// parameters with and without units, and nodes with more than one producer.

inline const geoflow::OperatorRegistry& synth_registry() {
    using geoflow::CoreConcept;
    static geoflow::OperatorRegistry reg = [] {
        geoflow::OperatorRegistry r;
        r.set_version("synthetic-test-universe");
        auto add = [&r](std::string name, std::vector<CoreConcept> in,
                        std::vector<CoreConcept> out,
                        std::vector<geoflow::RequiredParam> params = {}) {
            geoflow::OperatorSpec spec;
            spec.name = std::move(name);
            spec.signature.inputs = std::move(in);
            spec.signature.outputs = std::move(out);
            spec.required_params = std::move(params);
            r.add(std::move(spec));
        };
        add("lift", {CoreConcept::Location}, {CoreConcept::Object});
        add("adopt", {CoreConcept::Location}, {CoreConcept::Object});
        add("gauge", {CoreConcept::Object}, {CoreConcept::Amount}, {{"window", "m"}});
        add("tally", {CoreConcept::Event}, {CoreConcept::Amount});
        add("blend", {CoreConcept::Object, CoreConcept::Object}, {CoreConcept::Field});
        add("join", {CoreConcept::Location, CoreConcept::Object},
            {CoreConcept::Network});
        add("scale", {CoreConcept::Amount}, {CoreConcept::Proportion},
            {{"basis", ""}});
        add("drift", {CoreConcept::Field}, {CoreConcept::Field});
        add("spot", {CoreConcept::Location}, {CoreConcept::Location});
        add("mark", {CoreConcept::Object}, {CoreConcept::Event});
        add("fuse", {CoreConcept::Network}, {CoreConcept::Amount});
        return r;
    }();
    return reg;
}

inline const geoflow::TransformTable& synth_table() {
    using geoflow::CoreConcept;
    static geoflow::TransformTable table = [] {
        geoflow::TransformTable t;
        t.add(CoreConcept::Location, CoreConcept::Object, {"lift", "adopt"});
        t.add(CoreConcept::Object, CoreConcept::Amount, {"gauge"});
        t.add(CoreConcept::Event, CoreConcept::Amount, {"tally"});
        t.add(CoreConcept::Object, CoreConcept::Field, {"blend"});
        t.add(CoreConcept::Location, CoreConcept::Network, {"join"});
        t.add(CoreConcept::Object, CoreConcept::Network, {"join"});
        t.add(CoreConcept::Amount, CoreConcept::Proportion, {"scale"});
        t.add(CoreConcept::Field, CoreConcept::Field, {"drift"});
        t.add(CoreConcept::Location, CoreConcept::Location, {"spot"});
        t.add(CoreConcept::Object, CoreConcept::Event, {"mark"});
        t.add(CoreConcept::Network, CoreConcept::Amount, {"fuse"});
        return t;
    }();
    return table;
}

namespace detail {

struct GrowOp {
    std::string name;
    std::vector<geoflow::CoreConcept> inputs;
    geoflow::CoreConcept output;
    const char* required_param;  // nullptr when the op needs none
    const char* param_unit;
    bool ambiguous_pair;  // table lists >1 op for its pair: edge must bind
};

inline const std::vector<GrowOp>& grow_ops() {
    using geoflow::CoreConcept;
    static const std::vector<GrowOp> ops = {
        {"lift", {CoreConcept::Location}, CoreConcept::Object, nullptr, nullptr, true},
        {"adopt", {CoreConcept::Location}, CoreConcept::Object, nullptr, nullptr, true},
        {"gauge", {CoreConcept::Object}, CoreConcept::Amount, "window", "m", false},
        {"tally", {CoreConcept::Event}, CoreConcept::Amount, nullptr, nullptr, false},
        {"blend",
         {CoreConcept::Object, CoreConcept::Object},
         CoreConcept::Field,
         nullptr,
         nullptr,
         false},
        {"join",
         {CoreConcept::Location, CoreConcept::Object},
         CoreConcept::Network,
         nullptr,
         nullptr,
         false},
        {"scale", {CoreConcept::Amount}, CoreConcept::Proportion, "basis", "", false},
        {"drift", {CoreConcept::Field}, CoreConcept::Field, nullptr, nullptr, false},
        {"spot", {CoreConcept::Location}, CoreConcept::Location, nullptr, nullptr, false},
        {"mark", {CoreConcept::Object}, CoreConcept::Event, nullptr, nullptr, false},
        {"fuse", {CoreConcept::Network}, CoreConcept::Amount, nullptr, nullptr, false},
    };
    return ops;
}

}  // namespace detail

/// Build a random graph that is well-formed by construction against the
/// synthetic universe: growth only ever adds edges into brand-new nodes (so
/// no cycle can form), every edge follows an admissible concept pair with a
/// role ordering that holds, required parameters are bound on the consuming
/// node, and after growth the procedural sinks are relabeled Measure so the
/// connectivity constraint is met.
inline geoflow::GeoFlowGraph random_valid_graph(std::uint32_t seed) {
    using geoflow::ConceptNode;
    using geoflow::CoreConcept;
    using geoflow::FunctionalRole;
    using geoflow::GeoFlowGraph;
    using geoflow::ParamValue;
    using geoflow::TransformEdge;

    std::mt19937 rng(seed);
    auto pick = [&rng](std::size_t n) {
        return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
    };
    auto chance = [&rng](double p) {
        return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p;
    };

    GeoFlowGraph g;
    int next_id = 0;
    auto fresh = [&next_id] { return "n" + std::to_string(next_id++); };

    // Contextual seed nodes. At least a Location so location-consuming ops
    // are always available; sometimes a second source of another concept.
    std::vector<CoreConcept> source_concepts = {CoreConcept::Location};
    if (chance(0.4))
        source_concepts.push_back(chance(0.5) ? CoreConcept::Location
                                              : CoreConcept::Object);
    for (CoreConcept c : source_concepts) {
        ConceptNode n;
        n.id = fresh();
        n.concept_ = c;
        n.role = chance(0.85) ? FunctionalRole::Extent : FunctionalRole::TExtent;
        if (chance(0.3)) n.phrase = "q" + n.id;
        g.nodes.push_back(std::move(n));
    }

    const std::array<FunctionalRole, 4> procedural = {
        FunctionalRole::SubCond, FunctionalRole::Cond, FunctionalRole::Support,
        FunctionalRole::Measure};

    auto role_rank = [](FunctionalRole r) {
        return geoflow::role_kind(r) == geoflow::RoleKind::Contextual
                   ? -1
                   : geoflow::procedural_rank(r);
    };

    const int grow_steps = 1 + int(pick(10));
    for (int step = 0; step < grow_steps; ++step) {
        // Occasionally attach a second producer to an existing procedural
        // node instead of growing a new one; the edge must come from a
        // childless-safe source node so no cycle is possible, and its op
        // must differ from the node's current producers so no accidental
        // merge changes the op's arity.
        if (chance(0.2)) {
            std::vector<std::size_t> sources;
            for (std::size_t i = 0; i < g.nodes.size(); ++i)
                if (geoflow::role_kind(g.nodes[i].role) == geoflow::RoleKind::Contextual)
                    sources.push_back(i);
            bool attached = false;
            for (std::size_t attempt = 0; attempt < 6 && !attached; ++attempt) {
                const ConceptNode& src = g.nodes[sources[pick(sources.size())]];
                std::vector<const ConceptNode*> targets;
                for (const auto& n : g.nodes)
                    if (geoflow::role_kind(n.role) == geoflow::RoleKind::Procedural &&
                        !g.has_edge(src.id, n.id))
                        targets.push_back(&n);
                if (targets.empty()) break;
                const ConceptNode* dst = targets[pick(targets.size())];
                std::set<std::string> producer_ops;
                for (const auto& e : g.edges)
                    if (e.to == dst->id)
                        producer_ops.insert(geoflow::resolve_operator(
                            g, e, synth_table()));
                for (const auto& op : detail::grow_ops()) {
                    if (op.inputs.size() != 1 || op.inputs[0] != src.concept_ ||
                        op.output != dst->concept_ || producer_ops.count(op.name))
                        continue;
                    // The target node's params feed every producer, so an
                    // op demanding a param the node lacks can't attach here.
                    if (op.required_param) {
                        auto it = dst->params.find(op.required_param);
                        if (it == dst->params.end() ||
                            it->second.unit != (op.param_unit ? op.param_unit : ""))
                            continue;
                    }
                    TransformEdge e;
                    e.from = src.id;
                    e.to = dst->id;
                    e.op = op.name;  // always explicit: keeps resolution exact
                    g.edges.push_back(std::move(e));
                    attached = true;
                    break;
                }
            }
            if (attached) continue;
            // fall through to ordinary growth when no second producer fit
        }

        // Ordinary growth: pick an op whose input concepts are available on
        // distinct existing nodes, add a new node for its output.
        for (std::size_t attempt = 0; attempt < 20; ++attempt) {
            const auto& op = detail::grow_ops()[pick(detail::grow_ops().size())];
            std::vector<const ConceptNode*> parents;
            std::set<std::string> used;
            bool ok = true;
            for (CoreConcept need : op.inputs) {
                std::vector<const ConceptNode*> candidates;
                for (const auto& n : g.nodes)
                    if (n.concept_ == need && !used.count(n.id))
                        candidates.push_back(&n);
                if (candidates.empty()) {
                    ok = false;
                    break;
                }
                const ConceptNode* chosen = candidates[pick(candidates.size())];
                parents.push_back(chosen);
                used.insert(chosen->id);
            }
            if (!ok) continue;

            int floor_rank = 0;
            std::vector<std::string> parent_ids;  // push_back below invalidates
            for (const ConceptNode* p : parents) {
                floor_rank = std::max(floor_rank, role_rank(p->role));
                parent_ids.push_back(p->id);
            }
            std::vector<FunctionalRole> eligible;
            for (FunctionalRole r : procedural)
                if (geoflow::procedural_rank(r) >= floor_rank) eligible.push_back(r);

            ConceptNode child;
            child.id = fresh();
            child.concept_ = op.output;
            child.role = eligible[pick(eligible.size())];
            if (chance(0.25)) child.phrase = "q" + child.id;
            if (op.required_param)
                child.params[op.required_param] =
                    op.required_param == std::string("basis")
                        ? ParamValue::str("per-unit")
                        : ParamValue::num(100.0 + double(pick(900)), op.param_unit);
            if (chance(0.15))
                child.params["hint"] = ParamValue::str("extra");
            const std::string child_id = child.id;
            g.nodes.push_back(std::move(child));

            for (const std::string& pid : parent_ids) {
                TransformEdge e;
                e.from = pid;
                e.to = child_id;
                // Unique pairs sometimes rely on table resolution; the
                // ambiguous Location->Object pair always binds explicitly.
                if (op.ambiguous_pair || chance(0.5)) e.op = op.name;
                g.edges.push_back(std::move(e));
            }
            break;
        }
    }

    // Childless contextual nodes would strand the connectivity constraint;
    // drop any the growth loop never reached for.
    for (auto it = g.nodes.begin(); it != g.nodes.end();) {
        bool contextual =
            geoflow::role_kind(it->role) == geoflow::RoleKind::Contextual;
        bool has_child = false;
        for (const auto& e : g.edges)
            if (e.from == it->id) {
                has_child = true;
                break;
            }
        if (contextual && !has_child)
            it = g.nodes.erase(it);
        else
            ++it;
    }

    // Procedural sinks become Measure nodes: every path now ends at one.
    for (auto& n : g.nodes) {
        if (geoflow::role_kind(n.role) != geoflow::RoleKind::Procedural) continue;
        bool has_child = false;
        for (const auto& e : g.edges)
            if (e.from == n.id) {
                has_child = true;
                break;
            }
        if (!has_child) n.role = geoflow::FunctionalRole::Measure;
    }

    geoflow::canonicalize(g);
    return g;
}

// ------------------------------------------------------------- tour oracles

struct TourWalk {
    double travel = 0.0;  // summed matrix seconds, the solver's objective
    double finish = 0.0;  // absolute: start_s plus elapsed at last service end
};

/// Walk a tour under the clock rules the solver promises: windows and the
/// budget live on the clock relative to the start, arrival waits for a
/// window to open and fails if it already closed, and service time counts
/// against the budget.
inline std::optional<TourWalk> simulate_tour(const geoflow::TspProblem& p,
                                             const std::vector<int>& order) {
    if (order.empty() || order[0] != 0) return std::nullopt;
    TourWalk w;
    double clock = 0.0;
    for (std::size_t i = 0; i < order.size(); ++i) {
        double arrival = clock;
        if (i > 0) {
            double leg = p.matrix[size_t(order[i - 1])][size_t(order[i])];
            w.travel += leg;
            arrival += leg;
        }
        const auto& window = p.windows[size_t(order[i])];
        if (window) {
            if (arrival > window->second) return std::nullopt;
            arrival = std::max(arrival, window->first);
        }
        clock = arrival + p.service_s[size_t(order[i])];
        if (p.budget_s && clock > *p.budget_s) return std::nullopt;
    }
    w.finish = p.start_s + clock;
    return w;
}

struct TourOracle {
    bool feasible = false;
    double best_travel = 0.0;
    double best_finish = 0.0;
    std::vector<int> best_order;
};

/// Exhaustive reference: every permutation of the non-start stops, in
/// lexicographic order, keeping the first strict improvement in travel
/// cost — which leaves the lexicographically smallest optimum, the same
/// tie rule the solver states.
inline TourOracle brute_force_tour(const geoflow::TspProblem& p) {
    TourOracle out;
    std::vector<int> rest;
    for (int i = 1; i < int(p.size()); ++i) rest.push_back(i);
    std::sort(rest.begin(), rest.end());
    do {
        std::vector<int> order;
        order.push_back(0);
        order.insert(order.end(), rest.begin(), rest.end());
        auto walk = simulate_tour(p, order);
        if (!walk) continue;
        if (!out.feasible || walk->travel < out.best_travel) {
            out.feasible = true;
            out.best_travel = walk->travel;
            out.best_finish = walk->finish;
            out.best_order = order;
        }
    } while (std::next_permutation(rest.begin(), rest.end()));
    return out;
}

inline geoflow::TspProblem random_tour_problem(std::mt19937& rng, int n_min, int n_max,
                                               bool with_windows) {
    std::uniform_int_distribution<int> size_dist(n_min, n_max);
    std::uniform_real_distribution<double> travel(60.0, 1800.0);
    std::uniform_real_distribution<double> service(0.0, 600.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    geoflow::TspProblem p;
    const int n = size_dist(rng);
    p.matrix.assign(size_t(n), std::vector<double>(size_t(n), 0.0));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j) p.matrix[size_t(i)][size_t(j)] = std::floor(travel(rng));
    for (int i = 0; i < n; ++i) p.service_s.push_back(std::floor(service(rng)));
    p.windows.assign(size_t(n), std::nullopt);
    p.start_s = std::floor(unit(rng) * 3600.0);
    if (with_windows) {
        for (int i = 1; i < n; ++i) {
            if (unit(rng) < 0.4) continue;  // some stops stay unconstrained
            double open = p.start_s + std::floor(unit(rng) * 4000.0);
            double close = open + 300.0 + std::floor(unit(rng) * 3000.0);
            p.windows[size_t(i)] = std::make_pair(open, close);
        }
        if (unit(rng) < 0.5)
            p.budget_s = 2000.0 + std::floor(unit(rng) * 8000.0);
    }
    return p;
}

// ------------------------------------------------------------ hours oracle

/// Independent openness table: paint every minute covered by each period,
/// walking forward from the opening minute around the circular week.
inline std::vector<bool> scan_week(const geoflow::WeeklyHours& h) {
    std::vector<bool> open(size_t(geoflow::kMinutesPerWeek), h.always_open);
    if (h.always_open) return open;
    for (const auto& period : h.periods) {
        int start = period.open.week_minute();
        int len = period.close.week_minute() - start;
        if (len <= 0) len += geoflow::kMinutesPerWeek;
        for (int k = 0; k < len; ++k)
            open[size_t((start + k) % geoflow::kMinutesPerWeek)] = true;
    }
    return open;
}

inline geoflow::WeeklyHours random_hours(std::mt19937& rng, bool force_cross_midnight) {
    std::uniform_int_distribution<int> day(0, 6);
    std::uniform_int_distribution<int> count(1, 5);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    geoflow::WeeklyHours h;
    if (!force_cross_midnight && unit(rng) < 0.1) {
        h.always_open = true;
        return h;
    }
    const int periods = count(rng);
    for (int i = 0; i < periods; ++i) {
        int open_minute;
        int duration;
        if (force_cross_midnight && i == 0) {
            // Late opening, long enough to spill past midnight.
            open_minute = 1260 + int(unit(rng) * 179.0);  // 21:00..23:59
            duration = 200 + int(unit(rng) * 400.0);
        } else {
            open_minute = int(unit(rng) * 1440.0);
            duration = 30 + int(unit(rng) * 870.0);
        }
        geoflow::DayMinute open(day(rng), open_minute);
        geoflow::DayMinute close =
            geoflow::DayMinute::from_week_minute(open.week_minute() + duration);
        h.periods.push_back({open, close});
    }
    return h;
}

// --------------------------------------------------------------- geo oracle

/// Spherical law of cosines; fine above a kilometre of separation, which is
/// where the comparisons run.
inline double law_of_cosines_m(const geoflow::GeoPoint& a, const geoflow::GeoPoint& b) {
    const double p1 = geoflow::deg2rad(a.lat);
    const double p2 = geoflow::deg2rad(b.lat);
    const double dl = geoflow::deg2rad(b.lon - a.lon);
    double c = std::sin(p1) * std::sin(p2) + std::cos(p1) * std::cos(p2) * std::cos(dl);
    c = std::min(1.0, std::max(-1.0, c));
    return geoflow::kEarthRadiusM * std::acos(c);
}

// ---------------------------------------------------------------- processes

struct RunResult {
    int exit_code = -1;
    std::string out;
};

/// Run the bundled command-line tool with the given arguments, capturing
/// stdout. Stderr is left alone unless the caller redirects it in `args`.
inline RunResult run_cli(const std::string& args) {
    RunResult r;
    std::string cmd = std::string(cli_path()) + " " + args;
    FILE* pipe = ::popen(cmd.c_str(), "r");
    if (!pipe) return r;
    char buf[4096];
    std::size_t got;
    while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, got);
    int status = ::pclose(pipe);
    if (WIFEXITED(status)) r.exit_code = WEXITSTATUS(status);
    return r;
}

/// Shorthand for the global data-file flags every subcommand needs.
inline std::string cli_flags() {
    const std::string d = data_dir().string();
    return "--fixtures " + d + "/fixtures --registry " + d +
           "/registry.json --transform-table " + d + "/transform_table.json";
}

}  // namespace testsupport
