// Command-line front door for the geoflow library: validate graphs, inspect
// their factorized form, execute them against fixtures, compose workflows
// from templates, and emit contrastive training pairs.
//
// Exit codes: 0 ok, 1 domain failure (violations, bad composition, ...),
// 2 parse/config failure, 3 runtime failure during execution.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "geoflow/engine.hpp"
#include "geoflow/factorize.hpp"
#include "geoflow/fixture_provider.hpp"
#include "geoflow/fsio.hpp"
#include "geoflow/graph_io.hpp"
#include "geoflow/local_context.hpp"
#include "geoflow/negatives.hpp"
#include "geoflow/registry.hpp"
#include "geoflow/templates.hpp"
#include "geoflow/transform_table.hpp"
#include "geoflow/validate.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kOk = 0;
constexpr int kDomainFailure = 1;
constexpr int kParseFailure = 2;
constexpr int kRuntimeFailure = 3;

struct CliConfig {
    std::string fixtures;
    std::string registry;
    std::string transform_table;
    std::string templates;
    std::string examples;
    std::string cache;
    bool timestamps = false;
};

// GEOFLOW_HOME (or ./data) supplies defaults for anything not given on the
// command line, so `geoflow exec graph.json` works from a checkout.
void resolve_defaults(CliConfig& cfg) {
    fs::path home = "data";
    if (const char* env = std::getenv("GEOFLOW_HOME"); env && *env) home = env;
    if (cfg.registry.empty()) cfg.registry = (home / "registry.json").string();
    if (cfg.transform_table.empty())
        cfg.transform_table = (home / "transform_table.json").string();
    if (cfg.fixtures.empty()) cfg.fixtures = (home / "fixtures").string();
    if (cfg.templates.empty()) cfg.templates = (home / "templates").string();
    if (cfg.examples.empty()) cfg.examples = (home / "examples.json").string();
}

geoflow::GeoFlowGraph load_graph(const std::string& path) {
    return geoflow::parse_graph(geoflow::read_text_file(path));
}

geoflow::OperatorRegistry load_registry(const CliConfig& cfg) {
    return geoflow::parse_registry(geoflow::read_text_file(cfg.registry));
}

geoflow::TransformTable load_table(const CliConfig& cfg) {
    return geoflow::parse_transform_table(geoflow::read_text_file(cfg.transform_table));
}

// --templates accepts either one library file or a directory of them;
// directory entries load in filename order so the merged library is stable.
geoflow::TemplateLibrary load_templates(const CliConfig& cfg,
                                        const geoflow::OperatorRegistry& registry,
                                        const geoflow::TransformTable& table) {
    fs::path p = cfg.templates;
    if (fs::is_directory(p)) {
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(p))
            if (entry.is_regular_file() && entry.path().extension() == ".json")
                files.push_back(entry.path());
        std::sort(files.begin(), files.end());
        geoflow::TemplateLibrary lib;
        for (const auto& f : files) {
            geoflow::TemplateLibrary part = geoflow::load_template_library(
                geoflow::read_text_file(f.string()), registry, table);
            for (const auto& t : part.all()) lib.add(t);
        }
        return lib;
    }
    return geoflow::load_template_library(geoflow::read_text_file(p.string()), registry,
                                          table);
}

// Order-independent-enough fingerprint of the fixture directory: file names
// and contents, walked in sorted order.
std::string fixtures_fingerprint(const std::string& dir) {
    fs::path p = dir;
    if (!fs::is_directory(p)) return "";
    std::vector<fs::path> files;
    for (const auto& entry : fs::recursive_directory_iterator(p))
        if (entry.is_regular_file()) files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    std::string blob;
    for (const auto& f : files) {
        blob += f.filename().string();
        blob += '\0';
        blob += geoflow::read_text_file(f.string());
        blob += '\0';
    }
    return geoflow::detail::fnv1a64_hex(blob);
}

void print_json(const json& doc) { std::cout << doc.dump(2) << "\n"; }

int cmd_validate(const CliConfig& cfg, const std::string& graph_path) {
    geoflow::GeoFlowGraph g = load_graph(graph_path);
    geoflow::ValidationReport report =
        geoflow::validate(g, load_registry(cfg), load_table(cfg));
    std::cout << geoflow::serialize_report(report);
    return report.well_formed ? kOk : kDomainFailure;
}

int cmd_factorize(const CliConfig& cfg, const std::string& graph_path) {
    geoflow::GeoFlowGraph g = load_graph(graph_path);
    try {
        geoflow::FactorGraph fg =
            geoflow::factorize(g, load_registry(cfg), load_table(cfg));
        std::cout << geoflow::serialize_factor_graph(fg);
    } catch (const geoflow::FactorizeError& e) {
        print_json(json{{"error", e.what()}});
        return kDomainFailure;
    }
    return kOk;
}

int cmd_exec(const CliConfig& cfg, const std::string& graph_path,
             const std::string& trace_path) {
    geoflow::GeoFlowGraph g = load_graph(graph_path);
    geoflow::OperatorRegistry registry = load_registry(cfg);
    geoflow::TransformTable table = load_table(cfg);

    geoflow::ValidationReport report = geoflow::validate(g, registry, table);
    if (!report.well_formed) {
        std::cout << geoflow::serialize_report(report);
        return kDomainFailure;
    }

    geoflow::FactorGraph fg = geoflow::factorize(g, registry, table);
    geoflow::FixtureProvider provider{fs::path(cfg.fixtures)};
    geoflow::LocalContext context =
        cfg.cache.empty() ? geoflow::LocalContext{}
                          : geoflow::LocalContext{fs::path(cfg.cache)};

    geoflow::ExecOptions options;
    options.timestamps = cfg.timestamps;
    options.fixtures_fingerprint = fixtures_fingerprint(cfg.fixtures);

    auto initial = geoflow::ground_sources(fg, &provider);
    geoflow::ExecutionResult result =
        geoflow::execute(fg, initial, registry, &provider, &context,
                         geoflow::default_operator_impls(), options);

    if (!trace_path.empty())
        geoflow::write_text_file(trace_path, geoflow::serialize_trace(result));

    if (!result.ok()) {
        print_json(json{{"failure",
                         {{"op_id", result.failure->op_id},
                          {"message", result.failure->message}}},
                        {"trace_path", trace_path}});
        return kRuntimeFailure;
    }
    geoflow::GroundedAnswer answer = geoflow::render_answer(g, result);
    answer.trace_path = trace_path;
    print_json(geoflow::answer_to_json(answer));
    return kOk;
}

int cmd_compose(const CliConfig& cfg, const std::string& question,
                const std::string& plan_path, const std::string& out_path) {
    geoflow::OperatorRegistry registry = load_registry(cfg);
    geoflow::TransformTable table = load_table(cfg);
    geoflow::TemplateLibrary lib = load_templates(cfg, registry, table);

    json suggestions = json::array();
    for (const auto& ranked : geoflow::suggest_templates(lib, question))
        suggestions.push_back(
            json{{"template", ranked.tmpl->name}, {"score", ranked.score}});

    // retrieved worked examples ride along as guidance; they are never
    // bound into the plan automatically
    json similar = json::array();
    if (!question.empty() && fs::exists(cfg.examples)) {
        geoflow::ExampleStore store = geoflow::load_example_store(
            geoflow::read_text_file(cfg.examples), registry, table);
        for (const auto& r : geoflow::retrieve_examples(store, question, 3))
            similar.push_back(json{{"question", r.example->question},
                                   {"score", r.score}});
    }

    geoflow::CompositionSpec spec =
        geoflow::parse_composition(geoflow::read_text_file(plan_path));
    if (spec.question.empty()) spec.question = question;

    geoflow::GeoFlowGraph composed;
    try {
        composed = geoflow::compose(lib, spec, registry, table);
    } catch (const geoflow::TemplateError& e) {
        print_json(json{{"suggestions", suggestions},
                        {"examples", similar},
                        {"error", e.what()}});
        return kDomainFailure;
    }
    std::string serialized = geoflow::serialize_graph(composed);
    if (!out_path.empty()) geoflow::write_text_file(out_path, serialized);
    print_json(json{{"suggestions", suggestions},
                    {"examples", similar},
                    {"graph", json::parse(serialized)},
                    {"out", out_path}});
    return kOk;
}

int cmd_pairs(const CliConfig& cfg, const std::string& graph_path,
              const std::string& targets_csv, unsigned seed,
              const std::string& out_dir) {
    geoflow::GeoFlowGraph g = load_graph(graph_path);
    geoflow::OperatorRegistry registry = load_registry(cfg);
    geoflow::TransformTable table = load_table(cfg);

    geoflow::ValidationReport report = geoflow::validate(g, registry, table);
    if (!report.well_formed) {
        std::cout << geoflow::serialize_report(report);
        return kDomainFailure;
    }

    std::vector<geoflow::ConstraintId> targets;
    if (targets_csv.empty()) {
        for (auto c : geoflow::all_constraints) targets.push_back(c);
    } else {
        std::string cur;
        std::istringstream in(targets_csv);
        while (std::getline(in, cur, ',')) {
            auto c = geoflow::constraint_from_string(cur);
            if (!c) {
                print_json(json{{"error", "unknown constraint '" + cur + "'"}});
                return kParseFailure;
            }
            targets.push_back(*c);
        }
    }

    fs::create_directories(out_dir);
    json written = json::array();
    json skipped = json::array();
    for (auto target : targets) {
        try {
            geoflow::PreferencePair pair =
                geoflow::make_preference_pair(g, target, seed, registry, table);
            json bundle{
                {"violated", std::string(geoflow::to_string(pair.violated))},
                {"positive", json::parse(geoflow::serialize_graph(pair.positive))},
                {"negative", json::parse(geoflow::serialize_graph(pair.negative))}};
            std::string label(geoflow::to_string(target));
            for (auto& ch : label)
                if (ch == ' ') ch = '_';
            fs::path out = fs::path(out_dir) / ("pair_" + label + ".json");
            geoflow::write_text_file(out.string(), bundle.dump(2) + "\n");
            written.push_back(out.string());
        } catch (const geoflow::NotPerturbable& e) {
            skipped.push_back(json{{"target", std::string(geoflow::to_string(target))},
                                   {"reason", e.what()}});
        }
    }
    print_json(json{{"written", written}, {"skipped", skipped}});
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"geoflow: typed geospatial workflow graphs"};
    app.require_subcommand(1);

    CliConfig cfg;
    app.add_option("--fixtures", cfg.fixtures, "fixture data directory");
    app.add_option("--registry", cfg.registry, "operator registry manifest");
    app.add_option("--transform-table", cfg.transform_table,
                   "concept transform table");
    app.add_option("--templates", cfg.templates, "template library file or directory");
    app.add_option("--examples", cfg.examples, "example store file");
    app.add_option("--cache", cfg.cache, "persistent local-context cache file");
    app.add_flag("--timestamps,!--no-timestamps", cfg.timestamps,
                 "record real step durations in traces (off by default, so "
                 "traces are byte-stable)");

    std::string graph_path, trace_path, question, plan_path, out_path, targets_csv;
    unsigned seed = 0;
    std::string pairs_out = "pairs";

    CLI::App* validate = app.add_subcommand("validate", "check the five constraints");
    validate->add_option("graph", graph_path, "graph JSON file")->required();

    CLI::App* exec = app.add_subcommand("exec", "execute a graph against fixtures");
    exec->add_option("graph", graph_path, "graph JSON file")->required();
    exec->add_option("--trace", trace_path, "write the execution trace here");

    CLI::App* factorize =
        app.add_subcommand("factorize", "print the operator-concept factor graph");
    factorize->add_option("graph", graph_path, "graph JSON file")->required();

    CLI::App* compose =
        app.add_subcommand("compose", "build a graph from templates per a plan file");
    compose->add_option("--question", question, "natural-language question");
    compose->add_option("--plan", plan_path, "composition plan JSON")->required();
    compose->add_option("--out", out_path, "write the composed graph here");

    CLI::App* pairs =
        app.add_subcommand("pairs", "emit contrastive (positive, negative) graph pairs");
    pairs->add_option("graph", graph_path, "well-formed graph JSON file")->required();
    pairs->add_option("--targets", targets_csv, "comma list: g1,g2,... (default all)");
    pairs->add_option("--seed", seed, "perturbation seed");
    pairs->add_option("--out", pairs_out, "output directory");

    CLI11_PARSE(app, argc, argv);
    resolve_defaults(cfg);

    try {
        if (app.got_subcommand(validate)) return cmd_validate(cfg, graph_path);
        if (app.got_subcommand(exec)) return cmd_exec(cfg, graph_path, trace_path);
        if (app.got_subcommand(factorize)) return cmd_factorize(cfg, graph_path);
        if (app.got_subcommand(compose))
            return cmd_compose(cfg, question, plan_path, out_path);
        if (app.got_subcommand(pairs))
            return cmd_pairs(cfg, graph_path, targets_csv, seed, pairs_out);
    } catch (const geoflow::ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kParseFailure;
    } catch (const geoflow::ManifestError& e) {
        std::cerr << "registry error: " << e.what() << "\n";
        return kParseFailure;
    } catch (const geoflow::TransformTableError& e) {
        std::cerr << "transform table error: " << e.what() << "\n";
        return kParseFailure;
    } catch (const geoflow::FixtureError& e) {
        std::cerr << "fixture error: " << e.what() << "\n";
        return kParseFailure;
    } catch (const geoflow::TemplateError& e) {
        // malformed library/plan files are input errors; the rest are
        // domain failures reported by the compose command itself
        std::cerr << "template error: " << e.what() << "\n";
        return e.kind() == geoflow::TemplateError::Kind::MalformedLibrary
                   ? kParseFailure
                   : kDomainFailure;
    } catch (const geoflow::FileError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kParseFailure;
    } catch (const geoflow::PreconditionViolated& e) {
        std::cerr << "precondition: " << e.what() << "\n";
        return kDomainFailure;
    } catch (const geoflow::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kRuntimeFailure;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return kRuntimeFailure;
    }
    return kOk;
}
