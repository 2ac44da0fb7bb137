// cellgraph: batch front end and HTTP server.
//
//   cellgraph ingest  --cdr calls.csv [--bts cells.csv] [--annotations people.csv]
//   cellgraph analyze --cdr calls.csv [--weighted] [--out metrics.csv]
//   cellgraph layout  --cdr calls.csv --mode foci --theta 0.5 --max-ticks 2000 --out frames.jsonl
//   cellgraph geo     --cdr calls.csv --bts cells.csv --start ... --end ... [--out geo.json]
//   cellgraph serve   [--host 127.0.0.1] [--port 8080]
//
// Global flags: --seed N, --config file.json. CELLGRAPH_DATA_DIR selects the
// dataset store; --dataset ID reads a stored dataset instead of files.

#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "cellgraph/analytics.hpp"
#include "cellgraph/geomap.hpp"
#include "cellgraph/json_io.hpp"
#include "cellgraph/layout.hpp"
#include "cellgraph/service.hpp"

using namespace cellgraph;

namespace {

struct InputOptions {
    std::string dataset;
    std::string cdr;
    std::string bts;
    std::string annotations;
    bool strict = false;

    void attach(CLI::App* cmd) {
        cmd->add_option("--dataset", dataset, "Stored dataset id");
        cmd->add_option("--cdr", cdr, "Call detail record CSV")->check(CLI::ExistingFile);
        cmd->add_option("--bts", bts, "Cell registry CSV")->check(CLI::ExistingFile);
        cmd->add_option("--annotations", annotations, "Subscriber annotations CSV")->check(CLI::ExistingFile);
        cmd->add_flag("--strict", strict, "Fail on the first malformed CDR line");
    }

    std::shared_ptr<const Dataset> load(DatasetStore& store) const {
        if (!dataset.empty()) return store.get(dataset);
        if (cdr.empty()) throw InvalidArgument("either --dataset or --cdr is required");
        auto opt = [](const std::string& p) {
            return p.empty() ? std::nullopt : std::optional<std::filesystem::path>(p);
        };
        return make_dataset(DatasetSources::from_files(cdr, opt(bts), opt(annotations),
                                                       strict ? ParsePolicy::strict : ParsePolicy::lenient));
    }
};

class Output {
public:
    explicit Output(const std::string& path) {
        if (!path.empty() && path != "-") {
            file_.open(path, std::ios::trunc);
            if (!file_) throw Error("cannot write " + path);
        }
    }
    std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

private:
    std::ofstream file_;
};

void report_diagnostics(const Dataset& ds) {
    for (const auto& d : ds.diagnostics) std::cerr << "cdr line " << d.line << ": " << d.reason << '\n';
}

ApiServer* running_server = nullptr;

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Call-record network analysis and layout engine"};
    app.require_subcommand(1);

    std::uint64_t seed = 0;
    bool seed_given = false;
    std::string config_path;
    app.add_option_function<std::uint64_t>("--seed", [&](std::uint64_t s) { seed = s; seed_given = true; },
                                           "Random seed")
        ->trigger_on_parse();
    app.add_option("--config", config_path, "JSON configuration (canvas, params, publish_every, ...)")
        ->check(CLI::ExistingFile);

    auto* ingest = app.add_subcommand("ingest", "Parse inputs and store them in the dataset store");
    InputOptions ingest_in;
    ingest->add_option("--cdr", ingest_in.cdr, "Call detail record CSV")->required()->check(CLI::ExistingFile);
    ingest->add_option("--bts", ingest_in.bts, "Cell registry CSV")->check(CLI::ExistingFile);
    ingest->add_option("--annotations", ingest_in.annotations, "Subscriber annotations CSV")->check(CLI::ExistingFile);
    ingest->add_flag("--strict", ingest_in.strict, "Fail on the first malformed CDR line");

    auto* analyze = app.add_subcommand("analyze", "Centrality and community metrics as CSV");
    InputOptions analyze_in;
    analyze_in.attach(analyze);
    bool weighted = false;
    std::string analyze_out;
    analyze->add_flag("--weighted", weighted, "Use 1/weight edge lengths for betweenness");
    analyze->add_option("--out", analyze_out, "Output CSV (default stdout)");

    auto* layout = app.add_subcommand("layout", "Run the force-directed layout and write frames as JSON lines");
    InputOptions layout_in;
    layout_in.attach(layout);
    std::string mode_name = "single";
    std::optional<double> theta;
    std::uint64_t max_ticks = 2000;
    std::string layout_out;
    layout->add_option("--mode", mode_name, "single | foci | semantic")
        ->check(CLI::IsMember({"single", "foci", "semantic"}));
    layout->add_option("--theta", theta, "Barnes-Hut opening threshold");
    layout->add_option("--max-ticks", max_ticks, "Tick limit")->check(CLI::PositiveNumber);
    layout->add_option("--out", layout_out, "Output JSONL (default stdout)");

    auto* geo = app.add_subcommand("geo", "Geo-mapped zones and displacements for a time window");
    InputOptions geo_in;
    geo_in.attach(geo);
    std::string start_text, end_text, geo_out;
    bool midpoint = false;
    geo->add_option("--start", start_text, "Window start (UTC ISO-8601)");
    geo->add_option("--end", end_text, "Window end, exclusive");
    geo->add_flag("--sector-midpoint", midpoint, "Place zones at the sector midpoint instead of the cell site");
    geo->add_option("--out", geo_out, "Output JSON (default stdout)");

    auto* serve = app.add_subcommand("serve", "Serve the HTTP API");
    std::string host = "127.0.0.1";
    int port = 8080;
    serve->add_option("--host", host, "Bind address");
    serve->add_option("--port", port, "Port")->check(CLI::Range(0, 65535));

    CLI11_PARSE(app, argc, argv);

    try {
        SessionConfig config;
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            config = session_config_from_json(json::parse(in));
        }
        if (seed_given) config.seed = seed;
        DatasetStore store(DatasetStore::directory_from_env());

        if (*ingest) {
            auto opt = [](const std::string& p) {
                return p.empty() ? std::nullopt : std::optional<std::filesystem::path>(p);
            };
            const auto ds = store.add(DatasetSources::from_files(
                ingest_in.cdr, opt(ingest_in.bts), opt(ingest_in.annotations),
                ingest_in.strict ? ParsePolicy::strict : ParsePolicy::lenient));
            report_diagnostics(*ds);
            std::cout << ds->summary().dump(2) << '\n';
            if (!DatasetStore::directory_from_env()) {
                std::cerr << "note: CELLGRAPH_DATA_DIR is not set; the dataset was not persisted\n";
            }
        } else if (*analyze) {
            const auto ds = analyze_in.load(store);
            report_diagnostics(*ds);
            const auto& net = ds->network;
            const auto report = net.node_count() ? centrality(net, weighted) : CentralityReport{};
            const auto communities = louvain(net, config.seed);
            Output out(analyze_out);
            write_metrics_csv(out.stream(), net, report, communities);
            std::cerr << "communities: " << communities.community_count << ", modularity: "
                      << format_double(communities.modularity) << '\n';
        } else if (*layout) {
            const auto ds = layout_in.load(store);
            report_diagnostics(*ds);
            auto params = config.params;
            if (theta) params.theta = *theta;
            params.validate();
            const auto& net = ds->network;
            const auto graph = LayoutGraph::from_network(net);
            const auto communities = louvain(net, config.seed);
            const auto plan = make_gravity_plan(parse_layout_mode(mode_name), net, config.canvas, communities);
            auto frame = init_layout(graph, config.seed, config.canvas);
            frame.mode = plan.mode;
            frame.centers = plan.centers;
            frame.groups = std::make_shared<const std::vector<std::size_t>>(plan.groups);

            Output out(layout_out);
            out.stream() << frame_to_json(frame).dump() << '\n';
            const double threshold = convergence_threshold(config.canvas);
            bool converged = false;
            std::uint64_t ticks = 0;
            while (ticks < max_ticks && !converged) {
                frame = step(frame, graph, params, plan);
                ++ticks;
                converged = frame.max_displacement < threshold;
                if (converged || ticks == max_ticks || frame.tick % config.publish_every == 0) {
                    FrameAnnotations extra;
                    extra.converged = converged;
                    out.stream() << frame_to_json(frame, extra).dump() << '\n';
                }
            }
            std::cerr << (converged ? "converged" : "not converged") << " after " << ticks << " ticks\n";
        } else if (*geo) {
            const auto ds = geo_in.load(store);
            report_diagnostics(*ds);
            if (!ds->registry) throw InvalidArgument("no registry: geo needs --bts or a dataset with one");
            std::optional<TimeWindow> window = ds->span();
            if (!start_text.empty() || !end_text.empty()) {
                window = make_window(Timestamp::parse_iso8601(start_text), Timestamp::parse_iso8601(end_text));
            }
            if (!window) window = TimeWindow{Timestamp{0}, Timestamp{1}};
            GeoOptions opts;
            if (midpoint) opts.placement = ZonePlacement::sector_midpoint;
            Output out(geo_out);
            out.stream() << to_json(build_geo_frame(ds->records, *ds->registry, *window, opts)).dump(2) << '\n';
        } else if (*serve) {
            ServerOptions options;
            options.session_defaults = config;
            ApiServer server(store, options);
            running_server = &server;
            std::signal(SIGINT, [](int) {
                if (running_server) running_server->stop();
            });
            std::cerr << "listening on " << host << ':' << port << '\n';
            if (!server.listen(host, port)) {
                std::cerr << "cannot listen on " << host << ':' << port << '\n';
                return 1;
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
