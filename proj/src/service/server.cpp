#include <sstream>

#include "httplib.h"

#include "cellgraph/geomap.hpp"
#include "cellgraph/service.hpp"

namespace cellgraph {

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message, json extra = json::object()) {
    extra["error"] = message;
    send_json(res, status, extra);
}

json parse_body(const httplib::Request& req) {
    try {
        return json::parse(req.body);
    } catch (const json::exception& e) {
        throw InvalidArgument(std::string("request body is not valid JSON: ") + e.what());
    }
}

// Maps library exceptions onto HTTP statuses.
template <typename Handler>
httplib::Server::Handler guarded(Handler handler) {
    return [handler](const httplib::Request& req, httplib::Response& res) {
        try {
            handler(req, res);
        } catch (const ParseError& e) {
            send_error(res, 400, e.what(), {{"line", e.line()}, {"reason", e.reason()}});
        } catch (const NotFound& e) {
            send_error(res, 404, e.what());
        } catch (const InvalidArgument& e) {
            send_error(res, 400, e.what());
        } catch (const json::exception& e) {
            send_error(res, 400, std::string("malformed payload: ") + e.what());
        } catch (const std::exception& e) {
            send_error(res, 500, e.what());
        }
    };
}

ParsePolicy policy_from(const json& body) {
    const auto p = body.value("policy", std::string("lenient"));
    if (p == "lenient") return ParsePolicy::lenient;
    if (p == "strict") return ParsePolicy::strict;
    throw InvalidArgument("policy must be 'strict' or 'lenient'");
}

DatasetSources sources_from(const json& body) {
    if (!body.is_object()) throw InvalidArgument("dataset request must be a JSON object");
    if (body.contains("cdr_path")) {
        auto opt_path = [&](const char* key) -> std::optional<std::filesystem::path> {
            if (!body.contains(key) || body[key].is_null()) return std::nullopt;
            return std::filesystem::path(body[key].get<std::string>());
        };
        return DatasetSources::from_files(body["cdr_path"].get<std::string>(), opt_path("bts_path"),
                                          opt_path("annotations_path"), policy_from(body));
    }
    if (!body.contains("cdr") || !body["cdr"].is_string()) {
        throw InvalidArgument("dataset request needs 'cdr' text or 'cdr_path'");
    }
    DatasetSources s;
    s.cdr = body["cdr"].get<std::string>();
    if (body.contains("bts") && !body["bts"].is_null()) s.bts = body["bts"].get<std::string>();
    if (body.contains("annotations") && !body["annotations"].is_null()) {
        s.annotations = body["annotations"].get<std::string>();
    }
    s.policy = policy_from(body);
    return s;
}

}  // namespace

struct ApiServer::Impl {
    Impl(DatasetStore& store, ServerOptions options)
        : store(store), options(options), sessions(store, options.session_defaults) {
        routes();
    }

    void routes();

    DatasetStore& store;
    ServerOptions options;
    SessionManager sessions;
    httplib::Server http;
    std::thread thread;
};

void ApiServer::Impl::routes() {
    http.Post("/datasets", guarded([this](const httplib::Request& req, httplib::Response& res) {
        const auto ds = store.add(sources_from(parse_body(req)));
        send_json(res, 201, ds->summary());
    }));

    http.Get("/datasets", guarded([this](const httplib::Request&, httplib::Response& res) {
        send_json(res, 200, json{{"datasets", store.ids()}});
    }));

    http.Get(R"(/datasets/([0-9a-f]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
        send_json(res, 200, store.get(req.matches[1])->summary());
    }));

    http.Get(R"(/datasets/([0-9a-f]+)/network)", guarded([this](const httplib::Request& req, httplib::Response& res) {
        send_json(res, 200, to_json(store.get(req.matches[1])->network));
    }));

    http.Get(R"(/datasets/([0-9a-f]+)/metrics)", guarded([this](const httplib::Request& req, httplib::Response& res) {
        const auto ds = store.get(req.matches[1]);
        const bool weighted = req.get_param_value("weighted") == "true";
        const std::uint64_t seed = req.has_param("seed") ? std::stoull(req.get_param_value("seed")) : 0;
        const auto& net = ds->network;
        const auto report = net.node_count() ? centrality(net, weighted) : CentralityReport{};
        const auto communities = louvain(net, seed);
        if (req.get_param_value("format") == "csv") {
            std::ostringstream out;
            write_metrics_csv(out, net, report, communities);
            res.set_content(out.str(), "text/csv");
            return;
        }
        json nodes = json::array();
        for (std::size_t i = 0; i < net.node_count(); ++i) {
            nodes.push_back({{"node_id", net.nodes()[i].id},
                             {"degree", report.degree[i]},
                             {"weighted_degree", report.weighted_degree[i]},
                             {"betweenness", report.node_betweenness[i]},
                             {"community", communities.membership[i]}});
        }
        json edges = json::array();
        for (std::size_t e = 0; e < net.edge_count(); ++e) {
            edges.push_back({{"source", net.nodes()[net.edges()[e].source].id},
                             {"target", net.nodes()[net.edges()[e].target].id},
                             {"betweenness", report.edge_betweenness[e]}});
        }
        send_json(res, 200,
                  json{{"weighted", weighted},
                       {"community_count", communities.community_count},
                       {"modularity", communities.modularity},
                       {"nodes", std::move(nodes)},
                       {"edges", std::move(edges)}});
    }));

    http.Get(R"(/datasets/([0-9a-f]+)/geo)", guarded([this](const httplib::Request& req, httplib::Response& res) {
        const auto ds = store.get(req.matches[1]);
        if (!ds->registry) {
            send_error(res, 409, "no registry: dataset was loaded without a BTS file");
            return;
        }
        std::optional<TimeWindow> window = ds->span();
        if (req.has_param("start") || req.has_param("end")) {
            if (!req.has_param("start") || !req.has_param("end")) {
                throw InvalidArgument("geo window needs both 'start' and 'end'");
            }
            window = make_window(Timestamp::parse_iso8601(req.get_param_value("start")),
                                 Timestamp::parse_iso8601(req.get_param_value("end")));
        }
        if (!window) window = TimeWindow{Timestamp{0}, Timestamp{1}};
        GeoOptions opts;
        if (req.get_param_value("placement") == "sector_midpoint") opts.placement = ZonePlacement::sector_midpoint;
        send_json(res, 200, to_json(build_geo_frame(ds->records, *ds->registry, *window, opts)));
    }));

    http.Post("/sessions", guarded([this](const httplib::Request& req, httplib::Response& res) {
        const auto session = sessions.create(parse_body(req));
        send_json(res, 201, json{{"session_id", session->id()}, {"dataset_id", session->dataset_id()}});
    }));

    http.Get(R"(/sessions/([A-Za-z0-9]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
        send_json(res, 200, sessions.get(req.matches[1])->state());
    }));

    http.Delete(R"(/sessions/([A-Za-z0-9]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
        sessions.close(req.matches[1]);
        send_json(res, 200, json{{"ok", true}});
    }));

    http.Post(R"(/sessions/([A-Za-z0-9]+)/command)",
              guarded([this](const httplib::Request& req, httplib::Response& res) {
                  const auto session = sessions.get(req.matches[1]);
                  send_json(res, 200, session->command(parse_body(req)));
              }));

    // ?from=<seq>  &follow=1 keeps the stream open (heartbeats while idle)
    // until the session closes; otherwise it ends once queued commands ran.
    http.Get(R"(/sessions/([A-Za-z0-9]+)/frames)",
             guarded([this](const httplib::Request& req, httplib::Response& res) {
                 const auto session = sessions.get(req.matches[1]);
                 const std::size_t from = req.has_param("from") ? std::stoull(req.get_param_value("from")) : 0;
                 const bool follow = req.get_param_value("follow") == "1" || req.get_param_value("follow") == "true";
                 const auto heartbeat = options.heartbeat_interval;
                 res.set_chunked_content_provider(
                     "application/x-ndjson",
                     [session, cursor = from, follow, heartbeat](std::size_t, httplib::DataSink& sink) mutable {
                         if (!follow) {
                             const auto batch = session->drain(cursor);
                             for (const auto& f : batch.frames) {
                                 const std::string line = *f + "\n";
                                 if (!sink.write(line.data(), line.size())) return false;
                             }
                             sink.done();
                             return true;
                         }
                         const auto batch = session->wait_frames(cursor, heartbeat);
                         for (const auto& f : batch.frames) {
                             const std::string line = *f + "\n";
                             if (!sink.write(line.data(), line.size())) return false;
                         }
                         cursor += batch.frames.size();
                         if (batch.closed) {
                             sink.done();
                             return true;
                         }
                         if (batch.frames.empty() && batch.idle) {
                             if (auto hb = session->heartbeat()) {
                                 const std::string line = *hb + "\n";
                                 if (!sink.write(line.data(), line.size())) return false;
                             }
                         }
                         return true;
                     });
             }));
}

ApiServer::ApiServer(DatasetStore& store, ServerOptions options) : impl_(std::make_unique<Impl>(store, options)) {}

ApiServer::~ApiServer() { stop(); }

int ApiServer::start(const std::string& host, int port) {
    int bound = port;
    if (port == 0) {
        bound = impl_->http.bind_to_any_port(host);
    } else if (!impl_->http.bind_to_port(host, port)) {
        bound = -1;
    }
    if (bound < 0) throw Error("cannot bind " + host + ":" + std::to_string(port));
    impl_->thread = std::thread([this] { impl_->http.listen_after_bind(); });
    impl_->http.wait_until_ready();
    return bound;
}

bool ApiServer::listen(const std::string& host, int port) { return impl_->http.listen(host, port); }

void ApiServer::stop() {
    if (!impl_) return;
    impl_->sessions.close_all();
    impl_->http.stop();
    if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace cellgraph
