#include <cstdlib>
#include <fstream>
#include <sstream>

#include <openssl/evp.h>

#include "cellgraph/service.hpp"

namespace cellgraph {

namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw NotFound("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out << content;
}

std::string sha256_hex(const std::string& data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
        throw Error("sha256 failed");
    }
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < length; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xF]);
    }
    return out;
}

bool valid_id(const std::string& id) {
    if (id.empty() || id.size() > 64) return false;
    for (char c : id) {
        if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) return false;
    }
    return true;
}

}  // namespace

DatasetSources DatasetSources::from_files(const fs::path& cdr, const std::optional<fs::path>& bts,
                                          const std::optional<fs::path>& annotations, ParsePolicy policy) {
    DatasetSources s;
    s.cdr = read_file(cdr);
    if (bts) s.bts = read_file(*bts);
    if (annotations) s.annotations = read_file(*annotations);
    s.policy = policy;
    return s;
}

std::string dataset_id(const DatasetSources& sources) {
    // length-prefixed parts keep the encoding unambiguous
    std::string blob;
    auto part = [&](const char* tag, const std::optional<std::string>& text) {
        blob += tag;
        blob += text ? std::to_string(text->size()) + ":" + *text : std::string("-");
        blob += '\n';
    };
    part("cdr", sources.cdr);
    part("bts", sources.bts);
    part("annotations", sources.annotations);
    blob += sources.policy == ParsePolicy::strict ? "strict" : "lenient";
    return sha256_hex(blob).substr(0, 24);
}

std::shared_ptr<const Dataset> make_dataset(const DatasetSources& sources) {
    auto ds = std::make_shared<Dataset>();
    ds->id = dataset_id(sources);
    {
        std::istringstream in(sources.cdr);
        auto parsed = parse_cdr(in, sources.policy);
        ds->records = std::move(parsed.records);
        ds->diagnostics = std::move(parsed.diagnostics);
        ds->data_lines = parsed.data_lines;
    }
    if (sources.bts) {
        std::istringstream in(*sources.bts);
        ds->registry = parse_bts(in);
    }
    if (sources.annotations) {
        std::istringstream in(*sources.annotations);
        ds->annotations = parse_annotations(in);
    }
    ds->network = build_network(ds->records)
                      .with_annotations(ds->annotations)
                      .with_provenance(Provenance{ds->id, std::nullopt});
    for (const auto& r : ds->records) {
        if (!r.cell_id || !ds->registry || !ds->registry->find(*r.cell_id)) ++ds->unresolved_cell_records;
    }
    return ds;
}

std::optional<TimeWindow> Dataset::span() const {
    if (records.empty()) return std::nullopt;
    Timestamp lo = records.front().start;
    Timestamp hi = lo;
    for (const auto& r : records) {
        lo = std::min(lo, r.start);
        hi = std::max(hi, r.start);
    }
    return TimeWindow{lo, Timestamp{hi.epoch_seconds() + 1}};
}

json Dataset::summary() const {
    json diags = json::array();
    for (const auto& d : diagnostics) diags.push_back({{"line", d.line}, {"reason", d.reason}});
    return json{{"id", id},
                {"record_count", records.size()},
                {"rejected_count", diagnostics.size()},
                {"node_count", network.node_count()},
                {"edge_count", network.edge_count()},
                {"has_registry", registry.has_value()},
                {"cell_count", registry ? registry->size() : 0},
                {"unresolved_cell_records", unresolved_cell_records},
                {"annotated_subscribers", annotations.by_subscriber.size()},
                {"diagnostics", std::move(diags)}};
}

DatasetStore::DatasetStore(std::optional<fs::path> directory) : directory_(std::move(directory)) {
    if (directory_) fs::create_directories(*directory_);
}

std::optional<fs::path> DatasetStore::directory_from_env() {
    const char* dir = std::getenv("CELLGRAPH_DATA_DIR");
    if (!dir || !*dir) return std::nullopt;
    return fs::path(dir);
}

std::shared_ptr<const Dataset> DatasetStore::add(const DatasetSources& sources) {
    const auto id = dataset_id(sources);
    {
        std::lock_guard lock(mutex_);
        if (auto it = datasets_.find(id); it != datasets_.end()) return it->second;
    }
    auto ds = make_dataset(sources);
    if (directory_) {
        const auto dir = *directory_ / id;
        fs::create_directories(dir);
        write_file(dir / "cdr.csv", sources.cdr);
        if (sources.bts) write_file(dir / "bts.csv", *sources.bts);
        if (sources.annotations) write_file(dir / "annotations.csv", *sources.annotations);
        write_file(dir / "policy", sources.policy == ParsePolicy::strict ? "strict" : "lenient");
        write_file(dir / "summary.json", ds->summary().dump(2));
    }
    std::lock_guard lock(mutex_);
    return datasets_.try_emplace(id, std::move(ds)).first->second;
}

std::shared_ptr<const Dataset> DatasetStore::get(const std::string& id) {
    {
        std::lock_guard lock(mutex_);
        if (auto it = datasets_.find(id); it != datasets_.end()) return it->second;
    }
    if (directory_ && valid_id(id) && fs::exists(*directory_ / id / "cdr.csv")) {
        const auto dir = *directory_ / id;
        DatasetSources s;
        s.cdr = read_file(dir / "cdr.csv");
        if (fs::exists(dir / "bts.csv")) s.bts = read_file(dir / "bts.csv");
        if (fs::exists(dir / "annotations.csv")) s.annotations = read_file(dir / "annotations.csv");
        if (fs::exists(dir / "policy") && read_file(dir / "policy") == "strict") s.policy = ParsePolicy::strict;
        if (dataset_id(s) != id) throw Error("dataset store entry " + id + " does not match its content");
        auto ds = make_dataset(s);
        std::lock_guard lock(mutex_);
        return datasets_.try_emplace(id, std::move(ds)).first->second;
    }
    throw NotFound("unknown dataset '" + id + "'");
}

std::vector<std::string> DatasetStore::ids() const {
    std::lock_guard lock(mutex_);
    std::vector<std::string> out;
    for (const auto& [id, ds] : datasets_) out.push_back(id);
    if (directory_ && fs::exists(*directory_)) {
        for (const auto& entry : fs::directory_iterator(*directory_)) {
            const auto name = entry.path().filename().string();
            if (entry.is_directory() && valid_id(name) && !datasets_.count(name)) out.push_back(name);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace cellgraph
