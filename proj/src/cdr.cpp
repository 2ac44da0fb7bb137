#include "cellgraph/cdr.hpp"

#include <charconv>
#include <cmath>
#include <system_error>

namespace cellgraph {

namespace csv {

std::vector<std::string> split_line(std::string_view line) {
    std::vector<std::string> fields;
    std::string current;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    current.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                current.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(current));
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    if (quoted) {
        throw InvalidArgument("unterminated quoted field");
    }
    fields.push_back(std::move(current));
    return fields;
}

std::string escape(std::string_view field) {
    const bool needs_quotes = field.find_first_of(",\"") != std::string_view::npos ||
                              (!field.empty() && (field.front() == ' ' || field.back() == ' '));
    if (!needs_quotes) {
        return std::string(field);
    }
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

bool read_line(std::istream& in, std::string& line) {
    if (!std::getline(in, line)) {
        return false;
    }
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    return true;
}

}  // namespace csv

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

// from_chars is locale independent, unlike strtod.
double parse_double(std::string_view text, const char* what) {
    text = trim(text);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty() || !std::isfinite(value)) {
        throw InvalidArgument(std::string("bad ") + what + " '" + std::string(text) + "'");
    }
    return value;
}

std::int64_t parse_int(std::string_view text, const char* what) {
    text = trim(text);
    std::int64_t value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
        throw InvalidArgument(std::string("bad ") + what + " '" + std::string(text) + "'");
    }
    return value;
}

void strip_bom(std::string& line) {
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) {
        line.erase(0, 3);
    }
}

bool blank(std::string_view line) { return trim(line).empty(); }

const std::vector<std::string> kCdrRequired = {"caller", "callee", "start", "duration_s", "cell_id"};
const std::vector<std::string> kBtsColumns = {"cell_id", "lat", "lon", "azimuth_deg", "beamwidth_deg", "range_m"};

struct CdrLayout {
    bool has_callee_cell = false;
    std::vector<std::string> extra;  // names of opaque trailing columns
    std::size_t columns() const { return 5 + (has_callee_cell ? 1 : 0) + extra.size(); }
};

CdrLayout parse_cdr_header(const std::vector<std::string>& header) {
    if (header.size() < kCdrRequired.size()) {
        throw ParseError(1, "malformed header: expected caller,callee,start,duration_s,cell_id");
    }
    for (std::size_t i = 0; i < kCdrRequired.size(); ++i) {
        if (trim(header[i]) != kCdrRequired[i]) {
            throw ParseError(1, "malformed header: column " + std::to_string(i + 1) + " must be '" +
                                    kCdrRequired[i] + "'");
        }
    }
    CdrLayout layout;
    std::size_t next = kCdrRequired.size();
    if (next < header.size() && trim(header[next]) == "callee_cell_id") {
        layout.has_callee_cell = true;
        ++next;
    }
    for (; next < header.size(); ++next) {
        std::string name(trim(header[next]));
        if (name.empty()) {
            throw ParseError(1, "malformed header: empty column name");
        }
        layout.extra.push_back(std::move(name));
    }
    return layout;
}

std::optional<std::string> optional_field(std::string_view raw) {
    raw = trim(raw);
    if (raw.empty()) return std::nullopt;
    return std::string(raw);
}

CallRecord parse_cdr_fields(const std::vector<std::string>& fields, const CdrLayout& layout) {
    // Optional trailing columns may be omitted entirely.
    if (fields.size() < kCdrRequired.size() || fields.size() > layout.columns()) {
        throw InvalidArgument("expected " + std::to_string(layout.columns()) + " fields, got " +
                              std::to_string(fields.size()));
    }
    for (std::size_t i = 0; i < 4; ++i) {
        if (trim(fields[i]).empty()) {
            throw InvalidArgument("missing field '" + kCdrRequired[i] + "'");
        }
    }
    CallRecord record;
    record.caller = normalize_subscriber(fields[0]);
    record.callee = normalize_subscriber(fields[1]);
    if (record.caller == record.callee) {
        throw InvalidArgument("self-call (caller equals callee)");
    }
    record.start = Timestamp::parse_iso8601(trim(fields[2]));
    record.duration_s = parse_int(fields[3], "duration");
    if (record.duration_s < 0) {
        throw InvalidArgument("negative duration");
    }
    record.cell_id = optional_field(fields[4]);
    std::size_t next = 5;
    if (layout.has_callee_cell) {
        if (next < fields.size()) record.callee_cell_id = optional_field(fields[next]);
        ++next;
    }
    for (const auto& name : layout.extra) {
        record.attributes.emplace_back(name, next < fields.size() ? fields[next] : std::string());
        ++next;
    }
    return record;
}

}  // namespace

std::string normalize_subscriber(std::string_view raw) {
    std::string digits;
    digits.reserve(raw.size());
    for (char c : raw) {
        if (c == ' ' || c == '\t' || c == '+' || c == '-' || c == '.' || c == '(' || c == ')') continue;
        if (c < '0' || c > '9') {
            throw InvalidArgument("bad subscriber id '" + std::string(raw) + "'");
        }
        digits.push_back(c);
    }
    const auto first = digits.find_first_not_of('0');
    if (first == std::string::npos) {
        throw InvalidArgument("bad subscriber id '" + std::string(raw) + "'");
    }
    return digits.substr(first);
}

double normalize_azimuth(double degrees) {
    double a = std::fmod(degrees, 360.0);
    if (a < 0) a += 360.0;
    if (a >= 360.0) a -= 360.0;  // fmod of tiny negatives
    return a;
}

void CellRegistry::add(CellSector sector) {
    if (sector.cell_id.empty()) {
        throw InvalidArgument("empty cell_id");
    }
    if (!(sector.lat >= -90.0 && sector.lat <= 90.0)) {
        throw InvalidArgument("cell " + sector.cell_id + ": latitude out of bounds");
    }
    if (!(sector.lon >= -180.0 && sector.lon < 180.0)) {
        throw InvalidArgument("cell " + sector.cell_id + ": longitude out of bounds");
    }
    if (!(sector.beamwidth_deg > 0.0 && sector.beamwidth_deg <= 360.0)) {
        throw InvalidArgument("cell " + sector.cell_id + ": beamwidth must be in (0, 360]");
    }
    if (!(sector.range_m > 0.0)) {
        throw InvalidArgument("cell " + sector.cell_id + ": range must be positive");
    }
    sector.azimuth_deg = normalize_azimuth(sector.azimuth_deg);
    auto key = sector.cell_id;
    auto [it, inserted] = cells_.emplace(std::move(key), std::move(sector));
    if (!inserted) {
        throw InvalidArgument("duplicate cell_id '" + it->first + "'");
    }
}

const CellSector* CellRegistry::find(std::string_view cell_id) const {
    auto it = cells_.find(cell_id);
    return it == cells_.end() ? nullptr : &it->second;
}

CdrParseResult parse_cdr(std::istream& input, ParsePolicy policy) {
    if (!input) {
        throw ParseError(0, "unreadable stream");
    }
    std::string line;
    if (!csv::read_line(input, line)) {
        if (input.bad()) throw ParseError(0, "unreadable stream");
        throw ParseError(1, "malformed header: empty input");
    }
    strip_bom(line);
    CdrLayout layout;
    try {
        layout = parse_cdr_header(csv::split_line(line));
    } catch (const ParseError&) {
        throw;
    } catch (const InvalidArgument& e) {
        throw ParseError(1, std::string("malformed header: ") + e.what());
    }

    CdrParseResult result;
    std::size_t line_no = 1;
    while (csv::read_line(input, line)) {
        ++line_no;
        if (blank(line)) continue;
        ++result.data_lines;
        try {
            result.records.push_back(parse_cdr_fields(csv::split_line(line), layout));
        } catch (const InvalidArgument& e) {
            if (policy == ParsePolicy::strict) {
                throw ParseError(line_no, e.what());
            }
            result.diagnostics.push_back({line_no, e.what()});
        }
    }
    if (input.bad()) {
        throw ParseError(line_no, "unreadable stream");
    }
    return result;
}

CellRegistry parse_bts(std::istream& input) {
    if (!input) {
        throw ParseError(0, "unreadable stream");
    }
    std::string line;
    if (!csv::read_line(input, line)) {
        throw ParseError(1, "malformed header: empty input");
    }
    strip_bom(line);
    const auto header = csv::split_line(line);
    if (header.size() != kBtsColumns.size()) {
        throw ParseError(1, "malformed header: expected cell_id,lat,lon,azimuth_deg,beamwidth_deg,range_m");
    }
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (trim(header[i]) != kBtsColumns[i]) {
            throw ParseError(1, "malformed header: column " + std::to_string(i + 1) + " must be '" +
                                    kBtsColumns[i] + "'");
        }
    }
    CellRegistry registry;
    std::size_t line_no = 1;
    while (csv::read_line(input, line)) {
        ++line_no;
        if (blank(line)) continue;
        try {
            const auto f = csv::split_line(line);
            if (f.size() != kBtsColumns.size()) {
                throw InvalidArgument("expected 6 fields, got " + std::to_string(f.size()));
            }
            CellSector sector;
            sector.cell_id = std::string(trim(f[0]));
            sector.lat = parse_double(f[1], "latitude");
            sector.lon = parse_double(f[2], "longitude");
            sector.azimuth_deg = parse_double(f[3], "azimuth");
            sector.beamwidth_deg = parse_double(f[4], "beamwidth");
            sector.range_m = parse_double(f[5], "range");
            registry.add(std::move(sector));
        } catch (const ParseError&) {
            throw;
        } catch (const InvalidArgument& e) {
            throw ParseError(line_no, e.what());
        }
    }
    return registry;
}

void write_cdr(std::ostream& out, const std::vector<CallRecord>& records) {
    std::vector<std::string> extra;
    if (!records.empty()) {
        for (const auto& [name, value] : records.front().attributes) extra.push_back(name);
    }
    out << "caller,callee,start,duration_s,cell_id,callee_cell_id";
    for (const auto& name : extra) out << ',' << csv::escape(name);
    out << '\n';
    for (const auto& r : records) {
        if (r.attributes.size() != extra.size()) {
            throw InvalidArgument("write_cdr: records carry differing attribute columns");
        }
        out << r.caller << ',' << r.callee << ',' << r.start.to_iso8601() << ',' << r.duration_s << ','
            << csv::escape(r.cell_id.value_or("")) << ',' << csv::escape(r.callee_cell_id.value_or(""));
        for (std::size_t i = 0; i < extra.size(); ++i) {
            if (r.attributes[i].first != extra[i]) {
                throw InvalidArgument("write_cdr: records carry differing attribute columns");
            }
            out << ',' << csv::escape(r.attributes[i].second);
        }
        out << '\n';
    }
}

void write_bts(std::ostream& out, const CellRegistry& registry) {
    out << "cell_id,lat,lon,azimuth_deg,beamwidth_deg,range_m\n";
    out.precision(17);
    for (const auto& [id, s] : registry) {
        out << csv::escape(id) << ',' << s.lat << ',' << s.lon << ',' << s.azimuth_deg << ','
            << s.beamwidth_deg << ',' << s.range_m << '\n';
    }
}

}  // namespace cellgraph
