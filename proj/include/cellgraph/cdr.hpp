#pragma once

#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cellgraph/core.hpp"

namespace cellgraph {

/// One phone event as logged by the operator.
struct CallRecord {
    std::string caller;
    std::string callee;
    Timestamp start;
    std::int64_t duration_s = 0;
    std::optional<std::string> cell_id;
    std::optional<std::string> callee_cell_id;
    /// Extra CSV columns (IMEI, IMSI, ...) carried verbatim; never identity keys.
    std::vector<std::pair<std::string, std::string>> attributes;

    bool operator==(const CallRecord&) const = default;
};

struct CellSector {
    std::string cell_id;
    double lat = 0.0;
    double lon = 0.0;
    double azimuth_deg = 0.0;
    double beamwidth_deg = 360.0;
    double range_m = 1.0;

    bool operator==(const CellSector&) const = default;
};

class CellRegistry {
public:
    /// Throws InvalidArgument on a duplicate id or a sector outside its bounds.
    void add(CellSector sector);

    const CellSector* find(std::string_view cell_id) const;
    std::size_t size() const { return cells_.size(); }
    bool empty() const { return cells_.empty(); }

    auto begin() const { return cells_.begin(); }
    auto end() const { return cells_.end(); }

private:
    std::map<std::string, CellSector, std::less<>> cells_;
};

enum class ParsePolicy { strict, lenient };

struct LineDiagnostic {
    std::size_t line = 0;  // 1-based, header is line 1
    std::string reason;

    bool operator==(const LineDiagnostic&) const = default;
};

struct CdrParseResult {
    std::vector<CallRecord> records;
    std::vector<LineDiagnostic> diagnostics;
    std::size_t data_lines = 0;  // non-header, non-blank lines seen
};

/// Raised by strict parsing and on structural failures (unreadable stream,
/// bad header). Carries the offending line.
class ParseError : public InvalidArgument {
public:
    ParseError(std::size_t line, const std::string& reason)
        : InvalidArgument("line " + std::to_string(line) + ": " + reason), line_(line), reason_(reason) {}

    std::size_t line() const { return line_; }
    const std::string& reason() const { return reason_; }

private:
    std::size_t line_;
    std::string reason_;
};

/// Canonical subscriber id: drops spaces, '+', '-', '.', parentheses and
/// leading zeros; the remainder must be digits. Throws InvalidArgument.
std::string normalize_subscriber(std::string_view raw);

/// Normalizes an azimuth into [0, 360).
double normalize_azimuth(double degrees);

/// Reads `caller,callee,start,duration_s,cell_id[,callee_cell_id][,extra...]`.
CdrParseResult parse_cdr(std::istream& input, ParsePolicy policy = ParsePolicy::lenient);

/// Reads `cell_id,lat,lon,azimuth_deg,beamwidth_deg,range_m`.
CellRegistry parse_bts(std::istream& input);

/// Writes records in the format parse_cdr reads. Extra attribute columns are
/// taken from the first record; every record must carry the same names.
void write_cdr(std::ostream& out, const std::vector<CallRecord>& records);

void write_bts(std::ostream& out, const CellRegistry& registry);

namespace csv {

/// Splits one CSV line (RFC 4180 quoting, no embedded newlines).
std::vector<std::string> split_line(std::string_view line);

/// Quotes a field only when it contains a comma, quote or leading/trailing space.
std::string escape(std::string_view field);

/// Reads one line, stripping a trailing '\r'. Returns false at end of stream.
bool read_line(std::istream& in, std::string& line);

}  // namespace csv

}  // namespace cellgraph
