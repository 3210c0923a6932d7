#pragma once

// CSV ingestion and alignment for the empirical workflow. A DataSet keeps
// two return series plus an optional predetermined state column; the
// down-market rule derives the state from the lagged market return so it
// is measurable one day ahead of the pair it conditions.

#include <string>
#include <vector>

namespace copred {

struct DataSet {
    std::vector<std::string> dates;  // labels as read, strictly increasing
    std::vector<double> y1;          // asset returns
    std::vector<double> y2;          // market returns
    std::vector<double> z;           // state series, empty until set
    int n() const { return static_cast<int>(dates.size()); }
};

// Header names used to locate the columns of interest. Leave z empty when
// the file has no state column.
struct ColumnMap {
    std::string date = "date";
    std::string y1 = "y1";
    std::string y2 = "y2";
    std::string z;
};

struct IngestStats {
    int rows_read = 0;     // data rows seen in the file
    int rows_dropped = 0;  // rows discarded for a missing or unreadable field
};

// Reads a header CSV. Dates must parse as ISO-8601 (2001-02-03) or
// YYYY/MM/DD and be strictly increasing across the surviving rows; rows
// with an empty or unparsable value in any mapped column are dropped and
// counted in `stats`. Fewer than `min_rows` usable rows is an error.
DataSet ingest_csv(const std::string& path, const ColumnMap& columns,
                   int min_rows = 250, IngestStats* stats = nullptr);

// Same contract on an in-memory document.
DataSet ingest_csv_text(const std::string& text, const ColumnMap& columns,
                        int min_rows = 250, IngestStats* stats = nullptr);

// Serialization with '.' decimals, ',' separators and LF line endings.
// Values print as shortest round-trip decimals, so writing and re-ingesting
// reproduces every field bit for bit.
std::string dataset_to_csv(const DataSet& ds);
void write_dataset_csv(const DataSet& ds, const std::string& path);

// Resolves the state column. "down_market" sets z_t = 1 when the previous
// day's market return is negative and drops the first row, so the state
// uses strictly lagged information; any other rule requires an already
// ingested state column, which passes through unchanged.
DataSet derive_state(const DataSet& ds, const std::string& rule);

// Turns price levels into log returns, dropping the first row. Prices must
// be positive; an ingested state column is trimmed alongside.
DataSet log_returns(const DataSet& ds);

// True when the state never varies (for example all-positive markets give
// z identically zero); the test pipeline short-circuits on such data.
bool state_is_degenerate(const std::vector<double>& z);

}  // namespace copred
