#pragma once

// Binary field snapshots and CSV output of diagnostics and sweeps.
//
// Snapshot layout, all integers and doubles little-endian:
//   "KSGD1"  version:u8  dim:u8  size:u64 per axis  side:f64  t:f64
//   nfields:u8  then per field  name_len:u8 name  values:f64 row-major

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "ksgd/domain.hpp"
#include "ksgd/experiments.hpp"

namespace ksgd {

inline constexpr std::uint8_t kSnapshotVersion = 1;

struct NamedField {
    std::string name;
    ScalarField field;
};

struct Snapshot {
    GridSpec grid;
    double t = 0.0;
    std::vector<NamedField> fields;

    const ScalarField& get(const std::string& name) const;
};

/// Fields must share the snapshot grid. Throws std::runtime_error on I/O errors.
void write_snapshot(std::ostream& out, const Snapshot& snap);
void write_snapshot(const std::filesystem::path& path, const Snapshot& snap);

/// Throws std::runtime_error on bad magic, unknown version or truncation.
Snapshot read_snapshot(std::istream& in);
Snapshot read_snapshot(const std::filesystem::path& path);

/// Shortest round-trip decimal form.
std::string format_double(double x);

std::vector<std::string> series_csv_header(const DiagnosticsConfig& config);
void write_series_csv(std::ostream& out, const DiagnosticsSeries& series);

std::vector<std::string> sweep_csv_header(const std::vector<SweepAxis>& axes);
void write_sweep_csv(std::ostream& out, const std::vector<SweepAxis>& axes, const std::vector<SweepRow>& rows);

/// gamma rows by c columns of sup L^inf / initial L^inf. Requires exactly the
/// axes source.gamma and source.c in either order.
void write_matrix_csv(std::ostream& out, const std::vector<SweepAxis>& axes, const std::vector<SweepRow>& rows);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// -1 when absent.
    int column(const std::string& name) const;
};

/// Plain comma-separated values, no quoting. Throws std::runtime_error on
/// empty input or rows whose width differs from the header.
CsvTable read_csv(std::istream& in);

}  // namespace ksgd
