#include "ksgd/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace ksgd {

namespace {

constexpr char kMagic[5] = {'K', 'S', 'G', 'D', '1'};

void put_u64(std::ostream& out, std::uint64_t x)
{
    char b[8];
    for (int k = 0; k < 8; ++k)
        b[k] = static_cast<char>((x >> (8 * k)) & 0xffu);
    out.write(b, 8);
}

void put_f64(std::ostream& out, double x) { put_u64(out, std::bit_cast<std::uint64_t>(x)); }

void put_u8(std::ostream& out, std::uint8_t x) { out.put(static_cast<char>(x)); }

void read_exact(std::istream& in, char* dst, std::size_t n)
{
    in.read(dst, static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in.gcount()) != n)
        throw std::runtime_error("snapshot is truncated");
}

std::uint8_t get_u8(std::istream& in)
{
    char c;
    read_exact(in, &c, 1);
    return static_cast<std::uint8_t>(c);
}

std::uint64_t get_u64(std::istream& in)
{
    unsigned char b[8];
    read_exact(in, reinterpret_cast<char*>(b), 8);
    std::uint64_t x = 0;
    for (int k = 7; k >= 0; --k)
        x = (x << 8) | b[k];
    return x;
}

double get_f64(std::istream& in) { return std::bit_cast<double>(get_u64(in)); }

std::string join(const std::vector<std::string>& cells)
{
    std::string line;
    for (std::size_t k = 0; k < cells.size(); ++k) {
        if (k)
            line += ',';
        line += cells[k];
    }
    return line;
}

}  // namespace

const ScalarField& Snapshot::get(const std::string& name) const
{
    for (const auto& f : fields)
        if (f.name == name)
            return f.field;
    throw std::out_of_range("snapshot has no field '" + name + "'");
}

void write_snapshot(std::ostream& out, const Snapshot& snap)
{
    if (snap.fields.size() > 255)
        throw std::runtime_error("snapshot holds at most 255 fields");
    out.write(kMagic, sizeof kMagic);
    put_u8(out, kSnapshotVersion);
    put_u8(out, static_cast<std::uint8_t>(snap.grid.dim()));
    for (int a = 0; a < snap.grid.dim(); ++a)
        put_u64(out, static_cast<std::uint64_t>(snap.grid.n()));
    put_f64(out, snap.grid.side());
    put_f64(out, snap.t);
    put_u8(out, static_cast<std::uint8_t>(snap.fields.size()));
    for (const auto& f : snap.fields) {
        if (!(f.field.grid() == snap.grid))
            throw std::runtime_error("snapshot field '" + f.name + "' is on a different grid");
        if (f.name.empty() || f.name.size() > 255)
            throw std::runtime_error("snapshot field names must have 1..255 bytes");
        put_u8(out, static_cast<std::uint8_t>(f.name.size()));
        out.write(f.name.data(), static_cast<std::streamsize>(f.name.size()));
        for (double x : f.field.values())
            put_f64(out, x);
    }
    if (!out)
        throw std::runtime_error("failed to write snapshot");
}

void write_snapshot(const std::filesystem::path& path, const Snapshot& snap)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    write_snapshot(out, snap);
}

Snapshot read_snapshot(std::istream& in)
{
    char magic[sizeof kMagic];
    read_exact(in, magic, sizeof magic);
    if (std::memcmp(magic, kMagic, sizeof kMagic) != 0)
        throw std::runtime_error("not a snapshot file (bad magic)");
    const auto version = get_u8(in);
    if (version != kSnapshotVersion)
        throw std::runtime_error("unsupported snapshot version " + std::to_string(version));
    const int dim = get_u8(in);
    if (dim != 1 && dim != 2)
        throw std::runtime_error("snapshot dimension must be 1 or 2");
    std::uint64_t n = 0;
    for (int a = 0; a < dim; ++a) {
        const std::uint64_t na = get_u64(in);
        if (a > 0 && na != n)
            throw std::runtime_error("snapshot axes must have equal sizes");
        n = na;
    }
    if (n < 3 || n > (1u << 20))
        throw std::runtime_error("snapshot axis size out of range");
    const double side = get_f64(in);
    Snapshot snap;
    snap.grid = GridSpec(dim, static_cast<int>(n), side);
    snap.t = get_f64(in);
    const int count = get_u8(in);
    for (int k = 0; k < count; ++k) {
        const int len = get_u8(in);
        std::string name(static_cast<std::size_t>(len), '\0');
        read_exact(in, name.data(), name.size());
        std::vector<double> values(snap.grid.cells());
        for (auto& x : values)
            x = get_f64(in);
        snap.fields.push_back({std::move(name), ScalarField(snap.grid, std::move(values))});
    }
    return snap;
}

Snapshot read_snapshot(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open " + path.string());
    return read_snapshot(in);
}

std::string format_double(double x)
{
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

std::vector<std::string> series_csv_header(const DiagnosticsConfig& config)
{
    std::vector<std::string> h{"t", "mass", "min_u", "linf_u", "linf_v", "w1inf_v"};
    for (double p : config.p_list)
        h.push_back("lp_u_" + format_double(p));
    for (const char* s : {"grad_energy_p", "taxis_term", "pplus1", "sink_integral", "clip_mass", "msr_lhs", "msr_rhs"})
        h.emplace_back(s);
    return h;
}

void write_series_csv(std::ostream& out, const DiagnosticsSeries& series)
{
    out << join(series_csv_header(series.config)) << '\n';
    for (const auto& r : series.records) {
        std::vector<std::string> cells{format_double(r.t),      format_double(r.mass),   format_double(r.min_u),
                                       format_double(r.linf_u), format_double(r.linf_v), format_double(r.w1inf_v)};
        for (double x : r.lp_u)
            cells.push_back(format_double(x));
        for (double x : {r.grad_energy_p, r.taxis_term, r.pplus1, r.sink_integral, r.clip_mass, r.msr_lhs, r.msr_rhs})
            cells.push_back(format_double(x));
        out << join(cells) << '\n';
    }
}

std::vector<std::string> sweep_csv_header(const std::vector<SweepAxis>& axes)
{
    std::vector<std::string> h;
    for (const auto& a : axes)
        h.push_back(a.path);
    for (const char* s : {"status", "sup_linf_u", "sup_mass", "t_final"})
        h.emplace_back(s);
    return h;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepAxis>& axes, const std::vector<SweepRow>& rows)
{
    out << join(sweep_csv_header(axes)) << '\n';
    for (const auto& r : rows) {
        std::vector<std::string> cells;
        for (double v : r.values)
            cells.push_back(format_double(v));
        cells.emplace_back(r.error.empty() ? to_string(r.status) : "Error");
        cells.push_back(format_double(r.sup_linf_u));
        cells.push_back(format_double(r.sup_mass));
        cells.push_back(format_double(r.t_final));
        out << join(cells) << '\n';
    }
}

void write_matrix_csv(std::ostream& out, const std::vector<SweepAxis>& axes, const std::vector<SweepRow>& rows)
{
    if (axes.size() != 2)
        throw std::invalid_argument("the matrix needs exactly two axes");
    int gi = -1, ci = -1;
    for (int a = 0; a < 2; ++a) {
        if (axes[a].path == "source.gamma") gi = a;
        if (axes[a].path == "source.c") ci = a;
    }
    if (gi < 0 || ci < 0)
        throw std::invalid_argument("the matrix needs the axes source.gamma and source.c");
    auto sorted = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        return v;
    };
    const auto gammas = sorted(axes[gi].values);
    const auto cs = sorted(axes[ci].values);
    out << "gamma";
    for (double c : cs)
        out << ",c=" << format_double(c);
    out << '\n';
    for (double g : gammas) {
        out << format_double(g);
        for (double c : cs) {
            const auto it = std::find_if(rows.begin(), rows.end(),
                                         [&](const SweepRow& r) { return r.values[gi] == g && r.values[ci] == c; });
            out << ',';
            if (it == rows.end() || !it->error.empty() || !(it->initial_linf_u > 0.0))
                out << "nan";
            else
                out << format_double(it->sup_linf_u / it->initial_linf_u);
        }
        out << '\n';
    }
}

int CsvTable::column(const std::string& name) const
{
    const auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : static_cast<int>(it - header.begin());
}

CsvTable read_csv(std::istream& in)
{
    auto split = [](const std::string& line) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ','))
            cells.push_back(cell);
        if (!line.empty() && line.back() == ',')
            cells.emplace_back();
        return cells;
    };
    CsvTable t;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        auto cells = split(line);
        if (t.header.empty()) {
            t.header = std::move(cells);
            continue;
        }
        if (cells.size() != t.header.size())
            throw std::runtime_error("csv line " + std::to_string(line_no) + " has " + std::to_string(cells.size())
                                     + " cells, header has " + std::to_string(t.header.size()));
        t.rows.push_back(std::move(cells));
    }
    if (t.header.empty())
        throw std::runtime_error("csv input is empty");
    return t;
}

}  // namespace ksgd
