#include <doer/csv_io.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <doer/errors.hpp>

namespace doer {

namespace {

std::ofstream open_out(const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path)
{
    out.flush();
    if (!out) throw IoError("write failed for " + path.string());
}

std::vector<std::string> split(const std::string& line, char sep)
{
    std::vector<std::string> out;
    std::string field;
    std::istringstream is(line);
    while (std::getline(is, field, sep)) out.push_back(field);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

std::string trim(std::string s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool is_missing(const std::string& field)
{
    return field.empty() || field == "NA" || field == "na" || field == "NaN" || field == "nan" || field == "null";
}

bool parse_double(const std::string& field, double& value)
{
    const char* first = field.data();
    const char* last = first + field.size();
    if (first != last && *first == '+') ++first;
    const auto res = std::from_chars(first, last, value);
    return res.ec == std::errc() && res.ptr == last;
}

template <class T>
bool parse_unsigned(const std::string& field, T& value)
{
    const auto res = std::from_chars(field.data(), field.data() + field.size(), value);
    return res.ec == std::errc() && res.ptr == field.data() + field.size();
}

std::vector<std::string> series_header(bool timed)
{
    std::vector<std::string> h;
    if (timed) h.emplace_back("t");
    for (int i = 1; i <= kPlantInputs; ++i) h.push_back("x" + std::to_string(i));
    h.emplace_back("power");
    h.emplace_back("heat_rate");
    return h;
}

std::string join(const std::vector<std::string>& parts, char sep)
{
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

} // namespace

std::string format_decimal(double value)
{
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[512];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::fixed);
    if (res.ec != std::errc()) throw ArgumentError("format_decimal: value too large");
    return std::string(buf, res.ptr);
}

std::string series_file_name(std::size_t id)
{
    char buf[32];
    std::snprintf(buf, sizeof(buf), "series_%04zu.csv", id);
    return buf;
}

std::string efficiency_file_name(std::size_t id)
{
    char buf[48];
    std::snprintf(buf, sizeof(buf), "series_%04zu_efficiency.csv", id);
    return buf;
}

void write_series_csv(const std::filesystem::path& path, const Series& series, std::uint64_t master_seed)
{
    auto out = open_out(path);
    out << "# master_seed=" << master_seed << " series_seed=" << series.seed << " kind=" << to_string(series.kind)
        << '\n';
    out << join(series_header(true), ',') << '\n';
    for (const auto& r : series.records) {
        out << r.t;
        for (int i = 0; i < kPlantInputs; ++i) out << ',' << format_decimal(r.x(i));
        out << ',' << format_decimal(r.power) << ',' << format_decimal(r.heat_rate) << '\n';
    }
    finish(out, path);
}

void write_efficiency_csv(const std::filesystem::path& path, const Series& series, std::uint64_t master_seed)
{
    auto out = open_out(path);
    out << "# master_seed=" << master_seed << " series_seed=" << series.seed << '\n';
    out << "t,efficiency\n";
    for (const auto& r : series.records) out << r.t << ',' << format_decimal(r.efficiency) << '\n';
    finish(out, path);
}

void write_manifest_csv(const std::filesystem::path& path, const std::vector<ManifestRow>& rows,
                        std::uint64_t master_seed)
{
    auto out = open_out(path);
    out << "# master_seed=" << master_seed << '\n';
    out << "series_id,kind,seed,change_points\n";
    for (const auto& row : rows) {
        out << row.series_id << ',' << to_string(row.kind) << ',' << row.seed << ',';
        for (std::size_t i = 0; i < row.change_points.size(); ++i) {
            if (i) out << ';';
            out << row.change_points[i].index << ':' << row.change_points[i].range;
        }
        out << '\n';
    }
    finish(out, path);
}

std::vector<ManifestRow> read_manifest_csv(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw IoError("cannot open manifest " + path.string());
    std::vector<ManifestRow> rows;
    std::string line;
    bool header = false;
    for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
        line = trim(line);
        if (line.empty() || line.front() == '#') continue;
        if (!header) {
            if (line != "series_id,kind,seed,change_points")
                throw DataError(path.string() + ":" + std::to_string(lineno) + ": unexpected manifest header");
            header = true;
            continue;
        }
        const auto f = split(line, ',');
        ManifestRow row;
        auto bad = [&](const std::string& what) {
            return DataError(path.string() + ":" + std::to_string(lineno) + ": " + what);
        };
        if (f.size() != 4) throw bad("expected 4 fields");
        if (!parse_unsigned(f[0], row.series_id)) throw bad("bad series_id");
        try {
            row.kind = parse_drift_kind(f[1]);
        } catch (const ArgumentError& e) {
            throw bad(e.what());
        }
        if (!parse_unsigned(f[2], row.seed)) throw bad("bad seed");
        if (!f[3].empty()) {
            for (const auto& item : split(f[3], ';')) {
                const auto colon = item.find(':');
                ChangePoint cp;
                if (colon == std::string::npos || !parse_unsigned(item.substr(0, colon), cp.index) ||
                    !parse_unsigned(item.substr(colon + 1), cp.range))
                    throw bad("bad change point '" + item + "'");
                row.change_points.push_back(cp);
            }
        }
        rows.push_back(std::move(row));
    }
    if (!header) throw DataError(path.string() + ": manifest has no header");
    return rows;
}

LoadedStream read_series_csv(const std::filesystem::path& path, bool allow_untimed)
{
    std::ifstream in(path);
    if (!in) throw IoError("cannot open series " + path.string());

    LoadedStream out;
    std::string line;
    bool timed = true, header = false;
    std::int64_t position = 0;
    const Index d = kPlantInputs, r = 2;
    for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
        line = trim(line);
        if (line.empty() || line.front() == '#') continue;
        auto fields = split(line, ',');
        for (auto& f : fields) f = trim(f);
        auto bad = [&](const std::string& what) {
            return DataError(path.string() + ":" + std::to_string(lineno) + ": " + what);
        };
        if (!header) {
            if (fields == series_header(true)) {
                timed = true;
            } else if (allow_untimed && fields == series_header(false)) {
                timed = false;
            } else {
                throw bad("unexpected header '" + line + "'; expected " + join(series_header(true), ','));
            }
            header = true;
            continue;
        }

        const std::size_t expected = static_cast<std::size_t>(d + r) + (timed ? 1 : 0);
        if (fields.size() != expected)
            throw bad("expected " + std::to_string(expected) + " fields, got " + std::to_string(fields.size()));
        if (std::any_of(fields.begin(), fields.end(), is_missing)) {
            ++out.dropped_missing;
            ++position;
            continue;
        }
        std::vector<double> values(fields.size());
        for (std::size_t i = 0; i < fields.size(); ++i)
            if (!parse_double(fields[i], values[i])) throw bad("field " + std::to_string(i + 1) + " ('" + fields[i] + "') is not a number");

        Sample s;
        std::size_t k = 0;
        if (timed) {
            if (values[0] != std::floor(values[0])) throw bad("t must be an integer");
            s.index = static_cast<std::int64_t>(values[k++]);
        } else {
            s.index = position;
        }
        s.x.resize(d);
        s.y.resize(r);
        for (Index i = 0; i < d; ++i) s.x(i) = values[k++];
        for (Index i = 0; i < r; ++i) s.y(i) = values[k++];
        out.samples.push_back(std::move(s));
        ++position;
    }
    if (!header) throw DataError(path.string() + ": series has no header row");
    return out;
}

} // namespace doer
