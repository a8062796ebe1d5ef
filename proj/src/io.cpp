#include "lid/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "lid/errors.hpp"

namespace lid {

std::uint64_t fnv1a64(std::string_view bytes)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t value)
{
    char buf[17];
    auto res = std::to_chars(buf, buf + 16, value, 16);
    std::string s(buf, res.ptr);
    return std::string(16 - s.size(), '0') + s;
}

std::string format_double(double value)
{
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
}

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_file(const std::filesystem::path& path, const std::string& content, bool force)
{
    if (std::filesystem::exists(path) && !force)
        throw IoError("'" + path.string() + "' already exists (pass --force to overwrite)");
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
        out << content;
        if (!out) throw IoError("failed writing '" + tmp.string() + "'");
    }
    std::filesystem::rename(tmp, path);
}

namespace {

void write_meta(std::ostringstream& os, const Metadata& meta)
{
    for (const auto& [k, v] : meta) os << "# " << k << "=" << v << "\n";
}

/// Splits text into comment metadata and data lines.
void split_lines(const std::string& text, Metadata& meta, std::vector<std::string>& lines)
{
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto first = line.find_first_not_of("# ");
            if (first == std::string::npos) continue;
            const auto body = line.substr(first);
            const auto eq = body.find('=');
            if (eq != std::string::npos) meta.emplace_back(body.substr(0, eq), body.substr(eq + 1));
            continue;
        }
        lines.push_back(line);
    }
}

std::vector<std::string> split_commas(const std::string& line)
{
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const auto comma = line.find(',', start);
        out.push_back(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

double parse_double(const std::string& s)
{
    if (s == "nan") return std::nan("");
    if (s == "inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw IoError("malformed number '" + s + "'");
    return v;
}

long long parse_int(const std::string& s)
{
    long long v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw IoError("malformed integer '" + s + "'");
    return v;
}

}  // namespace

std::string dataset_csv(const LabeledDataset& ds, const Metadata& meta)
{
    std::ostringstream os;
    write_meta(os, meta);
    for (Eigen::Index i = 0; i < ds.dim(); ++i) os << "x_" << i << ",";
    os << "lid_label,component_id\n";
    for (Eigen::Index j = 0; j < ds.size(); ++j) {
        for (Eigen::Index i = 0; i < ds.dim(); ++i) os << format_double(ds.points(i, j)) << ",";
        os << ds.lid_labels[static_cast<std::size_t>(j)] << "," << ds.component_ids[static_cast<std::size_t>(j)] << "\n";
    }
    return os.str();
}

LabeledDataset parse_dataset_csv(const std::string& text)
{
    Metadata meta;
    std::vector<std::string> lines;
    split_lines(text, meta, lines);
    if (lines.empty()) throw IoError("dataset CSV has no header");
    const auto header = split_commas(lines[0]);
    if (header.size() < 3 || header[header.size() - 2] != "lid_label" || header.back() != "component_id")
        throw IoError("dataset CSV header must end with lid_label,component_id");
    const auto dim = static_cast<Eigen::Index>(header.size() - 2);
    for (Eigen::Index i = 0; i < dim; ++i)
        if (header[static_cast<std::size_t>(i)] != "x_" + std::to_string(i)) throw IoError("unexpected dataset column name");

    LabeledDataset ds;
    const auto n = static_cast<Eigen::Index>(lines.size() - 1);
    ds.points.resize(dim, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const auto cells = split_commas(lines[static_cast<std::size_t>(j + 1)]);
        if (cells.size() != header.size()) throw IoError("dataset row " + std::to_string(j) + " has the wrong width");
        for (Eigen::Index i = 0; i < dim; ++i) ds.points(i, j) = parse_double(cells[static_cast<std::size_t>(i)]);
        ds.lid_labels.push_back(static_cast<int>(parse_int(cells[cells.size() - 2])));
        ds.component_ids.push_back(static_cast<int>(parse_int(cells.back())));
    }
    return ds;
}

std::string ResultTable::get(const std::string& key) const
{
    for (const auto& [k, v] : meta)
        if (k == key) return v;
    return {};
}

std::string results_csv(const ResultTable& table)
{
    std::ostringstream os;
    write_meta(os, table.meta);
    os << "point_index,estimator,lid_estimate,t0_or_knee,lid_label,trace_mode,fallback";
    if (!table.rows.empty())
        for (const auto& [name, _] : table.rows.front().extra) os << "," << name;
    os << "\n";
    for (const auto& r : table.rows) {
        os << r.point_index << "," << r.estimator << "," << format_double(r.lid) << "," << format_double(r.t0) << ","
           << r.label << "," << r.trace_mode << "," << (r.fallback ? 1 : 0);
        for (const auto& [_, v] : r.extra) os << "," << format_double(v);
        os << "\n";
    }
    return os.str();
}

ResultTable parse_results_csv(const std::string& text)
{
    ResultTable table;
    std::vector<std::string> lines;
    split_lines(text, table.meta, lines);
    if (lines.empty()) throw IoError("results CSV has no header");
    const auto header = split_commas(lines[0]);
    constexpr std::size_t fixed = 7;
    if (header.size() < fixed || header[0] != "point_index" || header[2] != "lid_estimate")
        throw IoError("results CSV header is malformed");
    for (std::size_t l = 1; l < lines.size(); ++l) {
        const auto c = split_commas(lines[l]);
        if (c.size() != header.size()) throw IoError("results row " + std::to_string(l - 1) + " has the wrong width");
        ResultRow r;
        r.point_index = static_cast<Eigen::Index>(parse_int(c[0]));
        r.estimator = c[1];
        r.lid = parse_double(c[2]);
        r.t0 = parse_double(c[3]);
        r.label = static_cast<int>(parse_int(c[4]));
        r.trace_mode = c[5];
        r.fallback = c[6] == "1";
        for (std::size_t k = fixed; k < c.size(); ++k) r.extra.emplace_back(header[k], parse_double(c[k]));
        table.rows.push_back(std::move(r));
    }
    return table;
}

}  // namespace lid
