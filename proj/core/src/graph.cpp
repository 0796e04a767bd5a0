#include "actnow/graph.hpp"

#include "actnow/errors.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace actnow {
namespace {

static_assert(std::endian::native == std::endian::little ||
                  std::endian::native == std::endian::big,
              "mixed-endian platforms are not supported");

template <typename T>
T to_little(T v) {
    if constexpr (std::endian::native == std::endian::big) {
        unsigned char bytes[sizeof(T)];
        std::memcpy(bytes, &v, sizeof(T));
        for (std::size_t i = 0; i < sizeof(T) / 2; ++i) {
            std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
        }
        std::memcpy(&v, bytes, sizeof(T));
    }
    return v;
}

void check_finite(const Matrix& m) {
    for (Index r = 0; r < m.rows(); ++r) {
        for (Index c = 0; c < m.cols(); ++c) {
            if (!std::isfinite(m(r, c))) {
                throw NonFiniteEntry(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
            }
        }
    }
}

double parse_cell(const std::string& cell, std::size_t row, std::size_t col) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(cell, &pos);
    } catch (const std::exception&) {
        throw IoError("csv: cannot parse '" + cell + "' at row " + std::to_string(row) +
                      ", col " + std::to_string(col));
    }
    while (pos < cell.size() && std::isspace(static_cast<unsigned char>(cell[pos]))) {
        ++pos;
    }
    if (pos != cell.size()) {
        throw IoError("csv: trailing characters in '" + cell + "' at row " +
                      std::to_string(row) + ", col " + std::to_string(col));
    }
    return v;
}

} // namespace

void Graph::validate() const {
    check_finite(values);
    if (adjacency) {
        if (adjacency->rows() != node_count() || adjacency->cols() != node_count()) {
            throw ShapeMismatch("adjacency must be " + std::to_string(node_count()) + "x" +
                                std::to_string(node_count()) + ", got " +
                                std::to_string(adjacency->rows()) + "x" +
                                std::to_string(adjacency->cols()));
        }
        check_finite(*adjacency);
        if ((adjacency->array() < 0.0).any()) {
            throw ConfigError("adjacency entries must be nonnegative");
        }
    }
}

Matrix read_csv_matrix(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    std::vector<double> data;
    std::size_t cols = 0;
    std::size_t rows = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        std::size_t n = 0;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            data.push_back(parse_cell(cell, rows, n));
            ++n;
        }
        if (rows == 0) {
            cols = n;
        } else if (n != cols) {
            throw ShapeMismatch("csv: row " + std::to_string(rows) + " has " + std::to_string(n) +
                                " columns, expected " + std::to_string(cols));
        }
        ++rows;
    }
    Matrix m(static_cast<Index>(rows), static_cast<Index>(cols));
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            m(static_cast<Index>(r), static_cast<Index>(c)) = data[r * cols + c];
        }
    }
    return m;
}

Matrix read_raw_f64(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    std::uint64_t header[2] = {0, 0};
    in.read(reinterpret_cast<char*>(header), sizeof(header));
    if (in.gcount() != static_cast<std::streamsize>(sizeof(header))) {
        throw ShapeMismatch("raw_f64: truncated header in " + path.string());
    }
    const std::uint64_t rows = to_little(header[0]);
    const std::uint64_t cols = to_little(header[1]);

    const auto expected = static_cast<std::uintmax_t>(sizeof(header) + rows * cols * sizeof(double));
    const auto actual = std::filesystem::file_size(path);
    if (actual != expected) {
        throw ShapeMismatch("raw_f64: header declares " + std::to_string(rows) + "x" +
                            std::to_string(cols) + " (" + std::to_string(expected) +
                            " bytes) but file has " + std::to_string(actual) + " bytes");
    }

    Matrix m(static_cast<Index>(rows), static_cast<Index>(cols));
    std::vector<double> row(cols);
    for (std::uint64_t r = 0; r < rows; ++r) {
        in.read(reinterpret_cast<char*>(row.data()),
                static_cast<std::streamsize>(cols * sizeof(double)));
        for (std::uint64_t c = 0; c < cols; ++c) {
            m(static_cast<Index>(r), static_cast<Index>(c)) = to_little(row[c]);
        }
    }
    return m;
}

void write_csv_matrix(const std::filesystem::path& path, const Matrix& m) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    out.precision(17);
    for (Index r = 0; r < m.rows(); ++r) {
        for (Index c = 0; c < m.cols(); ++c) {
            if (c) out << ',';
            out << m(r, c);
        }
        out << '\n';
    }
}

void write_raw_f64(const std::filesystem::path& path, const Matrix& m) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    const std::uint64_t header[2] = {to_little(static_cast<std::uint64_t>(m.rows())),
                                     to_little(static_cast<std::uint64_t>(m.cols()))};
    out.write(reinterpret_cast<const char*>(header), sizeof(header));
    std::vector<double> row(static_cast<std::size_t>(m.cols()));
    for (Index r = 0; r < m.rows(); ++r) {
        for (Index c = 0; c < m.cols(); ++c) {
            row[static_cast<std::size_t>(c)] = to_little(m(r, c));
        }
        out.write(reinterpret_cast<const char*>(row.data()),
                  static_cast<std::streamsize>(row.size() * sizeof(double)));
    }
    if (!out) {
        throw IoError("write failed for " + path.string());
    }
}

Graph load_graph(const std::filesystem::path& values_path,
                 const std::optional<std::filesystem::path>& adjacency_path,
                 GraphFormat format) {
    if (!std::filesystem::exists(values_path)) {
        throw IoError("no such file: " + values_path.string());
    }
    auto read = [format](const std::filesystem::path& p) {
        return format == GraphFormat::csv ? read_csv_matrix(p) : read_raw_f64(p);
    };
    Graph g;
    g.values = read(values_path);
    if (adjacency_path) {
        if (!std::filesystem::exists(*adjacency_path)) {
            throw IoError("no such file: " + adjacency_path->string());
        }
        g.adjacency = read(*adjacency_path);
    }
    g.validate();
    return g;
}

StreamSplit split_stream(Index length, SplitRatios ratios, Index in_len, Index out_len) {
    if (ratios.train <= 0 || ratios.val <= 0 || ratios.test <= 0) {
        throw ConfigError("split ratios must be positive");
    }
    if (in_len < 1 || out_len < 1) {
        throw ConfigError("window lengths must be positive");
    }
    const std::int64_t total = ratios.train + ratios.val + ratios.test;
    const std::int64_t t1 = static_cast<std::int64_t>(length) * ratios.train / total;
    const std::int64_t t2 = static_cast<std::int64_t>(length) * (ratios.train + ratios.val) / total;

    StreamSplit s{{0, t1}, {t1, t2}, {t2, static_cast<TimeIndex>(length)}, ratios};
    const TimeIndex need = in_len + out_len;
    const std::pair<const char*, TimeRange> ranges[] = {
        {"train", s.train}, {"val", s.val}, {"test", s.test}};
    for (const auto& [name, r] : ranges) {
        if (r.size() < need) {
            throw RangeTooShort(std::string(name) + " range length " + std::to_string(r.size()) +
                                " < " + std::to_string(need));
        }
    }
    return s;
}

} // namespace actnow
