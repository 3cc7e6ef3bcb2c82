#include "graphem/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <random>
#include <sstream>
#include <system_error>

namespace graphem {

namespace fs = std::filesystem;

void write_file_atomic(const fs::path& path, const std::string& content) {
    fs::path dir = path.parent_path();
    if (!dir.empty()) fs::create_directories(dir);
    fs::path tmp = path;
    tmp += ".tmp-" + std::to_string(std::random_device{}());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw std::runtime_error("cannot open " + tmp.string() +
                                     " for writing");
        }
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) {
            std::error_code ec;
            fs::remove(tmp, ec);
            throw std::runtime_error("write failed for " + tmp.string());
        }
    }
    fs::rename(tmp, path);
}

std::string format_double(double value) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), value,
                             std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

namespace {

double parse_double(std::string_view text, const fs::path& path, int line) {
    double value = 0.0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    auto res = std::from_chars(begin, end, value);
    if (res.ec != std::errc{} || res.ptr != end) {
        throw ParseError(path.string() + ":" + std::to_string(line) +
                         ": not a number: '" + std::string(text) + "'");
    }
    return value;
}

std::vector<std::string_view> split_csv_line(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

std::string sequence_csv(const std::vector<Vector>& rows, char prefix) {
    std::string out = "t";
    const auto dim = rows.empty() ? 0 : rows.front().size();
    for (Eigen::Index i = 1; i <= dim; ++i) {
        out += ',';
        out += prefix;
        out += std::to_string(i);
    }
    out += '\n';
    for (std::size_t k = 0; k < rows.size(); ++k) {
        out += std::to_string(k + 1);
        for (Eigen::Index i = 0; i < rows[k].size(); ++i) {
            out += ',';
            out += format_double(rows[k](i));
        }
        out += '\n';
    }
    return out;
}

std::vector<Vector> read_sequence_csv(const fs::path& path, char prefix) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path.string());

    std::string line;
    if (!std::getline(in, line)) {
        throw ParseError(path.string() + ":1: missing header row");
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto header = split_csv_line(line);
    if (header.empty() || header[0] != "t") {
        throw ParseError(path.string() + ":1: header must start with 't'");
    }
    for (std::size_t i = 1; i < header.size(); ++i) {
        const std::string expect = prefix + std::to_string(i);
        if (header[i] != expect) {
            throw ParseError(path.string() + ":1: expected column '" + expect +
                             "', found '" + std::string(header[i]) + "'");
        }
    }
    const std::size_t dim = header.size() - 1;
    if (dim == 0) throw ParseError(path.string() + ":1: no value columns");

    std::vector<Vector> rows;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != dim + 1) {
            throw ParseError(path.string() + ":" + std::to_string(line_no) +
                             ": expected " + std::to_string(dim + 1) +
                             " fields, found " + std::to_string(fields.size()));
        }
        Vector v(dim);
        for (std::size_t i = 0; i < dim; ++i) {
            v(static_cast<Eigen::Index>(i)) =
                parse_double(fields[i + 1], path, line_no);
        }
        rows.push_back(std::move(v));
    }
    if (rows.empty()) {
        throw ParseError(path.string() + ": no data rows");
    }
    return rows;
}

}  // namespace

std::string observations_to_csv(const std::vector<Vector>& observations) {
    return sequence_csv(observations, 'y');
}

void write_observations_csv(const fs::path& path,
                            const std::vector<Vector>& observations) {
    write_file_atomic(path, sequence_csv(observations, 'y'));
}

std::vector<Vector> read_observations_csv(const fs::path& path) {
    return read_sequence_csv(path, 'y');
}

void write_states_csv(const fs::path& path, const std::vector<Vector>& states) {
    write_file_atomic(path, sequence_csv(states, 'x'));
}

std::vector<Vector> read_states_csv(const fs::path& path) {
    return read_sequence_csv(path, 'x');
}

void write_matrix_csv(const fs::path& path, const Matrix& m) {
    std::string out;
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            if (c > 0) out += ',';
            out += format_double(m(r, c));
        }
        out += '\n';
    }
    write_file_atomic(path, out);
}

Matrix read_matrix_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path.string());

    std::vector<std::vector<double>> rows;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        std::vector<double> row;
        row.reserve(fields.size());
        for (const auto& field : fields) {
            row.push_back(parse_double(field, path, line_no));
        }
        if (!rows.empty() && row.size() != rows.front().size()) {
            throw ParseError(path.string() + ":" + std::to_string(line_no) +
                             ": ragged row");
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ParseError(path.string() + ": empty matrix");

    Matrix m(rows.size(), rows.front().size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < rows[r].size(); ++c) {
            m(r, c) = rows[r][c];
        }
    }
    return m;
}

void write_adjacency_csv(const fs::path& path, const BoolMatrix& adjacency) {
    std::string out;
    for (Eigen::Index r = 0; r < adjacency.rows(); ++r) {
        for (Eigen::Index c = 0; c < adjacency.cols(); ++c) {
            if (c > 0) out += ',';
            out += adjacency(r, c) ? '1' : '0';
        }
        out += '\n';
    }
    write_file_atomic(path, out);
}

namespace {

std::string format_label(double value) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), value,
                             std::chars_format::general, 3);
    return std::string(buf, res.ptr);
}

double pen_width(double weight) {
    return std::min(0.5 + 4.0 * std::abs(weight), 4.5);
}

std::string dot_prologue(Eigen::Index n) {
    std::string out = "digraph G {\n  rankdir=LR;\n  node [shape=circle];\n";
    for (Eigen::Index i = 1; i <= n; ++i) {
        out += "  x" + std::to_string(i) + ";\n";
    }
    return out;
}

}  // namespace

std::string to_dot(const Matrix& weights, double threshold) {
    std::string out = dot_prologue(weights.rows());
    // adjacency(n, m): m drives n, so the arrow runs m -> n
    for (Eigen::Index n = 0; n < weights.rows(); ++n) {
        for (Eigen::Index m = 0; m < weights.cols(); ++m) {
            const double w = weights(n, m);
            if (std::abs(w) < threshold) continue;
            out += "  x" + std::to_string(m + 1) + " -> x" +
                   std::to_string(n + 1) + " [label=\"" + format_label(w) +
                   "\", penwidth=" + format_label(pen_width(w)) + "];\n";
        }
    }
    out += "}\n";
    return out;
}

std::string to_dot(const BoolMatrix& adjacency) {
    std::string out = dot_prologue(adjacency.rows());
    for (Eigen::Index n = 0; n < adjacency.rows(); ++n) {
        for (Eigen::Index m = 0; m < adjacency.cols(); ++m) {
            if (!adjacency(n, m)) continue;
            out += "  x" + std::to_string(m + 1) + " -> x" +
                   std::to_string(n + 1) + ";\n";
        }
    }
    out += "}\n";
    return out;
}

Matrix observations_as_series(const std::vector<Vector>& observations) {
    if (observations.empty()) return Matrix(0, 0);
    Matrix series(observations.size(), observations.front().size());
    for (std::size_t k = 0; k < observations.size(); ++k) {
        series.row(k) = observations[k].transpose();
    }
    return series;
}

}  // namespace graphem
