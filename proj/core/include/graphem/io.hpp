#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "graphem/metrics.hpp"
#include "graphem/state_space.hpp"

namespace graphem {

/// Malformed CSV or configuration input; the message carries the file and
/// line number.
class ParseError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Writes via a temporary file in the same directory followed by a rename.
void write_file_atomic(const std::filesystem::path& path,
                       const std::string& content);

/// Shortest-exact decimal form capped at 17 significant digits; parses back
/// to the identical double.
std::string format_double(double value);

/// Observation CSV: header "t,y1,...,yNy", one row per time step, t = 1..K.
std::string observations_to_csv(const std::vector<Vector>& observations);
void write_observations_csv(const std::filesystem::path& path,
                            const std::vector<Vector>& observations);
std::vector<Vector> read_observations_csv(const std::filesystem::path& path);

/// Companion state CSV, header "t,x1,...,xNx".
void write_states_csv(const std::filesystem::path& path,
                      const std::vector<Vector>& states);
std::vector<Vector> read_states_csv(const std::filesystem::path& path);

/// Headerless numeric matrix, one CSV row per matrix row.
void write_matrix_csv(const std::filesystem::path& path, const Matrix& m);
Matrix read_matrix_csv(const std::filesystem::path& path);

/// 0/1 matrix in the same layout.
void write_adjacency_csv(const std::filesystem::path& path,
                         const BoolMatrix& adjacency);

/// Directed graph in DOT form: one edge per entry with |weight| >= threshold,
/// weight in the label, pen width scaled by |weight| (capped).
std::string to_dot(const Matrix& weights, double threshold = 1e-10);
/// Unweighted variant for binary detectors.
std::string to_dot(const BoolMatrix& adjacency);

/// K x N matrix view of an observation sequence (row k = y_{k+1}).
Matrix observations_as_series(const std::vector<Vector>& observations);

}  // namespace graphem
