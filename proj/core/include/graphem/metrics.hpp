#pragma once

#include <optional>
#include <string>

#include "graphem/granger.hpp"

namespace graphem {

/// Edge-detection scores of an estimate against a ground-truth adjacency,
/// counted over all N^2 positions including the diagonal.
struct EdgeReport {
    std::optional<double> rmse;  // absent for binary-only methods
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double specificity = 0.0;
    double f1 = 0.0;
    long tp = 0, fp = 0, tn = 0, fn = 0;
    bool degenerate = false;  // some rate had a zero denominator
};

/// Entry true iff |a| >= threshold.
BoolMatrix binarize(const Matrix& a, double threshold = 1e-10);

EdgeReport score(const Matrix& a_hat, const Matrix& a_true,
                 double threshold = 1e-10);
EdgeReport score(const BinaryGraph& graph, const Matrix& a_true,
                 double threshold = 1e-10);

/// Flat JSON object with the field names above; "rmse" is omitted when absent.
std::string to_json(const EdgeReport& report);

}  // namespace graphem
