#include "graphem/metrics.hpp"

#include <cmath>
#include <stdexcept>

#include "json.hpp"

namespace graphem {

namespace {

EdgeReport score_binary(const BoolMatrix& estimate, const BoolMatrix& truth) {
    EdgeReport report;
    for (Eigen::Index r = 0; r < truth.rows(); ++r) {
        for (Eigen::Index c = 0; c < truth.cols(); ++c) {
            if (truth(r, c)) {
                estimate(r, c) ? ++report.tp : ++report.fn;
            } else {
                estimate(r, c) ? ++report.fp : ++report.tn;
            }
        }
    }
    const long total = report.tp + report.fp + report.tn + report.fn;
    auto rate = [&report](long num, long den) {
        if (den == 0) {
            report.degenerate = true;
            return 0.0;
        }
        return static_cast<double>(num) / static_cast<double>(den);
    };
    report.accuracy = rate(report.tp + report.tn, total);
    report.precision = rate(report.tp, report.tp + report.fp);
    report.recall = rate(report.tp, report.tp + report.fn);
    report.specificity = rate(report.tn, report.tn + report.fp);
    if (report.precision + report.recall > 0) {
        report.f1 = 2.0 * report.precision * report.recall /
                    (report.precision + report.recall);
    } else {
        report.f1 = 0.0;
        report.degenerate = true;
    }
    return report;
}

}  // namespace

BoolMatrix binarize(const Matrix& a, double threshold) {
    if (threshold < 0) throw std::invalid_argument("threshold must be >= 0");
    return (a.cwiseAbs().array() >= threshold).matrix();
}

EdgeReport score(const Matrix& a_hat, const Matrix& a_true, double threshold) {
    if (a_hat.rows() != a_true.rows() || a_hat.cols() != a_true.cols()) {
        throw std::invalid_argument("estimate and truth shapes differ");
    }
    EdgeReport report =
        score_binary(binarize(a_hat, threshold), binarize(a_true, threshold));
    report.rmse = std::sqrt((a_hat - a_true).squaredNorm() /
                            static_cast<double>(a_true.size()));
    return report;
}

EdgeReport score(const BinaryGraph& graph, const Matrix& a_true,
                 double threshold) {
    if (graph.adjacency.rows() != a_true.rows() ||
        graph.adjacency.cols() != a_true.cols()) {
        throw std::invalid_argument("estimate and truth shapes differ");
    }
    return score_binary(graph.adjacency, binarize(a_true, threshold));
}

std::string to_json(const EdgeReport& report) {
    nlohmann::ordered_json j;
    if (report.rmse) j["rmse"] = *report.rmse;
    j["accuracy"] = report.accuracy;
    j["precision"] = report.precision;
    j["recall"] = report.recall;
    j["specificity"] = report.specificity;
    j["f1"] = report.f1;
    j["tp"] = report.tp;
    j["fp"] = report.fp;
    j["tn"] = report.tn;
    j["fn"] = report.fn;
    j["degenerate"] = report.degenerate;
    return j.dump();
}

}  // namespace graphem
