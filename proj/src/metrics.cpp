#include "mlgp/metrics.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <fstream>
#include <limits>

#include "mlgp/errors.hpp"

namespace mlgp {

namespace {

int nearest_other(const Matrix& points, int n) {
    int best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (int j = 0; j < points.rows(); ++j) {
        if (j == n) continue;
        double d = 0;
        for (int c = 0; c < points.cols(); ++c) {
            double diff = points(n, c) - points(j, c);
            d += diff * diff;
        }
        if (d < best_d) {
            best_d = d;
            best = j;
        }
    }
    return best;
}

void check_not_degenerate(const Matrix& points) {
    if (points.rows() < 2) throw DegenerateInput("need at least 2 points");
    for (int i = 1; i < points.rows(); ++i)
        for (int c = 0; c < points.cols(); ++c)
            if (points(i, c) != points(0, c)) return;
    throw DegenerateInput("all points identical");
}

}  // namespace

int one_nn_error(const Matrix& points, const std::vector<std::string>& labels) {
    if (int(labels.size()) != points.rows()) throw ShapeMismatch("one_nn_error labels length");
    check_not_degenerate(points);
    int errors = 0;
    for (int n = 0; n < points.rows(); ++n)
        if (labels[nearest_other(points, n)] != labels[n]) ++errors;
    return errors;
}

double one_nn_rmse(const Matrix& points, const std::vector<double>& targets) {
    if (int(targets.size()) != points.rows()) throw ShapeMismatch("one_nn_rmse targets length");
    check_not_degenerate(points);
    double se = 0;
    for (int n = 0; n < points.rows(); ++n) {
        double err = targets[nearest_other(points, n)] - targets[n];
        se += err * err;
    }
    return std::sqrt(se / points.rows());
}

Matrix pca_baseline(const Matrix& data, int k) {
    if (k < 1 || k > data.cols()) throw ShapeMismatch("pca_baseline k out of range");
    const int n = data.rows(), d = data.cols();
    Eigen::MatrixXd x(n, d);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) x(i, j) = data(i, j);
    Eigen::RowVectorXd mean = x.colwise().mean();
    x.rowwise() -= mean;
    Eigen::MatrixXd cov = (x.transpose() * x) / double(n > 1 ? n - 1 : 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    // eigenvalues ascending; take the last k columns in descending order
    Matrix out(n, k);
    for (int c = 0; c < k; ++c) {
        Eigen::VectorXd dir = es.eigenvectors().col(d - 1 - c);
        Eigen::VectorXd proj = x * dir;
        for (int i = 0; i < n; ++i) out(i, c) = proj(i);
    }
    return out;
}

void save_metrics_csv(const std::string& path, const std::vector<MetricsReport>& reports,
                      const std::string& header_comment) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write metrics file: " + path);
    if (!header_comment.empty()) out << "# " << header_comment << "\n";
    out << "metric,value,protocol,seed\n";
    out.precision(17);
    for (const auto& r : reports)
        out << r.metric << "," << r.value << "," << r.protocol << "," << r.seed << "\n";
}

}  // namespace mlgp
