#include "dense_eigen.hpp"

#include <limits>

#include <Eigen/Eigenvalues>

namespace perseg::oracle {

double dense_symmetric_min(const Eigen::MatrixXd& A) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

double dense_generalized_min(const Eigen::MatrixXd& A, const Eigen::VectorXd& w) {
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::MatrixXd(w.asDiagonal()),
                                                                 Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

double dense_min_real(const Eigen::MatrixXd& A) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(A, false);
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) best = std::min(best, es.eigenvalues()[i].real());
    return best;
}

}  // namespace perseg::oracle
