#include <cmath>

#include "hsnl/errors.hpp"
#include "hsnl/symbols.hpp"

namespace hsnl {

namespace {

// Columns v_1..v_{d-1} completing mu (mu_1 > 0) to an orthonormal basis, built by
// induction on the dimension: lift the basis of the normalized leading block and add
// one vector mixing it with the last coordinate.
Eigen::MatrixXd complement(const Eigen::VectorXd& mu) {
    const Eigen::Index d = mu.size();
    if (d == 1) return Eigen::MatrixXd(1, 0);
    const double last = mu[d - 1];
    const Eigen::VectorXd head = mu.head(d - 1);
    const double head_norm = head.norm();
    const Eigen::VectorXd unit_head = head / head_norm;
    const Eigen::MatrixXd lower = complement(unit_head);

    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(d, d - 1);
    out.topLeftCorner(d - 1, d - 2) = lower;
    const double sgn = last >= 0.0 ? 1.0 : -1.0;
    out.col(d - 2).head(d - 1) = std::abs(last) * unit_head;
    out(d - 1, d - 2) = -sgn * head_norm;
    return out;
}

}  // namespace

double OrthoBasis::orthonormality_defect() const {
    const Eigen::MatrixXd g = matrix.transpose() * matrix - Eigen::MatrixXd::Identity(matrix.cols(), matrix.cols());
    return g.cwiseAbs().maxCoeff();
}

double OrthoBasis::first_row_formula(const Eigen::VectorXd& mu, int k) {
    const double a = mu.head(k).norm();
    const double b = mu.head(k + 1).norm();
    return mu[0] * std::abs(mu[k]) / (a * b);
}

OrthoBasis ortho_basis(const Eigen::VectorXd& mu) {
    if (mu.size() < 2) throw DomainError("orthonormal completion needs d >= 2");
    if (std::abs(mu.norm() - 1.0) > 1e-10) throw DomainError("mu must be a unit vector");
    if (!(mu[0] > 0.0)) throw DomainError("orthonormal completion requires mu_1 > 0");
    OrthoBasis out;
    out.mu = mu;
    const Eigen::Index d = mu.size();
    out.matrix.resize(d, d);
    out.matrix.leftCols(d - 1) = complement(mu);
    out.matrix.col(d - 1) = mu;
    return out;
}

}  // namespace hsnl
