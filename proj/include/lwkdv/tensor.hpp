#pragma once

#include "lwkdv/field.hpp"

#include <Eigen/Dense>
#include <vector>

namespace lwkdv {

// Bilinear map R^d x R^d -> R^d stored as c(i, j, k): out_k = sum_ij c(i,j,k) x_i y_j.
class Tensor3 {
public:
    explicit Tensor3(int dim = 1);

    int dim() const { return d_; }
    double& operator()(int i, int j, int k) { return c_[(i * d_ + j) * d_ + k]; }
    double operator()(int i, int j, int k) const { return c_[(i * d_ + j) * d_ + k]; }

    Eigen::VectorXd apply(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const;
    // Matrix of y -> apply(x, y).
    Eigen::MatrixXd partial(const Eigen::VectorXd& x) const;

    // Largest violation of symmetry under index permutations.
    double symmetry_defect() const;
    // Largest violation of c(i,j,k) = c(j,i,k).
    double input_symmetry_defect() const;
    Tensor3 symmetrized() const;

    // out -> M out
    Tensor3 map_output(const Eigen::MatrixXd& m) const;
    // Coordinates in the orthonormal basis given by the columns of r.
    Tensor3 change_basis(const Eigen::MatrixXd& r) const;

    double frobenius() const;
    double max_abs() const;

    Tensor3& operator+=(const Tensor3& o);
    Tensor3& operator*=(double s);

    static Tensor3 diagonal(int dim, double value);

private:
    int d_;
    std::vector<double> c_;
};

inline Tensor3 operator+(Tensor3 a, const Tensor3& b) { return a += b; }
inline Tensor3 operator*(double s, Tensor3 a) { return a *= s; }

// Pointwise evaluation on matching grids, no dealiasing.
Samples<double> apply_pointwise(const Tensor3& t, const Samples<double>& x, const Samples<double>& y);

// Pointwise product evaluated on a 3N/2 zero-padded grid.
RealField q_apply(const Tensor3& q, const RealField& u, const RealField& v);

}  // namespace lwkdv
