#include "lwkdv/tensor.hpp"
#include "lwkdv/spectral.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace lwkdv {

Tensor3::Tensor3(int dim) : d_(dim), c_(static_cast<size_t>(dim) * dim * dim, 0.0)
{
    if (dim < 1) throw std::invalid_argument("tensor dimension must be positive");
}

Eigen::VectorXd Tensor3::apply(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const
{
    return partial(x) * y;
}

Eigen::MatrixXd Tensor3::partial(const Eigen::VectorXd& x) const
{
    if (x.size() != d_) throw std::invalid_argument("vector dimension mismatch");
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(d_, d_);
    for (int i = 0; i < d_; ++i)
        for (int j = 0; j < d_; ++j)
            for (int k = 0; k < d_; ++k) m(k, j) += (*this)(i, j, k) * x(i);
    return m;
}

double Tensor3::symmetry_defect() const
{
    double worst = 0.0;
    for (int i = 0; i < d_; ++i)
        for (int j = 0; j < d_; ++j)
            for (int k = 0; k < d_; ++k) {
                const double v = (*this)(i, j, k);
                worst = std::max({worst, std::abs(v - (*this)(j, i, k)), std::abs(v - (*this)(i, k, j)),
                                  std::abs(v - (*this)(k, j, i))});
            }
    return worst;
}

double Tensor3::input_symmetry_defect() const
{
    double worst = 0.0;
    for (int i = 0; i < d_; ++i)
        for (int j = 0; j < d_; ++j)
            for (int k = 0; k < d_; ++k) worst = std::max(worst, std::abs((*this)(i, j, k) - (*this)(j, i, k)));
    return worst;
}

Tensor3 Tensor3::symmetrized() const
{
    Tensor3 s(d_);
    for (int i = 0; i < d_; ++i)
        for (int j = 0; j < d_; ++j)
            for (int k = 0; k < d_; ++k) {
                const auto& t = *this;
                s(i, j, k) = (t(i, j, k) + t(j, i, k) + t(i, k, j) + t(k, j, i) + t(j, k, i) + t(k, i, j)) / 6.0;
            }
    return s;
}

Tensor3 Tensor3::map_output(const Eigen::MatrixXd& m) const
{
    if (m.rows() != d_ || m.cols() != d_) throw std::invalid_argument("matrix dimension mismatch");
    Tensor3 out(d_);
    for (int i = 0; i < d_; ++i)
        for (int j = 0; j < d_; ++j)
            for (int k = 0; k < d_; ++k)
                for (int l = 0; l < d_; ++l) out(i, j, k) += m(k, l) * (*this)(i, j, l);
    return out;
}

Tensor3 Tensor3::change_basis(const Eigen::MatrixXd& r) const
{
    if (r.rows() != d_ || r.cols() != d_) throw std::invalid_argument("matrix dimension mismatch");
    Tensor3 out(d_);
    for (int a = 0; a < d_; ++a)
        for (int b = 0; b < d_; ++b) {
            Eigen::VectorXd v = apply(r.col(a), r.col(b));
            Eigen::VectorXd w = r.transpose() * v;
            for (int c = 0; c < d_; ++c) out(a, b, c) = w(c);
        }
    return out;
}

double Tensor3::frobenius() const
{
    double s = 0.0;
    for (double v : c_) s += v * v;
    return std::sqrt(s);
}

double Tensor3::max_abs() const
{
    double s = 0.0;
    for (double v : c_) s = std::max(s, std::abs(v));
    return s;
}

Tensor3& Tensor3::operator+=(const Tensor3& o)
{
    if (o.d_ != d_) throw std::invalid_argument("tensor dimension mismatch");
    for (size_t n = 0; n < c_.size(); ++n) c_[n] += o.c_[n];
    return *this;
}

Tensor3& Tensor3::operator*=(double s)
{
    for (double& v : c_) v *= s;
    return *this;
}

Tensor3 Tensor3::diagonal(int dim, double value)
{
    Tensor3 t(dim);
    for (int k = 0; k < dim; ++k) t(k, k, k) = value;
    return t;
}

Samples<double> apply_pointwise(const Tensor3& t, const Samples<double>& x, const Samples<double>& y)
{
    const int d = t.dim();
    if (x.cols() != d || y.cols() != d || x.rows() != y.rows()) throw std::invalid_argument("operand shape mismatch");
    Samples<double> out = Samples<double>::Zero(x.rows(), d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            bool any = false;
            for (int k = 0; k < d; ++k) any = any || t(i, j, k) != 0.0;
            if (!any) continue;
            const Eigen::ArrayXd prod = x.col(i) * y.col(j);
            for (int k = 0; k < d; ++k)
                if (t(i, j, k) != 0.0) out.col(k) += t(i, j, k) * prod;
        }
    return out;
}

RealField q_apply(const Tensor3& q, const RealField& u, const RealField& v)
{
    u.check_compatible(v);
    const int m = 3 * u.grid.size() / 2;
    return downsample(u.grid, apply_pointwise(q, upsample(u, m), upsample(v, m)));
}

}  // namespace lwkdv
