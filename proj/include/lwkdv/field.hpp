#pragma once

#include <Eigen/Core>
#include <complex>
#include <stdexcept>

namespace lwkdv {

using Complex = std::complex<double>;

// N x d samples, one column per component.
template <typename Scalar>
using Samples = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

class Grid {
public:
    Grid(int n_points, double length);

    int size() const { return n_; }
    double length() const { return length_; }
    double spacing() const { return length_ / n_; }

    Eigen::ArrayXd points() const;
    // Angular wavenumbers in FFT order; index n/2 is the Nyquist mode.
    Eigen::ArrayXd wavenumbers() const;
    int nyquist_index() const { return n_ / 2; }

    bool operator==(const Grid& o) const { return n_ == o.n_ && length_ == o.length_; }
    bool operator!=(const Grid& o) const { return !(*this == o); }

private:
    int n_;
    double length_;
};

template <typename Scalar>
struct Field {
    Grid grid;
    Samples<Scalar> values;

    Field(const Grid& g, int dim) : grid(g), values(Samples<Scalar>::Zero(g.size(), dim))
    {
        if (dim < 1) throw std::invalid_argument("field dimension must be positive");
    }

    Field(const Grid& g, Samples<Scalar> v) : grid(g), values(std::move(v))
    {
        if (values.rows() != g.size()) throw std::invalid_argument("sample count does not match grid");
        if (values.cols() < 1) throw std::invalid_argument("field dimension must be positive");
    }

    int dim() const { return static_cast<int>(values.cols()); }
    bool all_finite() const { return values.allFinite(); }

    Field& operator+=(const Field& o)
    {
        check_compatible(o);
        values += o.values;
        return *this;
    }
    Field& operator-=(const Field& o)
    {
        check_compatible(o);
        values -= o.values;
        return *this;
    }
    Field& operator*=(double s)
    {
        values *= s;
        return *this;
    }

    void check_compatible(const Field& o) const
    {
        if (grid != o.grid || dim() != o.dim()) throw std::invalid_argument("incompatible fields");
    }
};

template <typename Scalar>
Field<Scalar> operator+(Field<Scalar> a, const Field<Scalar>& b) { return a += b; }
template <typename Scalar>
Field<Scalar> operator-(Field<Scalar> a, const Field<Scalar>& b) { return a -= b; }
template <typename Scalar>
Field<Scalar> operator*(double s, Field<Scalar> a) { return a *= s; }
template <typename Scalar>
Field<Scalar> operator*(Field<Scalar> a, double s) { return a *= s; }

template <typename Scalar>
bool all_finite(const Field<Scalar>& f) { return f.all_finite(); }
inline bool all_finite(double x) { return std::isfinite(x); }

using RealField = Field<double>;
using ComplexField = Field<Complex>;

}  // namespace lwkdv
