#include "lwkdv/spectral.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <stdexcept>

namespace lwkdv {

namespace {

Eigen::FFT<double>& fft_engine()
{
    thread_local Eigen::FFT<double> engine;
    return engine;
}

template <typename Scalar>
Eigen::VectorXcd as_complex(const Eigen::Array<Scalar, Eigen::Dynamic, 1>& col)
{
    return col.template cast<Complex>().matrix();
}

template <typename Scalar>
Scalar project(const Complex& z)
{
    if constexpr (std::is_same_v<Scalar, double>)
        return z.real();
    else
        return z;
}

// Copies modes |m| < n/2 of a length-n spectrum into a length-m spectrum (or back).
Eigen::ArrayXcd resize_spectrum(const Eigen::ArrayXcd& s, int m, int keep_half)
{
    const int n = static_cast<int>(s.size());
    Eigen::ArrayXcd out = Eigen::ArrayXcd::Zero(m);
    for (int j = 0; j < keep_half; ++j) out(j) = s(j);
    for (int j = 1; j < keep_half; ++j) out(m - j) = s(n - j);
    return out;
}

}  // namespace

Eigen::ArrayXcd fft_forward(const Eigen::ArrayXcd& x)
{
    Eigen::VectorXcd in = x.matrix(), out;
    fft_engine().fwd(out, in);
    return out.array();
}

Eigen::ArrayXcd fft_inverse(const Eigen::ArrayXcd& x)
{
    Eigen::VectorXcd in = x.matrix(), out;
    fft_engine().inv(out, in);
    return out.array();
}

template <typename Scalar>
Samples<Complex> to_spectrum(const Field<Scalar>& f)
{
    Samples<Complex> s(f.values.rows(), f.values.cols());
    for (int c = 0; c < f.dim(); ++c) {
        Eigen::Array<Scalar, Eigen::Dynamic, 1> col = f.values.col(c);
        s.col(c) = fft_forward(as_complex<Scalar>(col).array());
    }
    return s;
}

template <typename Scalar>
Field<Scalar> from_spectrum(const Grid& grid, const Samples<Complex>& spectrum)
{
    Field<Scalar> out(grid, static_cast<int>(spectrum.cols()));
    for (int c = 0; c < spectrum.cols(); ++c) {
        Eigen::ArrayXcd x = fft_inverse(spectrum.col(c));
        for (int j = 0; j < grid.size(); ++j) out.values(j, c) = project<Scalar>(x(j));
    }
    return out;
}

template <typename Scalar>
Field<Scalar> spectral_derivative(const Field<Scalar>& f, int order)
{
    if (order < 0 || order > 4) throw std::invalid_argument("derivative order must be in [0, 4]");
    if (!f.all_finite()) throw std::domain_error("spectral_derivative: non-finite samples");
    if (order == 0) return f;
    const Eigen::ArrayXd k = f.grid.wavenumbers();
    Eigen::ArrayXcd mult(k.size());
    for (int j = 0; j < k.size(); ++j) mult(j) = std::pow(Complex(0.0, k(j)), order);
    if (order % 2 == 1) mult(f.grid.nyquist_index()) = 0.0;
    Samples<Complex> s = to_spectrum(f);
    s.colwise() *= mult;
    return from_spectrum<Scalar>(f.grid, s);
}

template <typename Scalar>
std::vector<double> hs_seminorms(const Field<Scalar>& f, int s)
{
    if (s < 0) throw std::invalid_argument("negative Sobolev index");
    const int n = f.grid.size();
    const Eigen::ArrayXd k = f.grid.wavenumbers();
    const Samples<Complex> spec = to_spectrum(f);
    const Eigen::ArrayXd power = spec.abs2().rowwise().sum() / (double(n) * n);
    std::vector<double> out;
    for (int j = 0; j <= s; ++j) {
        Eigen::ArrayXd w = k.abs().pow(2 * j);
        if (j % 2 == 1) w(f.grid.nyquist_index()) = 0.0;
        out.push_back(std::sqrt(f.grid.length() * (w * power).sum()));
    }
    return out;
}

DiagonalOperator::DiagonalOperator(const Grid& grid, const Symbol& symbol) : grid_(grid)
{
    const Eigen::ArrayXd k = grid.wavenumbers();
    symbol_.resize(k.size());
    for (int j = 0; j < k.size(); ++j) symbol_(j) = symbol(k(j));
    // The Nyquist mode is its own +-k partner: keep only the even part, as odd derivatives do.
    const int nyq = grid.nyquist_index();
    symbol_(nyq) = 0.5 * (symbol(k(nyq)) + symbol(-k(nyq)));
    if (!symbol_.allFinite()) throw std::domain_error("symbol is not finite");
}

Eigen::ArrayXcd DiagonalOperator::multiplier(double tau, bool real_compatible) const
{
    const int n = grid_.size();
    if ((symbol_.real() * tau).maxCoeff() > 700.0) throw std::overflow_error("linear propagator overflows");
    Eigen::ArrayXcd m = (symbol_ * tau).exp();
    if (real_compatible) {
        m(0) = m(0).real();
        m(n / 2) = m(n / 2).real();
        for (int j = 1; j < n / 2; ++j) m(n - j) = std::conj(m(j));
    }
    return m;
}

template <typename Scalar>
Field<Scalar> DiagonalOperator::propagate(const Field<Scalar>& f, double tau) const
{
    if (f.grid != grid_) throw std::invalid_argument("grid mismatch");
    const Eigen::ArrayXcd m = multiplier(tau, std::is_same_v<Scalar, double>);
    Samples<Complex> s = to_spectrum(f);
    s.colwise() *= m;
    return from_spectrum<Scalar>(f.grid, s);
}

template <typename Scalar>
Field<Scalar> advance_linear(const Field<Scalar>& f, const Symbol& symbol, double dt)
{
    return DiagonalOperator(f.grid, symbol).propagate(f, dt);
}

template <typename Scalar>
Samples<Scalar> upsample(const Field<Scalar>& f, int m)
{
    const int n = f.grid.size();
    if (m < n) throw std::invalid_argument("upsample target smaller than grid");
    const Samples<Complex> s = to_spectrum(f);
    Samples<Scalar> out(m, f.dim());
    for (int c = 0; c < f.dim(); ++c) {
        Eigen::ArrayXcd big = resize_spectrum(s.col(c), m, n / 2) * (double(m) / n);
        Eigen::ArrayXcd x = fft_inverse(big);
        for (int j = 0; j < m; ++j) out(j, c) = project<Scalar>(x(j));
    }
    return out;
}

template <typename Scalar>
Field<Scalar> downsample(const Grid& grid, const Samples<Scalar>& fine)
{
    const int n = grid.size();
    const int m = static_cast<int>(fine.rows());
    if (m < n) throw std::invalid_argument("downsample source smaller than grid");
    Samples<Complex> s(n, fine.cols());
    for (int c = 0; c < fine.cols(); ++c) {
        Eigen::Array<Scalar, Eigen::Dynamic, 1> col = fine.col(c);
        Eigen::ArrayXcd big = fft_forward(as_complex<Scalar>(col).array());
        s.col(c) = resize_spectrum(big, n, n / 2) * (double(n) / m);
    }
    return from_spectrum<Scalar>(grid, s);
}

template <typename Scalar>
Field<Scalar> translate(const Field<Scalar>& f, double shift)
{
    return advance_linear(f, [](double k) { return Complex(0.0, -k); }, shift);
}

RealField antiderivative(const RealField& f)
{
    const Eigen::ArrayXd k = f.grid.wavenumbers();
    Samples<Complex> s = to_spectrum(f);
    Eigen::ArrayXcd mult = Eigen::ArrayXcd::Zero(k.size());
    for (int j = 1; j < k.size(); ++j)
        if (j != f.grid.nyquist_index()) mult(j) = 1.0 / Complex(0.0, k(j));
    s.colwise() *= mult;
    return from_spectrum<double>(f.grid, s);
}

double integral(const RealField& f, int component)
{
    return f.values.col(component).sum() * f.grid.spacing();
}

Eigen::VectorXd means(const RealField& f)
{
    return f.values.colwise().mean().matrix().transpose();
}

template <typename Scalar>
double l2_norm(const Field<Scalar>& f)
{
    return std::sqrt(f.values.abs2().sum() * f.grid.spacing());
}

template <typename Scalar>
double sup_norm(const Field<Scalar>& f)
{
    return f.values.abs2().rowwise().sum().sqrt().maxCoeff();
}

#define LWKDV_SPECTRAL_INSTANTIATE(S)                                                      \
    template Samples<Complex> to_spectrum<S>(const Field<S>&);                             \
    template Field<S> from_spectrum<S>(const Grid&, const Samples<Complex>&);              \
    template Field<S> spectral_derivative<S>(const Field<S>&, int);                        \
    template std::vector<double> hs_seminorms<S>(const Field<S>&, int);                    \
    template Field<S> DiagonalOperator::propagate<S>(const Field<S>&, double) const;       \
    template Field<S> advance_linear<S>(const Field<S>&, const Symbol&, double);           \
    template Samples<S> upsample<S>(const Field<S>&, int);                                 \
    template Field<S> downsample<S>(const Grid&, const Samples<S>&);                       \
    template Field<S> translate<S>(const Field<S>&, double);                               \
    template double l2_norm<S>(const Field<S>&);                                           \
    template double sup_norm<S>(const Field<S>&);

LWKDV_SPECTRAL_INSTANTIATE(double)
LWKDV_SPECTRAL_INSTANTIATE(Complex)

}  // namespace lwkdv
