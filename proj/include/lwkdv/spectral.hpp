#pragma once

#include "lwkdv/field.hpp"

#include <functional>
#include <vector>

namespace lwkdv {

// Unnormalized forward DFT and normalized inverse of a single column.
Eigen::ArrayXcd fft_forward(const Eigen::ArrayXcd& x);
Eigen::ArrayXcd fft_inverse(const Eigen::ArrayXcd& x);

template <typename Scalar>
Samples<Complex> to_spectrum(const Field<Scalar>& f);

// Real fields keep the real part of the inverse transform.
template <typename Scalar>
Field<Scalar> from_spectrum(const Grid& grid, const Samples<Complex>& spectrum);

// Odd orders zero the Nyquist coefficient.
template <typename Scalar>
Field<Scalar> spectral_derivative(const Field<Scalar>& f, int order);

// Entry j is the L2 norm of the j-th derivative, summed over components.
template <typename Scalar>
std::vector<double> hs_seminorms(const Field<Scalar>& f, int s);

using Symbol = std::function<Complex(double)>;

// exp(symbol(k) * tau) per Fourier mode.
class DiagonalOperator {
public:
    DiagonalOperator(const Grid& grid, const Symbol& symbol);

    const Grid& grid() const { return grid_; }
    const Eigen::ArrayXcd& symbol_values() const { return symbol_; }

    template <typename Scalar>
    Field<Scalar> propagate(const Field<Scalar>& f, double tau) const;

    // Multiplier with conjugate symmetry enforced, as used on real fields.
    Eigen::ArrayXcd multiplier(double tau, bool real_compatible) const;

private:
    Grid grid_;
    Eigen::ArrayXcd symbol_;
};

template <typename Scalar>
Field<Scalar> advance_linear(const Field<Scalar>& f, const Symbol& symbol, double dt);

// Band-limited interpolation onto m >= N points and projection back to N modes.
template <typename Scalar>
Samples<Scalar> upsample(const Field<Scalar>& f, int m);
template <typename Scalar>
Field<Scalar> downsample(const Grid& grid, const Samples<Scalar>& fine);

// f(x - shift), exact for band-limited data.
template <typename Scalar>
Field<Scalar> translate(const Field<Scalar>& f, double shift);

// Spectral antiderivative of a zero-mean field; the result has zero mean.
RealField antiderivative(const RealField& f);

double integral(const RealField& f, int component = 0);
Eigen::VectorXd means(const RealField& f);

template <typename Scalar>
double l2_norm(const Field<Scalar>& f);
template <typename Scalar>
double sup_norm(const Field<Scalar>& f);

}  // namespace lwkdv
