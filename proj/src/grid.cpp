#include "lwkdv/field.hpp"

#include <cmath>
#include <numbers>

namespace lwkdv {

Grid::Grid(int n_points, double length) : n_(n_points), length_(length)
{
    if (n_points < 8 || n_points % 2 != 0) throw std::invalid_argument("grid needs an even N >= 8");
    if (!(length > 0.0) || !std::isfinite(length)) throw std::invalid_argument("grid length must be positive");
}

Eigen::ArrayXd Grid::points() const
{
    return Eigen::ArrayXd::LinSpaced(n_, 0.0, spacing() * (n_ - 1));
}

Eigen::ArrayXd Grid::wavenumbers() const
{
    Eigen::ArrayXd k(n_);
    const double dk = 2.0 * std::numbers::pi / length_;
    for (int j = 0; j < n_; ++j) k(j) = dk * (j < n_ / 2 ? j : j - n_);
    return k;
}

}  // namespace lwkdv
