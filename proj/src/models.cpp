#include "lwkdv/models.hpp"

#include <cmath>
#include <stdexcept>

namespace lwkdv {

std::string to_string(ModelKind kind)
{
    switch (kind) {
    case ModelKind::gp_scalar: return "gp_scalar";
    case ModelKind::gp_coupled: return "gp_coupled";
    case ModelKind::ll_easy_plane: return "ll_easy_plane";
    case ModelKind::ll_easy_cone: return "ll_easy_cone";
    case ModelKind::af_chain: return "af_chain";
    }
    return "unknown";
}

ModelKind parse_model_kind(const std::string& name)
{
    for (ModelKind k : {ModelKind::gp_scalar, ModelKind::gp_coupled, ModelKind::ll_easy_plane, ModelKind::ll_easy_cone,
                        ModelKind::af_chain})
        if (to_string(k) == name) return k;
    throw std::invalid_argument("unknown model preset '" + name + "'");
}

void GeometryData::validate() const
{
    auto fail = [](const std::string& m) { throw std::invalid_argument("geometry: " + m); };
    if (dim < 1) fail("dimension must be positive");
    if (!(lambda > 0.0)) fail("lambda must be positive");
    if (!(mu >= 0.0 && mu < lambda)) fail("need 0 <= mu < lambda");
    if (!(c > 0.0)) fail("c must be positive");
    if (std::abs(c * c - (lambda - mu)) > 1e-12 * std::max(1.0, lambda)) fail("c^2 must equal lambda - mu");
    if (i0b0.rows() != dim || i0b0.cols() != dim) fail("i0B0 has the wrong shape");
    if (ii_perp.dim() != dim || f1.dim() != dim) fail("tensor dimension mismatch");
    const double scale = std::max(1.0, i0b0.cwiseAbs().maxCoeff());
    if ((i0b0 + i0b0.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) fail("i0B0 must be skew-symmetric");
    const Eigen::MatrixXd sq = i0b0 * i0b0 + mu * Eigen::MatrixXd::Identity(dim, dim);
    if (sq.cwiseAbs().maxCoeff() > 1e-12 * scale * scale) fail("(i0B0)^2 must equal -mu Id");
    if (ii_perp.symmetry_defect() > 1e-12 * std::max(1.0, ii_perp.max_abs())) fail("i0 II_perp must be fully symmetric");
    if (f1.input_symmetry_defect() > 1e-12 * std::max(1.0, f1.max_abs())) fail("F1 must be symmetric in its arguments");
}

ModelParams ModelParams::from_map(const std::map<std::string, double>& values)
{
    ModelParams p;
    double coupling = 0.0;
    for (const auto& [key, v] : values) {
        if (key == "K") p.K = v;
        else if (key == "alpha") p.alpha = v;
        else if (key == "beta") p.beta = v;
        else if (key == "theta0") p.theta0 = v;
        else if (key == "lambda") p.lambda = v;
        else if (key == "components") p.components = static_cast<int>(v);
        else if (key == "quartic") p.quartic = v;
        else if (key == "coupling") coupling = v;
        else throw std::invalid_argument("unknown model parameter '" + key + "'");
    }
    if (p.components < 1) throw std::invalid_argument("components must be positive");
    // Uncoupled cubic terms plus a symmetric cross coupling.
    const int d = p.components;
    p.f1 = Tensor3::diagonal(d, 3.0);
    for (int i = 0; i < d; ++i)
        for (int k = 0; k < d; ++k)
            if (i != k) {
                p.f1(i, i, k) += coupling;
                p.f1(i, k, i) += coupling;
                p.f1(k, i, i) += coupling;
            }
    return p;
}

int MicroModelSpec::components() const
{
    switch (kind) {
    case ModelKind::gp_scalar: return 1;
    case ModelKind::gp_coupled: return params.components;
    case ModelKind::ll_easy_plane:
    case ModelKind::ll_easy_cone: return 3;
    case ModelKind::af_chain: return 6;
    }
    return 0;
}

double MicroModelSpec::gp_potential(const Eigen::VectorXd& s) const
{
    if (kind == ModelKind::gp_scalar) {
        const double r2 = (1.0 + s(0)) * (1.0 + s(0));
        return 0.25 * (1.0 - r2) * (1.0 - r2);
    }
    double v = params.lambda * s.squaredNorm() + params.f1.apply(s, s).dot(s) / 3.0;
    for (int k = 0; k < s.size(); ++k) v += params.quartic * std::pow(s(k), 4);
    return v;
}

Eigen::VectorXd MicroModelSpec::gp_potential_gradient(const Eigen::VectorXd& s) const
{
    if (kind == ModelKind::gp_scalar) {
        const double r = 1.0 + s(0);
        return Eigen::VectorXd::Constant(1, r * (r * r - 1.0));
    }
    Eigen::VectorXd g = 2.0 * params.lambda * s + params.f1.apply(s, s);
    for (int k = 0; k < s.size(); ++k) g(k) += 4.0 * params.quartic * std::pow(s(k), 3);
    return g;
}

double MicroModelSpec::ll_base_height() const
{
    return kind == ModelKind::ll_easy_cone ? std::cos(params.theta0) : 0.0;
}

double MicroModelSpec::ll_potential(double g3) const
{
    if (kind == ModelKind::ll_easy_plane) return params.K * g3 * g3;
    const double h = g3 - ll_base_height();
    return params.alpha * h * h - params.beta * h * h * h;
}

double MicroModelSpec::ll_potential_derivative(double g3) const
{
    if (kind == ModelKind::ll_easy_plane) return 2.0 * params.K * g3;
    const double h = g3 - ll_base_height();
    return 2.0 * params.alpha * h - 3.0 * params.beta * h * h;
}

double easy_cone_b(double alpha, double beta, double theta0)
{
    const double s = std::sin(theta0);
    return alpha * s * std::cos(theta0) + beta * s * s * s;
}

std::pair<GeometryData, MicroModelSpec> preset(ModelKind kind, const ModelParams& params)
{
    GeometryData g;
    MicroModelSpec m;
    m.kind = kind;
    m.params = params;
    switch (kind) {
    case ModelKind::gp_scalar:
        g.ii_perp = Tensor3::diagonal(1, -1.0);
        g.f1 = Tensor3::diagonal(1, 3.0);
        break;
    case ModelKind::gp_coupled: {
        const int d = params.components;
        if (!(params.lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
        if (params.f1.dim() != d) throw std::invalid_argument("coupling tensor dimension mismatch");
        g.dim = d;
        g.lambda = params.lambda;
        g.c = std::sqrt(params.lambda);
        g.i0b0 = Eigen::MatrixXd::Zero(d, d);
        g.ii_perp = Tensor3::diagonal(d, -1.0);
        g.f1 = params.f1;
        break;
    }
    case ModelKind::ll_easy_plane:
        if (!(params.K > 0.0)) throw std::invalid_argument("K must be positive");
        g.lambda = params.K;
        g.c = std::sqrt(params.K);
        break;
    case ModelKind::ll_easy_cone: {
        if (!(params.alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
        if (!(params.theta0 > 0.0 && params.theta0 < M_PI)) throw std::invalid_argument("theta0 must lie in (0, pi)");
        const double s = std::sin(params.theta0);
        const double b = easy_cone_b(params.alpha, params.beta, params.theta0);
        g.lambda = params.alpha * s * s;
        g.c = std::sqrt(g.lambda);
        g.ii_perp = Tensor3::diagonal(1, std::cos(params.theta0) / s);
        g.f1 = Tensor3::diagonal(1, -3.0 * b);
        break;
    }
    case ModelKind::af_chain:
        g.dim = 2;
        g.lambda = 2.0;
        g.mu = 1.0;
        g.c = 1.0;
        g.i0b0 = (Eigen::MatrixXd(2, 2) << 0.0, -1.0, 1.0, 0.0).finished();
        g.ii_perp = Tensor3(2);
        g.f1 = Tensor3(2);
        break;
    }
    g.validate();
    return {g, m};
}

LimitModel limit_equation(const GeometryData& g)
{
    g.validate();
    const int d = g.dim;
    const Eigen::MatrixXd m = (1.5 - 2.0 * g.mu / g.lambda) * Eigen::MatrixXd::Identity(d, d) - (2.0 * g.c / g.lambda) * g.i0b0;
    Tensor3 t = g.ii_perp.map_output(m) + (-1.0 / (2.0 * g.lambda)) * g.f1;
    return make_limit_model(g.c, t);
}

LimitModel coupled_gp_limit(double lambda, const Tensor3& f1)
{
    if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
    if (f1.input_symmetry_defect() > 1e-12 * std::max(1.0, f1.max_abs()))
        throw std::invalid_argument("F1 must be symmetric in its two arguments");
    const int d = f1.dim();
    Tensor3 t = Tensor3::diagonal(d, -1.5) + (-1.0 / (2.0 * lambda)) * f1;
    return make_limit_model(std::sqrt(lambda), t);
}

}  // namespace lwkdv
