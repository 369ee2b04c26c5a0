#pragma once

#include "lwkdv/kdv.hpp"
#include "lwkdv/tensor.hpp"

#include <Eigen/Dense>
#include <map>
#include <string>
#include <utility>

namespace lwkdv {

enum class ModelKind { gp_scalar, gp_coupled, ll_easy_plane, ll_easy_cone, af_chain };

std::string to_string(ModelKind kind);
ModelKind parse_model_kind(const std::string& name);

// Constants of a model at the base point of its Lagrangian circle/torus, in tangent coordinates.
// ii_perp holds i0 II_perp(X, Y); f1 holds i0 F1(i0 X, i0 Y).
struct GeometryData {
    int dim = 1;
    double lambda = 1.0;
    double mu = 0.0;
    double c = 1.0;
    Eigen::MatrixXd i0b0 = Eigen::MatrixXd::Zero(1, 1);
    Tensor3 ii_perp{1};
    Tensor3 f1{1};

    // Throws std::invalid_argument on inconsistent data.
    void validate() const;
};

struct ModelParams {
    double K = 1.0;                  // easy-plane anisotropy
    double alpha = 1.0;              // easy-cone quadratic coefficient
    double beta = 0.0;               // easy-cone cubic coefficient
    double theta0 = 1.0471975511965976;  // easy-cone polar angle
    double lambda = 1.0;             // coupled GP Hessian scale
    int components = 2;              // coupled GP dimension
    Tensor3 f1 = Tensor3::diagonal(2, 3.0);  // coupled GP cubic tensor
    double quartic = 0.25;           // coupled GP quartic coefficient of each s_k^4

    static ModelParams from_map(const std::map<std::string, double>& values);
};

struct MicroModelSpec {
    ModelKind kind = ModelKind::gp_scalar;
    ModelParams params;

    int components() const;  // complex components for GP, sphere count times 3 otherwise
    bool is_gp() const { return kind == ModelKind::gp_scalar || kind == ModelKind::gp_coupled; }
    bool is_ll() const { return kind == ModelKind::ll_easy_plane || kind == ModelKind::ll_easy_cone; }

    // GP potential G(s) in the moduli deviations s_k = |u_k| - 1.
    double gp_potential(const Eigen::VectorXd& s) const;
    Eigen::VectorXd gp_potential_gradient(const Eigen::VectorXd& s) const;

    // LL anisotropy V(g3) and V'(g3) as a function of the third spin component.
    double ll_potential(double g3) const;
    double ll_potential_derivative(double g3) const;
    double ll_base_height() const;  // g3 on the minimizing circle
};

std::pair<GeometryData, MicroModelSpec> preset(ModelKind kind, const ModelParams& params = {});

LimitModel limit_equation(const GeometryData& g);

// 2c d_t rho = rho_xxx/4 - (3/2) rho_k d_x rho_k - F1(rho, d_x rho)/(2 lambda), c = sqrt(lambda).
LimitModel coupled_gp_limit(double lambda, const Tensor3& f1);

// Easy-cone constant b = alpha sin(theta0) cos(theta0) + beta sin(theta0)^3.
double easy_cone_b(double alpha, double beta, double theta0);

}  // namespace lwkdv
