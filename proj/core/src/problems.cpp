#include "adaptsde/problems.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace adaptsde::problems {

SdeProblem gbm(const GbmParams& q)
{
    SdeProblem p;
    p.name = "gbm";
    p.d = p.m = 1;
    p.A = Matrix::Constant(1, 1, q.r);
    p.f = [](const Vector& x) { return Vector::Zero(x.size()); };
    p.df = [](const Vector& x) { return Matrix::Zero(x.size(), x.size()); };
    p.g = [s = q.sigma](const Vector& x) { return Matrix(s * x); };
    p.x0 = Vector::Constant(1, q.u0);
    p.t_end = q.t_end;
    p.structure = Structure::scalar;
    return p;
}

double gbm_exact(const GbmParams& q, double t, double w_t)
{
    return q.u0 * std::exp((q.r - 0.5 * q.sigma * q.sigma) * t + q.sigma * w_t);
}

SdeProblem fhn(const FhnParams& q)
{
    if (!(q.epsilon > 0.0)) throw std::invalid_argument("fhn: epsilon must be positive");
    const double inv_eps = 1.0 / q.epsilon;
    SdeProblem p;
    p.name = "fhn";
    p.d = p.m = 2;
    p.A.resize(2, 2);
    p.A << inv_eps, inv_eps, -1.0, -q.beta;
    p.f = [inv_eps, alpha = q.alpha](const Vector& x) {
        Vector r(2);
        r << -inv_eps * x[0] * x[0] * x[0], alpha;
        return r;
    };
    p.df = [inv_eps](const Vector& x) {
        Matrix J = Matrix::Zero(2, 2);
        J(0, 0) = -3.0 * inv_eps * x[0] * x[0];
        return J;
    };
    // eps dV = ... + sigma1 sqrt(eps) dW1, divided through by eps.
    Matrix G = Matrix::Zero(2, 2);
    G(0, 0) = q.sigma1 / std::sqrt(q.epsilon);
    G(1, 1) = q.sigma2;
    p.g = [G](const Vector&) { return G; };
    p.x0.resize(2);
    p.x0 << q.v0, q.w0;
    p.t_end = q.t_end;
    p.structure = Structure::dense;
    return p;
}

TruncationFunctions gl_truncation_functions(const GinzburgLandauParams& q)
{
    const double K = std::max(q.a * (q.b + 1.0), q.c);
    auto mu = [K](double r) { return K * (1.0 + r * r * r); };
    auto mu_inv = [K](double s) { return s >= K ? std::cbrt(s / K - 1.0) : 0.0; };
    auto H = [level = mu(1.0)](double h) {
        if (!(h > 0.0) || h > 1.0) return std::numeric_limits<double>::quiet_NaN();
        return level * std::pow(h, -0.25);
    };
    return {K, mu, mu_inv, H};
}

SdeProblem ginzburg_landau(const GinzburgLandauParams& q)
{
    SdeProblem p;
    p.name = "gl";
    p.d = p.m = 1;
    p.A = Matrix::Constant(1, 1, q.a * q.b);
    p.f = [a = q.a](const Vector& x) { return Vector(-a * x.array().cube()); };
    p.df = [a = q.a](const Vector& x) { return Matrix::Constant(1, 1, -3.0 * a * x[0] * x[0]); };
    p.g = [c = q.c](const Vector& x) { return Matrix(c * x); };
    p.x0 = Vector::Constant(1, q.x0);
    p.t_end = q.t_end;
    p.structure = Structure::scalar;
    auto tf = gl_truncation_functions(q);
    p.mu_inv = tf.mu_inv;
    p.truncation_level = tf.H;
    return p;
}

SdeProblem stoch_vol_32(const StochVolParams& q)
{
    SdeProblem p;
    p.name = "svol";
    p.d = p.m = 2;
    const double lm = q.lambda * q.mu;
    const double lin = q.split_linear ? lm : 0.0;
    const double folded = q.split_linear ? 0.0 : lm;
    p.A = lin * Matrix::Identity(2, 2);
    p.f = [lam = q.lambda, folded](const Vector& x) {
        return Vector(folded * x - lam * x.norm() * x);
    };
    p.df = [lam = q.lambda, folded](const Vector& x) {
        const double n = x.norm();
        Matrix J = (folded - lam * n) * Matrix::Identity(2, 2);
        if (n > 0.0) J -= lam * (x * x.transpose()) / n;
        return J;
    };
    Matrix B(2, 2);
    const double s = 1.0 / std::sqrt(10.0);
    B << 2.0 * s, 1.0 * s, 1.0 * s, 2.0 * s;
    p.g = [B](const Vector& x) { return Matrix(std::pow(x.norm(), 1.5) * B); };
    p.x0 = Vector::Ones(2);
    p.t_end = q.t_end;
    p.structure = Structure::diagonal;
    return p;
}

SdeProblem spde_fd(const SpdeParams& q)
{
    if (q.J < 3) throw std::invalid_argument("spde_fd: J must be >= 3");
    const int d = q.J - 1;
    const int modes = q.modes > 0 ? q.modes : d;
    const double dx = 1.0 / q.J;
    const double k = q.epsilon / (dx * dx);

    SdeProblem p;
    p.name = "spde";
    p.d = d;
    p.m = modes;
    p.A = Matrix::Zero(d, d);
    for (int i = 0; i < d; ++i) {
        p.A(i, i) = -2.0 * k + q.eta;
        if (i > 0) p.A(i, i - 1) = k;
        if (i + 1 < d) p.A(i, i + 1) = k;
    }
    p.f = [lam = q.lambda](const Vector& u) {
        const auto a = u.array();
        return Vector(a.cube() - lam * a.square() * a.cube());
    };
    p.df = [lam = q.lambda](const Vector& u) {
        const auto a = u.array();
        return Matrix(Vector(3.0 * a.square() - 5.0 * lam * a.square().square()).asDiagonal());
    };
    Matrix profile(d, modes);
    for (int i = 0; i < d; ++i) {
        const double x = (i + 1) * dx;
        for (int j = 1; j <= modes; ++j)
            profile(i, j - 1) = std::pow(j, -1.5) * std::sin(j * std::numbers::pi * x);
    }
    p.g = [profile, sigma = q.sigma](const Vector& u) {
        return Matrix((sigma * u.array().square()).matrix().asDiagonal() * profile);
    };
    p.x0.resize(d);
    for (int i = 0; i < d; ++i) p.x0[i] = 2.0 * std::sin(std::numbers::pi * (i + 1) * dx);
    p.t_end = q.t_end;
    p.structure = Structure::tridiagonal;
    return p;
}

namespace {
constexpr std::array<std::string_view, 6> kNames{"gbm", "fhn05", "fhn01", "gl", "svol", "spde"};
}

std::span<const std::string_view> names() { return kNames; }

std::optional<SdeProblem> by_name(std::string_view name)
{
    if (name == "gbm") return gbm();
    if (name == "fhn05") {
        auto p = fhn({.epsilon = 0.5});
        p.name = "fhn05";
        return p;
    }
    if (name == "fhn01") {
        auto p = fhn({.epsilon = 0.1});
        p.name = "fhn01";
        return p;
    }
    if (name == "gl") return ginzburg_landau();
    if (name == "svol") return stoch_vol_32();
    if (name == "spde") return spde_fd();
    return std::nullopt;
}

}  // namespace adaptsde::problems
