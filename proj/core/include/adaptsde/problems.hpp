#pragma once

#include "adaptsde/core.hpp"

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace adaptsde::problems {

/// Geometric Brownian motion du = r u dt + sigma u dW, split as A = r, f = 0.
struct GbmParams {
    double r = -8.0;
    double sigma = 3.0;
    double u0 = 1.0;
    double t_end = 1.0;
};
SdeProblem gbm(const GbmParams& params = {});

/// Closed-form GBM solution u0 exp((r - sigma^2/2) t + sigma W(t)).
double gbm_exact(const GbmParams& params, double t, double w_t);

/// Stochastic FitzHugh-Nagumo with additive noise, state (V, w).
struct FhnParams {
    double epsilon = 0.5;
    double alpha = 0.1;
    double beta = 0.01;
    double sigma1 = 0.05;
    double sigma2 = 0.1;
    double v0 = 0.0;
    double w0 = 0.0;
    double t_end = 1.0;
};
SdeProblem fhn(const FhnParams& params = {});

/// 1D stochastic Ginzburg-Landau dX = aX(b - X^2) dt + cX dW, split as
/// A = ab, f(x) = -a x^3. Carries the truncated-scheme functions.
struct GinzburgLandauParams {
    double a = 0.1;
    double b = 1.0;
    double c = 0.2;
    double x0 = 2.0;
    double t_end = 1.0;
};
SdeProblem ginzburg_landau(const GinzburgLandauParams& params = {});

/// Truncation pair for Ginzburg-Landau.
///   mu(r)    = K (1 + r^3),  K = max(a(b+1), c)
///   mu^-1(s) = (s/K - 1)^{1/3} for s >= K, else 0
///   H(h)     = mu(1) h^{-1/4}
struct TruncationFunctions {
    double K;
    std::function<double(double)> mu;
    std::function<double(double)> mu_inv;
    std::function<double(double)> H;
};
TruncationFunctions gl_truncation_functions(const GinzburgLandauParams& params = {});

/// Two-dimensional 3/2 stochastic volatility model
/// dX = lambda X (mu - |X|) dt + B |X|^{3/2} dW with |X| the Euclidean norm.
struct StochVolParams {
    double lambda = 2.5;
    double mu = 1.0;
    double t_end = 1.0;
    /// Keep lambda*mu*I in the linear operator (true) or fold it into f.
    bool split_linear = true;
};
SdeProblem stoch_vol_32(const StochVolParams& params = {});

/// Finite-difference system for
///   du = [eps u_xx + eta u + u^3 - lambda u^5] dt + sigma u^2 dW(x, t)
/// on (0, 1) with zero Dirichlet data, grid x_i = i/J, i = 1..J-1, and noise
/// W(x, t) = sum_j j^{-3/2} sin(j pi x) beta_j(t) truncated to `modes` terms.
struct SpdeParams {
    double epsilon = 0.1;
    int J = 101;
    int modes = 0;  ///< 0 means J - 1
    double sigma = 0.2;
    double eta = 11.0;
    double lambda = 2.0;
    double t_end = 1.0;
};
SdeProblem spde_fd(const SpdeParams& params = {});

/// CLI names: gbm, fhn05, fhn01, gl, svol, spde.
std::span<const std::string_view> names();
std::optional<SdeProblem> by_name(std::string_view name);

}  // namespace adaptsde::problems
