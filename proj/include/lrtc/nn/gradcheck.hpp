#pragma once

#include <algorithm>
#include <cmath>
#include <functional>

#include "lrtc/nn/autograd.hpp"
#include "lrtc/nn/optim.hpp"

namespace lrtc::nn {

/// Relative error with a floor on the denominator, so entries whose true
/// gradient is ~0 are judged on absolute error below `floor`.
inline double relative_error(double analytic, double numeric, double floor = 1e-6) {
    const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
    return std::abs(analytic - numeric) / denom;
}

/// Central differences of a scalar function of `x`.
inline Tensor numeric_gradient(const std::function<double(const Tensor &)> &f, const Tensor &x, double eps) {
    Tensor g(x.shape(), 0.0);
    Tensor probe = x;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double orig = probe[i];
        probe[i] = orig + eps;
        const double up = f(probe);
        probe[i] = orig - eps;
        const double down = f(probe);
        probe[i] = orig;
        g[i] = (up - down) / (2.0 * eps);
    }
    return g;
}

struct GradCheckResult {
    double max_relative_error = 0.0;
    Tensor analytic;
    Tensor numeric;
};

/// Compares the reverse-mode gradient of `f` at `x` with central differences.
inline GradCheckResult grad_check_detailed(const std::function<Var(const Var &)> &f, const Tensor &x,
                                           double eps = 1e-5, double floor = 1e-6) {
    Var input = parameter(x);
    Var out = f(input);
    backward(out);
    GradCheckResult r;
    r.analytic = input.grad();
    r.numeric = numeric_gradient([&](const Tensor &t) { return f(constant(t)).item(); }, x, eps);
    for (std::size_t i = 0; i < x.size(); ++i) {
        r.max_relative_error = std::max(r.max_relative_error, relative_error(r.analytic[i], r.numeric[i], floor));
    }
    return r;
}

inline double grad_check(const std::function<Var(const Var &)> &f, const Tensor &x, double eps = 1e-5,
                         double floor = 1e-6) {
    return grad_check_detailed(f, x, eps, floor).max_relative_error;
}

/// Same check over every element of every parameter in `params`; `loss`
/// rebuilds the graph from the current parameter values on each call.
inline double grad_check_params(const std::function<Var()> &loss, ParamStore &params, double eps = 1e-5,
                                double floor = 1e-6) {
    params.zero_grad();
    Var out = loss();
    backward(out);
    std::vector<Tensor> analytic;
    for (const auto &p : params.vars()) analytic.push_back(p.grad());

    double worst = 0.0;
    for (std::size_t k = 0; k < params.size(); ++k) {
        Tensor &value = params.vars()[k].mutable_value();
        for (std::size_t i = 0; i < value.size(); ++i) {
            const double orig = value[i];
            value[i] = orig + eps;
            const double up = loss().item();
            value[i] = orig - eps;
            const double down = loss().item();
            value[i] = orig;
            worst = std::max(worst, relative_error(analytic[k][i], (up - down) / (2.0 * eps), floor));
        }
    }
    params.zero_grad();
    return worst;
}

}  // namespace lrtc::nn
