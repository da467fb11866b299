#pragma once

#include <cmath>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "lrtc/nn/autograd.hpp"

namespace lrtc::nn {

/// Named trainable parameters in insertion order.
class ParamStore {
   public:
    Var add(const std::string &name, Tensor init) {
        if (index_.count(name)) throw ConfigError("duplicate parameter '" + name + "'");
        index_[name] = params_.size();
        names_.push_back(name);
        params_.push_back(parameter(std::move(init)));
        return params_.back();
    }

    /// Registers an existing parameter, shared with its original owner.
    void adopt(const std::string &name, const Var &v) {
        if (index_.count(name)) throw ConfigError("duplicate parameter '" + name + "'");
        index_[name] = params_.size();
        names_.push_back(name);
        params_.push_back(v);
    }

    const Var &get(const std::string &name) const {
        auto it = index_.find(name);
        if (it == index_.end()) throw ConfigError("no parameter '" + name + "'");
        return params_[it->second];
    }

    bool contains(const std::string &name) const { return index_.count(name) != 0; }
    std::size_t size() const { return params_.size(); }
    const std::vector<std::string> &names() const { return names_; }
    std::vector<Var> &vars() { return params_; }
    const std::vector<Var> &vars() const { return params_; }

    std::size_t element_count() const {
        std::size_t n = 0;
        for (const auto &p : params_) n += p.value().size();
        return n;
    }

    void zero_grad() {
        for (auto &p : params_) p.zero_grad();
    }

    /// Deep copy of the current values (a snapshot).
    std::vector<Tensor> values() const {
        std::vector<Tensor> out;
        for (const auto &p : params_) out.push_back(p.value());
        return out;
    }

    void load_values(const std::vector<Tensor> &values) {
        if (values.size() != params_.size()) throw ShapeError("parameter count mismatch");
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (values[i].shape() != params_[i].shape()) {
                throw ShapeError("parameter '" + names_[i] + "': " + shape_str(values[i].shape()) + " vs " +
                                 shape_str(params_[i].shape()));
            }
            params_[i].mutable_value() = values[i];
        }
    }

   private:
    std::vector<Var> params_;
    std::vector<std::string> names_;
    std::map<std::string, std::size_t> index_;
};

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct OptimizerState {
    AdamConfig config;
    std::uint64_t step = 0;
    std::vector<Tensor> first_moment;
    std::vector<Tensor> second_moment;

    bool operator==(const OptimizerState &o) const {
        return step == o.step && first_moment == o.first_moment && second_moment == o.second_moment &&
               config.lr == o.config.lr && config.beta1 == o.config.beta1 && config.beta2 == o.config.beta2 &&
               config.eps == o.config.eps;
    }
};

/// One bias-corrected adaptive-moment update of `params` in place.
inline void adam_step(std::span<Tensor> params, std::span<const Tensor> grads, OptimizerState &state) {
    if (params.size() != grads.size()) throw ShapeError("adam_step: params/grads count mismatch");
    if (state.first_moment.empty()) {
        for (const auto &p : params) {
            state.first_moment.emplace_back(p.shape(), 0.0);
            state.second_moment.emplace_back(p.shape(), 0.0);
        }
    }
    if (state.first_moment.size() != params.size()) throw ShapeError("adam_step: state size mismatch");
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (params[i].shape() != grads[i].shape() || params[i].shape() != state.first_moment[i].shape()) {
            throw ShapeError("adam_step: shape mismatch at parameter " + std::to_string(i));
        }
    }
    ++state.step;
    const auto &c = state.config;
    const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < params.size(); ++i) {
        Tensor &p = params[i];
        const Tensor &g = grads[i];
        Tensor &m = state.first_moment[i];
        Tensor &v = state.second_moment[i];
        for (std::size_t k = 0; k < p.size(); ++k) {
            m[k] = c.beta1 * m[k] + (1.0 - c.beta1) * g[k];
            v[k] = c.beta2 * v[k] + (1.0 - c.beta2) * g[k] * g[k];
            const double mhat = m[k] / bc1;
            const double vhat = v[k] / bc2;
            p[k] -= c.lr * mhat / (std::sqrt(vhat) + c.eps);
        }
    }
}

/// Adam over a ParamStore, using the gradients accumulated by backward().
class Adam {
   public:
    explicit Adam(AdamConfig config = {}) { state_.config = config; }

    void step(ParamStore &params) {
        std::vector<Tensor> values;
        std::vector<Tensor> grads;
        values.reserve(params.size());
        for (auto &p : params.vars()) {
            grads.push_back(p.grad());  // before the move: an untouched grad takes the value's shape
            values.push_back(std::move(p.mutable_value()));
        }
        adam_step(values, grads, state_);
        for (std::size_t i = 0; i < values.size(); ++i) params.vars()[i].mutable_value() = std::move(values[i]);
    }

    OptimizerState &state() { return state_; }
    const OptimizerState &state() const { return state_; }

   private:
    OptimizerState state_;
};

}  // namespace lrtc::nn
