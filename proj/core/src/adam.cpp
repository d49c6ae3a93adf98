#include "thermocast/adam.hpp"

#include <cmath>

#include "thermocast/errors.hpp"

namespace thermocast {

AdamState::AdamState(std::vector<Tensor> params, AdamConfig config)
    : config_(config), params_(std::move(params)) {
    m_.reserve(params_.size());
    v_.reserve(params_.size());
    for (const Tensor& p : params_) {
        if (!p.defined()) {
            throw UsageError("AdamState: undefined parameter tensor");
        }
        m_.emplace_back(p.size(), 0.0);
        v_.emplace_back(p.size(), 0.0);
    }
}

void AdamState::step() {
    ++t_;
    const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params_.size(); ++i) {
        Tensor& p = params_[i];
        std::vector<double>& values = p.mutable_values();
        if (values.size() != m_[i].size()) {
            throw ConfigError("AdamState: parameter shape changed under the optimizer");
        }
        const bool has_grad = p.has_grad();
        if (has_grad && p.grad().size() != values.size()) {
            throw ConfigError("AdamState: gradient buffer does not match parameter shape");
        }
        for (std::size_t j = 0; j < values.size(); ++j) {
            const double g = has_grad ? p.grad()[j] : 0.0;
            m_[i][j] = config_.beta1 * m_[i][j] + (1.0 - config_.beta1) * g;
            v_[i][j] = config_.beta2 * v_[i][j] + (1.0 - config_.beta2) * g * g;
            const double m_hat = m_[i][j] / bc1;
            const double v_hat = v_[i][j] / bc2;
            values[j] -= config_.lr * m_hat / (std::sqrt(v_hat) + config_.eps);
        }
    }
}

}  // namespace thermocast
