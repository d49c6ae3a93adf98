#pragma once

#include <cstdint>
#include <vector>

#include "thermocast/tensor.hpp"

namespace thermocast {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Standard Adam with bias-corrected moments. The step counter is
// incremented before the corrections are applied.
class AdamState {
public:
    AdamState(std::vector<Tensor> params, AdamConfig config);

    // Applies one update using the gradients currently accumulated on the
    // parameters. Parameters without a gradient buffer are treated as
    // having zero gradient.
    void step();

    std::int64_t step_count() const { return t_; }
    const AdamConfig& config() const { return config_; }

private:
    AdamConfig config_;
    std::int64_t t_ = 0;
    std::vector<Tensor> params_;
    std::vector<std::vector<double>> m_;
    std::vector<std::vector<double>> v_;
};

}  // namespace thermocast
