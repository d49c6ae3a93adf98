#include "thermocast/model.hpp"

#include <cmath>

#include "thermocast/errors.hpp"

namespace thermocast {

int scaled_width(int width, double width_factor) {
    if (!(width_factor > 0.0 && width_factor <= 1.0)) {
        throw ConfigError("width_factor must lie in (0, 1]");
    }
    return static_cast<int>(std::ceil(width * width_factor));
}

Tensor he_uniform_conv_weight(Shape shape, int fan_in, SplitMix64& rng) {
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
    const auto n = static_cast<std::size_t>(shape_numel(shape));
    std::vector<double> values(n);
    for (double& v : values) {
        v = rng.next_uniform(-bound, bound);
    }
    return Tensor::from_values(std::move(shape), std::move(values), /*requires_grad=*/true);
}

}  // namespace thermocast
