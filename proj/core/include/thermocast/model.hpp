#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "thermocast/rng.hpp"
#include "thermocast/tensor.hpp"

namespace thermocast {

struct NamedParam {
    std::string name;
    Tensor tensor;
};

// One architecture row for conformance tracing: what the layer does, its
// channel transition, and the spatial extents it maps between.
struct LayerTraceRow {
    std::string stage;
    std::string op;
    int ch_in = 0;
    int ch_out = 0;
    int spatial_in = 0;
    int spatial_out = 0;
    int kernel = 0;
    int stride = 1;
    int padding = 0;
};

class Model {
public:
    virtual ~Model() = default;
    virtual const std::vector<NamedParam>& parameters() const = 0;
    virtual std::vector<NamedParam>& parameters() = 0;
    virtual Tensor forward(const Tensor& input) = 0;
    virtual std::string task() const = 0;  // "downscale" | "nowcast"
    virtual nlohmann::json arch_spec() const = 0;
    // Layer-by-layer trace for a square input of the given extent, derived
    // from the constructed weights and layer configs.
    virtual std::vector<LayerTraceRow> shape_trace(int input_extent) const = 0;

    std::vector<Tensor> parameter_tensors() const {
        std::vector<Tensor> out;
        for (const NamedParam& p : parameters()) {
            out.push_back(p.tensor);
        }
        return out;
    }
    void zero_grad() {
        for (NamedParam& p : parameters()) {
            p.tensor.zero_grad();
        }
    }
};

// ceil(width * factor), the desk-scale width knob.
int scaled_width(int width, double width_factor);

// He-uniform initialization: U(-b, b) with b = sqrt(6 / fan_in), biases
// zero. fan_in counts the inputs feeding one output unit (cin * kh * kw).
Tensor he_uniform_conv_weight(Shape shape, int fan_in, SplitMix64& rng);

}  // namespace thermocast
