#pragma once

#include <array>
#include <cstdint>
#include <memory>

#include "thermocast/model.hpp"

namespace thermocast {

// Four-stage encoder/decoder U-Net with skip connections: each Conv Block
// is two (3x3, s=1, p=1) conv + ReLU pairs; 2x2 max pooling between
// encoder stages; 2x2 stride-2 transposed convolutions and channel
// concatenation on the way back up; linear 1x1 output head.
struct UNetSpec {
    int input_channels = 3;
    std::array<int, 4> stage_widths = {64, 128, 256, 512};
    int bottleneck_width = 1024;
    double width_factor = 1.0;

    int scaled(int width) const { return scaled_width(width, width_factor); }
    nlohmann::json to_json() const;
    static UNetSpec from_json(const nlohmann::json& j);
};

class UNet : public Model {
public:
    UNet(UNetSpec spec, std::uint64_t seed);

    const std::vector<NamedParam>& parameters() const override { return params_; }
    std::vector<NamedParam>& parameters() override { return params_; }
    // Input (N, input_channels, H, W) with H and W divisible by 16; the
    // full-scale pipeline always runs on the 128x128 canvas.
    Tensor forward(const Tensor& input) override;
    std::string task() const override { return "downscale"; }
    nlohmann::json arch_spec() const override;
    std::vector<LayerTraceRow> shape_trace(int input_extent) const override;

    const UNetSpec& spec() const { return spec_; }
    std::uint64_t seed() const { return seed_; }

private:
    struct ConvParams {
        Tensor weight;
        Tensor bias;
    };
    struct ConvBlock {
        ConvParams conv1;
        ConvParams conv2;
    };

    ConvParams make_conv(const std::string& name, int cin, int cout, int k, SplitMix64& rng);
    ConvParams make_upconv(const std::string& name, int cin, int cout, int k, SplitMix64& rng);
    ConvBlock make_block(const std::string& name, int cin, int cout, SplitMix64& rng);
    Tensor run_block(const ConvBlock& block, const Tensor& x) const;

    UNetSpec spec_;
    std::uint64_t seed_;
    std::array<ConvBlock, 4> encoder_;
    ConvBlock bottleneck_;
    std::array<ConvParams, 4> upconvs_;
    std::array<ConvBlock, 4> decoder_;
    ConvParams out_conv_;
    std::vector<NamedParam> params_;
};

std::unique_ptr<UNet> build_unet(const UNetSpec& spec, std::uint64_t seed);

}  // namespace thermocast
