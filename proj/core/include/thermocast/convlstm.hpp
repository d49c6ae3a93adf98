#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <utility>

#include "thermocast/model.hpp"

namespace thermocast {

// Encoder-decoder ConvLSTM nowcaster. Three encoder stages pair a 3x3
// feature conv (stride 1, then 2, 2) + LeakyReLU with a 5x5 ConvLSTM
// layer; the decoder mirrors them, seeding each ConvLSTM with the final
// (h,c) of the matching encoder stage, upsampling with 4x4 stride-2
// transposed convs, and finishing with a 3x3 + 1x1 head.
struct ConvLstmSpec {
    int input_channels = 1;
    std::array<int, 3> conv_widths = {32, 64, 96};
    std::array<int, 3> hidden_widths = {64, 96, 128};
    int refine_width = 32;
    double leaky_slope = 0.2;
    int recurrent_kernel = 5;
    double width_factor = 1.0;

    int scaled(int width) const { return scaled_width(width, width_factor); }
    nlohmann::json to_json() const;
    static ConvLstmSpec from_json(const nlohmann::json& j);
};

// Gate parameters of one cell, stacked (i, f, o, g) along the output
// channel axis: w_x (4H, Cin, k, k), w_h (4H, H, k, k), bias (4H).
struct ConvLstmCellParams {
    Tensor w_x;
    Tensor w_h;
    Tensor bias;
    int hidden_channels() const { return w_h.dim(1); }
};

// One recurrence step: gates from conv(x) + conv(h) + bias with
// sigmoid/sigmoid/sigmoid/tanh, c' = f.c + i.g, h' = o.tanh(c').
// No peephole terms. Returns (h', c').
std::pair<Tensor, Tensor> convlstm_cell(const Tensor& x, const Tensor& h, const Tensor& c,
                                        const ConvLstmCellParams& params);

// Per-stage states captured during a forward pass, for state-transfer and
// inspection in tests.
struct ConvLstmStateTrace {
    std::array<std::pair<Tensor, Tensor>, 3> encoder_final;    // (h,c) per stage
    std::array<std::pair<Tensor, Tensor>, 3> decoder_initial;  // index 0 = stage 1
};

class ConvLstm : public Model {
public:
    ConvLstm(ConvLstmSpec spec, std::uint64_t seed);

    const std::vector<NamedParam>& parameters() const override { return params_; }
    std::vector<NamedParam>& parameters() override { return params_; }
    // frames (N, 3, input_channels, H, W) with H, W divisible by 4; frames
    // are data and must not carry gradients.
    Tensor forward(const Tensor& frames) override;
    Tensor forward_traced(const Tensor& frames, ConvLstmStateTrace* trace);
    std::string task() const override { return "nowcast"; }
    nlohmann::json arch_spec() const override;
    std::vector<LayerTraceRow> shape_trace(int input_extent) const override;

    const ConvLstmSpec& spec() const { return spec_; }
    std::uint64_t seed() const { return seed_; }

private:
    struct ConvParams {
        Tensor weight;
        Tensor bias;
    };

    ConvParams make_conv(const std::string& name, int cin, int cout, int k, SplitMix64& rng);
    ConvParams make_upconv(const std::string& name, int cin, int cout, int k, SplitMix64& rng);
    ConvLstmCellParams make_cell(const std::string& name, int cin, int hidden, SplitMix64& rng);

    ConvLstmSpec spec_;
    std::uint64_t seed_;
    std::array<ConvParams, 3> encoder_convs_;
    std::array<ConvLstmCellParams, 3> encoder_cells_;
    std::array<ConvLstmCellParams, 3> decoder_cells_;  // index 0 = stage 1
    std::array<ConvParams, 2> decoder_upconvs_;        // after stages 3 and 2
    ConvParams refine_conv_;
    ConvParams out_conv_;
    std::vector<NamedParam> params_;
};

std::unique_ptr<ConvLstm> build_convlstm(const ConvLstmSpec& spec, std::uint64_t seed);

}  // namespace thermocast
