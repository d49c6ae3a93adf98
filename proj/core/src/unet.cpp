#include "thermocast/unet.hpp"

#include "thermocast/errors.hpp"

namespace thermocast {

nlohmann::json UNetSpec::to_json() const {
    return {{"type", "unet"},
            {"input_channels", input_channels},
            {"stage_widths", stage_widths},
            {"bottleneck_width", bottleneck_width},
            {"width_factor", width_factor}};
}

UNetSpec UNetSpec::from_json(const nlohmann::json& j) {
    UNetSpec s;
    s.input_channels = j.at("input_channels").get<int>();
    const auto widths = j.at("stage_widths").get<std::vector<int>>();
    if (widths.size() != 4) {
        throw ConfigError("unet spec: expected 4 stage widths");
    }
    std::copy(widths.begin(), widths.end(), s.stage_widths.begin());
    s.bottleneck_width = j.at("bottleneck_width").get<int>();
    s.width_factor = j.at("width_factor").get<double>();
    return s;
}

UNet::ConvParams UNet::make_conv(const std::string& name, int cin, int cout, int k,
                                 SplitMix64& rng) {
    ConvParams p;
    SplitMix64 stream = rng.fork(name);
    p.weight = he_uniform_conv_weight({cout, cin, k, k}, cin * k * k, stream);
    p.bias = Tensor::zeros({cout}, /*requires_grad=*/true);
    params_.push_back({name + ".weight", p.weight});
    params_.push_back({name + ".bias", p.bias});
    return p;
}

UNet::ConvParams UNet::make_upconv(const std::string& name, int cin, int cout, int k,
                                   SplitMix64& rng) {
    ConvParams p;
    SplitMix64 stream = rng.fork(name);
    p.weight = he_uniform_conv_weight({cin, cout, k, k}, cin * k * k, stream);
    p.bias = Tensor::zeros({cout}, /*requires_grad=*/true);
    params_.push_back({name + ".weight", p.weight});
    params_.push_back({name + ".bias", p.bias});
    return p;
}

UNet::ConvBlock UNet::make_block(const std::string& name, int cin, int cout, SplitMix64& rng) {
    ConvBlock b;
    b.conv1 = make_conv(name + ".conv1", cin, cout, 3, rng);
    b.conv2 = make_conv(name + ".conv2", cout, cout, 3, rng);
    return b;
}

UNet::UNet(UNetSpec spec, std::uint64_t seed) : spec_(spec), seed_(seed) {
    SplitMix64 rng(seed);
    const int w1 = spec_.scaled(spec_.stage_widths[0]);
    const int w2 = spec_.scaled(spec_.stage_widths[1]);
    const int w3 = spec_.scaled(spec_.stage_widths[2]);
    const int w4 = spec_.scaled(spec_.stage_widths[3]);
    const int wb = spec_.scaled(spec_.bottleneck_width);

    encoder_[0] = make_block("enc1", spec_.input_channels, w1, rng);
    encoder_[1] = make_block("enc2", w1, w2, rng);
    encoder_[2] = make_block("enc3", w2, w3, rng);
    encoder_[3] = make_block("enc4", w3, w4, rng);
    bottleneck_ = make_block("bottleneck", w4, wb, rng);
    // Decoder stage numbering follows the architecture rows 6..9.
    upconvs_[0] = make_upconv("dec6.up", wb, w4, 2, rng);
    decoder_[0] = make_block("dec6", w4 + w4, w4, rng);
    upconvs_[1] = make_upconv("dec7.up", w4, w3, 2, rng);
    decoder_[1] = make_block("dec7", w3 + w3, w3, rng);
    upconvs_[2] = make_upconv("dec8.up", w3, w2, 2, rng);
    decoder_[2] = make_block("dec8", w2 + w2, w2, rng);
    upconvs_[3] = make_upconv("dec9.up", w2, w1, 2, rng);
    decoder_[3] = make_block("dec9", w1 + w1, w1, rng);
    out_conv_ = make_conv("out", w1, 1, 1, rng);
}

Tensor UNet::run_block(const ConvBlock& block, const Tensor& x) const {
    Tensor h = relu(conv2d(x, block.conv1.weight, block.conv1.bias, 1, 1));
    return relu(conv2d(h, block.conv2.weight, block.conv2.bias, 1, 1));
}

Tensor UNet::forward(const Tensor& input) {
    if (input.rank() != 4 || input.dim(1) != spec_.input_channels) {
        throw UsageError("unet_forward: expected input (N," +
                         std::to_string(spec_.input_channels) + ",H,W), got " +
                         shape_to_string(input.shape()));
    }
    if (input.dim(2) % 16 != 0 || input.dim(3) % 16 != 0) {
        throw UsageError("unet_forward: spatial extents must be divisible by 16");
    }

    Tensor e1 = run_block(encoder_[0], input);
    Tensor e2 = run_block(encoder_[1], maxpool2(e1));
    Tensor e3 = run_block(encoder_[2], maxpool2(e2));
    Tensor e4 = run_block(encoder_[3], maxpool2(e3));
    Tensor b = run_block(bottleneck_, maxpool2(e4));

    Tensor d = conv2d_transpose(b, upconvs_[0].weight, upconvs_[0].bias, 2, 0);
    d = run_block(decoder_[0], concat_channels({d, e4}));
    d = conv2d_transpose(d, upconvs_[1].weight, upconvs_[1].bias, 2, 0);
    d = run_block(decoder_[1], concat_channels({d, e3}));
    d = conv2d_transpose(d, upconvs_[2].weight, upconvs_[2].bias, 2, 0);
    d = run_block(decoder_[2], concat_channels({d, e2}));
    d = conv2d_transpose(d, upconvs_[3].weight, upconvs_[3].bias, 2, 0);
    d = run_block(decoder_[3], concat_channels({d, e1}));
    return conv2d(d, out_conv_.weight, out_conv_.bias, 1, 0);
}

nlohmann::json UNet::arch_spec() const {
    nlohmann::json j = spec_.to_json();
    j["seed"] = seed_;
    return j;
}

std::vector<LayerTraceRow> UNet::shape_trace(int input_extent) const {
    std::vector<LayerTraceRow> rows;
    int s = input_extent;
    const auto conv_row = [&rows](const std::string& stage, const std::string& op,
                                  const Tensor& w, int spatial_in, int spatial_out, int stride,
                                  int padding, bool transposed) {
        LayerTraceRow r;
        r.stage = stage;
        r.op = op;
        r.ch_in = transposed ? w.dim(0) : w.dim(1);
        r.ch_out = transposed ? w.dim(1) : w.dim(0);
        r.spatial_in = spatial_in;
        r.spatial_out = spatial_out;
        r.kernel = w.dim(2);
        r.stride = stride;
        r.padding = padding;
        rows.push_back(r);
    };
    const auto block_rows = [&](const std::string& stage, const ConvBlock& b, int extent) {
        conv_row(stage, "conv_block.conv1", b.conv1.weight, extent, extent, 1, 1, false);
        conv_row(stage, "conv_block.conv2", b.conv2.weight, extent, extent, 1, 1, false);
    };

    for (int i = 0; i < 4; ++i) {
        const std::string stage = "enc" + std::to_string(i + 1);
        block_rows(stage, encoder_[static_cast<std::size_t>(i)], s);
        LayerTraceRow pool;
        pool.stage = stage;
        pool.op = "maxpool2";
        pool.ch_in = pool.ch_out =
            encoder_[static_cast<std::size_t>(i)].conv2.weight.dim(0);
        pool.spatial_in = s;
        pool.spatial_out = s / 2;
        pool.kernel = 2;
        pool.stride = 2;
        rows.push_back(pool);
        s /= 2;
    }
    block_rows("bottleneck", bottleneck_, s);
    for (int i = 0; i < 4; ++i) {
        const std::string stage = "dec" + std::to_string(6 + i);
        const Tensor& up = upconvs_[static_cast<std::size_t>(i)].weight;
        conv_row(stage, "transposed_conv", up, s, s * 2, 2, 0, true);
        s *= 2;
        LayerTraceRow cat;
        cat.stage = stage;
        cat.op = "concat_skip";
        cat.ch_in = up.dim(1);
        cat.ch_out = up.dim(1) * 2;
        cat.spatial_in = cat.spatial_out = s;
        rows.push_back(cat);
        block_rows(stage, decoder_[static_cast<std::size_t>(i)], s);
    }
    conv_row("out", "conv1x1", out_conv_.weight, s, s, 1, 0, false);
    return rows;
}

std::unique_ptr<UNet> build_unet(const UNetSpec& spec, std::uint64_t seed) {
    return std::make_unique<UNet>(spec, seed);
}

}  // namespace thermocast
