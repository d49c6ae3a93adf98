#include "thermocast/convlstm.hpp"

#include "thermocast/errors.hpp"

namespace thermocast {

nlohmann::json ConvLstmSpec::to_json() const {
    return {{"type", "convlstm"},
            {"input_channels", input_channels},
            {"conv_widths", conv_widths},
            {"hidden_widths", hidden_widths},
            {"refine_width", refine_width},
            {"leaky_slope", leaky_slope},
            {"recurrent_kernel", recurrent_kernel},
            {"width_factor", width_factor}};
}

ConvLstmSpec ConvLstmSpec::from_json(const nlohmann::json& j) {
    ConvLstmSpec s;
    s.input_channels = j.at("input_channels").get<int>();
    const auto conv = j.at("conv_widths").get<std::vector<int>>();
    const auto hidden = j.at("hidden_widths").get<std::vector<int>>();
    if (conv.size() != 3 || hidden.size() != 3) {
        throw ConfigError("convlstm spec: expected 3 encoder stages");
    }
    std::copy(conv.begin(), conv.end(), s.conv_widths.begin());
    std::copy(hidden.begin(), hidden.end(), s.hidden_widths.begin());
    s.refine_width = j.at("refine_width").get<int>();
    s.leaky_slope = j.at("leaky_slope").get<double>();
    s.recurrent_kernel = j.at("recurrent_kernel").get<int>();
    s.width_factor = j.at("width_factor").get<double>();
    return s;
}

std::pair<Tensor, Tensor> convlstm_cell(const Tensor& x, const Tensor& h, const Tensor& c,
                                        const ConvLstmCellParams& params) {
    const int hidden = params.hidden_channels();
    if (h.shape() != c.shape()) {
        throw ConfigError("convlstm_cell: hidden and cell state shapes differ");
    }
    if (h.rank() != 4 || h.dim(1) != hidden || h.dim(0) != x.dim(0) || h.dim(2) != x.dim(2) ||
        h.dim(3) != x.dim(3)) {
        throw ConfigError("convlstm_cell: state shape " + shape_to_string(h.shape()) +
                          " does not match input " + shape_to_string(x.shape()) + " with " +
                          std::to_string(hidden) + " hidden channels");
    }
    const int pad = (params.w_x.dim(2) - 1) / 2;  // shape-preserving
    Tensor gates = add(conv2d(x, params.w_x, params.bias, 1, pad),
                       conv2d(h, params.w_h, Tensor(), 1, pad));
    Tensor gate_i = sigmoid(slice_channels(gates, 0, hidden));
    Tensor gate_f = sigmoid(slice_channels(gates, hidden, hidden));
    Tensor gate_o = sigmoid(slice_channels(gates, 2 * hidden, hidden));
    Tensor gate_g = tanh(slice_channels(gates, 3 * hidden, hidden));
    Tensor c_next = add(mul(gate_f, c), mul(gate_i, gate_g));
    Tensor h_next = mul(gate_o, tanh(c_next));
    return {h_next, c_next};
}

ConvLstm::ConvParams ConvLstm::make_conv(const std::string& name, int cin, int cout, int k,
                                         SplitMix64& rng) {
    ConvParams p;
    SplitMix64 stream = rng.fork(name);
    p.weight = he_uniform_conv_weight({cout, cin, k, k}, cin * k * k, stream);
    p.bias = Tensor::zeros({cout}, /*requires_grad=*/true);
    params_.push_back({name + ".weight", p.weight});
    params_.push_back({name + ".bias", p.bias});
    return p;
}

ConvLstm::ConvParams ConvLstm::make_upconv(const std::string& name, int cin, int cout, int k,
                                           SplitMix64& rng) {
    ConvParams p;
    SplitMix64 stream = rng.fork(name);
    p.weight = he_uniform_conv_weight({cin, cout, k, k}, cin * k * k, stream);
    p.bias = Tensor::zeros({cout}, /*requires_grad=*/true);
    params_.push_back({name + ".weight", p.weight});
    params_.push_back({name + ".bias", p.bias});
    return p;
}

ConvLstmCellParams ConvLstm::make_cell(const std::string& name, int cin, int hidden,
                                       SplitMix64& rng) {
    const int k = spec_.recurrent_kernel;
    ConvLstmCellParams p;
    SplitMix64 sx = rng.fork(name + ".w_x");
    SplitMix64 sh = rng.fork(name + ".w_h");
    p.w_x = he_uniform_conv_weight({4 * hidden, cin, k, k}, cin * k * k, sx);
    p.w_h = he_uniform_conv_weight({4 * hidden, hidden, k, k}, hidden * k * k, sh);
    p.bias = Tensor::zeros({4 * hidden}, /*requires_grad=*/true);
    params_.push_back({name + ".w_x", p.w_x});
    params_.push_back({name + ".w_h", p.w_h});
    params_.push_back({name + ".bias", p.bias});
    return p;
}

ConvLstm::ConvLstm(ConvLstmSpec spec, std::uint64_t seed) : spec_(spec), seed_(seed) {
    SplitMix64 rng(seed);
    const int c1 = spec_.scaled(spec_.conv_widths[0]);
    const int c2 = spec_.scaled(spec_.conv_widths[1]);
    const int c3 = spec_.scaled(spec_.conv_widths[2]);
    const int h1 = spec_.scaled(spec_.hidden_widths[0]);
    const int h2 = spec_.scaled(spec_.hidden_widths[1]);
    const int h3 = spec_.scaled(spec_.hidden_widths[2]);
    const int refine = spec_.scaled(spec_.refine_width);

    encoder_convs_[0] = make_conv("enc1.conv", spec_.input_channels, c1, 3, rng);
    encoder_cells_[0] = make_cell("enc1.lstm", c1, h1, rng);
    encoder_convs_[1] = make_conv("enc2.conv", h1, c2, 3, rng);
    encoder_cells_[1] = make_cell("enc2.lstm", c2, h2, rng);
    encoder_convs_[2] = make_conv("enc3.conv", h2, c3, 3, rng);
    encoder_cells_[2] = make_cell("enc3.lstm", c3, h3, rng);

    decoder_cells_[2] = make_cell("dec3.lstm", h3, h3, rng);
    decoder_upconvs_[1] = make_upconv("dec3.up", h3, h3, 4, rng);
    decoder_cells_[1] = make_cell("dec2.lstm", h3, h2, rng);
    decoder_upconvs_[0] = make_upconv("dec2.up", h2, h2, 4, rng);
    decoder_cells_[0] = make_cell("dec1.lstm", h2, h1, rng);
    refine_conv_ = make_conv("dec1.conv", h1, refine, 3, rng);
    out_conv_ = make_conv("dec1.out", refine, 1, 1, rng);
}

Tensor ConvLstm::forward(const Tensor& frames) { return forward_traced(frames, nullptr); }

Tensor ConvLstm::forward_traced(const Tensor& frames, ConvLstmStateTrace* trace) {
    if (frames.rank() != 5 || frames.dim(2) != spec_.input_channels) {
        throw UsageError("convlstm_forward: expected frames (N,3," +
                         std::to_string(spec_.input_channels) + ",H,W), got " +
                         shape_to_string(frames.shape()));
    }
    constexpr int kTimeSteps = 3;
    if (frames.dim(1) != kTimeSteps) {
        throw UsageError("convlstm_forward: expected exactly 3 time steps, got " +
                         std::to_string(frames.dim(1)));
    }
    if (frames.dim(3) % 4 != 0 || frames.dim(4) % 4 != 0) {
        throw UsageError("convlstm_forward: spatial extents must be divisible by 4");
    }
    if (frames.requires_grad()) {
        throw UsageError("convlstm_forward: frames are data and must not require grad");
    }
    const int n = frames.dim(0), t_len = frames.dim(1), cin = frames.dim(2);
    const int height = frames.dim(3), width = frames.dim(4);
    const double slope = spec_.leaky_slope;

    // Zero-initialized encoder states.
    std::array<std::pair<Tensor, Tensor>, 3> states;
    const int spatial_div[3] = {1, 2, 4};
    for (int s = 0; s < 3; ++s) {
        const int hidden = encoder_cells_[static_cast<std::size_t>(s)].hidden_channels();
        const Shape shape{n, hidden, height / spatial_div[s], width / spatial_div[s]};
        states[static_cast<std::size_t>(s)] = {Tensor::zeros(shape), Tensor::zeros(shape)};
    }

    const std::int64_t frame_len = static_cast<std::int64_t>(cin) * height * width;
    for (int t = 0; t < t_len; ++t) {
        std::vector<double> frame_values(static_cast<std::size_t>(n) * frame_len);
        for (int b = 0; b < n; ++b) {
            const auto src = (static_cast<std::int64_t>(b) * t_len + t) * frame_len;
            std::copy(frames.values().begin() + src, frames.values().begin() + src + frame_len,
                      frame_values.begin() + static_cast<std::int64_t>(b) * frame_len);
        }
        Tensor x = Tensor::from_values({n, cin, height, width}, std::move(frame_values));
        for (int s = 0; s < 3; ++s) {
            const auto si = static_cast<std::size_t>(s);
            x = leaky_relu(conv2d(x, encoder_convs_[si].weight, encoder_convs_[si].bias,
                                  s == 0 ? 1 : 2, 1),
                           slope);
            states[si] = convlstm_cell(x, states[si].first, states[si].second,
                                       encoder_cells_[si]);
            x = states[si].first;
        }
    }
    if (trace) {
        trace->encoder_final = states;
        trace->decoder_initial = states;  // state transfer, one per stage
    }

    // Decoder: one step per stage from the transferred states.
    Tensor x = states[2].first;
    auto dec3 = convlstm_cell(x, states[2].first, states[2].second, decoder_cells_[2]);
    x = leaky_relu(
        conv2d_transpose(dec3.first, decoder_upconvs_[1].weight, decoder_upconvs_[1].bias, 2, 1),
        slope);
    auto dec2 = convlstm_cell(x, states[1].first, states[1].second, decoder_cells_[1]);
    x = leaky_relu(
        conv2d_transpose(dec2.first, decoder_upconvs_[0].weight, decoder_upconvs_[0].bias, 2, 1),
        slope);
    auto dec1 = convlstm_cell(x, states[0].first, states[0].second, decoder_cells_[0]);
    x = leaky_relu(conv2d(dec1.first, refine_conv_.weight, refine_conv_.bias, 1, 1), slope);
    return conv2d(x, out_conv_.weight, out_conv_.bias, 1, 0);
}

nlohmann::json ConvLstm::arch_spec() const {
    nlohmann::json j = spec_.to_json();
    j["seed"] = seed_;
    return j;
}

std::vector<LayerTraceRow> ConvLstm::shape_trace(int input_extent) const {
    std::vector<LayerTraceRow> rows;
    const auto add_row = [&rows](const std::string& stage, const std::string& op, int cin,
                                 int cout, int sin, int sout, int k, int stride, int pad) {
        rows.push_back(LayerTraceRow{stage, op, cin, cout, sin, sout, k, stride, pad});
    };
    int s = input_extent;
    for (int i = 0; i < 3; ++i) {
        const auto si = static_cast<std::size_t>(i);
        const std::string stage = "enc" + std::to_string(i + 1);
        const Tensor& cw = encoder_convs_[si].weight;
        const int stride = i == 0 ? 1 : 2;
        const int s_out = i == 0 ? s : s / 2;
        add_row(stage, "conv_leaky", cw.dim(1), cw.dim(0), s, s_out, cw.dim(2), stride, 1);
        s = s_out;
        const Tensor& wx = encoder_cells_[si].w_x;
        add_row(stage, "convlstm", wx.dim(1), encoder_cells_[si].hidden_channels(), s, s,
                wx.dim(2), 1, (wx.dim(2) - 1) / 2);
    }
    for (int i = 2; i >= 0; --i) {
        const auto si = static_cast<std::size_t>(i);
        const std::string stage = "dec" + std::to_string(i + 1);
        const Tensor& wx = decoder_cells_[si].w_x;
        add_row(stage, "convlstm", wx.dim(1), decoder_cells_[si].hidden_channels(), s, s,
                wx.dim(2), 1, (wx.dim(2) - 1) / 2);
        if (i > 0) {
            const Tensor& up = decoder_upconvs_[static_cast<std::size_t>(i - 1)].weight;
            add_row(stage, "transposed_conv_leaky", up.dim(0), up.dim(1), s, s * 2, up.dim(2), 2,
                    1);
            s *= 2;
        }
    }
    const Tensor& rw = refine_conv_.weight;
    add_row("dec1", "conv_leaky", rw.dim(1), rw.dim(0), s, s, rw.dim(2), 1, 1);
    const Tensor& ow = out_conv_.weight;
    add_row("dec1", "conv1x1", ow.dim(1), ow.dim(0), s, s, ow.dim(2), 1, 0);
    return rows;
}

std::unique_ptr<ConvLstm> build_convlstm(const ConvLstmSpec& spec, std::uint64_t seed) {
    return std::make_unique<ConvLstm>(spec, seed);
}

}  // namespace thermocast
