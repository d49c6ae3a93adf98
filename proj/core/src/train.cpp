#include "thermocast/train.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "thermocast/adam.hpp"
#include "thermocast/errors.hpp"
#include "thermocast/rng.hpp"

namespace thermocast {

const char* to_string(TrainTask t) {
    return t == TrainTask::downscale ? "downscale" : "nowcast";
}

TrainTask train_task_from_string(const std::string& s) {
    if (s == "downscale") {
        return TrainTask::downscale;
    }
    if (s == "nowcast") {
        return TrainTask::nowcast;
    }
    throw ConfigError("unknown training task '" + s + "'");
}

double encode_sza(double sza_deg) { return std::cos(sza_deg * M_PI / 180.0); }

TrainConfig TrainConfig::downscale_defaults() {
    TrainConfig c;
    c.task = TrainTask::downscale;
    c.lr = 2e-5;
    c.batch_size = 32;
    return c;
}

TrainConfig TrainConfig::nowcast_defaults() {
    TrainConfig c;
    c.task = TrainTask::nowcast;
    c.lr = 1e-4;
    c.batch_size = 128;
    return c;
}

nlohmann::json TrainConfig::to_json() const {
    return {{"task", std::string(to_string(task))},
            {"lr", lr},
            {"batch_size", batch_size},
            {"max_epochs", max_epochs},
            {"patience", patience},
            {"seed", seed},
            {"width_factor", width_factor},
            {"lst_offset_c", norm.lst_offset_c},
            {"lst_scale_c", norm.lst_scale_c}};
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
    TrainConfig c;
    c.task = train_task_from_string(j.at("task").get<std::string>());
    c.lr = j.at("lr").get<double>();
    c.batch_size = j.at("batch_size").get<int>();
    c.max_epochs = j.at("max_epochs").get<int>();
    c.patience = j.at("patience").get<int>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.width_factor = j.at("width_factor").get<double>();
    c.norm.lst_offset_c = j.at("lst_offset_c").get<double>();
    c.norm.lst_scale_c = j.at("lst_scale_c").get<double>();
    return c;
}

Tensor masked_mse(const Tensor& pred, const Tensor& target, const Tensor& mask) {
    if (pred.shape() != target.shape() || pred.shape() != mask.shape()) {
        throw ConfigError("masked_mse: pred/target/mask shapes differ");
    }
    double mask_sum = 0.0;
    for (const double m : mask.values()) {
        if (m != 0.0 && m != 1.0) {
            throw UsageError("masked_mse: mask values must be 0 or 1");
        }
        mask_sum += m;
    }
    if (mask_sum == 0.0) {
        throw DataError("masked_mse: mask selects no pixels");
    }
    Tensor diff = sub(pred, target);
    Tensor masked_sq = mul(mul(diff, diff), mask);
    return scale(sum(masked_sq), 1.0 / mask_sum);
}

EarlyStopper::EarlyStopper(int patience) : patience_(patience) {
    if (patience <= 0) {
        throw UsageError("EarlyStopper: patience must be positive");
    }
}

bool EarlyStopper::observe(double val_rmse) {
    ++epoch_;
    if (epoch_ == 1 || val_rmse < best_) {
        best_ = val_rmse;
        best_epoch_ = epoch_;
        since_best_ = 0;
        return false;
    }
    ++since_best_;
    return since_best_ >= patience_;
}

nlohmann::json TrainReport::to_json() const {
    nlohmann::json per_epoch = nlohmann::json::array();
    for (const EpochRecord& e : epochs) {
        per_epoch.push_back(
            {{"epoch", e.epoch}, {"train_loss", e.train_loss}, {"val_rmse_c", e.val_rmse_c}});
    }
    return {{"epochs", per_epoch},
            {"best_epoch", best_epoch},
            {"best_val_rmse_c", best_val_rmse_c},
            {"stop_reason", stop_reason}};
}

namespace {

Tensor stack_field(const std::vector<TrainSample>& samples,
                   const std::vector<std::size_t>& indices, const Tensor TrainSample::*field) {
    if (indices.empty()) {
        throw UsageError("stack: empty batch");
    }
    const Tensor& first = samples[indices[0]].*field;
    Shape shape = first.shape();
    shape.insert(shape.begin(), static_cast<int>(indices.size()));
    const std::size_t stride = static_cast<std::size_t>(first.size());
    std::vector<double> values(indices.size() * stride);
    for (std::size_t b = 0; b < indices.size(); ++b) {
        const Tensor& t = samples[indices[b]].*field;
        if (t.shape() != first.shape()) {
            throw ConfigError("stack: sample tensor shapes differ within a batch");
        }
        std::copy(t.values().begin(), t.values().end(), values.begin() + b * stride);
    }
    return Tensor::from_values(std::move(shape), std::move(values));
}

}  // namespace

Tensor stack_inputs(const std::vector<TrainSample>& samples,
                    const std::vector<std::size_t>& indices) {
    return stack_field(samples, indices, &TrainSample::input);
}
Tensor stack_targets(const std::vector<TrainSample>& samples,
                     const std::vector<std::size_t>& indices) {
    return stack_field(samples, indices, &TrainSample::target);
}
Tensor stack_masks(const std::vector<TrainSample>& samples,
                   const std::vector<std::size_t>& indices) {
    return stack_field(samples, indices, &TrainSample::mask);
}

double evaluate_rmse_c(Model& model, const std::vector<TrainSample>& samples,
                       const NormalizationConstants& norm, int batch_size) {
    if (samples.empty()) {
        throw DataError("evaluate_rmse_c: empty sample set");
    }
    NoGradGuard no_grad;
    double sq_sum = 0.0;
    double mask_sum = 0.0;
    std::vector<std::size_t> indices;
    for (std::size_t start = 0; start < samples.size(); start += batch_size) {
        indices.clear();
        for (std::size_t i = start; i < std::min(samples.size(), start + batch_size); ++i) {
            indices.push_back(i);
        }
        const Tensor pred = model.forward(stack_inputs(samples, indices));
        const Tensor target = stack_targets(samples, indices);
        const Tensor mask = stack_masks(samples, indices);
        const auto& pv = pred.values();
        const auto& tv = target.values();
        const auto& mv = mask.values();
        if (pv.size() != tv.size()) {
            throw ConfigError("evaluate_rmse_c: prediction/target shape mismatch");
        }
        for (std::size_t i = 0; i < pv.size(); ++i) {
            const double d = (pv[i] - tv[i]) * mv[i];
            sq_sum += d * d;
            mask_sum += mv[i];
        }
    }
    if (mask_sum == 0.0) {
        throw DataError("evaluate_rmse_c: no valid pixels in the sample set");
    }
    return std::sqrt(sq_sum / mask_sum) * norm.lst_scale_c;
}

TrainReport train(Model& model, const std::vector<TrainSample>& train_set,
                  const std::vector<TrainSample>& val_set, const TrainConfig& config) {
    if (train_set.empty() || val_set.empty()) {
        throw DataError("train: empty train or validation split");
    }
    const int batch = std::min<int>(config.batch_size, static_cast<int>(train_set.size()));

    AdamConfig adam_cfg;
    adam_cfg.lr = config.lr;
    AdamState optimizer(model.parameter_tensors(), adam_cfg);
    EarlyStopper stopper(config.patience);
    SplitMix64 shuffle_rng = SplitMix64(config.seed).fork("train_shuffle");

    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    TrainReport report;
    std::vector<std::vector<double>> best_weights;
    for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        double loss_sum = 0.0;
        int n_batches = 0;
        // Drop-last batching keeps per-epoch step counts deterministic.
        for (std::size_t start = 0; start + batch <= order.size(); start += batch) {
            const std::vector<std::size_t> indices(order.begin() + start,
                                                   order.begin() + start + batch);
            const Tensor input = stack_inputs(train_set, indices);
            const Tensor target = stack_targets(train_set, indices);
            const Tensor mask = stack_masks(train_set, indices);
            model.zero_grad();
            const Tensor loss = masked_mse(model.forward(input), target, mask);
            backward(loss);
            optimizer.step();
            loss_sum += loss.item();
            ++n_batches;
        }
        const double val_rmse = evaluate_rmse_c(model, val_set, config.norm, batch);
        report.epochs.push_back(
            {epoch,n_batches > 0 ? loss_sum / n_batches : 0.0, val_rmse});
        const bool stop = stopper.observe(val_rmse);
        if (stopper.best_epoch() == epoch) {
            best_weights.clear();
            for (const NamedParam& p : model.parameters()) {
                best_weights.push_back(p.tensor.values());
            }
        }
        if (stop) {
            report.stop_reason = "patience";
            break;
        }
    }
    if (report.stop_reason.empty()) {
        report.stop_reason = "max_epochs";
    }
    report.best_epoch = stopper.best_epoch();
    report.best_val_rmse_c = stopper.best_value();
    // Restore-best: hand back the weights of the best validation epoch.
    auto& params = model.parameters();
    for (std::size_t i = 0; i < params.size(); ++i) {
        params[i].tensor.mutable_values() = best_weights[i];
        params[i].tensor.zero_grad();
    }
    return report;
}

}  // namespace thermocast
