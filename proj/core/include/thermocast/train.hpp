#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "thermocast/model.hpp"
#include "thermocast/tensor.hpp"

namespace thermocast {

enum class TrainTask { downscale, nowcast };

const char* to_string(TrainTask t);
TrainTask train_task_from_string(const std::string& s);

// Fixed affine normalization; the constants travel with every checkpoint
// so inference never depends on training-set statistics.
struct NormalizationConstants {
    double lst_offset_c = 20.0;
    double lst_scale_c = 15.0;
};

inline double normalize_lst(double celsius, const NormalizationConstants& n = {}) {
    return (celsius - n.lst_offset_c) / n.lst_scale_c;
}
inline double denormalize_lst(double value, const NormalizationConstants& n = {}) {
    return value * n.lst_scale_c + n.lst_offset_c;
}
// SZA enters the model as the cosine of the angle.
double encode_sza(double sza_deg);

struct TrainConfig {
    TrainTask task = TrainTask::downscale;
    double lr = 2e-5;
    int batch_size = 32;
    int max_epochs = 1000;
    int patience = 10;
    std::uint64_t seed = 0;
    double width_factor = 1.0;
    NormalizationConstants norm;

    static TrainConfig downscale_defaults();  // lr 2e-5, batch 32
    static TrainConfig nowcast_defaults();    // lr 1e-4, batch 128

    nlohmann::json to_json() const;
    static TrainConfig from_json(const nlohmann::json& j);
};

// One training sample: input tensor (rank 4 for downscaling, rank 5 for
// nowcasting, no batch axis), target (C,H,W equivalent without batch), and
// a {0,1} mask selecting the target pixels the loss may see.
struct TrainSample {
    Tensor input;
    Tensor target;
    Tensor mask;
};

// sum(mask * (pred-target)^2) / sum(mask); gradients flow through pred
// only. Throws DataError on an all-zero mask.
Tensor masked_mse(const Tensor& pred, const Tensor& target, const Tensor& mask);

// Patience rule on validation RMSE: stop after `patience` consecutive
// epochs without strict improvement; epochs are counted from 1.
class EarlyStopper {
public:
    explicit EarlyStopper(int patience);
    // Returns true when training should stop after this epoch.
    bool observe(double val_rmse);
    int best_epoch() const { return best_epoch_; }
    double best_value() const { return best_; }
    int epochs_seen() const { return epoch_; }

private:
    int patience_;
    int epoch_ = 0;
    int best_epoch_ = 0;
    double best_ = 0.0;
    int since_best_ = 0;
};

struct EpochRecord {
    int epoch = 0;
    double train_loss = 0.0;  // masked MSE in normalized units
    double val_rmse_c = 0.0;  // degC
};

struct TrainReport {
    std::vector<EpochRecord> epochs;
    int best_epoch = 0;
    double best_val_rmse_c = 0.0;
    std::string stop_reason;  // "patience" | "max_epochs"
    nlohmann::json to_json() const;
};

// Pixel-pooled RMSE in degC of the model over a sample set.
double evaluate_rmse_c(Model& model, const std::vector<TrainSample>& samples,
                       const NormalizationConstants& norm, int batch_size);

// Deterministic training loop: seeded shuffling, drop-last batching, Adam,
// early stopping on validation RMSE with best-weight restore. The model is
// left holding the weights of its best validation epoch.
TrainReport train(Model& model, const std::vector<TrainSample>& train_set,
                  const std::vector<TrainSample>& val_set, const TrainConfig& config);

// Stacks samples (by index) into batched tensors along a new batch axis.
Tensor stack_inputs(const std::vector<TrainSample>& samples,
                    const std::vector<std::size_t>& indices);
Tensor stack_targets(const std::vector<TrainSample>& samples,
                     const std::vector<std::size_t>& indices);
Tensor stack_masks(const std::vector<TrainSample>& samples,
                   const std::vector<std::size_t>& indices);

}  // namespace thermocast
