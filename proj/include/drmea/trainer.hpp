#pragma once

#include <string>
#include <vector>

#include "drmea/anchors.hpp"
#include "drmea/data.hpp"
#include "drmea/losses.hpp"
#include "drmea/model.hpp"

namespace drmea {

enum class OptimizerKind { kAdam, kSgd };

// All hyperparameters and schedule knobs of one run. Config files use the
// flat `key = value` format with keys named exactly like these fields.
struct RunConfig {
    std::vector<int> dims = {64, 32};  // hidden layer sizes; d_in and c come from data
    std::vector<ActivationSpec> activations = {{Activation::kLeakyRelu, 0.2},
                                               {Activation::kTanh, 0.0}};
    double lambda1 = 10.0;
    double lambda2 = 5000.0;
    int k = 1;            // top-k soft-label truncation
    int d_prime = 0;      // 0 = auto: batch_size - 1
    OptimizerKind optimizer = OptimizerKind::kAdam;
    double lr = 2e-4;     // Adam lr, or SGD base lr
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    double momentum = 0.9;
    double weight_decay = 5e-4;
    double sched_alpha = 10.0;  // SGD lr decay: lr / (1 + alpha p)^beta
    double sched_beta = 0.75;
    std::size_t batch_size = 50;
    int epochs = 60;
    int intra_start_epoch = -1;  // -1 = auto: 15, or epochs/4 when epochs < 30
    std::uint64_t seed = 0;
    double eps = 1e-12;
    double gap_tol = 1e-6;
    std::size_t anchor_max_samples = 0;  // 0 = full source pass
    std::string ablation = "none";       // none | no-ds | no-al | source-only
};

// Fills the auto fields (d_prime, intra_start_epoch) and applies the ablation
// overrides; validates ranges.
RunConfig resolve_config(RunConfig config);

RunConfig parse_config_text(const std::string& text);
RunConfig load_config_file(const std::string& path);
std::string format_config(const RunConfig& config);

// First/second-moment (Adam) or velocity (SGD) buffers, shapes mirroring the
// parameter list; t counts completed steps.
struct OptimizerState {
    std::vector<Matrix> m;
    std::vector<Matrix> v;
    long t = 0;
};

OptimizerState make_optimizer_state(const std::vector<Matrix*>& params);

// Bias-corrected Adam update.
void adam_step(const std::vector<Matrix*>& params, const std::vector<Matrix>& grads,
               OptimizerState& state, double lr, double beta1, double beta2, double eps_opt);

// Momentum SGD with weight decay; effective lr = lr0 / (1 + alpha p)^beta for
// schedule progress p in [0, 1].
void sgd_momentum_step(const std::vector<Matrix*>& params, const std::vector<Matrix>& grads,
                       OptimizerState& state, double lr0, double momentum, double weight_decay,
                       double sched_alpha, double sched_beta, double progress);

struct EvalResult {
    double accuracy = 0.0;
    std::vector<double> per_class;
    double mean_class_accuracy = 0.0;
};

EvalResult evaluate(const ManifoldNetwork& net, const Matrix& features,
                    const std::vector<int>& labels, int class_count);
EvalResult evaluate(const ManifoldNetwork& net, const Dataset& dataset);

struct EpochLog {
    int epoch = 0;
    LossBreakdown mean;  // batch means of each term
    double src_acc = 0.0;
    double tgt_acc = 0.0;
    std::vector<double> tgt_per_class;  // empty when target labels are absent
    double tgt_mean_class_acc = 0.0;
    int align_skips = 0;
};

struct TrainResult {
    ManifoldNetwork net;
    std::vector<EpochLog> logs;
    int anchor_refreshes = 0;  // initial pass included
};

// Full training loop. Writes config.resolved, epochs.csv, model_final and
// anchors_epoch_<k>.csv into run_dir (pass "" to skip all file output).
// Target labels, when present on the dataset, are used for evaluation only.
TrainResult train(const RunConfig& config, const Dataset& source, const Dataset& target,
                  const std::string& run_dir);

void write_epochs_csv(const std::vector<EpochLog>& logs, const std::string& path);
std::vector<EpochLog> read_epochs_csv(const std::string& path);

}  // namespace drmea
