#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "spectral/data_io.hpp"
#include "spectral/nn.hpp"
#include "spectral/optim.hpp"

namespace spectral {

struct DataConfig {
    std::string source;  // "cifar10" | "synth"
    std::string path;    // directory holding CIFAR-10 .bin batches
    int n_train = 1000;
    int n_test = 200;
    std::uint64_t seed = 0;
};

struct TrainingConfig {
    Rule rule = Rule::Adam;
    double lr = 1e-3;
    double momentum = 0.9;
    double weight_decay = 0.0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    int epochs = 1;
    int batch_size = 64;
    std::vector<std::pair<int, double>> milestones;
};

struct OutputConfig {
    std::string dir;
};

struct ExperimentConfig {
    DataConfig data;
    ArchitectureSpec model;
    TrainingConfig optim;
    OutputConfig output;
};

// Carries every violation found, not just the first.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> violations);
    const std::vector<std::string>& violations() const { return violations_; }

private:
    std::vector<std::string> violations_;
};

ExperimentConfig parse_config_json(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

// Shared training loop; per-epoch rows are deterministic functions of
// (config, data, seed). Wall-clock timing goes to stderr only.
struct EpochRecord {
    int epoch = 0;  // 1-indexed
    double lr = 0.0;
    double train_loss = 0.0;
    double train_err = 0.0;
    double test_err = 0.0;
};

std::vector<EpochRecord> run_training(SequentialNetwork& net, const Dataset& train,
                                      const Dataset& test, const TrainingConfig& tc,
                                      std::uint64_t seed, bool quiet = false);

void write_epoch_csv(const std::string& path, const std::vector<EpochRecord>& records);

Dataset load_experiment_data(const DataConfig& cfg, bool labeled, Dataset* test_out);

// Speedup bookkeeping for the twin-parametrization experiment.
struct CompareOutcome {
    std::uint64_t seed = 0;
    double l_star = 0.0;           // trailing-5-epoch mean of the spatial loss
    int epochs_spatial = 0;        // first epoch at or below l_star
    int epochs_spectral = 0;       // 0 when never reached within budget
    double speedup = 0.0;          // lower bound when spectral never reached
    bool lower_bound = false;
};

CompareOutcome compare_outcome(std::uint64_t seed, const std::vector<EpochRecord>& spatial,
                               const std::vector<EpochRecord>& spectral);

// CLI entry points. Each returns a process exit code (0 ok); config
// validation problems throw ConfigError before any work happens.
struct PoolDemoArgs {
    std::string input;       // *.pgm path, or cifar:<path>:<index>
    std::vector<int> sizes;  // square output sizes
    std::string out_dir;
};
int cmd_pool_demo(const PoolDemoArgs& args);

struct InfoPreservationArgs {
    std::string data = "synth";  // "cifar" | "synth"
    std::string path;            // CIFAR directory when data == "cifar"
    int n = 100;
    std::string fractions = "0.02..1.0";  // comma list, or lo..hi for a 25-point sweep
    std::string out_csv;
    std::uint64_t seed = 1;
};
int cmd_info_preservation(const InfoPreservationArgs& args);

int cmd_train(const ExperimentConfig& cfg);

// Twin spatial/spectral runs from identical spatial initializations; when
// seeds is non-empty it overrides the single config seed.
int cmd_compare_param(const ExperimentConfig& cfg, const std::vector<std::uint64_t>& seeds = {});

}  // namespace spectral
