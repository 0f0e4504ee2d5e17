#include "spectral/experiments.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "spectral/pooling.hpp"

namespace spectral {

namespace {

using nlohmann::json;

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag) {
    // splitmix64 finalizer over seed ^ tag
    std::uint64_t z = seed ^ tag;
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t kShuffleTag = 0x73687566666c6531ULL;
constexpr std::uint64_t kTestDataTag = 0x746573742d646174ULL;

}  // namespace

// ---------------------------------------------------------------------------
// Config parsing

ConfigError::ConfigError(std::vector<std::string> violations)
    : std::runtime_error("invalid config:\n  - " +
                         std::accumulate(violations.begin() + 1, violations.end(), violations[0],
                                         [](std::string acc, const std::string& v) {
                                             return std::move(acc) + "\n  - " + v;
                                         })),
      violations_(std::move(violations)) {}

namespace {

void check_keys(const json& obj, const std::string& section,
                const std::vector<std::string>& allowed, std::vector<std::string>& problems) {
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            problems.push_back(section + ": unknown key '" + key + "'");
    }
}

template <typename T>
bool fetch(const json& obj, const std::string& section, const std::string& key, bool required,
           T& out, std::vector<std::string>& problems) {
    if (!obj.contains(key)) {
        if (required) problems.push_back(section + "." + key + " is required");
        return false;
    }
    try {
        out = obj.at(key).get<T>();
        return true;
    } catch (const json::exception&) {
        problems.push_back(section + "." + key + " has the wrong type");
        return false;
    }
}

}  // namespace

ExperimentConfig parse_config_json(const std::string& text) {
    std::vector<std::string> problems;
    json root;
    try {
        root = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError({std::string("not valid JSON: ") + e.what()});
    }
    if (!root.is_object()) throw ConfigError({"top level must be a JSON object"});
    check_keys(root, "config", {"data", "model", "optim", "output"}, problems);

    ExperimentConfig cfg;

    // data
    if (!root.contains("data") || !root["data"].is_object()) {
        problems.push_back("data section is required");
    } else {
        const json& d = root["data"];
        check_keys(d, "data", {"source", "path", "n_train", "n_test", "seed"}, problems);
        fetch(d, "data", "source", true, cfg.data.source, problems);
        if (!cfg.data.source.empty() && cfg.data.source != "cifar10" && cfg.data.source != "synth")
            problems.push_back("data.source must be 'cifar10' or 'synth'");
        fetch(d, "data", "path", cfg.data.source == "cifar10", cfg.data.path, problems);
        fetch(d, "data", "n_train", false, cfg.data.n_train, problems);
        fetch(d, "data", "n_test", false, cfg.data.n_test, problems);
        if (cfg.data.n_train < 1) problems.push_back("data.n_train must be >= 1");
        if (cfg.data.n_test < 0) problems.push_back("data.n_test must be >= 0");
        fetch(d, "data", "seed", true, cfg.data.seed, problems);
    }

    // model
    if (!root.contains("model") || !root["model"].is_object()) {
        problems.push_back("model section is required");
    } else {
        const json& m = root["model"];
        check_keys(m, "model",
                   {"family", "gamma", "depth", "alpha", "beta", "filter_size", "width_scale",
                    "parametrization"},
                   problems);
        std::string family;
        if (fetch(m, "model", "family", true, family, problems)) {
            try {
                cfg.model.family = family_from_name(family);
            } catch (const std::invalid_argument& e) {
                problems.push_back(std::string("model.family: ") + e.what());
            }
        }
        fetch(m, "model", "gamma", false, cfg.model.gamma, problems);
        fetch(m, "model", "depth", false, cfg.model.depth, problems);
        fetch(m, "model", "alpha", false, cfg.model.alpha, problems);
        fetch(m, "model", "beta", false, cfg.model.beta, problems);
        fetch(m, "model", "filter_size", false, cfg.model.filter_size, problems);
        fetch(m, "model", "width_scale", false, cfg.model.width_scale, problems);
        std::string par = "spatial";
        if (fetch(m, "model", "parametrization", false, par, problems)) {
            if (par == "spatial")
                cfg.model.parametrization = Parametrization::Spatial;
            else if (par == "spectral")
                cfg.model.parametrization = Parametrization::Spectral;
            else
                problems.push_back("model.parametrization must be 'spatial' or 'spectral'");
        }
        if (cfg.model.filter_size != 3 && cfg.model.filter_size != 5)
            problems.push_back("model.filter_size must be 3 or 5");
        if (!(cfg.model.width_scale > 0.0) || cfg.model.width_scale > 1.0)
            problems.push_back("model.width_scale must lie in (0, 1]");
        if (cfg.model.family == Family::SpectralPoolNet &&
            (cfg.model.gamma < 0.25 || cfg.model.gamma > 0.85))
            problems.push_back("model.gamma must lie in [0.25, 0.85]");
        if (cfg.model.depth < 1) problems.push_back("model.depth must be >= 1");
    }

    // optim
    if (!root.contains("optim") || !root["optim"].is_object()) {
        problems.push_back("optim section is required");
    } else {
        const json& o = root["optim"];
        check_keys(o, "optim",
                   {"rule", "lr", "momentum", "weight_decay", "betas", "epochs", "batch_size",
                    "milestones"},
                   problems);
        std::string rule;
        if (fetch(o, "optim", "rule", true, rule, problems)) {
            if (rule == "sgd")
                cfg.optim.rule = Rule::SGD;
            else if (rule == "momentum")
                cfg.optim.rule = Rule::Momentum;
            else if (rule == "adam")
                cfg.optim.rule = Rule::Adam;
            else
                problems.push_back("optim.rule must be 'sgd', 'momentum', or 'adam'");
        }
        fetch(o, "optim", "lr", true, cfg.optim.lr, problems);
        if (!(cfg.optim.lr > 0.0)) problems.push_back("optim.lr must be > 0");
        fetch(o, "optim", "momentum", false, cfg.optim.momentum, problems);
        if (cfg.optim.momentum < 0.0 || cfg.optim.momentum >= 1.0)
            problems.push_back("optim.momentum must lie in [0, 1)");
        fetch(o, "optim", "weight_decay", false, cfg.optim.weight_decay, problems);
        if (cfg.optim.weight_decay < 0.0) problems.push_back("optim.weight_decay must be >= 0");
        if (o.contains("betas")) {
            std::vector<double> betas;
            if (fetch(o, "optim", "betas", false, betas, problems)) {
                if (betas.size() != 2 || betas[0] < 0 || betas[0] >= 1 || betas[1] < 0 || betas[1] >= 1)
                    problems.push_back("optim.betas must be two values in [0, 1)");
                else {
                    cfg.optim.beta1 = betas[0];
                    cfg.optim.beta2 = betas[1];
                }
            }
        }
        fetch(o, "optim", "epochs", true, cfg.optim.epochs, problems);
        if (cfg.optim.epochs < 1) problems.push_back("optim.epochs must be >= 1");
        fetch(o, "optim", "batch_size", true, cfg.optim.batch_size, problems);
        if (cfg.optim.batch_size < 1) problems.push_back("optim.batch_size must be >= 1");
        if (o.contains("milestones")) {
            std::vector<std::vector<double>> raw;
            if (fetch(o, "optim", "milestones", false, raw, problems)) {
                int prev = -1;
                for (const auto& pair : raw) {
                    if (pair.size() != 2 || pair[0] != std::floor(pair[0]) || pair[1] <= 0.0) {
                        problems.push_back("optim.milestones entries must be [epoch, factor>0]");
                        break;
                    }
                    const int at = static_cast<int>(pair[0]);
                    if (at <= prev) {
                        problems.push_back("optim.milestones epochs must strictly increase");
                        break;
                    }
                    prev = at;
                    cfg.optim.milestones.emplace_back(at, pair[1]);
                }
            }
        }
    }

    // output
    if (!root.contains("output") || !root["output"].is_object()) {
        problems.push_back("output section is required");
    } else {
        check_keys(root["output"], "output", {"dir"}, problems);
        fetch(root["output"], "output", "dir", true, cfg.output.dir, problems);
    }

    if (!problems.empty()) throw ConfigError(std::move(problems));
    return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError({"cannot open config file: " + path});
    std::stringstream buf;
    buf << f.rdbuf();
    return parse_config_json(buf.str());
}

// ---------------------------------------------------------------------------
// Data loading

Dataset load_experiment_data(const DataConfig& cfg, bool labeled, Dataset* test_out) {
    Dataset train, test;
    if (cfg.source == "cifar10") {
        std::vector<std::string> train_files;
        for (int i = 1; i <= 5; ++i) {
            const std::string p = cfg.path + "/data_batch_" + std::to_string(i) + ".bin";
            if (std::filesystem::exists(p)) train_files.push_back(p);
        }
        if (train_files.empty())
            throw std::runtime_error("no CIFAR-10 batches (data_batch_*.bin) under " + cfg.path);
        train = load_cifar10_binary(train_files);
        const std::string test_path = cfg.path + "/test_batch.bin";
        if (cfg.n_test > 0) {
            if (!std::filesystem::exists(test_path))
                throw std::runtime_error("missing CIFAR-10 test batch: " + test_path);
            test = load_cifar10_binary({test_path});
        }
    } else if (cfg.source == "synth") {
        if (labeled) {
            train = synth_oriented_textures(cfg.n_train, 32, 10, 1.5, cfg.seed);
            test = synth_oriented_textures(std::max(cfg.n_test, 1), 32, 10, 1.5,
                                           mix_seed(cfg.seed, kTestDataTag));
        } else {
            train = synth_power_law_images(cfg.n_train, 32, 1.5, cfg.seed);
            test = synth_power_law_images(std::max(cfg.n_test, 1), 32, 1.5,
                                          mix_seed(cfg.seed, kTestDataTag));
        }
    } else {
        throw std::runtime_error("unknown data source: " + cfg.source);
    }

    auto take_first = [](Dataset& ds, int n, const char* split) {
        if (n > ds.size()) {
            std::fprintf(stderr, "warning: requested %d %s images, dataset has %d; clamping\n", n,
                         split, ds.size());
            n = ds.size();
        }
        if (n == ds.size()) return;
        const std::size_t per_image = ds.images.size() / static_cast<std::size_t>(ds.size());
        std::vector<int> dims = ds.images.shape().dims();
        dims[0] = n;
        std::vector<double> data(ds.images.data(), ds.images.data() + per_image * static_cast<std::size_t>(n));
        ds.images = RealTensor(Shape(dims), std::move(data));
        ds.labels.resize(static_cast<std::size_t>(n));
    };
    take_first(train, cfg.n_train, "train");
    if (test.size() > 0) take_first(test, std::max(cfg.n_test, 0), "test");
    if (cfg.n_test == 0) test = Dataset{};

    if (test_out != nullptr) *test_out = std::move(test);
    return train;
}

// ---------------------------------------------------------------------------
// Training loop

namespace {

void gather_batch(const Dataset& ds, const std::vector<int>& order, int begin, int end,
                  RealTensor& images, std::vector<int>& labels) {
    const std::size_t per_image = ds.images.size() / static_cast<std::size_t>(ds.size());
    std::vector<int> dims = ds.images.shape().dims();
    dims[0] = end - begin;
    images = RealTensor(Shape(dims));
    labels.resize(static_cast<std::size_t>(end - begin));
    for (int i = begin; i < end; ++i) {
        const int src = order[static_cast<std::size_t>(i)];
        std::copy_n(ds.images.data() + static_cast<std::size_t>(src) * per_image, per_image,
                    images.data() + static_cast<std::size_t>(i - begin) * per_image);
        labels[static_cast<std::size_t>(i - begin)] = ds.labels[static_cast<std::size_t>(src)];
    }
}

double evaluate_error(SequentialNetwork& net, const Dataset& ds, int batch_size) {
    if (ds.size() == 0) return 0.0;
    int wrong = 0;
    std::vector<int> order(static_cast<std::size_t>(ds.size()));
    std::iota(order.begin(), order.end(), 0);
    RealTensor images;
    std::vector<int> labels;
    for (int begin = 0; begin < ds.size(); begin += batch_size) {
        const int end = std::min(ds.size(), begin + batch_size);
        gather_batch(ds, order, begin, end, images, labels);
        auto result = net.forward(images, labels, Mode::Eval);
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (result.predictions[i] != labels[i]) ++wrong;
    }
    return static_cast<double>(wrong) / ds.size();
}

}  // namespace

std::vector<EpochRecord> run_training(SequentialNetwork& net, const Dataset& train,
                                      const Dataset& test, const TrainingConfig& tc,
                                      std::uint64_t seed, bool quiet) {
    OptimizerConfig ocfg;
    ocfg.rule = tc.rule;
    ocfg.learning_rate = tc.lr;
    ocfg.momentum = tc.momentum;
    ocfg.weight_decay = tc.weight_decay;
    ocfg.beta1 = tc.beta1;
    ocfg.beta2 = tc.beta2;
    auto slots = net.params();
    Optimizer opt(ocfg, slots);
    LrSchedule sched{tc.lr, tc.milestones};
    std::mt19937_64 shuffle_rng(mix_seed(seed, kShuffleTag));

    std::vector<int> order(static_cast<std::size_t>(train.size()));
    std::iota(order.begin(), order.end(), 0);

    std::vector<EpochRecord> records;
    records.reserve(static_cast<std::size_t>(tc.epochs));
    RealTensor images;
    std::vector<int> labels;
    for (int epoch = 1; epoch <= tc.epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        const double lr = schedule_lr(sched, epoch);
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        double loss_sum = 0.0;
        int wrong = 0;
        for (int begin = 0; begin < train.size(); begin += tc.batch_size) {
            const int end = std::min(train.size(), begin + tc.batch_size);
            gather_batch(train, order, begin, end, images, labels);
            auto result = net.forward(images, labels, Mode::Train);
            net.backward(result);
            opt.step(slots, lr);
            loss_sum += result.loss * (end - begin);
            for (std::size_t i = 0; i < labels.size(); ++i)
                if (result.predictions[i] != labels[i]) ++wrong;
        }
        EpochRecord rec;
        rec.epoch = epoch;
        rec.lr = lr;
        rec.train_loss = loss_sum / train.size();
        rec.train_err = static_cast<double>(wrong) / train.size();
        rec.test_err = evaluate_error(net, test, tc.batch_size);
        records.push_back(rec);
        if (!quiet) {
            const double secs =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            std::fprintf(stderr,
                         "epoch %3d  lr %.3g  train_loss %.4f  train_err %.4f  test_err %.4f  (%.1fs)\n",
                         epoch, lr, rec.train_loss, rec.train_err, rec.test_err, secs);
        }
    }
    return records;
}

void write_epoch_csv(const std::string& path, const std::vector<EpochRecord>& records) {
    std::vector<std::vector<std::string>> rows;
    rows.reserve(records.size());
    for (const auto& r : records)
        rows.push_back({std::to_string(r.epoch), csv_num(r.lr), csv_num(r.train_loss),
                        csv_num(r.train_err), csv_num(r.test_err)});
    write_csv(path, {"epoch", "lr", "train_loss", "train_err", "test_err"}, rows);
}

CompareOutcome compare_outcome(std::uint64_t seed, const std::vector<EpochRecord>& spatial,
                               const std::vector<EpochRecord>& spectral) {
    CompareOutcome out;
    out.seed = seed;
    const int budget = static_cast<int>(spatial.size());
    const int tail = std::min(5, budget);
    double sum = 0.0;
    for (int i = budget - tail; i < budget; ++i) sum += spatial[static_cast<std::size_t>(i)].train_loss;
    out.l_star = sum / tail;

    auto first_reach = [&](const std::vector<EpochRecord>& records) {
        for (const auto& r : records)
            if (r.train_loss <= out.l_star) return r.epoch;
        return 0;
    };
    out.epochs_spatial = first_reach(spatial);
    out.epochs_spectral = first_reach(spectral);
    if (out.epochs_spectral == 0) {
        out.lower_bound = true;
        out.speedup = static_cast<double>(out.epochs_spatial) / static_cast<int>(spectral.size());
    } else {
        out.speedup = static_cast<double>(out.epochs_spatial) / out.epochs_spectral;
    }
    return out;
}

// ---------------------------------------------------------------------------
// pool-demo

namespace {

RealTensor load_demo_image(const std::string& input) {
    if (input.size() > 4 && input.substr(input.size() - 4) == ".pgm") return read_pgm(input);
    if (input.rfind("cifar:", 0) == 0) {
        const auto second = input.find(':', 6);
        if (second == std::string::npos)
            throw std::runtime_error("cifar input must be cifar:<file>:<index>");
        const std::string path = input.substr(6, second - 6);
        const int index = std::stoi(input.substr(second + 1));
        Dataset ds = load_cifar10_binary({path});
        if (index < 0 || index >= ds.size())
            throw std::runtime_error("cifar index " + std::to_string(index) + " out of range");
        RealTensor gray(Shape({32, 32}));
        const std::size_t plane = 1024;
        const double* img = ds.images.data() + static_cast<std::size_t>(index) * 3 * plane;
        for (std::size_t i = 0; i < plane; ++i)
            gray[i] = (img[i] + img[plane + i] + img[2 * plane + i]) / 3.0;
        return gray;
    }
    throw std::runtime_error("pool-demo input must be a .pgm file or cifar:<file>:<index>");
}

double normalized_error(const RealTensor& x, const RealTensor& approx) {
    RealTensor diff(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) diff[i] = x[i] - approx[i];
    const double denom = l2_norm_sq(x);
    return denom == 0.0 ? 0.0 : std::sqrt(l2_norm_sq(diff) / denom);
}

}  // namespace

int cmd_pool_demo(const PoolDemoArgs& args) {
    if (args.sizes.empty()) throw ConfigError({"pool-demo: at least one size is required"});
    RealTensor img = load_demo_image(args.input);
    const int M = img.shape().rows(), N = img.shape().cols();
    for (int h : args.sizes)
        if (h < 1 || h > std::min(M, N))
            throw ConfigError({"pool-demo: size " + std::to_string(h) + " invalid for " +
                               std::to_string(M) + "x" + std::to_string(N) + " input"});

    std::filesystem::create_directories(args.out_dir);
    write_pgm(img, args.out_dir + "/original.pgm");

    std::vector<std::vector<std::string>> rows;
    for (int h : args.sizes) {
        RealTensor spectral_img = spectral_approximate(img, h, std::min(h, N));
        const int stride = std::clamp(static_cast<int>(std::lround(static_cast<double>(M) / h)), 1,
                                      std::min(M, N));
        auto [pooled, cache] = max_pool_forward(img, stride, stride);
        RealTensor maxpool_img = max_pool_reconstruct(pooled, cache);

        write_pgm(spectral_img, args.out_dir + "/spectral_" + std::to_string(h) + ".pgm");
        write_pgm(maxpool_img, args.out_dir + "/maxpool_" + std::to_string(h) + ".pgm");
        const double fraction =
            static_cast<double>(h) * std::min(h, N) / (static_cast<double>(M) * N);
        rows.push_back({std::to_string(h), csv_num(fraction), csv_num(normalized_error(img, spectral_img)),
                        csv_num(normalized_error(img, maxpool_img)), std::to_string(stride)});
    }
    write_csv(args.out_dir + "/errors.csv", {"size", "fraction", "spectral_err", "maxpool_err", "stride"},
              rows);
    return 0;
}

// ---------------------------------------------------------------------------
// info-preservation

namespace {

std::vector<double> parse_fractions(const std::string& text) {
    std::vector<double> fractions;
    std::stringstream ss(text);
    for (std::string token; std::getline(ss, token, ',');) {
        const auto dots = token.find("..");
        if (dots != std::string::npos) {
            const double lo = std::stod(token.substr(0, dots));
            const double hi = std::stod(token.substr(dots + 2));
            const int steps = 25;
            for (int i = 0; i < steps; ++i)
                fractions.push_back(lo + (hi - lo) * i / (steps - 1));
        } else if (!token.empty()) {
            fractions.push_back(std::stod(token));
        }
    }
    for (double f : fractions)
        if (!(f > 0.0) || f > 1.0)
            throw ConfigError({"fractions must lie in (0, 1], got " + csv_num(f)});
    if (fractions.empty()) throw ConfigError({"no fractions given"});
    return fractions;
}

}  // namespace

int cmd_info_preservation(const InfoPreservationArgs& args) {
    Dataset ds;
    if (args.data == "cifar") {
        DataConfig dc;
        dc.source = "cifar10";
        dc.path = args.path;
        dc.n_train = args.n;
        dc.n_test = 0;
        dc.seed = args.seed;
        ds = load_experiment_data(dc, false, nullptr);
    } else if (args.data == "synth") {
        ds = synth_power_law_images(args.n, 32, 1.5, args.seed);
    } else {
        throw ConfigError({"info-preservation: data must be 'cifar' or 'synth'"});
    }

    const std::vector<double> fractions = parse_fractions(args.fractions);
    const int S = ds.images.shape().dim(2);
    const int n = ds.size();
    const std::size_t per_image = ds.images.size() / static_cast<std::size_t>(n);
    const std::vector<int> dims{ds.images.shape().dim(1), S, S};

    std::vector<std::vector<std::string>> rows;
    for (double f : fractions) {
        const int keep = std::clamp(static_cast<int>(std::lround(S * std::sqrt(f))), 1, S);
        // nearest power-of-two stride in log space; max pooling reaches only
        // the fractions 1/s^2
        int best_stride = 1;
        double best_gap = std::numeric_limits<double>::infinity();
        for (int s = 1; s <= S; s *= 2) {
            const double gap = std::abs(std::log(1.0 / (static_cast<double>(s) * s)) - std::log(f));
            if (gap < best_gap) {
                best_gap = gap;
                best_stride = s;
            }
        }

        double spectral_sum = 0.0, maxpool_sum = 0.0;
        for (int i = 0; i < n; ++i) {
            RealTensor img{Shape(dims)};
            std::copy_n(ds.images.data() + static_cast<std::size_t>(i) * per_image, per_image,
                        img.data());
            spectral_sum += normalized_error(img, spectral_approximate(img, keep, keep));
            auto [pooled, cache] = max_pool_forward(img, best_stride, best_stride);
            maxpool_sum += normalized_error(img, max_pool_reconstruct(pooled, cache));
        }
        rows.push_back({csv_num(f), csv_num(spectral_sum / n), csv_num(maxpool_sum / n),
                        std::to_string(best_stride)});
    }
    if (!args.out_csv.empty()) {
        std::filesystem::create_directories(
            std::filesystem::absolute(args.out_csv).parent_path());
        write_csv(args.out_csv, {"fraction", "spectral_err", "maxpool_err", "stride"}, rows);
    }
    return 0;
}

// ---------------------------------------------------------------------------
// train

int cmd_train(const ExperimentConfig& cfg) {
    std::filesystem::create_directories(cfg.output.dir);
    Dataset test;
    Dataset train = load_experiment_data(cfg.data, true, &test);
    normalize(train, test.size() > 0 ? &test : nullptr);

    ArchitectureSpec spec = cfg.model;
    spec.classes = train.classes;
    const Shape input{train.images.shape().dim(1), train.images.shape().dim(2),
                      train.images.shape().dim(3)};
    SequentialNetwork net = build_architecture(spec, input, cfg.data.seed);

    auto records = run_training(net, train, test, cfg.optim, cfg.data.seed);
    write_epoch_csv(cfg.output.dir + "/train_log.csv", records);
    save_checkpoint(cfg.output.dir + "/checkpoint.bin", spec, input, cfg.data.seed, net);

    const auto& last = records.back();
    std::printf("final epoch %d: train_loss %s train_err %s test_err %s\n", last.epoch,
                csv_num(last.train_loss).c_str(), csv_num(last.train_err).c_str(),
                csv_num(last.test_err).c_str());
    return 0;
}

// ---------------------------------------------------------------------------
// compare-param

int cmd_compare_param(const ExperimentConfig& cfg, const std::vector<std::uint64_t>& seeds_in) {
    std::filesystem::create_directories(cfg.output.dir);
    std::vector<std::uint64_t> seeds = seeds_in.empty()
                                          ? std::vector<std::uint64_t>{cfg.data.seed}
                                          : seeds_in;

    std::vector<std::vector<std::string>> summary;
    std::vector<double> speedups;
    for (std::uint64_t seed : seeds) {
        DataConfig dc = cfg.data;
        dc.seed = seed;
        Dataset test;
        Dataset train = load_experiment_data(dc, true, &test);
        normalize(train, test.size() > 0 ? &test : nullptr);
        ArchitectureSpec spec = cfg.model;
        spec.classes = train.classes;
        const Shape input{train.images.shape().dim(1), train.images.shape().dim(2),
                          train.images.shape().dim(3)};

        std::fprintf(stderr, "seed %llu: training spatial twin\n",
                     static_cast<unsigned long long>(seed));
        spec.parametrization = Parametrization::Spatial;
        SequentialNetwork spatial_net = build_architecture(spec, input, seed);
        auto spatial_log = run_training(spatial_net, train, test, cfg.optim, seed);
        write_epoch_csv(cfg.output.dir + "/train_spatial_seed" + std::to_string(seed) + ".csv",
                        spatial_log);

        std::fprintf(stderr, "seed %llu: training spectral twin\n",
                     static_cast<unsigned long long>(seed));
        spec.parametrization = Parametrization::Spectral;
        SequentialNetwork spectral_net = build_architecture(spec, input, seed);
        auto spectral_log = run_training(spectral_net, train, test, cfg.optim, seed);
        write_epoch_csv(cfg.output.dir + "/train_spectral_seed" + std::to_string(seed) + ".csv",
                        spectral_log);

        CompareOutcome oc = compare_outcome(seed, spatial_log, spectral_log);
        speedups.push_back(oc.speedup);
        summary.push_back({std::to_string(oc.seed), csv_num(oc.l_star),
                           std::to_string(oc.epochs_spatial), std::to_string(oc.epochs_spectral),
                           csv_num(oc.speedup), oc.lower_bound ? "1" : "0"});
        std::printf("seed %llu: speedup %s%s (spatial %d epochs, spectral %d epochs to loss %s)\n",
                    static_cast<unsigned long long>(seed), csv_num(oc.speedup).c_str(),
                    oc.lower_bound ? " (lower bound)" : "", oc.epochs_spatial, oc.epochs_spectral,
                    csv_num(oc.l_star).c_str());
    }
    write_csv(cfg.output.dir + "/summary.csv",
              {"seed", "l_star", "epochs_spatial", "epochs_spectral", "speedup", "lower_bound"},
              summary);

    std::sort(speedups.begin(), speedups.end());
    const std::size_t n = speedups.size();
    const double median =
        n % 2 ? speedups[n / 2] : 0.5 * (speedups[n / 2 - 1] + speedups[n / 2]);
    std::printf("median speedup over %zu seed(s): %s\n", n, csv_num(median).c_str());
    return 0;
}

}  // namespace spectral
