#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "spectral/experiments.hpp"

namespace {

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    for (std::string token; std::getline(ss, token, ',');)
        if (!token.empty()) out.push_back(std::stoi(token));
    return out;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
    std::vector<std::uint64_t> out;
    std::stringstream ss(text);
    for (std::string token; std::getline(ss, token, ',');)
        if (!token.empty()) out.push_back(std::stoull(token));
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"spectral-cnn: spectral pooling and spectral filter parametrization experiments"};
    app.require_subcommand(1);

    auto* pool = app.add_subcommand("pool-demo",
                                    "Write spectral vs max-pool approximations of one image");
    std::string pool_input, pool_sizes, pool_out;
    pool->add_option("--input", pool_input, "input image: a .pgm file or cifar:<file>:<index>")
        ->required();
    pool->add_option("--sizes", pool_sizes, "comma list of square output sizes, e.g. 16,8,4")
        ->required();
    pool->add_option("--out", pool_out, "output directory")->required();

    auto* info = app.add_subcommand("info-preservation",
                                    "Approximation error vs retained parameter fraction");
    spectral::InfoPreservationArgs info_args;
    info->add_option("--data", info_args.data, "corpus: cifar or synth")->required();
    info->add_option("--path", info_args.path, "CIFAR-10 binary directory (cifar only)");
    info->add_option("--n", info_args.n, "number of images");
    info->add_option("--fractions", info_args.fractions,
                     "comma list of fractions or lo..hi for a 25-point sweep");
    info->add_option("--out", info_args.out_csv, "output CSV path")->required();
    info->add_option("--seed", info_args.seed, "rng seed for the synthetic corpus");

    auto* train = app.add_subcommand("train", "Train one network from a JSON config");
    std::string train_config;
    train->add_option("--config", train_config, "experiment config file")->required();

    auto* compare = app.add_subcommand("compare-param",
                                       "Twin spatial/spectral training and speedup factor");
    std::string compare_config, compare_seeds;
    compare->add_option("--config", compare_config, "experiment config file")->required();
    compare->add_option("--seeds", compare_seeds,
                        "comma list of seeds overriding the config seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (pool->parsed()) {
            spectral::PoolDemoArgs args{pool_input, parse_int_list(pool_sizes), pool_out};
            return spectral::cmd_pool_demo(args);
        }
        if (info->parsed()) return spectral::cmd_info_preservation(info_args);
        if (train->parsed()) return spectral::cmd_train(spectral::parse_config_file(train_config));
        if (compare->parsed())
            return spectral::cmd_compare_param(spectral::parse_config_file(compare_config),
                                               parse_seed_list(compare_seeds));
    } catch (const spectral::ConfigError& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
