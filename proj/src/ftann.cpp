#include "tlsel/transfer.hpp"

namespace tlsel {

MlpParams fit_ftann(const LabeledDataset& source, const LabeledDataset& target,
                    const FineTuneConfig& cfg, std::uint64_t seed) {
    if (source.n_in() != target.n_in() || source.n_out() != target.n_out())
        throw ShapeError("fit_ftann: source/target dimensions differ");
    if (cfg.epochs_source < 0 || cfg.epochs_target < 0)
        throw ConfigError("fit_ftann: epochs must be >= 0");

    MlpSpec spec;
    spec.n_in = static_cast<int>(source.n_in());
    spec.n_out = static_cast<int>(source.n_out());

    const AdamConfig opt{.lr = cfg.lr};
    Rng rng(derive_seed(seed, "ftann-dropout"));
    MlpParams params = mlp_init(spec, seed);
    params = mlp_train(std::move(params), source, cfg.epochs_source, opt, rng);
    // target model starts from the trained source parameters, fresh optimizer
    params.reset_optimizer();
    params = mlp_train(std::move(params), target, cfg.epochs_target, opt, rng);
    return params;
}

}  // namespace tlsel
