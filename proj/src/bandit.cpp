#include "specplan/bandit.hpp"

#include <algorithm>
#include <stdexcept>
#include <vector>

namespace specplan {

StrategyPosterior init_posterior() { return StrategyPosterior{1, 1}; }

StrategyPosterior update_posterior(StrategyPosterior post, ForecastSignal signal) {
    if (signal == DraftStrategy::Progressive) {
        post.alpha += 1;
    } else {
        post.beta += 1;
    }
    return post;
}

PreferenceSample sample_preference(const StrategyPosterior& post, Rng& rng) {
    if (post.alpha < 1 || post.beta < 1)
        throw std::invalid_argument("posterior counts must be >= 1");

    PreferenceSample sample;
    sample.source = rng.name() + "@" + std::to_string(rng.draw_count());

    const int n = post.alpha + post.beta - 1;
    std::vector<double> u(static_cast<size_t>(n));
    for (double& v : u) v = rng.u01();
    std::nth_element(u.begin(), u.begin() + (post.alpha - 1), u.end());
    sample.p_hat = u[static_cast<size_t>(post.alpha - 1)];
    return sample;
}

DraftStrategy select_strategy(const PreferenceSample& sample) {
    return sample.p_hat > 0.5 ? DraftStrategy::Progressive : DraftStrategy::Recovery;
}

DraftStrategy sample_strategy(const StrategyPosterior& post, Rng& rng) {
    return select_strategy(sample_preference(post, rng));
}

}  // namespace specplan
