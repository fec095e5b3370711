#pragma once

#include "specplan/core_types.hpp"
#include "specplan/rng.hpp"

namespace specplan {

// Two-arm Beta posterior over the probability that the next idle window
// favours progressive drafting. Counts start at (1, 1) and only ever
// increment, one unit per forecast signal.
struct StrategyPosterior {
    int alpha = 1;
    int beta = 1;

    bool operator==(const StrategyPosterior&) const = default;
};

// Post-observation binary judgment of which drafting strategy suits the
// next idle period.
using ForecastSignal = DraftStrategy;

struct PreferenceSample {
    double p_hat = 0.0;
    // Stream name and draw index captured before sampling, for replayability.
    std::string source;
};

StrategyPosterior init_posterior();

// Pure: PROG increments alpha, REC increments beta.
StrategyPosterior update_posterior(StrategyPosterior post, ForecastSignal signal);

// Draws p_hat ~ Beta(alpha, beta) via the order-statistic construction: the
// alpha-th smallest of alpha+beta-1 iid uniforms. Exact for the integer
// counts this posterior maintains, and free of special-function code.
PreferenceSample sample_preference(const StrategyPosterior& post, Rng& rng);

// Strictly-greater rule: p_hat > 0.5 selects Progressive, ties go Recovery.
DraftStrategy select_strategy(const PreferenceSample& sample);

DraftStrategy sample_strategy(const StrategyPosterior& post, Rng& rng);

}  // namespace specplan
