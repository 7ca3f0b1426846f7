#pragma once

#include <bit>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "credo/attribution.hpp"
#include "credo/motifs.hpp"
#include "credo/policy.hpp"
#include "credo/rng.hpp"

namespace testutil {

inline std::string random_sequence(credo::Rng& rng, int length) {
    std::string s(static_cast<size_t>(length), 'A');
    for (auto& c : s) c = credo::motifs::kBases[rng.next_below(4)];
    return s;
}

// Peaked count matrix around a fixed consensus.
inline credo::motifs::PositionFrequencyMatrix consensus_pfm(const std::string& id,
                                                            const std::string& consensus,
                                                            double peak = 12.0,
                                                            double pseudocount = 0.1) {
    std::vector<std::array<double, 4>> counts(consensus.size(), {0, 0, 0, 0});
    for (size_t k = 0; k < consensus.size(); ++k)
        counts[k][static_cast<size_t>(credo::motifs::base_index(consensus[k]))] = peak;
    return {id, id, counts, pseudocount};
}

// Reference Shapley oracle: direct enumeration over all 2^n subsets with the
// interventional value function. Independent of the production
// implementation (no differing-feature reduction).
inline std::vector<double> naive_shapley(const credo::attribution::PredictFn& model,
                                         const std::vector<double>& x,
                                         const credo::attribution::Matrix& background) {
    const int n = static_cast<int>(x.size());
    auto value = [&](uint32_t mask) {
        double total = 0.0;
        for (const auto& row : background) {
            std::vector<double> z = row;
            for (int i = 0; i < n; ++i)
                if (mask & (uint32_t{1} << i)) z[static_cast<size_t>(i)] = x[static_cast<size_t>(i)];
            total += model(z);
        }
        return total / static_cast<double>(background.size());
    };
    std::vector<double> fact(static_cast<size_t>(n) + 1, 1.0);
    for (int i = 1; i <= n; ++i) fact[static_cast<size_t>(i)] = fact[static_cast<size_t>(i - 1)] * i;

    std::vector<double> phi(x.size(), 0.0);
    for (int i = 0; i < n; ++i) {
        const uint32_t bit = uint32_t{1} << i;
        for (uint32_t mask = 0; mask < (uint32_t{1} << n); ++mask) {
            if (mask & bit) continue;
            const int s = std::popcount(mask);
            const double w =
                fact[static_cast<size_t>(s)] * fact[static_cast<size_t>(n - s - 1)] / fact[static_cast<size_t>(n)];
            phi[static_cast<size_t>(i)] += w * (value(mask | bit) - value(mask));
        }
    }
    return phi;
}

// Central finite differences over every parameter coordinate; returns the
// maximum relative error against the analytic gradient.
inline double max_grad_rel_error(const credo::policy::PolicyParams& params,
                                 const credo::policy::PolicyParams& analytic_grad,
                                 const std::function<double(const credo::policy::PolicyParams&)>& loss,
                                 double step = 1e-5) {
    credo::policy::PolicyParams work = params;
    double worst = 0.0;
    const size_t count = params.param_count();
    for (size_t i = 0; i < count; ++i) {
        const double saved = *work.flat(i);
        *work.flat(i) = saved + step;
        const double up = loss(work);
        *work.flat(i) = saved - step;
        const double down = loss(work);
        *work.flat(i) = saved;
        const double fd = (up - down) / (2.0 * step);
        const double an = *analytic_grad.flat(i);
        const double denom = std::max({1e-6, std::abs(fd), std::abs(an)});
        worst = std::max(worst, std::abs(fd - an) / denom);
    }
    return worst;
}

}  // namespace testutil
