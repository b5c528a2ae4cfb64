#include "weshap/oracle.hpp"

#include <algorithm>
#include <bit>
#include <memory>
#include <numeric>
#include <string>

#include "weshap/neighbors.hpp"
#include "weshap/parallel.hpp"
#include "weshap/proxy.hpp"

namespace weshap {
namespace {

void check_players(std::size_t players, std::size_t limit, const char* what) {
    if (players == 0) throw ConfigError(std::string(what) + ": game has no players");
    if (players > limit) {
        throw ConfigError(std::string(what) + ": " + std::to_string(players) + " players exceeds the limit of " +
                          std::to_string(limit));
    }
}

std::vector<double> all_utilities(const CoalitionGame& game) {
    const std::size_t count = std::size_t{1} << game.players;
    std::vector<double> cache(count);
    parallel_for(count, [&](std::size_t mask) { cache[mask] = game.utility(mask); });
    return cache;
}

}  // namespace

CoalitionGame make_proxy_game(const SplitBundle& bundle, const ProxyConfig& config) {
    bundle.validate();
    check_k(config.k, bundle.num_train());
    NeighborIndex index(bundle.train_features, config.metric);
    auto neighbors = std::make_shared<std::vector<NeighborList>>(index.query_all(bundle.valid.features, config.k));
    auto shared = std::make_shared<SplitBundle>(bundle);
    const std::size_t m = bundle.num_lfs();
    return {m, [shared, neighbors, m, weighting = config.weighting](std::uint64_t mask) {
                if (mask == 0) return 0.0;
                const int c = shared->num_classes();
                return soft_accuracy(Coalition::from_mask(mask, m), shared->weak_labels, c, weighting,
                                     shared->valid.labels, *neighbors) -
                       1.0 / c;
            }};
}

CoalitionGame sum_games(const CoalitionGame& a, const CoalitionGame& b) {
    if (a.players != b.players) throw ConfigError("games have different player counts");
    return {a.players, [a, b](std::uint64_t mask) { return a.utility(mask) + b.utility(mask); }};
}

std::vector<double> exact_shapley_subsets(const CoalitionGame& game) {
    check_players(game.players, kSubsetOracleMaxPlayers, "exact_shapley_subsets");
    const std::size_t m = game.players;
    auto v = all_utilities(game);

    // binom(m-1, s) for s = 0..m-1
    std::vector<double> binom(m, 1.0);
    for (std::size_t s = 1; s < m; ++s) binom[s] = binom[s - 1] * static_cast<double>(m - s) / static_cast<double>(s);

    std::vector<double> phi(m, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
        const std::uint64_t bit = std::uint64_t{1} << j;
        double sum = 0.0;
        for (std::uint64_t mask = 0; mask < v.size(); ++mask) {
            if (mask & bit) continue;
            sum += (v[mask | bit] - v[mask]) / binom[static_cast<std::size_t>(std::popcount(mask))];
        }
        phi[j] = sum / static_cast<double>(m);
    }
    return phi;
}

std::vector<double> exact_shapley_permutations(const CoalitionGame& game) {
    check_players(game.players, kPermutationOracleMaxPlayers, "exact_shapley_permutations");
    const std::size_t m = game.players;
    auto v = all_utilities(game);

    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<double> totals(m, 0.0);
    std::size_t orderings = 0;
    do {
        std::uint64_t mask = 0;
        for (std::size_t player : order) {
            std::uint64_t next = mask | (std::uint64_t{1} << player);
            totals[player] += v[next] - v[mask];
            mask = next;
        }
        ++orderings;
    } while (std::next_permutation(order.begin(), order.end()));

    for (auto& t : totals) t /= static_cast<double>(orderings);
    return totals;
}

}  // namespace weshap
