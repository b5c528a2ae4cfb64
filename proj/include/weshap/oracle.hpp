#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "weshap/types.hpp"

namespace weshap {

/// Cooperative game over `players` LFs. Coalitions are bitmasks, bit j set = LF j present.
struct CoalitionGame {
    std::size_t players = 0;
    std::function<double(std::uint64_t)> utility;
};

/// Proxy game: validation soft accuracy of MV + KNN restricted to the coalition, minus 1/C.
/// Neighbor lists are found once; each coalition recomputes its votes from scratch.
CoalitionGame make_proxy_game(const SplitBundle& bundle, const ProxyConfig& config);

/// Sum of two games over the same players.
CoalitionGame sum_games(const CoalitionGame& a, const CoalitionGame& b);

inline constexpr std::size_t kSubsetOracleMaxPlayers = 12;
inline constexpr std::size_t kPermutationOracleMaxPlayers = 8;

/// phi_j = (1/m) sum over S not containing j of [v(S + j) - v(S)] / binom(m-1, |S|).
/// Evaluates every coalition exactly once.
std::vector<double> exact_shapley_subsets(const CoalitionGame& game);

/// Average marginal contribution over all m! player orderings.
std::vector<double> exact_shapley_permutations(const CoalitionGame& game);

}  // namespace weshap
