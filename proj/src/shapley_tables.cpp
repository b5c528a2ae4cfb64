#include "weshap/shapley_tables.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

namespace weshap {

double psi(std::size_t prior_correct, std::size_t prior_wrong, int num_classes) {
    auto a = static_cast<double>(prior_correct);
    auto b = static_cast<double>(prior_wrong);
    if (prior_correct + prior_wrong == 0) return 1.0 - 1.0 / num_classes;
    return (a + 1.0) / (a + b + 1.0) - a / (a + b);
}

void SVTables::check_range(std::size_t p, std::size_t w) const {
    if (p + w > max_size_) {
        throw std::out_of_range("SV table built for p+w <= " + std::to_string(max_size_) +
                                ", queried (" + std::to_string(p) + "," + std::to_string(w) + ")");
    }
}

double SVTables::sv_plus(std::size_t p, std::size_t w) const {
    check_range(p, w);
    return plus_[index(p, w)];
}

double SVTables::sv_minus(std::size_t p, std::size_t w) const {
    if (w == 0) throw std::logic_error("SV-(p,0) is undefined: no wrong voter to value");
    check_range(p, w);
    return minus_[index(p, w)];
}

SVTables build_tables(std::size_t max_size, int num_classes) {
    if (num_classes < 2) throw std::invalid_argument("num_classes must be >= 2");
    SVTables t;
    t.max_size_ = max_size;
    t.num_classes_ = num_classes;
    std::size_t side = max_size + 1;
    t.plus_.assign(side * side, 0.0);
    t.minus_.assign(side * side, 0.0);
    const double inv_c = 1.0 / num_classes;

    // Row p only reads rows p and p-1, so one pass over p ascending fills the triangle.
    for (std::size_t p = 1; p <= max_size; ++p) {
        auto dp = static_cast<double>(p);
        t.plus_[t.index(p, 0)] = (num_classes - 1) / (num_classes * dp);
        for (std::size_t w = 1; p + w <= max_size; ++w) {
            auto total = static_cast<double>(p + w);
            t.plus_[t.index(p, w)] = psi(p - 1, w, num_classes) / total +
                                     (dp - 1.0) / total * t.plus_[t.index(p - 1, w)] +
                                     static_cast<double>(w) / total * t.plus_[t.index(p, w - 1)];
        }
    }
    for (std::size_t p = 0; p <= max_size; ++p) {
        for (std::size_t w = 1; p + w <= max_size; ++w) {
            auto total = static_cast<double>(p + w);
            auto dp = static_cast<double>(p);
            t.minus_[t.index(p, w)] =
                (dp / total - inv_c - dp * t.plus_[t.index(p, w)]) / static_cast<double>(w);
        }
    }
    return t;
}

namespace {

double log_binomial(std::size_t n, std::size_t k) {
    return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
           std::lgamma(static_cast<double>(n - k) + 1.0);
}

}  // namespace

double sv_plus_direct(std::size_t p, std::size_t w, int num_classes) {
    if (p == 0) throw std::invalid_argument("sv_plus_direct needs at least one correct voter");
    if (p + w > kDirectFormulaMaxSize) {
        throw std::invalid_argument("sv_plus_direct limited to p+w <= " +
                                    std::to_string(kDirectFormulaMaxSize));
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = 0; j <= w; ++j) {
            double log_ratio = log_binomial(p - 1, i) + log_binomial(w, j) - log_binomial(p + w - 1, i + j);
            sum += psi(i, j, num_classes) * std::exp(log_ratio);
        }
    }
    return sum / static_cast<double>(p + w);
}

double sv_plus_permutation_oracle(std::size_t p, std::size_t w, int num_classes) {
    if (p == 0) throw std::invalid_argument("permutation oracle needs at least one correct voter");
    std::size_t n = p + w;
    if (n > kPermutationOracleMaxSize) {
        throw std::invalid_argument("permutation oracle limited to p+w <= " +
                                    std::to_string(kPermutationOracleMaxSize));
    }
    // Player 0 is the valued voter, players 1..p-1 the other correct ones, p..n-1 wrong.
    auto vote_share = [&](std::size_t correct, std::size_t wrong) {
        if (correct + wrong == 0) return 1.0 / num_classes;
        return static_cast<double>(correct) / static_cast<double>(correct + wrong);
    };
    // Orderings are tallied per predecessor state so the final average is a short exact sum.
    std::vector<std::uint64_t> tally(n * n, 0);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::uint64_t orderings = 0;
    do {
        std::size_t correct = 0, wrong = 0;
        for (std::size_t player : order) {
            if (player == 0) break;
            (player < p ? correct : wrong) += 1;
        }
        ++tally[correct * n + wrong];
        ++orderings;
    } while (std::next_permutation(order.begin(), order.end()));

    double sum = 0.0;
    for (std::size_t a = 0; a < p; ++a) {
        for (std::size_t b = 0; b <= w; ++b) {
            auto count = tally[a * n + b];
            if (count == 0) continue;
            double gain = vote_share(a + 1, b) - vote_share(a, b);
            sum += static_cast<double>(count) * gain;
        }
    }
    return sum / static_cast<double>(orderings);
}

}  // namespace weshap
