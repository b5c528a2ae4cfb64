#pragma once

#include <cstddef>
#include <vector>

namespace weshap {

/// Marginal gain in majority-vote probability of the true class when a correct voter
/// joins `prior_correct` correct and `prior_wrong` wrong voters.
double psi(std::size_t prior_correct, std::size_t prior_wrong, int num_classes);

/// Per-point Shapley values of a single voter in the majority-vote game, indexed by the
/// number of correct (p) and wrong (w) active voters, for every p + w <= max_size.
///
/// sv_plus(p, w) is the value of one of the p correct voters, sv_minus(p, w) that of one
/// of the w wrong voters. They satisfy p*sv_plus + w*sv_minus = p/(p+w) - 1/C.
class SVTables {
public:
    SVTables() = default;

    std::size_t max_size() const { return max_size_; }
    int num_classes() const { return num_classes_; }

    /// Defined for p + w <= max_size; returns 0 for p == 0.
    double sv_plus(std::size_t p, std::size_t w) const;
    /// Defined for w >= 1, p + w <= max_size. w == 0 throws std::logic_error.
    double sv_minus(std::size_t p, std::size_t w) const;

    friend SVTables build_tables(std::size_t max_size, int num_classes);

private:
    std::size_t index(std::size_t p, std::size_t w) const { return p * (max_size_ + 1) + w; }
    void check_range(std::size_t p, std::size_t w) const;

    std::size_t max_size_ = 0;
    int num_classes_ = 2;
    std::vector<double> plus_;
    std::vector<double> minus_;
};

/// Fills both tables with the O(M^2) recursion
///   SV+(p,w) = psi(p-1,w)/(p+w) + (p-1)/(p+w) SV+(p-1,w) + w/(p+w) SV+(p,w-1)
/// from SV+(p,0) = (C-1)/(C p) and SV+(0,w) = 0; SV- follows from efficiency.
SVTables build_tables(std::size_t max_size, int num_classes);

/// Closed-form double sum over predecessor counts with binomial ratios evaluated in log
/// space. Reference path for checking the recursion; requires p >= 1 and p + w <= 40.
double sv_plus_direct(std::size_t p, std::size_t w, int num_classes);

/// Average marginal gain of a designated correct voter over all (p+w)! voter orderings,
/// measured directly on majority-vote probabilities. Requires p >= 1 and p + w <= 9.
double sv_plus_permutation_oracle(std::size_t p, std::size_t w, int num_classes);

inline constexpr std::size_t kDirectFormulaMaxSize = 40;
inline constexpr std::size_t kPermutationOracleMaxSize = 9;

}  // namespace weshap
