#pragma once
// Statistical primitives shared by the association and tree modules.

#include <cstddef>
#include <vector>

namespace orgminer::stats {

struct ChiSquareResult {
    double statistic = 0.0;
    std::size_t degreesOfFreedom = 0;
    double pValue = 1.0;
};

// Pearson chi-square against independence on a contingency table of
// non-negative counts. Requires at least a 2x2 table with positive row
// and column sums.
ChiSquareResult chiSquare(const std::vector<std::vector<double>>& table);

// Upper regularized incomplete gamma Q(a, x), a > 0, x >= 0.
double regularizedGammaQ(double a, double x);

// Survival function of the chi-square distribution with the given
// degrees of freedom.
double chiSquarePValue(double statistic, std::size_t degreesOfFreedom);

// Stirling number of the second kind S(n, k) in double precision.
double stirling2(std::size_t n, std::size_t k);

} // namespace orgminer::stats
