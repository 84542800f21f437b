#include "orgminer/stats.hpp"

#include <cmath>
#include <limits>

#include "orgminer/error.hpp"

namespace orgminer::stats {

namespace {

// Series expansion of P(a, x); converges fast for x < a + 1.
double gammaSeriesP(double a, double x) {
    double term = 1.0 / a;
    double sum = term;
    double ap = a;
    for (int i = 0; i < 500; ++i) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::abs(term) < std::abs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Lentz continued fraction for Q(a, x); converges fast for x >= a + 1.
double gammaContinuedFractionQ(double a, double x) {
    constexpr double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 500; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-16) break;
    }
    return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

} // namespace

double regularizedGammaQ(double a, double x) {
    if (x < 0.0 || a <= 0.0) {
        throw Error(ErrorCode::DegenerateTable, "regularized gamma domain");
    }
    if (x == 0.0) return 1.0;
    if (x < a + 1.0) return 1.0 - gammaSeriesP(a, x);
    return gammaContinuedFractionQ(a, x);
}

double chiSquarePValue(double statistic, std::size_t degreesOfFreedom) {
    if (degreesOfFreedom == 0) return 1.0;
    if (statistic <= 0.0) return 1.0;
    return regularizedGammaQ(0.5 * static_cast<double>(degreesOfFreedom), 0.5 * statistic);
}

ChiSquareResult chiSquare(const std::vector<std::vector<double>>& table) {
    const std::size_t rows = table.size();
    const std::size_t cols = rows == 0 ? 0 : table[0].size();
    if (rows < 2 || cols < 2) {
        throw Error(ErrorCode::DegenerateTable, "contingency table needs at least two rows and columns");
    }
    std::vector<double> rowSum(rows, 0.0);
    std::vector<double> colSum(cols, 0.0);
    double total = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
        if (table[r].size() != cols) {
            throw Error(ErrorCode::DegenerateTable, "ragged contingency table");
        }
        for (std::size_t c = 0; c < cols; ++c) {
            const double v = table[r][c];
            if (v < 0.0) throw Error(ErrorCode::DegenerateTable, "negative count");
            rowSum[r] += v;
            colSum[c] += v;
            total += v;
        }
    }
    for (double s : rowSum) {
        if (s <= 0.0) throw Error(ErrorCode::DegenerateTable, "zero row sum");
    }
    for (double s : colSum) {
        if (s <= 0.0) throw Error(ErrorCode::DegenerateTable, "zero column sum");
    }
    ChiSquareResult result;
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            const double expected = rowSum[r] * colSum[c] / total;
            const double diff = table[r][c] - expected;
            result.statistic += diff * diff / expected;
        }
    }
    result.degreesOfFreedom = (rows - 1) * (cols - 1);
    result.pValue = chiSquarePValue(result.statistic, result.degreesOfFreedom);
    return result;
}

double stirling2(std::size_t n, std::size_t k) {
    if (k > n) return 0.0;
    if (k == 0) return n == 0 ? 1.0 : 0.0;
    // S(n, k) = k*S(n-1, k) + S(n-1, k-1), rolled row by row.
    std::vector<double> row(k + 1, 0.0);
    row[0] = 1.0;
    for (std::size_t i = 1; i <= n; ++i) {
        const std::size_t top = std::min(i, k);
        for (std::size_t j = top; j >= 1; --j) {
            row[j] = static_cast<double>(j) * row[j] + row[j - 1];
        }
        row[0] = 0.0;
    }
    return row[k];
}

} // namespace orgminer::stats
