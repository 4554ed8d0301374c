#include "voldiff/grid.hpp"

#include <algorithm>
#include <stdexcept>

namespace voldiff {

std::size_t Mask::count() const {
    return static_cast<std::size_t>(std::count_if(m.begin(), m.end(),
                                                  [](std::uint8_t b) { return b != 0; }));
}

double kahan_sum(const std::vector<double>& v) {
    double sum = 0.0, comp = 0.0;
    for (double x : v) {
        const double y = x - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    return sum;
}

double mean_of(const std::vector<double>& v) {
    if (v.empty()) throw std::invalid_argument("mean_of: empty input");
    return kahan_sum(v) / static_cast<double>(v.size());
}

double population_variance(const std::vector<double>& v) {
    if (v.empty()) throw std::invalid_argument("population_variance: empty input");
    const double mu = mean_of(v);
    double sum = 0.0, comp = 0.0;
    for (double x : v) {
        const double sq = (x - mu) * (x - mu);
        const double y = sq - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    return sum / static_cast<double>(v.size());
}

}  // namespace voldiff
