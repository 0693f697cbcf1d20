#pragma once

#include <cmath>
#include <span>

namespace tsvd {

/// Neumaier compensated summation.
class CompensatedSum {
public:
    void add(double x) noexcept
    {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }
    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline double sum_of_squares(std::span<const double> v) noexcept
{
    CompensatedSum s;
    for (double x : v) {
        s.add(x * x);
    }
    return s.value();
}

inline double positive_part(double x) noexcept { return x > 0.0 ? x : 0.0; }

}  // namespace tsvd
