// SPDX-License-Identifier: Apache-2.0

#ifndef RFSS_GRID_HPP
#define RFSS_GRID_HPP

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace rfss {

// Dense row-major grid of doubles. Spatial spectra use rows = azimuth cells
// and cols = elevation cells; metric and interpolation code accepts any shape
// as long as operands agree.
class Grid {
  public:
    Grid() = default;
    Grid(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double &operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    double &operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    const std::vector<double> &values() const { return data_; }
    std::vector<double> &values() { return data_; }

    bool same_shape(const Grid &o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

    double max_value() const {
        double m = data_.empty() ? 0.0 : data_[0];
        for (double v : data_)
            if (v > m)
                m = v;
        return m;
    }

    bool operator==(const Grid &o) const = default;

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

inline void require_same_shape(const Grid &a, const Grid &b, const char *what) {
    if (!a.same_shape(b))
        throw std::invalid_argument(std::string(what) + ": grid shape mismatch");
}

} // namespace rfss

#endif
