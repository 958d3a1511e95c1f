#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "cropscan/errors.hpp"

namespace cropscan {

/// Dense row-major N-dimensional array of doubles. Carrier for images,
/// activations, parameters and gradients.
class Tensor {
public:
    Tensor() = default;

    /// Zero-filled tensor of the given shape.
    explicit Tensor(std::vector<std::size_t> shape);

    Tensor(std::vector<std::size_t> shape, std::vector<double> data);

    static Tensor full(std::vector<std::size_t> shape, double value);

    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t extent(std::size_t axis) const { return shape_.at(axis); }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    template <typename... Ix>
    double& at(Ix... ix) {
        return data_[offset(ix...)];
    }
    template <typename... Ix>
    double at(Ix... ix) const {
        return data_[offset(ix...)];
    }

    /// Flat offset of a multi-index; validates rank and bounds.
    template <typename... Ix>
    std::size_t offset(Ix... ix) const {
        const std::size_t idx[] = {static_cast<std::size_t>(ix)...};
        if (sizeof...(ix) != shape_.size())
            throw ShapeError("index rank " + std::to_string(sizeof...(ix)) +
                             " does not match tensor rank " +
                             std::to_string(shape_.size()));
        std::size_t off = 0;
        for (std::size_t a = 0; a < shape_.size(); ++a) {
            if (idx[a] >= shape_[a]) throw ShapeError("index out of bounds");
            off = off * shape_[a] + idx[a];
        }
        return off;
    }

    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

    void fill(double value);

    bool all_finite() const;

    /// Reinterpret the buffer under a new shape of identical size.
    void reshape(std::vector<std::size_t> shape);

    /// Largest absolute element difference; shapes must match.
    static double max_abs_diff(const Tensor& a, const Tensor& b);

private:
    std::vector<std::size_t> shape_;
    std::vector<double> data_;
};

/// "3x50x50"-style shape rendering for error messages.
std::string shape_to_string(const std::vector<std::size_t>& shape);

}  // namespace cropscan
