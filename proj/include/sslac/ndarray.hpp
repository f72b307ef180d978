#pragma once

#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace sslac {

// Dense n-dimensional row-major array of doubles. The universal numeric
// carrier for images, noise vectors, activations and parameters.
class NdArray {
public:
    NdArray() = default;

    explicit NdArray(std::vector<std::size_t> shape, double fill = 0.0)
        : shape_(std::move(shape)), data_(count(shape_), fill) {}

    NdArray(std::vector<std::size_t> shape, std::vector<double> data)
        : shape_(std::move(shape)), data_(std::move(data)) {
        if (data_.size() != count(shape_)) {
            throw std::invalid_argument(
                "NdArray: data length " + std::to_string(data_.size()) +
                " does not match shape product " + std::to_string(count(shape_)));
        }
    }

    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t ndim() const { return shape_.size(); }
    std::size_t dim(std::size_t i) const { return shape_.at(i); }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::vector<double>& raw() { return data_; }
    const std::vector<double>& raw() const { return data_; }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    double& at(std::size_t i) { return data_.at(i); }

    // Reshape in place; total element count must be preserved.
    NdArray& reshape(std::vector<std::size_t> shape) {
        if (count(shape) != data_.size()) {
            throw std::invalid_argument("NdArray::reshape: element count mismatch");
        }
        shape_ = std::move(shape);
        return *this;
    }

    bool same_shape(const NdArray& other) const { return shape_ == other.shape_; }

    static std::size_t count(const std::vector<std::size_t>& shape) {
        std::size_t n = 1;
        for (std::size_t d : shape) n *= d;
        return n;
    }

    static std::string shape_string(const std::vector<std::size_t>& shape) {
        std::string s = "(";
        for (std::size_t i = 0; i < shape.size(); ++i) {
            if (i) s += ", ";
            s += std::to_string(shape[i]);
        }
        return s + ")";
    }

private:
    std::vector<std::size_t> shape_;
    std::vector<double> data_;
};

}  // namespace sslac
