#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace tapeopt {

using cdouble = std::complex<double>;

enum class DType { Real, Complex };

// Dense row-major tensor of doubles or complex doubles. Storage is always
// complex; a Real-dtype tensor keeps every imaginary part at exactly zero.
// Rank 0 is a scalar.
class Tensor {
public:
    Tensor() : data_(1, cdouble{0.0, 0.0}) {}

    static Tensor zeros(std::vector<std::size_t> shape, DType dtype = DType::Real) {
        Tensor t;
        t.shape_ = std::move(shape);
        t.dtype_ = dtype;
        t.data_.assign(count(t.shape_), cdouble{0.0, 0.0});
        return t;
    }

    static Tensor scalar(double v) {
        Tensor t;
        t.data_[0] = cdouble{v, 0.0};
        return t;
    }

    static Tensor scalar(cdouble v) {
        Tensor t;
        t.dtype_ = DType::Complex;
        t.data_[0] = v;
        return t;
    }

    static Tensor from_real(std::vector<std::size_t> shape, std::vector<double> values) {
        Tensor t;
        t.shape_ = std::move(shape);
        t.dtype_ = DType::Real;
        if (values.size() != count(t.shape_))
            throw std::invalid_argument("Tensor::from_real: element count does not match shape");
        t.data_.resize(values.size());
        for (std::size_t i = 0; i < values.size(); ++i) t.data_[i] = cdouble{values[i], 0.0};
        return t;
    }

    static Tensor from_complex(std::vector<std::size_t> shape, std::vector<cdouble> values) {
        Tensor t;
        t.shape_ = std::move(shape);
        t.dtype_ = DType::Complex;
        if (values.size() != count(t.shape_))
            throw std::invalid_argument("Tensor::from_complex: element count does not match shape");
        t.data_ = std::move(values);
        return t;
    }

    const std::vector<std::size_t>& shape() const { return shape_; }
    DType dtype() const { return dtype_; }
    bool is_real() const { return dtype_ == DType::Real; }
    bool is_complex() const { return dtype_ == DType::Complex; }

    std::size_t size() const { return data_.size(); }
    std::size_t rank() const { return shape_.size(); }
    bool is_scalar() const { return data_.size() == 1; }

    std::size_t dim(std::size_t axis) const {
        if (axis >= shape_.size()) throw std::out_of_range("Tensor::dim: axis out of range");
        return shape_[axis];
    }

    // Rank-2 helpers.
    std::size_t rows() const { require_rank(2); return shape_[0]; }
    std::size_t cols() const { require_rank(2); return shape_[1]; }

    cdouble& operator[](std::size_t i) { return data_[i]; }
    const cdouble& operator[](std::size_t i) const { return data_[i]; }

    cdouble& at(std::size_t r, std::size_t c) { require_rank(2); return data_[r * shape_[1] + c]; }
    const cdouble& at(std::size_t r, std::size_t c) const { require_rank(2); return data_[r * shape_[1] + c]; }

    double scalar_real() const {
        if (!is_scalar()) throw std::invalid_argument("Tensor::scalar_real: tensor is not a scalar");
        return data_[0].real();
    }

    cdouble scalar_value() const {
        if (!is_scalar()) throw std::invalid_argument("Tensor::scalar_value: tensor is not a scalar");
        return data_[0];
    }

    std::span<const cdouble> values() const { return data_; }
    std::span<cdouble> values() { return data_; }

    std::vector<double> real_values() const {
        std::vector<double> out(data_.size());
        for (std::size_t i = 0; i < data_.size(); ++i) out[i] = data_[i].real();
        return out;
    }

    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

    bool all_finite() const {
        for (const cdouble& z : data_)
            if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
        return true;
    }

    static std::size_t count(const std::vector<std::size_t>& shape) {
        std::size_t n = 1;
        for (std::size_t d : shape) n *= d;
        return n;
    }

    static std::string shape_str(const std::vector<std::size_t>& shape) {
        std::string s = "[";
        for (std::size_t i = 0; i < shape.size(); ++i) {
            if (i) s += ",";
            s += std::to_string(shape[i]);
        }
        return s + "]";
    }

private:
    void require_rank(std::size_t r) const {
        if (shape_.size() != r)
            throw std::invalid_argument("Tensor: expected rank " + std::to_string(r) +
                                        ", got shape " + shape_str(shape_));
    }

    std::vector<std::size_t> shape_;   // empty = rank 0 scalar
    std::vector<cdouble> data_;
    DType dtype_ = DType::Real;
};

}  // namespace tapeopt
