#pragma once

#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "mixrank/errors.hpp"

namespace mixrank {

/// Dense row-major tensor of runtime rank. The last axis varies fastest,
/// so collapsing leading or trailing axes is a free reinterpretation of
/// the flat buffer.
class NdArray {
public:
    NdArray() = default;

    explicit NdArray(std::vector<std::int64_t> shape)
        : shape_(std::move(shape)) {
        for (auto d : shape_)
            if (d <= 0) throw ShapeError("NdArray: nonpositive extent");
        data_.assign(static_cast<std::size_t>(element_count(shape_)), 0.0);
        rebuild_strides();
    }

    NdArray(std::vector<std::int64_t> shape, std::vector<double> data)
        : shape_(std::move(shape)), data_(std::move(data)) {
        if (element_count(shape_) != static_cast<std::int64_t>(data_.size()))
            throw ShapeError("NdArray: data size does not match shape");
        rebuild_strides();
    }

    static std::int64_t element_count(std::span<const std::int64_t> shape) {
        std::int64_t n = 1;
        for (auto d : shape) n *= d;
        return n;
    }

    int rank() const { return static_cast<int>(shape_.size()); }
    const std::vector<std::int64_t>& shape() const { return shape_; }
    std::int64_t extent(int axis) const { return shape_[static_cast<std::size_t>(axis)]; }
    std::int64_t size() const { return static_cast<std::int64_t>(data_.size()); }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::vector<double>& flat() { return data_; }
    const std::vector<double>& flat() const { return data_; }

    std::int64_t offset(std::span<const std::int64_t> idx) const {
        std::int64_t o = 0;
        for (std::size_t a = 0; a < shape_.size(); ++a) o += idx[a] * strides_[a];
        return o;
    }

    double& at(std::span<const std::int64_t> idx) { return data_[static_cast<std::size_t>(offset(idx))]; }
    double at(std::span<const std::int64_t> idx) const { return data_[static_cast<std::size_t>(offset(idx))]; }

    double& operator[](std::int64_t flat_index) { return data_[static_cast<std::size_t>(flat_index)]; }
    double operator[](std::int64_t flat_index) const { return data_[static_cast<std::size_t>(flat_index)]; }

    std::int64_t stride(int axis) const { return strides_[static_cast<std::size_t>(axis)]; }

    /// Product of extents over axes [0, axis) — the number of slices that
    /// precede a fixed index along `axis`.
    std::int64_t leading_count(int axis) const {
        std::int64_t n = 1;
        for (int a = 0; a < axis; ++a) n *= extent(a);
        return n;
    }

    std::int64_t trailing_count(int axis) const {
        std::int64_t n = 1;
        for (int a = axis + 1; a < rank(); ++a) n *= extent(a);
        return n;
    }

private:
    void rebuild_strides() {
        strides_.assign(shape_.size(), 1);
        for (int a = rank() - 2; a >= 0; --a)
            strides_[static_cast<std::size_t>(a)] =
                strides_[static_cast<std::size_t>(a + 1)] * shape_[static_cast<std::size_t>(a + 1)];
    }

    std::vector<std::int64_t> shape_;
    std::vector<std::int64_t> strides_;
    std::vector<double> data_;
};

} // namespace mixrank
