#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

#include "gcl/error.hpp"
#include "gcl/rng.hpp"

namespace gcl {

// Dense row-major float64 matrix: features, embeddings, weights, gradients.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    double* row(std::size_t i) { return data_.data() + i * cols_; }
    const double* row(std::size_t i) const { return data_.data() + i * cols_; }

    bool same_shape(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }
    std::string shape_str() const;

    bool all_finite() const;

    bool operator==(const Matrix& o) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// Trainable tensor: a value and an always-shape-matched gradient buffer.
struct ParamTensor {
    Matrix value;
    Matrix grad;
    std::string name;

    ParamTensor() = default;
    ParamTensor(Matrix v, std::string n)
        : value(std::move(v)), grad(value.rows(), value.cols()), name(std::move(n)) {}

    void zero_grad();
};

void require_same_shape(const Matrix& a, const Matrix& b, const char* where);

Matrix matmul(const Matrix& a, const Matrix& b);     // a·b
Matrix matmul_tn(const Matrix& a, const Matrix& b);  // aᵀ·b
Matrix matmul_nt(const Matrix& a, const Matrix& b);  // a·bᵀ
Matrix transpose(const Matrix& a);

Matrix add(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& a, double s);
void add_in_place(Matrix& a, const Matrix& b);
void axpy_in_place(Matrix& a, double s, const Matrix& b);  // a += s·b
Matrix hadamard(const Matrix& a, const Matrix& b);

// Per-row log-softmax with row-max subtraction; each output row
// log-sum-exps to zero to within 1e-12 regardless of input magnitude.
Matrix stable_log_softmax_rows(const Matrix& s);
Matrix softmax_rows(const Matrix& s);

// L2-normalized copy of every row. Rows of zero norm raise NumericError
// naming the row.
Matrix normalize_rows(const Matrix& z, const char* where);

// Uniform on [-a, a] with a = sqrt(6 / (fan_in + fan_out)).
Matrix glorot_init(std::size_t fan_in, std::size_t fan_out, Rng& rng);

} // namespace gcl
