#include "gcl/matrix.hpp"

#include <cmath>
#include <sstream>

#include "gcl/kernels.hpp"

namespace gcl {

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    Matrix m(rows.size(), rows.size() ? rows.begin()->size() : 0);
    std::size_t i = 0;
    for (const auto& r : rows) {
        std::size_t j = 0;
        for (const double v : r) m(i, j++) = v;
        ++i;
    }
    return m;
}

std::string Matrix::shape_str() const {
    std::ostringstream os;
    os << rows_ << "x" << cols_;
    return os.str();
}

bool Matrix::all_finite() const {
    for (const double v : data_)
        if (!std::isfinite(v)) return false;
    return true;
}

void ParamTensor::zero_grad() {
    grad = Matrix(value.rows(), value.cols());
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* where) {
    if (!a.same_shape(b))
        throw DimensionError(std::string(where) + ": shapes " + a.shape_str() + " and " +
                             b.shape_str() + " differ");
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows())
        throw DimensionError("matmul: inner dimensions of " + a.shape_str() + " and " +
                             b.shape_str() + " do not agree");
    Matrix c(a.rows(), b.cols());
    kernels::matmul(a.data(), b.data(), c.data(), a.rows(), a.cols(), b.cols());
    return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows())
        throw DimensionError("matmul_tn: leading dimensions of " + a.shape_str() + " and " +
                             b.shape_str() + " do not agree");
    Matrix c(a.cols(), b.cols());
    kernels::matmul_tn(a.data(), b.data(), c.data(), a.rows(), a.cols(), b.cols());
    return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols())
        throw DimensionError("matmul_nt: trailing dimensions of " + a.shape_str() + " and " +
                             b.shape_str() + " do not agree");
    Matrix c(a.rows(), b.rows());
    kernels::matmul_nt(a.data(), b.data(), c.data(), a.rows(), a.cols(), b.rows());
    return c;
}

Matrix transpose(const Matrix& a) {
    Matrix t(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
    return t;
}

Matrix add(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "add");
    Matrix c = a;
    for (std::size_t i = 0; i < c.size(); ++i) c.data()[i] += b.data()[i];
    return c;
}

Matrix scale(const Matrix& a, double s) {
    Matrix c = a;
    for (std::size_t i = 0; i < c.size(); ++i) c.data()[i] *= s;
    return c;
}

void add_in_place(Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "add_in_place");
    for (std::size_t i = 0; i < a.size(); ++i) a.data()[i] += b.data()[i];
}

void axpy_in_place(Matrix& a, double s, const Matrix& b) {
    require_same_shape(a, b, "axpy_in_place");
    for (std::size_t i = 0; i < a.size(); ++i) a.data()[i] += s * b.data()[i];
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "hadamard");
    Matrix c = a;
    for (std::size_t i = 0; i < c.size(); ++i) c.data()[i] *= b.data()[i];
    return c;
}

Matrix stable_log_softmax_rows(const Matrix& s) {
    if (!s.all_finite()) throw NumericError("stable_log_softmax_rows: non-finite input");
    Matrix out(s.rows(), s.cols());
    for (std::size_t i = 0; i < s.rows(); ++i) {
        const double* in = s.row(i);
        double* o = out.row(i);
        double mx = in[0];
        for (std::size_t j = 1; j < s.cols(); ++j) mx = std::max(mx, in[j]);
        double sum = 0.0;
        for (std::size_t j = 0; j < s.cols(); ++j) sum += std::exp(in[j] - mx);
        const double lse = mx + std::log(sum);
        for (std::size_t j = 0; j < s.cols(); ++j) o[j] = in[j] - lse;
    }
    return out;
}

Matrix softmax_rows(const Matrix& s) {
    Matrix out = stable_log_softmax_rows(s);
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] = std::exp(out.data()[i]);
    return out;
}

Matrix normalize_rows(const Matrix& z, const char* where) {
    Matrix out = z;
    for (std::size_t i = 0; i < z.rows(); ++i) {
        double sq = 0.0;
        for (std::size_t j = 0; j < z.cols(); ++j) sq += z(i, j) * z(i, j);
        const double norm = std::sqrt(sq);
        if (norm == 0.0)
            throw NumericError(std::string(where) + ": row " + std::to_string(i) +
                               " has zero norm");
        for (std::size_t j = 0; j < z.cols(); ++j) out(i, j) /= norm;
    }
    return out;
}

Matrix glorot_init(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
    if (fan_in == 0 || fan_out == 0)
        throw DimensionError("glorot_init: zero dimension (" + std::to_string(fan_in) + "x" +
                             std::to_string(fan_out) + ")");
    const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Matrix w(fan_in, fan_out);
    for (std::size_t i = 0; i < w.size(); ++i) w.data()[i] = rng.uniform(-a, a);
    return w;
}

} // namespace gcl
