#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

namespace blockdyn::lin {

using Vector = std::vector<double>;

/// Dense row-major matrix of doubles. All solver and spectral code in this
/// project works at desk scale (n <= 128), so everything is dense and eager.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    Matrix(std::initializer_list<std::initializer_list<double>> rows);

    static Matrix identity(std::size_t n);
    static Matrix diagonal(const Vector& d);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    const std::vector<double>& data() const { return data_; }

    Matrix transposed() const;

    Matrix& operator+=(const Matrix& other);
    Matrix& operator-=(const Matrix& other);
    Matrix& operator*=(double s);

    bool square() const { return rows_ == cols_; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(double s, Matrix a);
Matrix operator*(const Matrix& a, const Matrix& b);
Vector operator*(const Matrix& a, const Vector& x);

// Vector is a plain std::vector, so these stay named functions (operators on
// std:: types would not be found by lookup outside this namespace).
Vector add(Vector a, const Vector& b);
Vector sub(Vector a, const Vector& b);
Vector scaled(double s, Vector a);

double dot(const Vector& a, const Vector& b);
double norm2(const Vector& v);
double norm_inf(const Vector& v);

double frobenius_norm(const Matrix& m);
double max_abs(const Matrix& m);

/// LU factorization with partial pivoting; throws std::runtime_error on a
/// numerically singular pivot.
class LuFactors {
public:
    explicit LuFactors(const Matrix& m);

    Vector solve(const Vector& rhs) const;
    Matrix solve(const Matrix& rhs) const;
    double determinant() const;

private:
    std::size_t n_;
    Matrix lu_;
    std::vector<std::size_t> perm_;
    int sign_ = 1;
};

Matrix inverse(const Matrix& m);
Vector solve(const Matrix& a, const Vector& b);
Matrix solve(const Matrix& a, const Matrix& b);

/// QR via Householder reflections; only Q is exposed (used to synthesize
/// random orthogonal matrices). Signs are fixed so that R has a nonnegative
/// diagonal, making Q a deterministic function of the input.
Matrix orthogonal_factor(const Matrix& m);

std::string to_string(const Matrix& m);
std::string to_string(const Vector& v);

}  // namespace blockdyn::lin
