#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace caviar::numkit {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kEulerGamma = 0.57721566490153286061;

/**
 * Dense row-major matrix. Used for the sandwich pieces (A, D, V_d), gradient
 * paths (T x p) and restriction matrices. Square-only operations check their
 * shape and throw InputError.
 */
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    Matrix(std::initializer_list<std::initializer_list<double>> rows);

    static Matrix identity(std::size_t n);
    static Matrix diagonal(std::span<const double> d);

    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
    [[nodiscard]] bool is_square() const noexcept { return rows_ == cols_; }
    [[nodiscard]] bool empty() const noexcept { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

    [[nodiscard]] std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
    [[nodiscard]] std::span<const double> row(std::size_t r) const noexcept {
        return {data_.data() + r * cols_, cols_};
    }

    [[nodiscard]] const std::vector<double>& data() const noexcept { return data_; }

    [[nodiscard]] Matrix transpose() const;
    [[nodiscard]] double max_abs() const noexcept;
    [[nodiscard]] bool all_finite() const noexcept;

    Matrix& operator*=(double s) noexcept;
    Matrix& operator+=(const Matrix& other);

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

using SquareMatrix = Matrix;

[[nodiscard]] Matrix operator*(const Matrix& a, const Matrix& b);
[[nodiscard]] Matrix operator*(double s, Matrix m);
[[nodiscard]] Matrix operator+(Matrix a, const Matrix& b);
[[nodiscard]] Matrix operator-(const Matrix& a, const Matrix& b);
[[nodiscard]] std::vector<double> operator*(const Matrix& a, std::span<const double> x);

/// Largest |a_ij - b_ij|; shapes must agree.
[[nodiscard]] double max_abs_diff(const Matrix& a, const Matrix& b);

[[nodiscard]] double std_normal_cdf(double x);
[[nodiscard]] double std_normal_pdf(double x);

/// Inverse of std_normal_cdf. Throws InputError unless 0 < p < 1.
[[nodiscard]] double std_normal_quantile(double p);

/// Exponential integral E1(s) = int_s^inf e^-x / x dx for s > 0.
[[nodiscard]] double exp_integral_e1(double s);

/// Upper regularized incomplete gamma Q(a, x).
[[nodiscard]] double gamma_q(double a, double x);

/// Survival function of the chi-square distribution, Q(dof/2, x/2).
[[nodiscard]] double chi2_sf(double x, int dof);

/// Gauss-Jordan inverse with partial pivoting. Throws SingularMatrixError when a
/// pivot falls below 1e-12 * max|entry|.
[[nodiscard]] Matrix invert(const Matrix& m);

/// Lower Cholesky factor of a symmetric positive definite matrix.
[[nodiscard]] Matrix cholesky(const Matrix& m);

/// Order statistic at 1-based index ceil(tau * n) of the sorted sample.
[[nodiscard]] double empirical_quantile(std::span<const double> xs, double tau);

enum class MadCenter { Median, Zero };

struct MadOptions {
    MadCenter center = MadCenter::Median;
    /// Multiply by 1.4826 so the statistic is consistent for the normal sigma.
    bool normal_consistent = false;
};

/// Median absolute deviation. Both medians use empirical_quantile at 0.5.
[[nodiscard]] double median_abs_deviation(std::span<const double> xs, MadOptions opts = {});

}  // namespace caviar::numkit
