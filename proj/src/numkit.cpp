#include "caviar/numkit.hpp"

#include "caviar/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace caviar::numkit {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_) {
            throw InputError("Matrix: ragged initializer");
        }
        data_.insert(data_.end(), r.begin(), r.end());
    }
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        m(i, i) = 1.0;
    }
    return m;
}

Matrix Matrix::diagonal(std::span<const double> d) {
    Matrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        m(i, i) = d[i];
    }
    return m;
}

Matrix Matrix::transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r) {
        for (std::size_t c = 0; c < cols_; ++c) {
            t(c, r) = (*this)(r, c);
        }
    }
    return t;
}

double Matrix::max_abs() const noexcept {
    double m = 0.0;
    for (double v : data_) {
        m = std::max(m, std::abs(v));
    }
    return m;
}

bool Matrix::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Matrix& Matrix::operator*=(double s) noexcept {
    for (double& v : data_) {
        v *= s;
    }
    return *this;
}

Matrix& Matrix::operator+=(const Matrix& other) {
    if (other.rows_ != rows_ || other.cols_ != cols_) {
        throw InputError("Matrix +=: shape mismatch");
    }
    for (std::size_t i = 0; i < data_.size(); ++i) {
        data_[i] += other.data_[i];
    }
    return *this;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        throw InputError("Matrix product: inner dimensions differ");
    }
    Matrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            for (std::size_t j = 0; j < b.cols(); ++j) {
                out(i, j) += aik * b(k, j);
            }
        }
    }
    return out;
}

Matrix operator*(double s, Matrix m) {
    m *= s;
    return m;
}

Matrix operator+(Matrix a, const Matrix& b) {
    a += b;
    return a;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
    Matrix out = b;
    out *= -1.0;
    out += a;
    return out;
}

std::vector<double> operator*(const Matrix& a, std::span<const double> x) {
    if (a.cols() != x.size()) {
        throw InputError("Matrix-vector product: dimension mismatch");
    }
    std::vector<double> out(a.rows(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < a.cols(); ++j) {
            s += a(i, j) * x[j];
        }
        out[i] = s;
    }
    return out;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw InputError("max_abs_diff: shape mismatch");
    }
    double m = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i) {
        m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
    }
    return m;
}

double std_normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

double std_normal_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * kPi);
}

namespace {

// Acklam's rational approximation for the lower half, |rel err| < 1.2e-9.
double lower_quantile_guess(double p) {
    constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                            1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
    constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                            6.680131188771972e+01,  -1.328068155288572e+01};
    constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                            -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
    constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                            3.754408661907416e+00};
    constexpr double p_low = 0.02425;

    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double q = p - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace

double std_normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw InputError("std_normal_quantile: p must lie in (0,1), got " + std::to_string(p));
    }
    if (p > 0.5) {
        // 1 - p is exact here, and this keeps the function exactly odd about 0.5.
        return -std_normal_quantile(1.0 - p);
    }
    if (p == 0.5) {
        return 0.0;
    }
    double x = lower_quantile_guess(p);
    // Newton polish; the lower tail of erfc keeps full relative precision.
    const double e = std_normal_cdf(x) - p;
    x -= e / std_normal_pdf(x);
    return x;
}

double exp_integral_e1(double s) {
    if (!(s > 0.0)) {
        throw InputError("exp_integral_e1: argument must be positive");
    }
    if (s <= 1.0) {
        double sum = 0.0;
        double term = 1.0;  // (-s)^k / k!
        for (int k = 1; k < 200; ++k) {
            term *= -s / k;
            const double add = term / k;
            sum += add;
            if (std::abs(add) < 1e-17 * std::abs(sum)) {
                break;
            }
        }
        return -kEulerGamma - std::log(s) - sum;
    }
    if (s > 745.0) {
        return 0.0;  // e^-s underflows
    }
    // Modified Lentz evaluation of the continued fraction.
    constexpr double tiny = 1e-300;
    double b = s + 1.0;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 1000; ++i) {
        const double an = -static_cast<double>(i) * i;
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        const double del = c * d;
        h *= del;
        if (std::abs(del - 1.0) < 1e-16) {
            break;
        }
    }
    return h * std::exp(-s);
}

double gamma_q(double a, double x) {
    if (!(a > 0.0) || x < 0.0) {
        throw InputError("gamma_q: requires a > 0 and x >= 0");
    }
    if (x == 0.0) {
        return 1.0;
    }
    const double log_prefix = -x + a * std::log(x) - std::lgamma(a);
    if (x < a + 1.0) {
        // Series for P(a, x).
        double ap = a;
        double del = 1.0 / a;
        double sum = del;
        for (int n = 0; n < 10000; ++n) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::abs(del) < std::abs(sum) * 1e-17) {
                break;
            }
        }
        return 1.0 - sum * std::exp(log_prefix);
    }
    constexpr double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 10000; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) {
            d = tiny;
        }
        c = b + an / c;
        if (std::abs(c) < tiny) {
            c = tiny;
        }
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-16) {
            break;
        }
    }
    return std::exp(log_prefix) * h;
}

double chi2_sf(double x, int dof) {
    if (dof < 1) {
        throw InputError("chi2_sf: dof must be positive");
    }
    if (x < 0.0 || std::isnan(x)) {
        throw InputError("chi2_sf: statistic must be nonnegative");
    }
    if (std::isinf(x)) {
        return 0.0;
    }
    return std::clamp(gamma_q(0.5 * dof, 0.5 * x), 0.0, 1.0);
}

Matrix invert(const Matrix& m) {
    if (!m.is_square() || m.rows() == 0) {
        throw InputError("invert: matrix must be square and nonempty");
    }
    const std::size_t n = m.rows();
    const double scale = m.max_abs();
    if (!(scale > 0.0) || !m.all_finite()) {
        throw SingularMatrixError("invert: matrix is zero or non-finite");
    }
    const double threshold = 1e-12 * scale;

    Matrix a = m;
    Matrix inv = Matrix::identity(n);
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::abs(a(r, col)) > std::abs(a(pivot, col))) {
                pivot = r;
            }
        }
        if (std::abs(a(pivot, col)) < threshold) {
            throw SingularMatrixError("invert: pivot below threshold in column " + std::to_string(col));
        }
        if (pivot != col) {
            for (std::size_t c = 0; c < n; ++c) {
                std::swap(a(pivot, c), a(col, c));
                std::swap(inv(pivot, c), inv(col, c));
            }
        }
        const double pv = a(col, col);
        for (std::size_t c = 0; c < n; ++c) {
            a(col, c) /= pv;
            inv(col, c) /= pv;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) {
                continue;
            }
            const double f = a(r, col);
            if (f == 0.0) {
                continue;
            }
            for (std::size_t c = 0; c < n; ++c) {
                a(r, c) -= f * a(col, c);
                inv(r, c) -= f * inv(col, c);
            }
        }
    }
    return inv;
}

Matrix cholesky(const Matrix& m) {
    if (!m.is_square()) {
        throw InputError("cholesky: matrix must be square");
    }
    const std::size_t n = m.rows();
    Matrix l(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double diag = m(j, j);
        for (std::size_t k = 0; k < j; ++k) {
            diag -= l(j, k) * l(j, k);
        }
        if (!(diag > 0.0)) {
            throw SingularMatrixError("cholesky: matrix is not positive definite");
        }
        l(j, j) = std::sqrt(diag);
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = m(i, j);
            for (std::size_t k = 0; k < j; ++k) {
                s -= l(i, k) * l(j, k);
            }
            l(i, j) = s / l(j, j);
        }
    }
    return l;
}

double empirical_quantile(std::span<const double> xs, double tau) {
    if (xs.empty()) {
        throw InputError("empirical_quantile: empty sample");
    }
    if (!(tau > 0.0 && tau < 1.0)) {
        throw InputError("empirical_quantile: tau must lie in (0,1)");
    }
    const auto n = xs.size();
    // The small slack keeps products such as 0.05 * 1000 from rounding up a rank.
    const double rank = std::ceil(tau * static_cast<double>(n) - 1e-9);
    const std::size_t k = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(rank, 1.0)), 1, n);
    std::vector<double> v(xs.begin(), xs.end());
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k - 1), v.end());
    return v[k - 1];
}

double median_abs_deviation(std::span<const double> xs, MadOptions opts) {
    if (xs.empty()) {
        throw InputError("median_abs_deviation: empty sample");
    }
    const double center = opts.center == MadCenter::Median ? empirical_quantile(xs, 0.5) : 0.0;
    std::vector<double> dev(xs.size());
    std::transform(xs.begin(), xs.end(), dev.begin(), [center](double x) { return std::abs(x - center); });
    const double mad = empirical_quantile(dev, 0.5);
    return opts.normal_consistent ? 1.482602218505602 * mad : mad;
}

}  // namespace caviar::numkit
