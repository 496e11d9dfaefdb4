#pragma once

// Clebsch-Gordan coefficients <j1 m1, j2 m2 | J M> in the Condon-Shortley
// convention, via the Racah closed-form sum.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

namespace fstirap {

/// Angular-momentum quantum number stored as twice its value.
class HalfInt {
public:
    constexpr HalfInt() = default;

    /// Throws std::domain_error unless 2*value is an integer.
    explicit HalfInt(double value)
    {
        const double twice = 2.0 * value;
        const double rounded = std::round(twice);
        if (!std::isfinite(value) || std::abs(twice - rounded) > 1e-9)
            throw std::domain_error("not a half-integer: " + std::to_string(value));
        twice_ = static_cast<int>(rounded);
    }

    static constexpr HalfInt from_twice(int twice) noexcept
    {
        HalfInt h;
        h.twice_ = twice;
        return h;
    }
    static constexpr HalfInt integer(int value) noexcept { return from_twice(2 * value); }

    constexpr int twice() const noexcept { return twice_; }
    constexpr double value() const noexcept { return 0.5 * twice_; }
    constexpr bool is_integer() const noexcept { return twice_ % 2 == 0; }

    friend constexpr HalfInt operator+(HalfInt a, HalfInt b) noexcept { return from_twice(a.twice_ + b.twice_); }
    friend constexpr HalfInt operator-(HalfInt a, HalfInt b) noexcept { return from_twice(a.twice_ - b.twice_); }
    friend constexpr bool operator==(HalfInt, HalfInt) = default;

private:
    int twice_ = 0;
};

/// Exact CG value as sign * sqrt(square).
struct ExactCG {
    int sign = 0;
    boost::multiprecision::cpp_rational square;
};

namespace detail {

// Integer arguments (in units of 1, not 1/2) of the Racah formula; valid only
// when the selection and triangle rules pass.
struct RacahArgs {
    int j1_m1_minus, j1_m1_plus, j2_m2_minus, j2_m2_plus, J_M_plus, J_M_minus;
    int tri_a, tri_b, tri_c, tri_sum; // (j1+j2-J), (j1-j2+J), (-j1+j2+J), (j1+j2+J+1)
    int two_J_plus_1;
    int k_min, k_max;
    // Denominator factorial arguments at k: k, tri_a-k, j1-m1-k, j2+m2-k, J-j2+m1+k, J-j1-m2+k
    int d_j_j2_m1, d_j_j1_m2;
};

inline void check_projection(HalfInt j, HalfInt m, const char* name)
{
    if (j.twice() < 0)
        throw std::domain_error(std::string("negative angular momentum ") + name);
    if (std::abs(m.twice()) > j.twice())
        throw std::domain_error(std::string("|m| exceeds j for ") + name);
    if ((j.twice() - m.twice()) % 2 != 0)
        throw std::domain_error(std::string("j - m is not an integer for ") + name);
}

/// Returns false when the coefficient vanishes by selection or triangle rule.
inline bool racah_args(HalfInt j1, HalfInt m1, HalfInt j2, HalfInt m2, HalfInt J, HalfInt M, RacahArgs& r)
{
    check_projection(j1, m1, "j1");
    check_projection(j2, m2, "j2");
    check_projection(J, M, "J");
    if (m1.twice() + m2.twice() != M.twice())
        return false;
    const int a2 = j1.twice() + j2.twice() - J.twice();
    const int b2 = j1.twice() - j2.twice() + J.twice();
    const int c2 = -j1.twice() + j2.twice() + J.twice();
    if (a2 < 0 || b2 < 0 || c2 < 0 || a2 % 2 != 0)
        return false;

    r.j1_m1_minus = (j1.twice() - m1.twice()) / 2;
    r.j1_m1_plus = (j1.twice() + m1.twice()) / 2;
    r.j2_m2_minus = (j2.twice() - m2.twice()) / 2;
    r.j2_m2_plus = (j2.twice() + m2.twice()) / 2;
    r.J_M_plus = (J.twice() + M.twice()) / 2;
    r.J_M_minus = (J.twice() - M.twice()) / 2;
    r.tri_a = a2 / 2;
    r.tri_b = b2 / 2;
    r.tri_c = c2 / 2;
    r.tri_sum = (j1.twice() + j2.twice() + J.twice()) / 2 + 1;
    r.two_J_plus_1 = J.twice() + 1;
    r.d_j_j2_m1 = (J.twice() - j2.twice() + m1.twice()) / 2;
    r.d_j_j1_m2 = (J.twice() - j1.twice() - m2.twice()) / 2;
    r.k_min = std::max({0, -r.d_j_j2_m1, -r.d_j_j1_m2});
    r.k_max = std::min({r.tri_a, r.j1_m1_minus, r.j2_m2_plus});
    return true;
}

inline double factorial(int n)
{
    static const auto table = [] {
        std::array<double, 171> t{};
        t[0] = 1.0;
        for (std::size_t i = 1; i < t.size(); ++i)
            t[i] = t[i - 1] * static_cast<double>(i);
        return t;
    }();
    if (n < 0 || n >= static_cast<int>(table.size()))
        throw std::overflow_error("factorial argument out of range");
    return table[static_cast<std::size_t>(n)];
}

inline boost::multiprecision::cpp_int factorial_exact(int n)
{
    boost::multiprecision::cpp_int f = 1;
    for (int i = 2; i <= n; ++i)
        f *= i;
    return f;
}

} // namespace detail

inline double clebsch_gordan(HalfInt j1, HalfInt m1, HalfInt j2, HalfInt m2, HalfInt J, HalfInt M)
{
    using detail::factorial;
    detail::RacahArgs r{};
    if (!detail::racah_args(j1, m1, j2, m2, J, M, r))
        return 0.0;

    const double norm = r.two_J_plus_1 * factorial(r.tri_a) * factorial(r.tri_b) * factorial(r.tri_c)
                        / factorial(r.tri_sum);
    const double proj = factorial(r.J_M_plus) * factorial(r.J_M_minus) * factorial(r.j1_m1_minus)
                        * factorial(r.j1_m1_plus) * factorial(r.j2_m2_minus) * factorial(r.j2_m2_plus);

    double sum = 0.0;
    for (int k = r.k_min; k <= r.k_max; ++k) {
        const double den = factorial(k) * factorial(r.tri_a - k) * factorial(r.j1_m1_minus - k)
                           * factorial(r.j2_m2_plus - k) * factorial(r.d_j_j2_m1 + k)
                           * factorial(r.d_j_j1_m2 + k);
        sum += (k % 2 == 0 ? 1.0 : -1.0) / den;
    }
    return std::sqrt(norm * proj) * sum;
}

inline double clebsch_gordan(double j1, double m1, double j2, double m2, double J, double M)
{
    return clebsch_gordan(HalfInt(j1), HalfInt(m1), HalfInt(j2), HalfInt(m2), HalfInt(J), HalfInt(M));
}

/// Same coefficient with the square held as an exact rational.
inline ExactCG clebsch_gordan_exact(HalfInt j1, HalfInt m1, HalfInt j2, HalfInt m2, HalfInt J, HalfInt M)
{
    using boost::multiprecision::cpp_int;
    using boost::multiprecision::cpp_rational;
    using detail::factorial_exact;
    detail::RacahArgs r{};
    if (!detail::racah_args(j1, m1, j2, m2, J, M, r))
        return {};

    cpp_rational prefactor(
        cpp_int(r.two_J_plus_1) * factorial_exact(r.tri_a) * factorial_exact(r.tri_b)
            * factorial_exact(r.tri_c) * factorial_exact(r.J_M_plus) * factorial_exact(r.J_M_minus)
            * factorial_exact(r.j1_m1_minus) * factorial_exact(r.j1_m1_plus)
            * factorial_exact(r.j2_m2_minus) * factorial_exact(r.j2_m2_plus),
        factorial_exact(r.tri_sum));

    cpp_rational sum = 0;
    for (int k = r.k_min; k <= r.k_max; ++k) {
        const cpp_int den = factorial_exact(k) * factorial_exact(r.tri_a - k)
                            * factorial_exact(r.j1_m1_minus - k) * factorial_exact(r.j2_m2_plus - k)
                            * factorial_exact(r.d_j_j2_m1 + k) * factorial_exact(r.d_j_j1_m2 + k);
        sum += cpp_rational(k % 2 == 0 ? 1 : -1, den);
    }
    if (sum == 0)
        return {};
    return {sum > 0 ? 1 : -1, prefactor * sum * sum};
}

} // namespace fstirap
