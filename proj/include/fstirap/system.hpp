#pragma once

// RWA Hamiltonians and trapped states for the three-state Lambda system and
// for J <-> J' Zeeman chains driven by sigma+ (pump) / sigma- (Stokes) fields.
//
// Both systems share one structure: a tridiagonal linkage with levels ordered
// lower, upper, lower, ..., lower. Link k joins level k and k+1; even links are
// pump transitions, odd links are Stokes transitions. Only upper levels carry
// the detuning on the diagonal. For a chain starting at psi_{-J}:
//
//     index:  0       1          2        3          ...   2J
//     level:  psi_-J  psi'_-J+1  psi_-J+2 psi'_-J+3  ...   psi_J

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fstirap/clebsch_gordan.hpp"
#include "fstirap/errors.hpp"
#include "fstirap/pulse_models.hpp"

namespace fstirap {

using Complex = std::complex<double>;

enum class SystemKind { ThreeState, Chain };

inline std::string to_string(SystemKind kind)
{
    return kind == SystemKind::ThreeState ? "three_state" : "chain";
}

struct SystemSpec {
    SystemKind kind = SystemKind::ThreeState;
    double detuning_delta = 0.0;
    int j_lower = 1;     // Chain only
    int j_upper = 0;     // Chain only, J or J-1
    int initial_m = -1;  // Chain only, must be -J

    static SystemSpec three_state(double delta = 0.0)
    {
        SystemSpec s;
        s.detuning_delta = delta;
        return s;
    }
    static SystemSpec chain(int j, int jp, double delta = 0.0)
    {
        SystemSpec s;
        s.kind = SystemKind::Chain;
        s.detuning_delta = delta;
        s.j_lower = j;
        s.j_upper = jp;
        s.initial_m = -j;
        return s;
    }

    void validate() const
    {
        if (!std::isfinite(detuning_delta))
            throw ConfigError("detuning must be finite");
        if (kind == SystemKind::ThreeState)
            return;
        if (j_lower < 1)
            throw ConfigError("chain requires integer J >= 1");
        if (j_upper != j_lower && j_upper != j_lower - 1)
            throw ConfigError("chain requires J' = J or J' = J - 1, got J=" + std::to_string(j_lower)
                              + ", J'=" + std::to_string(j_upper));
        if (initial_m != -j_lower)
            throw ConfigError("chain must start in the m = -J sublevel");
    }

    int dim() const noexcept { return kind == SystemKind::ThreeState ? 3 : 2 * j_lower + 1; }
};

struct FieldPhases {
    double pump = 0.0;
    double stokes = 0.0;
};

/// Static coupling structure of a system: CG weight per link plus level roles.
struct Linkage {
    std::vector<double> link_weight; // size dim-1
    double delta = 0.0;
    int j_lower = 0;                 // 0 for the three-state system

    int dim() const noexcept { return static_cast<int>(link_weight.size()) + 1; }
    static bool is_upper(int level) noexcept { return level % 2 == 1; }
    static bool is_pump_link(int link) noexcept { return link % 2 == 0; }
    int lower_count() const noexcept { return dim() / 2 + 1; }

    /// Magnetic number of a chain level (level index minus J).
    int magnetic_number(int level) const noexcept { return level - j_lower; }
};

/// Pump weight <J m, 1 1 | J' m+1> for the lower sublevel m.
inline double pump_cg(int j, int jp, int m)
{
    return clebsch_gordan(HalfInt::integer(j), HalfInt::integer(m), HalfInt::integer(1), HalfInt::integer(1),
                          HalfInt::integer(jp), HalfInt::integer(m + 1));
}

/// Stokes weight <J m, 1 -1 | J' m-1> for the lower sublevel m.
inline double stokes_cg(int j, int jp, int m)
{
    return clebsch_gordan(HalfInt::integer(j), HalfInt::integer(m), HalfInt::integer(1), HalfInt::integer(-1),
                          HalfInt::integer(jp), HalfInt::integer(m - 1));
}

inline Linkage make_linkage(const SystemSpec& spec)
{
    spec.validate();
    Linkage link;
    link.delta = spec.detuning_delta;
    if (spec.kind == SystemKind::ThreeState) {
        link.link_weight = {1.0, 1.0};
        return link;
    }
    const int j = spec.j_lower;
    const int jp = spec.j_upper;
    link.j_lower = j;
    link.link_weight.resize(static_cast<std::size_t>(2 * j));
    for (int k = 0; k < 2 * j; ++k) {
        if (Linkage::is_pump_link(k)) {
            const int m = -j + k; // lower level k -> upper m+1
            link.link_weight[static_cast<std::size_t>(k)] = pump_cg(j, jp, m);
        } else {
            const int m = -j + k + 1; // lower level k+1 -> upper m-1
            link.link_weight[static_cast<std::size_t>(k)] = stokes_cg(j, jp, m);
        }
    }
    return link;
}

/// Upper-triangle element H(k, k+1) of link k.
inline Complex link_element(const Linkage& link, int k, const FieldAmplitudes& f, const FieldPhases& ph)
{
    const double w = link.link_weight[static_cast<std::size_t>(k)];
    if (Linkage::is_pump_link(k))
        return 0.5 * f.omega_p * w * std::polar(1.0, -ph.pump);
    return 0.5 * f.omega_s * w * std::polar(1.0, -ph.stokes);
}

struct HamiltonianAtT {
    int dim = 0;
    Eigen::MatrixXcd matrix;
};

inline HamiltonianAtT build_hamiltonian(const Linkage& link, const FieldAmplitudes& f, const FieldPhases& ph)
{
    const int n = link.dim();
    HamiltonianAtT h{n, Eigen::MatrixXcd::Zero(n, n)};
    for (int i = 0; i < n; ++i)
        if (Linkage::is_upper(i))
            h.matrix(i, i) = link.delta;
    for (int k = 0; k + 1 < n; ++k) {
        const Complex e = link_element(link, k, f, ph);
        h.matrix(k, k + 1) = e;
        h.matrix(k + 1, k) = std::conj(e);
    }
    return h;
}

inline HamiltonianAtT hamiltonian_3state(const PulseSample& pulses, const FieldPhases& phases, const SystemSpec& spec)
{
    if (spec.kind != SystemKind::ThreeState)
        throw ConfigError("hamiltonian_3state requires a three-state system");
    return build_hamiltonian(make_linkage(spec), {pulses.omega_p, pulses.omega_s}, phases);
}

inline HamiltonianAtT hamiltonian_chain(const PulseSample& pulses, const FieldPhases& phases, const SystemSpec& spec)
{
    if (spec.kind != SystemKind::Chain)
        throw ConfigError("hamiltonian_chain requires a chain system");
    return build_hamiltonian(make_linkage(spec), {pulses.omega_p, pulses.omega_s}, phases);
}

inline HamiltonianAtT hamiltonian(const PulseSample& pulses, const FieldPhases& phases, const SystemSpec& spec)
{
    return build_hamiltonian(make_linkage(spec), {pulses.omega_p, pulses.omega_s}, phases);
}

struct DarkState {
    int dim = 0;
    Eigen::VectorXcd amplitudes;
    double mix_alpha = 0.0; // arctan of the pump/Stokes ratio used
    double phase_beta = 0.0;
};

/// Unnormalized null vector of the linkage for a pump/Stokes mixing angle theta.
/// Amplitudes: c_{j+1} = -(w_pump/w_stokes) tan(theta) e^{i beta} c_j on lower
/// levels, evaluated homogeneously in (cos theta, sin theta) so theta = pi/2 is fine.
/// The first lower amplitude is real and nonnegative.
inline Eigen::VectorXcd dark_vector(const Linkage& link, double theta, double beta)
{
    const int n = link.dim();
    const int lowers = link.lower_count();
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(n);
    Complex coeff = 1.0; // running product of -(wP/wS) e^{i beta}
    for (int j = 0; j < lowers; ++j) {
        if (j > 0) {
            const int k = 2 * (j - 1);
            const double wp = link.link_weight[static_cast<std::size_t>(k)];
            const double ws = link.link_weight[static_cast<std::size_t>(k + 1)];
            if (ws == 0.0) {
                const int m = link.magnetic_number(2 * j - 2);
                throw RecurrenceBreakdown(m, "chain recurrence breaks down: Stokes coefficient into sublevel m="
                                                 + std::to_string(m + 2) + " vanishes");
            }
            coeff *= -(wp / ws) * std::polar(1.0, beta);
        }
        v(2 * j) = coeff * std::pow(c, lowers - 1 - j) * std::pow(s, j);
    }
    return v;
}

/// Trapped state of the three-state system, with the e^{-i phiS} global phase on psi1.
inline DarkState dark_state_3(const PulseSample& pulses, const FieldPhases& phases)
{
    const double omega = std::hypot(pulses.omega_p, pulses.omega_s);
    if (!(omega > 0.0))
        throw UndefinedDarkState("dark state undefined: both pump and Stokes fields vanish");
    DarkState d;
    d.dim = 3;
    d.amplitudes = Eigen::VectorXcd::Zero(3);
    d.amplitudes(0) = pulses.omega_s / omega * std::polar(1.0, -phases.stokes);
    d.amplitudes(2) = -pulses.omega_p / omega * std::polar(1.0, phases.pump);
    d.mix_alpha = std::atan2(pulses.omega_p, pulses.omega_s);
    d.phase_beta = phases.pump + phases.stokes;
    return d;
}

/// Trapped state of a chain (or three-state) system for pump/Stokes ratio tan(alpha).
inline DarkState dark_state_chain(const SystemSpec& spec, double ratio, double beta)
{
    if (!(ratio >= 0.0) || !std::isfinite(ratio))
        throw ConfigError("pump/Stokes ratio must be finite and >= 0");
    const Linkage link = make_linkage(spec);
    DarkState d;
    d.dim = link.dim();
    d.mix_alpha = std::atan(ratio);
    d.phase_beta = beta;
    d.amplitudes = dark_vector(link, d.mix_alpha, beta);
    const double norm = d.amplitudes.norm();
    if (!(norm > 0.0) || !std::isfinite(norm))
        throw UndefinedDarkState("dark state normalization failed");
    d.amplitudes /= norm;
    return d;
}

/// Lower-level amplitudes of the ratio = 1, beta = 0 trapped state as exact
/// sign * sqrt(rational) values, ordered psi_-J, psi_-J+2, ..., psi_J.
inline std::vector<ExactCG> dark_state_exact_squares(const SystemSpec& spec)
{
    using boost::multiprecision::cpp_rational;
    spec.validate();
    std::vector<ExactCG> out;
    if (spec.kind == SystemKind::ThreeState) {
        out.push_back({1, cpp_rational(1, 2)});
        out.push_back({-1, cpp_rational(1, 2)});
        return out;
    }
    const int j = spec.j_lower;
    const int jp = spec.j_upper;
    const auto one = HalfInt::integer(1);
    int sign = 1;
    cpp_rational weight = 1;
    cpp_rational total = 0;
    std::vector<ExactCG> raw;
    for (int m = -j; m <= j; m += 2) {
        if (m > -j) {
            const auto p = clebsch_gordan_exact(HalfInt::integer(j), HalfInt::integer(m - 2), one, one,
                                                HalfInt::integer(jp), HalfInt::integer(m - 1));
            const auto s = clebsch_gordan_exact(HalfInt::integer(j), HalfInt::integer(m), one,
                                                HalfInt::integer(-1), HalfInt::integer(jp), HalfInt::integer(m - 1));
            if (s.sign == 0)
                throw RecurrenceBreakdown(m - 2, "chain recurrence breaks down at m=" + std::to_string(m - 2));
            sign *= -p.sign * s.sign;
            weight *= p.square / s.square;
        }
        raw.push_back({weight == 0 ? 0 : sign, weight});
        total += weight;
    }
    for (auto& r : raw)
        out.push_back({r.sign, r.square / total});
    return out;
}

/// Display label for level i, e.g. "psi2" (three-state) or "m'=-1" (chain upper).
inline std::string level_label(const SystemSpec& spec, int level)
{
    if (spec.kind == SystemKind::ThreeState)
        return "psi" + std::to_string(level + 1);
    const int m = level - spec.j_lower;
    return (Linkage::is_upper(level) ? "m'=" : "m=") + std::to_string(m);
}

} // namespace fstirap
