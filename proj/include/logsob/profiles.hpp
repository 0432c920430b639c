#pragma once

#include "logsob/grid.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace logsob {

/// Super log-Sobolev rate function t -> M(t): continuous and non-increasing
/// on each declared continuity piece. Instances come from the catalog
/// factories below; `custom` wraps a closure or a log-interpolated table.
class Profile {
public:
    enum class Kind {
        FlatEuclidean,
        DomainDirichlet,
        LiePolynomial,
        DamekRicci,
        SchrodingerKato,
        VeryDegenerate,
        CustomTable,
        CustomClosure,
    };

    Kind kind() const { return kind_; }
    const std::map<std::string, double>& params() const { return params_; }
    const std::string& label() const { return label_; }
    double valid_lo() const { return valid_lo_; }
    double valid_hi() const { return valid_hi_; }

    /// Interior points where the formula switches branches (possible jumps).
    const std::vector<double>& breakpoints() const { return breakpoints_; }

    double operator()(double t) const {
        if (!(t > 0.0)) throw std::invalid_argument("Profile: t must be positive");
        return m_(t);
    }

    /// Flat space R^n with Lebesgue measure: M(t) = -(n/2) ln(pi e^2 t).
    static Profile flat_euclidean(int n) {
        Profile p(Kind::FlatEuclidean, "flat_euclidean");
        p.params_["n"] = n;
        p.m_ = [n](double t) { return -(n / 2.0) * std::log(kPiE2 * t); };
        return p;
    }

    /// Dirichlet problem on a finite-volume domain, normalized Lebesgue
    /// measure: M(t) = ln(volume (pi e^2 t)^{-n/2}).
    static Profile domain_dirichlet(int n, double volume) {
        if (!(volume > 0.0)) throw std::invalid_argument("domain_dirichlet: volume must be > 0");
        Profile p(Kind::DomainDirichlet, "domain_dirichlet");
        p.params_["n"] = n;
        p.params_["volume"] = volume;
        p.m_ = [n, volume](double t) {
            return std::log(volume) - (n / 2.0) * std::log(kPiE2 * t);
        };
        return p;
    }

    /// Lie group of polynomial growth, sub-Laplacian with ||T_t||_{2->inf}
    /// <= c0 t^{-n/4}: M(t) = 2 ln c0 - (n/2) ln(t/2).
    static Profile lie_polynomial(int n, double c0) {
        if (!(c0 > 0.0)) throw std::invalid_argument("lie_polynomial: c0 must be > 0");
        Profile p(Kind::LiePolynomial, "lie_polynomial");
        p.params_["n"] = n;
        p.params_["c0"] = c0;
        p.m_ = [n, c0](double t) { return 2.0 * std::log(c0) - (n / 2.0) * std::log(t / 2.0); };
        return p;
    }

    /// Laplace-Beltrami on a Damek-Ricci space, two branches split at t = 1
    /// (implemented exactly as printed; the branches need not agree there).
    static Profile damek_ricci(int n, double Q, double C) {
        if (!(C > 0.0)) throw std::invalid_argument("damek_ricci: C must be > 0");
        Profile p(Kind::DamekRicci, "damek_ricci");
        p.params_["n"] = n;
        p.params_["Q"] = Q;
        p.params_["C"] = C;
        p.breakpoints_ = {1.0};
        p.m_ = [n, Q, C](double t) {
            const double drift = Q * Q * t / 8.0;
            if (t <= 1.0) return std::log(C) + (n / 2.0) * std::log(2.0) - (n / 2.0) * std::log(t) - drift;
            return std::log(C) + 1.5 * std::log(2.0) - 1.5 * std::log(t) - drift;
        };
        return p;
    }

    /// Schrodinger operator with Kato-class potential, ratio = ||V_-||_K / c_n:
    /// M(t) = ln((pi t)^{-n/2} / (1 - ratio)). Requires 0 <= ratio < 1.
    static Profile schrodinger_kato(int n, double kato_ratio) {
        if (!(kato_ratio >= 0.0 && kato_ratio < 1.0))
            throw std::invalid_argument("schrodinger_kato: need 0 <= kato_ratio < 1");
        Profile p(Kind::SchrodingerKato, "schrodinger_kato");
        p.params_["n"] = n;
        p.params_["kato_ratio"] = kato_ratio;
        p.m_ = [n, kato_ratio](double t) {
            return -(n / 2.0) * std::log(kPi * t) - std::log1p(-kato_ratio);
        };
        return p;
    }

    /// Very degenerate diffusion with g(x) > c1 exp(-c2/|x|^a):
    /// M(t) = c2 2^g' t^{-g'} - ln t + ln(2 c1).
    static Profile very_degenerate(double c1, double c2, double gamma_prime) {
        if (!(c1 > 0.0) || !(c2 > 0.0) || !(gamma_prime > 0.0))
            throw std::invalid_argument("very_degenerate: parameters must be positive");
        Profile p(Kind::VeryDegenerate, "very_degenerate");
        p.params_["c1"] = c1;
        p.params_["c2"] = c2;
        p.params_["gamma_prime"] = gamma_prime;
        p.m_ = [c1, c2, gamma_prime](double t) {
            return c2 * std::pow(2.0, gamma_prime) * std::pow(t, -gamma_prime) - std::log(t) +
                   std::log(2.0 * c1);
        };
        return p;
    }

    static Profile custom(std::function<double(double)> m, std::string label = "custom") {
        Profile p(Kind::CustomClosure, std::move(label));
        p.m_ = std::move(m);
        return p;
    }

    /// Table profile, log-linear interpolation in t (serializable).
    static Profile custom_table(std::vector<double> t, std::vector<double> m,
                                std::string label = "table") {
        if (t.size() < 2 || t.size() != m.size())
            throw std::invalid_argument("custom_table: need matching t/m arrays, size >= 2");
        for (size_t i = 0; i + 1 < t.size(); ++i)
            if (!(t[i] > 0.0) || !(t[i] < t[i + 1]))
                throw std::invalid_argument("custom_table: t must be positive ascending");
        Profile p(Kind::CustomTable, std::move(label));
        p.table_t_ = std::move(t);
        p.table_m_ = std::move(m);
        const auto& tt = p.table_t_;
        const auto& mm = p.table_m_;
        p.m_ = [&tt, &mm](double t_) {
            if (t_ <= tt.front()) return mm.front();
            if (t_ >= tt.back()) return mm.back();
            auto it = std::upper_bound(tt.begin(), tt.end(), t_);
            const size_t j = static_cast<size_t>(it - tt.begin());
            const double u = (std::log(t_) - std::log(tt[j - 1])) /
                             (std::log(tt[j]) - std::log(tt[j - 1]));
            return (1.0 - u) * mm[j - 1] + u * mm[j];
        };
        return p;
    }

    const std::vector<double>& table_t() const { return table_t_; }
    const std::vector<double>& table_m() const { return table_m_; }

    Profile scaled_validity(double lo, double hi) const {
        Profile p = *this;
        p.valid_lo_ = lo;
        p.valid_hi_ = hi;
        return p;
    }

    static constexpr double kPi = 3.14159265358979323846;
    static constexpr double kPiE2 = kPi * 2.718281828459045235360287 * 2.718281828459045235360287;

private:
    Profile(Kind k, std::string label) : kind_(k), label_(std::move(label)) {}

    Kind kind_;
    std::string label_;
    std::map<std::string, double> params_;
    std::function<double(double)> m_;
    std::vector<double> table_t_, table_m_;
    std::vector<double> breakpoints_;
    double valid_lo_ = 0.0;
    double valid_hi_ = std::numeric_limits<double>::infinity();
};

inline double eval_profile(const Profile& p, double t) { return p(t); }

/// Defective Gross inequality constants: Ent <= a * Dirichlet + b * ||f||^2.
struct GrossPair {
    double a = 2.0;
    double b = 0.0;
    std::string context;
};

// --- Gross-pair catalog ------------------------------------------------

/// Standard Gaussian measure on R^n (dimension free, sharp).
inline GrossPair gross_gaussian() { return {2.0, 0.0, "gaussian"}; }

/// Normalized uniform measure on the torus T^n.
inline GrossPair gross_torus() { return {2.0, 0.0, "torus"}; }

/// Uniform measure on [0, L], free boundary.
inline GrossPair gross_interval_uniform(double L) {
    return {2.0 * L * L / (Profile::kPi * Profile::kPi), 0.0, "interval_uniform"};
}

/// Uniform measure on [0, L] with periodic boundary conditions.
inline GrossPair gross_interval_periodic(double L) {
    return {L * L / (2.0 * Profile::kPi * Profile::kPi), 0.0, "interval_periodic"};
}

/// (0, 2pi) with weight exp(2 gamma ln sin(x/2)), gamma > 1/2.
inline GrossPair gross_weighted_sin(double gamma) {
    if (!(gamma > 0.5)) throw std::invalid_argument("gross_weighted_sin: need gamma > 1/2");
    return {8.0 / (1.0 + 2.0 * gamma), 0.0, "weighted_sin"};
}

/// (-1,1) with weight (1-x)^{2 alpha} (1+x)^{2 beta}, min(alpha,beta) > 1/2.
inline GrossPair gross_weighted_jacobi(double alpha, double beta) {
    const double gamma = std::min(alpha, beta);
    const double delta = std::max(alpha, beta);
    if (!(gamma > 0.5)) throw std::invalid_argument("gross_weighted_jacobi: need min(a,b) > 1/2");
    return {delta / (gamma * (1.0 + 2.0 * delta)), 0.0, "weighted_jacobi"};
}

/// Ultraspherical measure A_l (1-x^2)^{l-1/2} on [-1,1]; the matching carre
/// du champ weight is gamma(x) = 1 - x^2 (sharp).
inline GrossPair gross_ultraspherical(double lambda) {
    if (!(lambda > -0.5)) throw std::invalid_argument("gross_ultraspherical: need lambda > -1/2");
    return {2.0 / (2.0 * lambda + 1.0), 0.0, "ultraspherical"};
}

/// Lebesgue measure on R^n (infinite measure): constant 1/(pi e^2).
inline GrossPair gross_flat_lebesgue() { return {1.0 / Profile::kPiE2, 0.0, "flat_lebesgue"}; }

/// Normalized Lebesgue measure on a finite-volume domain.
inline GrossPair gross_domain(int n, double volume) {
    return {std::pow(volume, 2.0 / n) / Profile::kPiE2, 0.0, "domain"};
}

// --- monotonicity check -------------------------------------------------

struct MonotonicityResult {
    bool ok = true;
    std::optional<double> first_violation_t;
    /// Jumps M(b+) - M(b-) at declared breakpoints, reported, not failed.
    std::vector<double> junction_jumps;
};

/// True iff M(t_{j+1}) <= M(t_j) + tol on every continuity piece of the
/// profile along the given ascending grid.
inline MonotonicityResult check_nonincreasing(const Profile& p, const ArrayXd& t_grid,
                                              double tol = 1e-12) {
    MonotonicityResult r;
    const auto& breaks = p.breakpoints();
    for (Index i = 0; i + 1 < t_grid.size(); ++i) {
        const double a = t_grid[i], b = t_grid[i + 1];
        if (!(a < b)) throw std::invalid_argument("check_nonincreasing: grid must ascend");
        bool crosses = false;
        for (double br : breaks)
            if (a < br && br <= b) crosses = true;
        if (crosses) continue;  // junction handled separately
        if (p(b) > p(a) + tol) {
            r.ok = false;
            if (!r.first_violation_t) r.first_violation_t = b;
        }
    }
    for (double br : breaks) {
        const double eps = 1e-9 * std::max(1.0, std::abs(br));
        r.junction_jumps.push_back(p(br + eps) - p(br));
    }
    return r;
}

inline ArrayXd log_spaced(double lo, double hi, int n) {
    if (!(lo > 0.0 && hi > lo && n >= 2)) throw std::invalid_argument("log_spaced: bad range");
    ArrayXd out(n);
    const double la = std::log(lo), lb = std::log(hi);
    for (int i = 0; i < n; ++i) out[i] = std::exp(la + (lb - la) * i / (n - 1));
    return out;
}

// --- Kato norm ----------------------------------------------------------

/// Radial potential on R^3 with declared breakpoints of |V| (kinks and
/// jumps), integrated up to `truncation`.
struct RadialPotential {
    std::function<double(double)> v;
    std::vector<double> breakpoints;
    double truncation = 64.0;
};

/// c_n = pi^{n/2} / Gamma(n/2 - 1), the Kato-norm coupling threshold.
inline double kato_coupling_constant(int n) {
    if (n < 3) throw std::invalid_argument("kato_coupling_constant: need n >= 3");
    return std::pow(Profile::kPi, n / 2.0) / std::tgamma(n / 2.0 - 1.0);
}

namespace detail {

/// Adaptive composite-midpoint integral of g over [a, b]; doubles the node
/// count until the value settles. An integrand that refuses to converge
/// (multiplicative growth for power divergence, constant increments for
/// logarithmic divergence) is reported via `diverge_msg`.
inline double refine_integral(const std::function<double(double)>& g, double a, double b,
                              double rel_tol, const char* diverge_msg) {
    if (!(b > a)) return 0.0;
    double prev = std::numeric_limits<double>::quiet_NaN();
    int n = 512;
    int grew = 0;
    for (int pass = 0; pass < 12; ++pass, n *= 2) {
        const double h = (b - a) / n;
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += g(a + (i + 0.5) * h);
        s *= h;
        if (pass > 0) {
            const double change = std::abs(s - prev);
            if (change <= rel_tol * (std::abs(s) + 1e-300)) return s;
            if (std::abs(s) > 1.6 * std::abs(prev) + 1e-12 && ++grew >= 2)
                throw std::runtime_error(diverge_msg);
        }
        prev = s;
    }
    throw std::runtime_error(diverge_msg);
}

}  // namespace detail

/// Kato norm of a radial potential on R^3 by the spherical-shell reduction:
///   ||V||_K = sup_{|x|} 4 pi int_0^inf |V(r)| r^2 / max(r, |x|) dr.
/// The supremum is taken over the probe radii (include 0: radial monotone
/// potentials attain it at the center).
inline double kato_norm_radial(const RadialPotential& V, int n, const ArrayXd& probe_radii) {
    if (n != 3) throw std::invalid_argument("kato_norm_radial: only n = 3 is supported");
    double best = 0.0;
    for (Index k = 0; k < probe_radii.size(); ++k) {
        const double a = probe_radii[k];
        if (a < 0.0) throw std::invalid_argument("kato_norm_radial: probe radius must be >= 0");
        std::vector<double> cuts = V.breakpoints;
        cuts.push_back(0.0);
        cuts.push_back(a);
        cuts.push_back(V.truncation);
        std::sort(cuts.begin(), cuts.end());
        cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
        double total = 0.0;
        for (size_t i = 0; i + 1 < cuts.size(); ++i) {
            if (cuts[i] >= V.truncation) break;
            const double lo = std::max(0.0, cuts[i]);
            const double hi = std::min(V.truncation, cuts[i + 1]);
            auto g = [&](double r) { return std::abs(V.v(r)) * r * r / std::max(r, a); };
            total += detail::refine_integral(g, lo, hi, 1e-11,
                                             "kato_norm_radial: inner integral diverges (not Kato)");
        }
        best = std::max(best, 4.0 * Profile::kPi * total);
    }
    return best;
}

}  // namespace logsob
