#pragma once

#include "logsob/functionals.hpp"
#include "logsob/grid.hpp"
#include "logsob/profiles.hpp"

#include <memory>
#include <variant>

namespace logsob {

/// Composed semi-direct inequality: slot-0 hypothesis (a profile for the
/// multiparameter statement, a Gross pair for the defective one), one profile
/// per weighted slot, and a clamp floor for the profile arguments t_i N_i^2
/// near weight zeros. s_floor = 0 selects the default t_i * h^2 * 1e-6.
struct SemiDirectLSI {
    ProductSpace space;
    std::variant<Profile, GrossPair> slot0;
    std::vector<Profile> factor_profiles;  // M_1 .. M_n
    double s_floor = 0.0;
    double rel_tol = 1e-6;
    bool allow_negative_b = false;
};

/// Term-by-term outcome of one inequality evaluation. The right-hand side is
/// dirichlet + potential + constant_term; pass <=> slack >= -tol.
struct InequalityReport {
    double entropy_lhs = 0.0;
    double dirichlet = 0.0;
    std::vector<double> dirichlet_per_slot;
    double potential = 0.0;
    double constant_term = 0.0;
    double norm_sq = 0.0;
    double slack = 0.0;
    double normalized_slack = 0.0;
    double tol = 0.0;
    bool pass = false;
    VectorXd t;
    std::vector<std::string> warnings;

    double rhs() const { return dirichlet + potential + constant_term; }
};

namespace detail {

struct LsiImpl {
    SemiDirectLSI lsi;
    Discretization disc;

    explicit LsiImpl(SemiDirectLSI l) : lsi(std::move(l)), disc(lsi.space) {
        const size_t n = lsi.space.weights.size();
        if (lsi.factor_profiles.size() != n)
            throw std::invalid_argument(
                "SemiDirectLSI: factor profile count must match weighted slots");
        for (const auto& p : lsi.factor_profiles) {
            if (!check_nonincreasing(p, log_spaced(1e-4, 1e4, 160)).ok)
                throw std::invalid_argument("SemiDirectLSI: factor profile is not non-increasing");
        }
    }

    double slot_floor(int slot, double t) const {
        if (lsi.s_floor > 0.0) return lsi.s_floor;
        double h = std::numeric_limits<double>::infinity();
        for (int i = 0; i < slot; ++i) h = std::min(h, lsi.space.factors[i].spacing());
        return t * h * h * 1e-6;
    }
};

}  // namespace detail

/// A test function discretized once against a SemiDirectLSI, ready for
/// repeated evaluation over parameter vectors.
class BoundFunction {
public:
    BoundFunction(std::shared_ptr<const detail::LsiImpl> impl, const TestFunction& f)
        : impl_(std::move(impl)) {
        const auto& d = impl_->disc;
        ArrayXd values = d.evaluate(f);
        fsq_mu_ = values.square() * d.mu();
        norm_sq_ = fsq_mu_.sum();
        if (!(norm_sq_ > 0.0)) throw std::invalid_argument("compose: null function");
        const double ln_n2 = std::log(norm_sq_);
        double ent = 0.0;
        const ArrayXd fsq = values.square();
        for (Index i = 0; i < fsq.size(); ++i)
            if (fsq[i] > 0.0) ent += fsq_mu_[i] * (std::log(fsq[i]) - ln_n2);
        entropy_ = ent;
        slot_energy_ = slot_energies(d, f);
    }

    double norm_sq() const { return norm_sq_; }
    double entropy() const { return entropy_; }
    const std::vector<double>& slot_energies() const { return slot_energy_; }

    /// Theorem statement 1: slot 0 carries a profile, every slot gets its own
    /// scale t_i, and the potential is sum_i M_i(max(t_i N_i^2, floor)).
    InequalityReport multiparam(const VectorXd& t) const {
        const auto& lsi = impl_->lsi;
        const auto* m0 = std::get_if<Profile>(&lsi.slot0);
        if (!m0) throw std::invalid_argument("compose_multiparam: slot 0 must hold a Profile");
        if (t.size() != impl_->disc.dim())
            throw std::invalid_argument("compose_multiparam: need one t per slot");
        InequalityReport rep = base_report(t, t, (*m0)(t[0]) * norm_sq_);
        finish(rep);
        return rep;
    }

    /// Theorem statement 2: slot 0 carries a defective Gross pair (a, b).
    InequalityReport defective(const VectorXd& t_tail) const {
        const auto& lsi = impl_->lsi;
        const auto* g = std::get_if<GrossPair>(&lsi.slot0);
        if (!g) throw std::invalid_argument("compose_defective: slot 0 must hold a GrossPair");
        if (!(g->a > 0.0)) throw std::invalid_argument("compose_defective: need a > 0");
        if (g->b < 0.0 && !lsi.allow_negative_b)
            throw std::invalid_argument("compose_defective: negative b requires explicit opt-in");
        if (t_tail.size() != impl_->disc.dim() - 1)
            throw std::invalid_argument("compose_defective: need one t per weighted slot");
        VectorXd scales(impl_->disc.dim());
        scales[0] = g->a;
        scales.tail(t_tail.size()) = t_tail;
        InequalityReport rep = base_report(scales, t_tail, g->b * norm_sq_);
        rep.t = t_tail;
        finish(rep);
        return rep;
    }

    /// Theorem statement 3: all scales equal.
    InequalityReport diagonal(double s) const {
        return multiparam(VectorXd::Constant(impl_->disc.dim(), s));
    }

private:
    // dirichlet_scales has one entry per slot (0..n); potential_scales has
    // one entry per weighted slot (the t_i feeding M_i(t_i N_i^2)).
    InequalityReport base_report(const VectorXd& dirichlet_scales,
                                 const VectorXd& potential_scales, double constant) const {
        for (Index i = 0; i < dirichlet_scales.size(); ++i)
            if (!(dirichlet_scales[i] > 0.0))
                throw std::invalid_argument("compose: slot scales must be positive");
        const auto& impl = *impl_;
        InequalityReport rep;
        rep.t = dirichlet_scales;
        rep.entropy_lhs = entropy_;
        rep.norm_sq = norm_sq_;
        rep.constant_term = constant;
        rep.dirichlet_per_slot.resize(slot_energy_.size());
        for (size_t i = 0; i < slot_energy_.size(); ++i) {
            rep.dirichlet_per_slot[i] = dirichlet_scales[static_cast<Index>(i)] * slot_energy_[i];
            rep.dirichlet += rep.dirichlet_per_slot[i];
        }
        const int n = static_cast<int>(impl.lsi.factor_profiles.size());
        for (int i = 1; i <= n; ++i) {
            const double ti = potential_scales[i - 1 + (potential_scales.size() - n)];
            const Profile& Mi = impl.lsi.factor_profiles[static_cast<size_t>(i - 1)];
            const ArrayXd& nsq = impl.disc.slot_weight_sq(i);
            const double floor = impl.slot_floor(i, ti);
            double acc = 0.0;
            Index clamped = 0;
            for (Index k = 0; k < nsq.size(); ++k) {
                if (fsq_mu_[k] == 0.0) continue;
                double arg = ti * nsq[k];
                if (arg < floor) {
                    arg = floor;
                    ++clamped;
                }
                acc += Mi(arg) * fsq_mu_[k];
            }
            rep.potential += acc;
            if (clamped > 0) {
                std::ostringstream os;
                os << "s_floor active at " << clamped << " node(s) with mass in slot " << i
                   << " (under-resolved weight singularity)";
                rep.warnings.push_back(os.str());
            }
        }
        return rep;
    }

    void finish(InequalityReport& rep) const {
        rep.slack = rep.rhs() - rep.entropy_lhs;
        rep.normalized_slack = rep.slack / norm_sq_;
        const double scale = std::abs(rep.entropy_lhs) + std::abs(rep.rhs());
        rep.tol = impl_->lsi.rel_tol * scale;
        rep.pass = rep.slack >= -rep.tol;
        if (!std::isfinite(rep.slack)) {
            rep.pass = false;
            rep.warnings.push_back("non-finite term in report");
        }
    }

    std::shared_ptr<const detail::LsiImpl> impl_;
    ArrayXd fsq_mu_;
    double norm_sq_ = 0.0;
    double entropy_ = 0.0;
    std::vector<double> slot_energy_;
};

/// Shared evaluator for one composed inequality; bind() discretizes a test
/// function once for parameter sweeps.
class SemiDirectEvaluator {
public:
    explicit SemiDirectEvaluator(SemiDirectLSI lsi)
        : impl_(std::make_shared<detail::LsiImpl>(std::move(lsi))) {}

    const Discretization& disc() const { return impl_->disc; }
    const SemiDirectLSI& lsi() const { return impl_->lsi; }

    BoundFunction bind(const TestFunction& f) const { return BoundFunction(impl_, f); }

    InequalityReport multiparam(const TestFunction& f, const VectorXd& t) const {
        return bind(f).multiparam(t);
    }
    InequalityReport defective(const TestFunction& f, const VectorXd& t_tail) const {
        return bind(f).defective(t_tail);
    }
    InequalityReport diagonal(const TestFunction& f, double s) const {
        return bind(f).diagonal(s);
    }

private:
    std::shared_ptr<const detail::LsiImpl> impl_;
};

using ReportFn = std::function<InequalityReport(const TestFunction&)>;

/// Statement-1 evaluator at a fixed multiparameter.
inline ReportFn compose_multiparam(const SemiDirectLSI& lsi, VectorXd t) {
    auto ev = std::make_shared<SemiDirectEvaluator>(lsi);
    return [ev, t = std::move(t)](const TestFunction& f) { return ev->multiparam(f, t); };
}

/// Statement-2 evaluator (defective slot 0) at fixed t_1..t_n.
inline ReportFn compose_defective(const SemiDirectLSI& lsi, VectorXd t_tail) {
    auto ev = std::make_shared<SemiDirectEvaluator>(lsi);
    return [ev, t = std::move(t_tail)](const TestFunction& f) { return ev->defective(f, t); };
}

/// Statement-3 evaluator: the diagonal multiparameter (s, ..., s).
inline ReportFn compose_diagonal(const SemiDirectLSI& lsi, double s) {
    auto ev = std::make_shared<SemiDirectEvaluator>(lsi);
    return [ev, s](const TestFunction& f) { return ev->diagonal(f, s); };
}

// --- marginal (Lemma 2.1) and intermediate-step checks --------------------

struct MarginalCheck {
    double lhs = 0.0;
    double rhs = 0.0;
    bool pass = false;
    double tol = 0.0;
};

namespace detail {

/// Values of f on a 2-factor grid as a (rows = factor 0) x (cols = factor 1)
/// matrix.
inline Eigen::MatrixXd grid_matrix(const Discretization& d, const TestFunction& f) {
    if (d.dim() != 2) throw std::invalid_argument("expected a 2-factor space");
    const Index r = d.axis(0).size(), c = d.axis(1).size();
    Eigen::MatrixXd out(r, c);
    VectorXd x(2);
    for (Index i = 0; i < r; ++i) {
        x[0] = d.axis(0)[i];
        for (Index j = 0; j < c; ++j) {
            x[1] = d.axis(1)[j];
            out(i, j) = f(x);
        }
    }
    return out;
}

/// Central difference along the rows (one-sided at the ends), spacing h.
inline Eigen::MatrixXd row_diff(const Eigen::MatrixXd& F, double h) {
    const Index r = F.rows();
    Eigen::MatrixXd D(r, F.cols());
    if (r < 2) throw std::invalid_argument("row_diff: need at least two rows");
    D.row(0) = (F.row(1) - F.row(0)) / h;
    D.row(r - 1) = (F.row(r - 1) - F.row(r - 2)) / h;
    for (Index i = 1; i + 1 < r; ++i) D.row(i) = (F.row(i + 1) - F.row(i - 1)) / (2.0 * h);
    return D;
}

}  // namespace detail

/// Marginal gradient inequality (the Cauchy-Schwarz core of the composition):
///   int Gamma_0(h) dmu_0 <= int int Gamma_0(f) dmu,
/// with h(x0) = (int f^2 dmu_1)^{1/2}. Both sides use the same grid-based
/// difference stencil, which makes the discrete inequality hold exactly and
/// separable functions achieve equality to roundoff.
inline MarginalCheck lemma21_check(const ProductSpace& space2, const TestFunction& f,
                                   double tol = 1e-8) {
    Discretization d(space2);
    if (d.dim() != 2) throw std::invalid_argument("lemma21_check: need a 2-factor space");
    const Eigen::MatrixXd F = detail::grid_matrix(d, f);
    const ArrayXd wq1 = d.space().factors[1].mu_weights();
    const ArrayXd wq0 = d.space().factors[0].mu_weights();
    const double h0 = d.space().factors[0].spacing();

    ArrayXd marginal(F.rows());
    for (Index i = 0; i < F.rows(); ++i)
        marginal[i] = std::sqrt((F.row(i).transpose().array().square() * wq1).sum());

    // FD of the marginal root, forced to 0 where the mass vanishes.
    ArrayXd dmarg(F.rows());
    {
        Eigen::MatrixXd M = marginal.matrix();
        Eigen::MatrixXd D = detail::row_diff(M, h0);
        for (Index i = 0; i < F.rows(); ++i) dmarg[i] = marginal[i] == 0.0 ? 0.0 : D(i, 0);
    }
    const Eigen::MatrixXd DF = detail::row_diff(F, h0);

    ArrayXd g0(F.rows());
    for (Index i = 0; i < F.rows(); ++i) g0[i] = d.space().factors[0].gamma_at(d.axis(0)[i]);

    MarginalCheck out;
    out.lhs = (g0 * dmarg.square() * wq0).sum();
    for (Index i = 0; i < F.rows(); ++i)
        out.rhs += g0[i] * wq0[i] * (DF.row(i).transpose().array().square() * wq1).sum();
    out.tol = tol;
    out.pass = out.lhs <= out.rhs + tol;
    return out;
}

struct IntermediateStepReport {
    double lhs = 0.0;           // int int f^2 ln f^2
    double slot1_energy = 0.0;  // t1 int int N1^2 Gamma_1(f)
    double potential = 0.0;     // int int M1(t1 N1^2) f^2
    double marginal_entropy = 0.0;
    double slack = 0.0;
    bool pass = false;
    double tol = 0.0;
};

/// The inner step of the induction before slot 0 is touched:
///   int f^2 ln f^2 <= t1 int N1^2 Gamma_1(f) + int M1(t1 N1^2) f^2 + int h^2 ln h^2.
inline IntermediateStepReport intermediate_step_check(const SemiDirectLSI& lsi,
                                                      const TestFunction& f, double t1) {
    if (lsi.space.dim() != 2)
        throw std::invalid_argument("intermediate_step_check: need a 2-factor space");
    if (!(t1 > 0.0)) throw std::invalid_argument("intermediate_step_check: t1 must be positive");
    SemiDirectEvaluator ev(lsi);
    const Discretization& d = ev.disc();
    BoundFunction bound = ev.bind(f);

    const ArrayXd fsq = d.evaluate(f).square();
    IntermediateStepReport rep;
    rep.lhs = entropy_unnormalized(d, fsq);
    rep.slot1_energy = t1 * bound.slot_energies()[1];

    // potential via the same clamped pass the composer uses
    InequalityReport full = bound.multiparam(Eigen::Vector2d(t1, t1));
    rep.potential = full.potential;

    const Eigen::MatrixXd F = detail::grid_matrix(d, f);
    const ArrayXd wq1 = d.space().factors[1].mu_weights();
    const ArrayXd wq0 = d.space().factors[0].mu_weights();
    for (Index i = 0; i < F.rows(); ++i) {
        const double m2 = (F.row(i).transpose().array().square() * wq1).sum();
        if (m2 > 0.0) rep.marginal_entropy += m2 * std::log(m2) * wq0[i];
    }
    const double rhs = rep.slot1_energy + rep.potential + rep.marginal_entropy;
    rep.slack = rhs - rep.lhs;
    rep.tol = lsi.rel_tol * (std::abs(rep.lhs) + std::abs(rhs));
    rep.pass = rep.slack >= -rep.tol;
    return rep;
}

// --- dilation stability ----------------------------------------------------

struct DilationCheck {
    double normalized_slack_dilated = 0.0;  // slack(f o H_lambda, t) / ||.||^2
    double normalized_slack_rescaled = 0.0;  // slack(f, t lambda^{2d}) / ||.||^2
    double rel_gap = 0.0;
};

namespace detail {

inline TestFunction compose_with_dilation(const TestFunction& f, const VectorXd& scale) {
    if (!f.has_partials())
        throw std::invalid_argument("dilation_check: test function needs analytic partials");
    TestFunction g;
    g.dim = f.dim;
    auto eval = f.eval;
    g.eval = [eval, scale](const VectorXd& x) {
        return eval(scale.cwiseProduct(x));
    };
    for (size_t i = 0; i < f.partials.size(); ++i) {
        auto p = f.partials[i];
        const double si = scale[static_cast<Index>(i)];
        g.partials.push_back(
            [p, scale, si](const VectorXd& x) { return si * p(scale.cwiseProduct(x)); });
    }
    g.support.lo = f.support.lo.cwiseQuotient(scale).cwiseMin(f.support.hi.cwiseQuotient(scale));
    g.support.hi = f.support.lo.cwiseQuotient(scale).cwiseMax(f.support.hi.cwiseQuotient(scale));
    return g;
}

}  // namespace detail

/// Verifies that the composed inequality is stable under the anisotropic
/// dilation H_lambda x = (lambda^{a_0} x_0, ..., lambda^{a_n} x_n) with
/// homogeneity index d: the normalized slack of f o H_lambda at parameter t
/// equals that of f at parameter t lambda^{2d} (the common Jacobian factor
/// lambda^{-sum a_i} cancels). Weight homogeneity
/// lambda^{2 a_i} N_i^2(x) = lambda^{2d} N_i^2(H_lambda x) is checked on the
/// grid first.
inline DilationCheck dilation_check(const SemiDirectLSI& lsi, const VectorXd& exponents,
                                    double d_index, const TestFunction& f, double lambda,
                                    double t) {
    const int dim = lsi.space.dim();
    if (exponents.size() != dim)
        throw std::invalid_argument("dilation_check: need one exponent per slot");
    if (!(lambda > 0.0) || !(t > 0.0))
        throw std::invalid_argument("dilation_check: lambda and t must be positive");

    VectorXd scale(dim);
    for (int i = 0; i < dim; ++i) scale[i] = std::pow(lambda, exponents[i]);
    const double l2d = std::pow(lambda, 2.0 * d_index);

    // weight homogeneity on sampled grid prefixes
    Discretization disc(lsi.space);
    for (int slot = 1; slot < dim; ++slot) {
        const auto& w = lsi.space.weights[static_cast<size_t>(slot - 1)];
        VectorXd prefix(slot), scaled(slot);
        const Index stride = std::max<Index>(1, disc.axis(0).size() / 7);
        for (Index j = 0; j < disc.axis(0).size(); j += stride) {
            for (int i = 0; i < slot; ++i) {
                prefix[i] = disc.axis(i)[std::min(j, disc.axis(i).size() - 1)];
                scaled[i] = scale[i] * prefix[i];
            }
            const double n = w.fn(prefix), ns = w.fn(scaled);
            const double lhs = std::pow(lambda, 2.0 * exponents[slot]) * n * n;
            const double rhs = l2d * ns * ns;
            if (std::abs(lhs - rhs) > 1e-9 * (std::abs(lhs) + std::abs(rhs)) + 1e-300)
                throw std::invalid_argument("dilation_check: weights not homogeneous");
        }
    }

    // f o H_lambda on the original grid ...
    TestFunction fd = detail::compose_with_dilation(f, scale);
    InequalityReport rep1 = SemiDirectEvaluator(lsi).diagonal(fd, t);

    // ... against f on the image grid, at the rescaled parameter.
    SemiDirectLSI scaled_lsi = lsi;
    for (int i = 0; i < dim; ++i) {
        auto& fac = scaled_lsi.space.factors[static_cast<size_t>(i)];
        if (fac.measure_weight)
            throw std::invalid_argument("dilation_check: factors must carry Lebesgue measure");
        const double lo = scale[i] * fac.lo, hi = scale[i] * fac.hi;
        fac.lo = std::min(lo, hi);
        fac.hi = std::max(lo, hi);
    }
    InequalityReport rep2 = SemiDirectEvaluator(scaled_lsi).diagonal(f, t * l2d);

    DilationCheck out;
    out.normalized_slack_dilated = rep1.normalized_slack;
    out.normalized_slack_rescaled = rep2.normalized_slack;
    out.rel_gap = std::abs(out.normalized_slack_dilated - out.normalized_slack_rescaled) /
                  (1.0 + std::abs(out.normalized_slack_dilated) +
                   std::abs(out.normalized_slack_rescaled));
    return out;
}

}  // namespace logsob
