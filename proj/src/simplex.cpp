#include "closure/simplex.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace closure {

namespace {

constexpr double kFeasTol = 1e-7;
constexpr double kOptTol = 1e-7;
constexpr double kPivotTol = 1e-9;
constexpr double kDriftTol = 1e-9;
constexpr double kLambdaDropTol = 1e-11;
constexpr double kConditionCap = 1e12;
constexpr int kRefactorInterval = 64;

}  // namespace

std::string to_string(LpStatus s) {
    switch (s) {
        case LpStatus::optimal: return "optimal";
        case LpStatus::infeasible: return "infeasible";
        case LpStatus::unbounded: return "unbounded";
        case LpStatus::iteration_limit: return "iteration_limit";
    }
    return "?";
}

class BasisFactor {
public:
    explicit BasisFactor(const Eigen::MatrixXd& B) : lu_(B) {
        const auto& diag = lu_.matrixLU().diagonal();
        double dmax = 0.0, dmin = kInf;
        for (Eigen::Index i = 0; i < diag.size(); ++i) {
            double d = std::abs(diag[i]);
            dmax = std::max(dmax, d);
            dmin = std::min(dmin, d);
        }
        cond_ = (dmin == 0.0) ? kInf : dmax / dmin;
        if (!(cond_ < kConditionCap))
            throw NumericalError("singular or ill-conditioned basis (estimate " +
                                 std::to_string(cond_) + ")");
    }

    Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const { return lu_.solve(rhs); }
    Eigen::VectorXd solve_transpose(const Eigen::VectorXd& rhs) const {
        return lu_.transpose().solve(rhs);
    }
    Eigen::MatrixXd inverse() const { return lu_.inverse(); }
    double condition_estimate() const { return cond_; }

private:
    Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
    double cond_;
};

uint64_t Basis::hash() const {
    std::vector<int> sorted = columns;
    std::sort(sorted.begin(), sorted.end());
    HashStream h;
    for (int c : sorted) h.add(c);
    return h.value();
}

namespace {

enum class IterOutcome { optimal, unbounded, iteration_limit };

class Engine {
public:
    Engine(const StandardFormMilp& sf) : sf_(sf), m_(sf.rows()), n_(sf.cols()) {
        art_signs_.resize(static_cast<std::size_t>(m_));
        for (int i = 0; i < m_; ++i)
            art_signs_[static_cast<std::size_t>(i)] =
                sf_.b[static_cast<std::size_t>(i)] >= 0.0 ? 1.0 : -1.0;
        bmax_ = 0.0;
        for (double v : sf_.b) bmax_ = std::max(bmax_, std::abs(v));
    }

    LpResult run(const std::vector<double>& objective) {
        start_from_artificials();
        return run_phases(objective);
    }

    // Warm start; returns nullopt when the basis is not primal feasible so
    // the caller can fall back to a cold solve.
    std::optional<LpResult> run_warm(const Basis& warm, const std::vector<double>& objective) {
        if (static_cast<int>(warm.columns.size()) != m_) return std::nullopt;
        basic_ = warm.columns;
        if (!warm.art_signs.empty()) art_signs_ = warm.art_signs;
        is_basic_.assign(static_cast<std::size_t>(n_ + m_), false);
        for (int c : basic_) {
            if (c < 0 || c >= n_ + m_ || is_basic_[static_cast<std::size_t>(c)])
                return std::nullopt;
            is_basic_[static_cast<std::size_t>(c)] = true;
        }
        try {
            refactor();
        } catch (const NumericalError&) {
            return std::nullopt;
        }
        compute_xb();
        for (int i = 0; i < m_; ++i)
            if (xb_[i] < -1e-9) return std::nullopt;
        LpResult res;
        if (!run_phase2(objective, res)) return res;
        finish_optimal(objective, res);
        return res;
    }

private:
    const StandardFormMilp& sf_;
    int m_, n_;
    std::vector<int> basic_;
    std::vector<bool> is_basic_;
    std::vector<double> art_signs_;
    Eigen::MatrixXd binv_;
    Eigen::VectorXd xb_;
    double bmax_ = 0.0;
    int pivots_since_refactor_ = 0;
    int total_iterations_ = 0;
    bool phase2_ = false;

    void start_from_artificials() {
        basic_.resize(static_cast<std::size_t>(m_));
        is_basic_.assign(static_cast<std::size_t>(n_ + m_), false);
        for (int i = 0; i < m_; ++i) {
            basic_[static_cast<std::size_t>(i)] = n_ + i;
            is_basic_[static_cast<std::size_t>(n_ + i)] = true;
        }
        binv_ = Eigen::MatrixXd::Zero(m_, m_);
        for (int i = 0; i < m_; ++i) binv_(i, i) = art_signs_[static_cast<std::size_t>(i)];
        pivots_since_refactor_ = 0;
        compute_xb();
    }

    LpResult run_phases(const std::vector<double>& objective) {
        LpResult res;
        // Phase 1: minimize the artificial sum.
        std::vector<double> c1(static_cast<std::size_t>(n_ + m_), 0.0);
        for (int i = 0; i < m_; ++i) c1[static_cast<std::size_t>(n_ + i)] = 1.0;
        phase2_ = false;
        IterOutcome out = iterate(c1);
        if (out == IterOutcome::iteration_limit) {
            res.status = LpStatus::iteration_limit;
            res.iterations = total_iterations_;
            return res;
        }
        if (out == IterOutcome::unbounded)
            throw NumericalError("phase-1 objective reported unbounded");
        double z1 = 0.0;
        for (int i = 0; i < m_; ++i)
            if (basic_[static_cast<std::size_t>(i)] >= n_) z1 += xb_[i];
        if (z1 > kFeasTol) {
            res.status = LpStatus::infeasible;
            res.iterations = total_iterations_;
            return res;
        }
        drive_out_artificials();
        if (!run_phase2(objective, res)) return res;
        finish_optimal(objective, res);
        return res;
    }

    bool run_phase2(const std::vector<double>& objective, LpResult& res) {
        std::vector<double> c2(static_cast<std::size_t>(n_ + m_), 0.0);
        std::copy(objective.begin(), objective.end(), c2.begin());
        phase2_ = true;
        IterOutcome out = iterate(c2);
        res.iterations = total_iterations_;
        if (out == IterOutcome::iteration_limit) {
            res.status = LpStatus::iteration_limit;
            return false;
        }
        if (out == IterOutcome::unbounded) {
            res.status = LpStatus::unbounded;
            return false;
        }
        return true;
    }

    void compute_xb() {
        Eigen::VectorXd b(m_);
        for (int i = 0; i < m_; ++i) b[i] = sf_.b[static_cast<std::size_t>(i)];
        xb_ = binv_ * b;
    }

    // Column j of the system incl. artificials, as sparse entries.
    SparseVec column(int j) const {
        if (j < n_) return sf_.A.col(j);
        return {{j - n_, art_signs_[static_cast<std::size_t>(j - n_)]}};
    }

    void refactor() {
        Eigen::MatrixXd B = Eigen::MatrixXd::Zero(m_, m_);
        for (int i = 0; i < m_; ++i)
            for (const auto& e : column(basic_[static_cast<std::size_t>(i)]))
                B(e.index, i) = e.value;
        BasisFactor f(B);
        binv_ = f.inverse();
        pivots_since_refactor_ = 0;
    }

    double drift() const {
        // || B x_B - b ||_inf with B applied column-wise
        std::vector<double> acc(static_cast<std::size_t>(m_), 0.0);
        for (int i = 0; i < m_; ++i)
            for (const auto& e : column(basic_[static_cast<std::size_t>(i)]))
                acc[static_cast<std::size_t>(e.index)] += e.value * xb_[i];
        double r = 0.0;
        for (int i = 0; i < m_; ++i)
            r = std::max(r, std::abs(acc[static_cast<std::size_t>(i)] -
                                     sf_.b[static_cast<std::size_t>(i)]));
        return r;
    }

    IterOutcome iterate(const std::vector<double>& cost) {
        const int iter_cap = 50 * (m_ + n_);
        const int bland_trigger = 3 * (m_ + n_);
        bool bland = false;
        int no_progress = 0;
        double last_obj = kInf;

        for (int iter = 0; iter < iter_cap; ++iter, ++total_iterations_) {
            if (pivots_since_refactor_ >= kRefactorInterval) refactor();
            compute_xb();
            if (drift() > kDriftTol * (1.0 + bmax_)) {
                refactor();
                compute_xb();
            }

            double z = 0.0;
            for (int i = 0; i < m_; ++i)
                z += cost[static_cast<std::size_t>(basic_[static_cast<std::size_t>(i)])] * xb_[i];
            if (z < last_obj - 1e-9 * (1.0 + std::abs(z))) {
                last_obj = z;
                no_progress = 0;
            } else if (++no_progress > bland_trigger) {
                bland = true;
            }

            // duals for the current cost vector
            Eigen::VectorXd cb(m_);
            for (int i = 0; i < m_; ++i)
                cb[i] = cost[static_cast<std::size_t>(basic_[static_cast<std::size_t>(i)])];
            Eigen::VectorXd y = binv_.transpose() * cb;

            int enter = -1;
            double best_rc = -kOptTol;
            for (int j = 0; j < n_; ++j) {
                if (is_basic_[static_cast<std::size_t>(j)]) continue;
                double rc = cost[static_cast<std::size_t>(j)];
                for (const auto& e : sf_.A.col(j)) rc -= y[e.index] * e.value;
                if (rc < best_rc) {
                    best_rc = rc;
                    enter = j;
                    if (bland) break;  // lowest eligible index
                }
            }
            if (enter < 0) return IterOutcome::optimal;

            // direction w = B^{-1} A_enter
            Eigen::VectorXd w = Eigen::VectorXd::Zero(m_);
            for (const auto& e : sf_.A.col(enter)) w += e.value * binv_.col(e.index);

            int leave_row = -1;
            double best_t = kInf;
            bool best_pinned = false;
            for (int i = 0; i < m_; ++i) {
                const bool art = basic_[static_cast<std::size_t>(i)] >= n_;
                const bool pinned = phase2_ && art;  // artificials must stay at zero
                double wi = pinned ? std::abs(w[i]) : w[i];
                if (wi <= kPivotTol) continue;
                double t = std::max(xb_[i], 0.0) / wi;
                bool take = false;
                if (t < best_t - 1e-12) {
                    take = true;
                } else if (t <= best_t + 1e-12 && leave_row >= 0) {
                    // ties: artificials leave first, then lowest basic index
                    take = (pinned && !best_pinned) ||
                           (pinned == best_pinned &&
                            basic_[static_cast<std::size_t>(i)] <
                                basic_[static_cast<std::size_t>(leave_row)]);
                }
                if (take) {
                    best_t = t;
                    leave_row = i;
                    best_pinned = pinned;
                }
            }
            if (leave_row < 0) return IterOutcome::unbounded;

            pivot(enter, leave_row, w);
        }
        return IterOutcome::iteration_limit;
    }

    void pivot(int enter, int leave_row, const Eigen::VectorXd& w) {
        const double piv = w[leave_row];
        binv_.row(leave_row) /= piv;
        for (int k = 0; k < m_; ++k) {
            if (k == leave_row) continue;
            double f = w[k];
            if (f != 0.0) binv_.row(k) -= f * binv_.row(leave_row);
        }
        is_basic_[static_cast<std::size_t>(basic_[static_cast<std::size_t>(leave_row)])] = false;
        basic_[static_cast<std::size_t>(leave_row)] = enter;
        is_basic_[static_cast<std::size_t>(enter)] = true;
        ++pivots_since_refactor_;
    }

    // Degenerate pivots that replace zero-valued artificial basics by real
    // columns where the tableau row has a usable entry.
    void drive_out_artificials() {
        for (int i = 0; i < m_; ++i) {
            if (basic_[static_cast<std::size_t>(i)] < n_) continue;
            for (int j = 0; j < n_; ++j) {
                if (is_basic_[static_cast<std::size_t>(j)]) continue;
                Eigen::VectorXd w = Eigen::VectorXd::Zero(m_);
                for (const auto& e : sf_.A.col(j)) w += e.value * binv_.col(e.index);
                if (std::abs(w[i]) > kFeasTol) {
                    // make row i the ratio-test winner at t = 0
                    pivot(j, i, w);
                    compute_xb();
                    break;
                }
            }
        }
    }

    void finish_optimal(const std::vector<double>& objective, LpResult& res) {
        refactor();
        compute_xb();

        res.status = LpStatus::optimal;
        res.x.assign(static_cast<std::size_t>(n_), 0.0);
        for (int i = 0; i < m_; ++i) {
            int j = basic_[static_cast<std::size_t>(i)];
            if (j < n_) res.x[static_cast<std::size_t>(j)] = xb_[i];
        }
        res.obj = 0.0;
        for (int j = 0; j < n_; ++j)
            res.obj += objective[static_cast<std::size_t>(j)] * res.x[static_cast<std::size_t>(j)];

        Eigen::MatrixXd B = Eigen::MatrixXd::Zero(m_, m_);
        for (int i = 0; i < m_; ++i)
            for (const auto& e : column(basic_[static_cast<std::size_t>(i)]))
                B(e.index, i) = e.value;
        auto factor = std::make_shared<BasisFactor>(B);

        Eigen::VectorXd cb(m_);
        for (int i = 0; i < m_; ++i) {
            int j = basic_[static_cast<std::size_t>(i)];
            cb[i] = j < n_ ? objective[static_cast<std::size_t>(j)] : 0.0;
        }
        Eigen::VectorXd y = factor->solve_transpose(cb);
        res.duals.assign(static_cast<std::size_t>(m_), 0.0);
        for (int i = 0; i < m_; ++i) res.duals[static_cast<std::size_t>(i)] = y[i];

        if (drift() > kFeasTol * (1.0 + bmax_))
            throw NumericalError("primal residual above tolerance at optimality");
        for (int i = 0; i < m_; ++i)
            if (xb_[i] < -1e-9) throw NumericalError("negative basic value at optimality");

        Basis basis;
        basis.columns = basic_;
        basis.art_signs = art_signs_;
        basis.factor = std::move(factor);
        res.basis = std::move(basis);
    }
};

}  // namespace

LpResult solve_lp(const StandardFormMilp& sf, const std::vector<double>& objective) {
    if (static_cast<int>(objective.size()) != sf.cols())
        throw ContractViolation("objective length does not match column count");
    Engine eng(sf);
    return eng.run(objective);
}

LpResult solve_lp(const StandardFormMilp& sf) { return solve_lp(sf, sf.c); }

LpResult resolve_with_objective(const StandardFormMilp& sf, const Basis& warm,
                                const std::vector<double>& objective) {
    if (static_cast<int>(objective.size()) != sf.cols())
        throw ContractViolation("objective length does not match column count");
    Engine eng(sf);
    if (auto res = eng.run_warm(warm, objective)) return *res;
    return solve_lp(sf, objective);
}

TableauRow tableau_row(const StandardFormMilp& sf, const Basis& basis, int i) {
    const int m = sf.rows();
    const int n = sf.cols();
    if (i < 0 || i >= m) throw ContractViolation("tableau row index out of range");
    if (!basis.factor) throw ContractViolation("basis has no stored factorization");

    Eigen::VectorXd ei = Eigen::VectorXd::Zero(m);
    ei[i] = 1.0;
    Eigen::VectorXd lam = basis.factor->solve_transpose(ei);

    TableauRow row;
    row.row_index = i;
    row.basic_var = basis.columns[static_cast<std::size_t>(i)];
    row.alpha.assign(static_cast<std::size_t>(n), 0.0);
    row.beta = 0.0;
    for (int r = 0; r < m; ++r) {
        double l = lam[r];
        if (l == 0.0) continue;
        row.beta += l * sf.b[static_cast<std::size_t>(r)];
        for (const auto& e : sf.A.row(r))
            row.alpha[static_cast<std::size_t>(e.index)] += l * e.value;
        if (std::abs(l) >= kLambdaDropTol) row.lambda.push_back({r, l});
    }
    // B^{-1} B = I exactly; snap the computed values onto the identity pattern.
    for (int k = 0; k < m; ++k) {
        int j = basis.columns[static_cast<std::size_t>(k)];
        if (j >= n) continue;
        double expected = (k == i) ? 1.0 : 0.0;
        if (std::abs(row.alpha[static_cast<std::size_t>(j)] - expected) > kFeasTol)
            throw NumericalError("tableau identity breach on basic column " + std::to_string(j));
        row.alpha[static_cast<std::size_t>(j)] = expected;
    }
    return row;
}

std::vector<TableauRow> tableau_rows(const StandardFormMilp& sf, const Basis& basis) {
    std::vector<TableauRow> rows;
    rows.reserve(static_cast<std::size_t>(sf.rows()));
    for (int i = 0; i < sf.rows(); ++i) rows.push_back(tableau_row(sf, basis, i));
    return rows;
}

}  // namespace closure
