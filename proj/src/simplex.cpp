#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "atomgrid/errors.hpp"
#include "atomgrid/solver.hpp"

namespace atomgrid::solver {

namespace {

using lp::kInf;
using lp::Sense;

enum class VarState { Basic, AtLower, AtUpper, FreeZero };

/// Working state of the bounded revised simplex over [A | I | artificials].
class BoundedSimplex {
public:
    BoundedSimplex(const lp::LPProblem& problem, const SimplexOptions& opts)
        : lp_(problem), opts_(opts), cols_(problem.columns()), n_(problem.num_variables()),
          m_(problem.num_rows())
    {
        rhs_.resize(m_);
        for (std::size_t i = 0; i < m_; ++i) {
            rhs_[i] = problem.row(i).rhs;
        }
        max_iterations_ = opts_.max_iterations ? opts_.max_iterations : 50 * (m_ + n_) + 1000;
        setup();
    }

    Solution run()
    {
        Solution sol;
        sol.backend = "reference";
        if (!artificials_.empty()) {
            std::vector<double> phase1(total(), 0.0);
            for (const auto a : artificials_) {
                phase1[a] = 1.0;
            }
            const auto res = iterate(phase1);
            if (res == Outcome::Unbounded) {
                throw NumericalError("reference simplex: unbounded phase-one problem");
            }
            double infeasibility = 0.0;
            for (const auto a : artificials_) {
                infeasibility += std::max(0.0, x_[a]);
            }
            double scale = 1.0;
            for (const double b : rhs_) {
                scale = std::max(scale, 1.0 + std::abs(b));
            }
            if (infeasibility > opts_.infeasibility_tol * scale) {
                sol.status = SolveStatus::Infeasible;
                sol.primal.assign(x_.begin(), x_.begin() + static_cast<std::ptrdiff_t>(n_));
                sol.dual.assign(m_, 0.0);
                sol.objective = lp_.objective(sol.primal);
                sol.iterations = iterations_;
                return sol;
            }
            for (const auto a : artificials_) {
                upper_[a] = 0.0;
                if (state_[a] != VarState::Basic) {
                    state_[a] = VarState::AtLower;
                    x_[a] = 0.0;
                }
            }
        }

        std::vector<double> phase2(total(), 0.0);
        for (std::size_t j = 0; j < n_; ++j) {
            phase2[j] = lp_.costs()[j];
        }
        const auto res = iterate(phase2);
        sol.iterations = iterations_;
        if (res == Outcome::Unbounded) {
            sol.status = SolveStatus::Unbounded;
            sol.primal.assign(x_.begin(), x_.begin() + static_cast<std::ptrdiff_t>(n_));
            sol.dual.assign(m_, 0.0);
            sol.objective = -kInf;
            return sol;
        }
        refactor();
        const Eigen::VectorXd y = duals(phase2);
        sol.status = SolveStatus::Optimal;
        sol.primal.assign(x_.begin(), x_.begin() + static_cast<std::ptrdiff_t>(n_));
        for (std::size_t j = 0; j < n_; ++j) {
            // snap nonbasic values onto their bounds exactly
            if (state_[j] == VarState::AtLower) {
                sol.primal[j] = lower_[j];
            } else if (state_[j] == VarState::AtUpper) {
                sol.primal[j] = upper_[j];
            }
        }
        sol.dual.assign(y.data(), y.data() + y.size());
        sol.objective = lp_.objective(sol.primal);
        return sol;
    }

private:
    enum class Outcome { Optimal, Unbounded };

    std::size_t total() const { return lower_.size(); }

    void setup()
    {
        lower_.reserve(n_ + 2 * m_);
        upper_.reserve(n_ + 2 * m_);
        for (std::size_t j = 0; j < n_; ++j) {
            lower_.push_back(lp_.variable(j).lower);
            upper_.push_back(lp_.variable(j).upper);
        }
        for (std::size_t i = 0; i < m_; ++i) {
            switch (lp_.row(i).sense) {
            case Sense::LessEqual:
                lower_.push_back(0.0);
                upper_.push_back(kInf);
                break;
            case Sense::GreaterEqual:
                lower_.push_back(-kInf);
                upper_.push_back(0.0);
                break;
            case Sense::Equal:
                lower_.push_back(0.0);
                upper_.push_back(0.0);
                break;
            }
        }
        x_.assign(n_ + m_, 0.0);
        state_.assign(n_ + m_, VarState::AtLower);
        for (std::size_t j = 0; j < n_; ++j) {
            if (std::isfinite(lower_[j])) {
                x_[j] = lower_[j];
                state_[j] = VarState::AtLower;
            } else if (std::isfinite(upper_[j])) {
                x_[j] = upper_[j];
                state_[j] = VarState::AtUpper;
            } else {
                x_[j] = 0.0;
                state_[j] = VarState::FreeZero;
            }
        }
        std::vector<double> residual = rhs_;
        for (std::size_t j = 0; j < n_; ++j) {
            if (x_[j] == 0.0) {
                continue;
            }
            for (auto k = cols_.start[j]; k < cols_.start[j + 1]; ++k) {
                residual[cols_.row[k]] -= cols_.value[k] * x_[j];
            }
        }
        basis_.resize(m_);
        artificial_sign_.clear();
        for (std::size_t i = 0; i < m_; ++i) {
            const auto slack = n_ + i;
            const double r = residual[i];
            if (r >= lower_[slack] - opts_.feasibility_tol && r <= upper_[slack] + opts_.feasibility_tol) {
                x_[slack] = std::clamp(r, lower_[slack], upper_[slack]);
                state_[slack] = VarState::Basic;
                basis_[i] = slack;
                continue;
            }
            // slack rests at the violated bound; an artificial carries the rest
            const double bound = r < lower_[slack] ? lower_[slack] : upper_[slack];
            x_[slack] = bound;
            state_[slack] = r < lower_[slack] ? VarState::AtLower : VarState::AtUpper;
            const double rest = r - bound;
            const auto art = total();
            lower_.push_back(0.0);
            upper_.push_back(kInf);
            x_.push_back(std::abs(rest));
            state_.push_back(VarState::Basic);
            artificial_row_.push_back(i);
            artificial_sign_.push_back(rest > 0 ? 1.0 : -1.0);
            artificials_.push_back(art);
            basis_[i] = art;
        }
        basis_pos_.assign(total(), npos);
        for (std::size_t i = 0; i < m_; ++i) {
            basis_pos_[basis_[i]] = i;
        }
        refactor();
    }

    static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

    /// Dense column of the working matrix.
    Eigen::VectorXd column(std::size_t j) const
    {
        Eigen::VectorXd a = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m_));
        add_column(j, 1.0, a);
        return a;
    }

    void add_column(std::size_t j, double scale, Eigen::VectorXd& out) const
    {
        if (j < n_) {
            for (auto k = cols_.start[j]; k < cols_.start[j + 1]; ++k) {
                out[static_cast<Eigen::Index>(cols_.row[k])] += scale * cols_.value[k];
            }
        } else if (j < n_ + m_) {
            out[static_cast<Eigen::Index>(j - n_)] += scale;
        } else {
            const auto a = j - n_ - m_;
            out[static_cast<Eigen::Index>(artificial_row_[a])] += scale * artificial_sign_[a];
        }
    }

    double dot_column(std::size_t j, const Eigen::VectorXd& y) const
    {
        if (j < n_) {
            double s = 0.0;
            for (auto k = cols_.start[j]; k < cols_.start[j + 1]; ++k) {
                s += cols_.value[k] * y[static_cast<Eigen::Index>(cols_.row[k])];
            }
            return s;
        }
        if (j < n_ + m_) {
            return y[static_cast<Eigen::Index>(j - n_)];
        }
        const auto a = j - n_ - m_;
        return artificial_sign_[a] * y[static_cast<Eigen::Index>(artificial_row_[a])];
    }

    void refactor()
    {
        const auto m = static_cast<Eigen::Index>(m_);
        if (m == 0) {
            binv_.resize(0, 0);
            return;
        }
        Eigen::MatrixXd basis_matrix = Eigen::MatrixXd::Zero(m, m);
        for (std::size_t i = 0; i < m_; ++i) {
            Eigen::VectorXd col = Eigen::VectorXd::Zero(m);
            add_column(basis_[i], 1.0, col);
            basis_matrix.col(static_cast<Eigen::Index>(i)) = col;
        }
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(basis_matrix);
        const double rcond = lu.rcond();
        if (!(rcond > 1e-14)) {
            throw NumericalError(fmt::format(
                "reference simplex: singular basis after {} iterations (condition estimate {:.3g})",
                iterations_, rcond > 0 ? 1.0 / rcond : kInf));
        }
        binv_ = lu.inverse();
        // recompute basic values from the nonbasic ones
        Eigen::VectorXd r(m);
        for (std::size_t i = 0; i < m_; ++i) {
            r[static_cast<Eigen::Index>(i)] = rhs_[i];
        }
        for (std::size_t j = 0; j < total(); ++j) {
            if (state_[j] != VarState::Basic && x_[j] != 0.0) {
                add_column(j, -x_[j], r);
            }
        }
        const Eigen::VectorXd xb = binv_ * r;
        for (std::size_t i = 0; i < m_; ++i) {
            x_[basis_[i]] = xb[static_cast<Eigen::Index>(i)];
        }
    }

    Eigen::VectorXd duals(const std::vector<double>& cost) const
    {
        Eigen::VectorXd cb(static_cast<Eigen::Index>(m_));
        for (std::size_t i = 0; i < m_; ++i) {
            cb[static_cast<Eigen::Index>(i)] = cost[basis_[i]];
        }
        return binv_.transpose() * cb;
    }

    Outcome iterate(const std::vector<double>& cost)
    {
        std::size_t since_refactor = 0;
        std::size_t stall = 0;
        const auto m = static_cast<Eigen::Index>(m_);
        while (true) {
            if (since_refactor >= opts_.refactor_interval) {
                refactor();
                since_refactor = 0;
            }
            if (iterations_ >= max_iterations_) {
                throw NumericalError(
                    fmt::format("reference simplex: iteration limit {} reached", max_iterations_));
            }
            const bool bland = stall > opts_.stall_threshold;
            const Eigen::VectorXd y = duals(cost);

            // pricing
            std::size_t entering = npos;
            double best = 0.0;
            double entering_d = 0.0;
            for (std::size_t j = 0; j < total(); ++j) {
                const auto st = state_[j];
                if (st == VarState::Basic || lower_[j] == upper_[j]) {
                    continue;
                }
                const double d = cost[j] - dot_column(j, y);
                const bool eligible = (st == VarState::AtLower && d < -opts_.optimality_tol) ||
                                      (st == VarState::AtUpper && d > opts_.optimality_tol) ||
                                      (st == VarState::FreeZero && std::abs(d) > opts_.optimality_tol);
                if (!eligible) {
                    continue;
                }
                if (bland) {
                    entering = j;
                    entering_d = d;
                    break;
                }
                if (std::abs(d) > best) {
                    best = std::abs(d);
                    entering = j;
                    entering_d = d;
                }
            }
            if (entering == npos) {
                return Outcome::Optimal;
            }
            const double dir = entering_d < 0 ? 1.0 : -1.0;
            const Eigen::VectorXd alpha = binv_ * column(entering);

            // ratio test
            double step = upper_[entering] - lower_[entering]; // bound flip distance
            if (!std::isfinite(step)) {
                step = kInf;
            }
            std::size_t leave_row = npos;
            double leave_pivot = 0.0;
            for (Eigen::Index i = 0; i < m; ++i) {
                const double a = alpha[i] * dir;
                const auto bj = basis_[static_cast<std::size_t>(i)];
                double limit;
                if (a > opts_.pivot_tol && std::isfinite(lower_[bj])) {
                    limit = (x_[bj] - lower_[bj]) / a;
                } else if (a < -opts_.pivot_tol && std::isfinite(upper_[bj])) {
                    limit = (upper_[bj] - x_[bj]) / -a;
                } else {
                    continue;
                }
                limit = std::max(limit, 0.0);
                const double tie = 1e-12 * (1.0 + std::abs(limit));
                bool take = false;
                if (limit < step - tie) {
                    take = true;
                } else if (limit <= step + tie && leave_row != npos) {
                    take = bland ? bj < basis_[leave_row] : std::abs(a) > std::abs(leave_pivot);
                } else if (limit <= step + tie && leave_row == npos && !std::isfinite(step)) {
                    take = true;
                }
                if (take) {
                    step = limit;
                    leave_row = static_cast<std::size_t>(i);
                    leave_pivot = a;
                }
            }
            if (!std::isfinite(step)) {
                return Outcome::Unbounded;
            }

            // update values
            x_[entering] += dir * step;
            for (Eigen::Index i = 0; i < m; ++i) {
                x_[basis_[static_cast<std::size_t>(i)]] -= step * dir * alpha[i];
            }
            stall = step <= opts_.feasibility_tol ? stall + 1 : 0;
            ++iterations_;
            ++since_refactor;

            if (leave_row == npos) {
                // entering variable moves to its opposite bound
                if (dir > 0) {
                    state_[entering] = VarState::AtUpper;
                    x_[entering] = upper_[entering];
                } else {
                    state_[entering] = VarState::AtLower;
                    x_[entering] = lower_[entering];
                }
                continue;
            }

            const auto leaving = basis_[leave_row];
            if (leave_pivot > 0) {
                state_[leaving] = VarState::AtLower;
                x_[leaving] = lower_[leaving];
            } else {
                state_[leaving] = VarState::AtUpper;
                x_[leaving] = upper_[leaving];
            }
            basis_pos_[leaving] = npos;
            basis_[leave_row] = entering;
            basis_pos_[entering] = leave_row;
            state_[entering] = VarState::Basic;

            // product-form update of the inverse
            const auto r = static_cast<Eigen::Index>(leave_row);
            const double pivot = alpha[r];
            binv_.row(r) /= pivot;
            for (Eigen::Index i = 0; i < m; ++i) {
                if (i != r && alpha[i] != 0.0) {
                    binv_.row(i) -= alpha[i] * binv_.row(r);
                }
            }
        }
    }

    const lp::LPProblem& lp_;
    SimplexOptions opts_;
    lp::ColumnMatrix cols_;
    std::size_t n_;
    std::size_t m_;
    std::vector<double> rhs_;
    std::vector<double> lower_;
    std::vector<double> upper_;
    std::vector<double> x_;
    std::vector<VarState> state_;
    std::vector<std::size_t> basis_;
    std::vector<std::size_t> basis_pos_;
    std::vector<std::size_t> artificials_;
    std::vector<std::size_t> artificial_row_;
    std::vector<double> artificial_sign_;
    Eigen::MatrixXd binv_;
    std::size_t iterations_ = 0;
    std::size_t max_iterations_ = 0;
};

} // namespace

Solution solve_reference(const lp::LPProblem& lp, const SimplexOptions& options)
{
    lp.validate();
    if (lp.num_variables() > options.max_variables) {
        throw NumericalError(fmt::format(
            "reference simplex: {} variables exceed the guard of {}; use backend",
            lp.num_variables(), options.max_variables));
    }
    BoundedSimplex simplex(lp, options);
    return simplex.run();
}

Solution solve_reference(const lp::LPProblem& lp, double tol)
{
    SimplexOptions options;
    options.infeasibility_tol = tol;
    return solve_reference(lp, options);
}

} // namespace atomgrid::solver
