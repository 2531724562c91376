#include <nsqstab/vl.hpp>
#include <nsqstab/parallel.hpp>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace nsqstab {

const char* to_string(VlStatus status)
{
    switch (status) {
    case VlStatus::Certified: return "certified";
    case VlStatus::Refuted: return "refuted";
    case VlStatus::Undecided: return "undecided";
    }
    return "unknown";
}

namespace {

Matrix lyapunov_form(const Matrix& M, const Vector& d)
{
    Matrix md = M * d.asDiagonal();
    return md + md.transpose();
}

double min_eigenvalue(const Matrix& S)
{
    if (S.rows() == 2) {
        const double mid = 0.5 * (S(0, 0) + S(1, 1));
        const double half = 0.5 * (S(0, 0) - S(1, 1));
        return mid - std::hypot(half, 0.5 * (S(0, 1) + S(1, 0)));
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(S, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

// Entropy-smoothed minimum eigenvalue f_mu(d) = -mu log tr exp(-S(d)/mu) and its gradient.
struct Smoothed {
    double value = 0.0;
    double lambda_min = 0.0;
    Matrix weight;   // W_mu: unit trace, PSD
    Vector grad;     // 2 diag(W_mu M)
    Matrix sharp;    // u_0 u_0^T
    Vector sharp_grad;
};

Vector diag_of_product(const Matrix& W, const Matrix& M)
{
    // (W M)_ii
    return (W.array() * M.transpose().array()).rowwise().sum();
}

Smoothed smooth(const Matrix& M, const Vector& d, double mu)
{
    Eigen::SelfAdjointEigenSolver<Matrix> es(lyapunov_form(M, d));
    const Vector& lam = es.eigenvalues();
    const Matrix& U = es.eigenvectors();
    Smoothed s;
    s.lambda_min = lam(0);
    Vector w = (-(lam.array() - lam(0)) / mu).exp().matrix();
    const double z = w.sum();
    w /= z;
    s.value = lam(0) - mu * std::log(z);
    s.weight = U * w.asDiagonal() * U.transpose();
    s.grad = 2.0 * diag_of_product(s.weight, M);
    s.sharp = U.col(0) * U.col(0).transpose();
    s.sharp_grad = 2.0 * diag_of_product(s.sharp, M);
    return s;
}

// Euclidean projection onto {x_i >= floor, sum x_i = 1}.
Vector project_simplex(const Vector& y, double floor)
{
    const auto k = y.size();
    const double mass = 1.0 - static_cast<double>(k) * floor;
    Vector z = y.array() - floor;
    std::vector<double> sorted(z.data(), z.data() + k);
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double cumulative = 0.0;
    double theta = 0.0;
    for (Eigen::Index i = 0; i < k; ++i) {
        cumulative += sorted[static_cast<std::size_t>(i)];
        const double candidate = (cumulative - mass) / static_cast<double>(i + 1);
        if (sorted[static_cast<std::size_t>(i)] - candidate > 0.0) theta = candidate;
    }
    return ((z.array() - theta).max(0.0) + floor).matrix();
}

double condition(const Vector& d)
{
    return d.maxCoeff() / d.minCoeff();
}

struct GridResult {
    double value = -std::numeric_limits<double>::infinity();
    Vector d;
};

GridResult simplex_grid(const Matrix& M, double floor)
{
    GridResult best;
    const auto k = M.rows();
    auto consider = [&](const Vector& d) {
        const double v = min_eigenvalue(lyapunov_form(M, d));
        if (v > best.value) {
            best.value = v;
            best.d = d;
        }
    };
    if (k == 2) {
        const int points = 100000;
        Vector d(2);
        for (int i = 0; i < points; ++i) {
            d(0) = std::max(floor, (i + 0.5) / points);
            d(1) = 1.0 - d(0);
            consider(d);
        }
    } else if (k == 3) {
        const int side = 400;
        Vector d(3);
        for (int i = 0; i < side; ++i) {
            for (int j = 0; i + j < side; ++j) {
                d(0) = (i + 0.5) / (side + 1.0);
                d(1) = (j + 0.5) / (side + 1.0);
                d(2) = 1.0 - d(0) - d(1);
                if (d(2) <= floor) continue;
                consider(d);
            }
        }
    }
    return best;
}

}  // namespace

double verify_certificate(const Matrix& M, const Vector& d)
{
    if (M.rows() != M.cols()) throw Error(ErrorKind::NonSquare, "matrix is not square");
    if (d.size() != M.rows()) throw Error(ErrorKind::DimensionMismatch, "diagonal length differs from matrix size");
    require_finite(M, "matrix");
    for (Eigen::Index i = 0; i < d.size(); ++i)
        if (!(d(i) > 0.0) || !std::isfinite(d(i))) throw Error(ErrorKind::NonPositiveEntry, "certificate diagonal must be positive");
    return min_eigenvalue(lyapunov_form(M, d));
}

VlVerdict check_vl(const Matrix& M, const VlOptions& options)
{
    if (M.rows() != M.cols()) throw Error(ErrorKind::NonSquare, "matrix is not square");
    if (M.rows() < 1) throw Error(ErrorKind::DimensionMismatch, "empty matrix");
    require_finite(M, "matrix");
    if (!(options.tol > 0.0)) throw Error(ErrorKind::Precondition, "tolerance must be positive");

    const auto k = M.rows();
    VlVerdict out;

    if (k == 1) {
        const double a = M(0, 0);
        out.best_margin = 2.0 * a;
        out.upper_bound = 2.0 * a;
        out.dual_witness = Matrix::Ones(1, 1);
        if (2.0 * a > options.tol) {
            out.status = VlStatus::Certified;
            out.certificate = VlCertificate{Vector::Ones(1), 2.0 * a};
        } else {
            out.status = a <= 0.0 ? VlStatus::Refuted : VlStatus::Undecided;
        }
        return out;
    }

    const double scale = M.norm();
    if (scale == 0.0) {
        out.status = VlStatus::Refuted;
        out.dual_witness = Matrix::Identity(k, k) / static_cast<double>(k);
        return out;
    }
    const Matrix Mn = M / scale;
    const double tol = options.tol / scale;
    const double floor = std::min(options.floor, 0.1 / static_cast<double>(k));
    // dual bound <= slack is treated as <= 0: rounding in diag(W M) for unit-norm M
    const double refute_slack = 1e-13 * static_cast<double>(k);
    const double gap_tol = 1e-10;

    Vector d = Vector::Constant(k, 1.0 / static_cast<double>(k));
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();
    Vector best_d = d;
    Matrix best_w;

    double mu = 0.1;
    const double mu_min = 1e-14;
    const int stage_cap = std::max(50, options.budget / 12);
    int stage_iters = 0;
    double step = 1.0;

    auto absorb = [&](const Smoothed& s, const Vector& at) {
        if (s.lambda_min > lower) {
            lower = s.lambda_min;
            best_d = at;
        }
        const double u_smooth = s.grad.maxCoeff();
        if (u_smooth < upper) {
            upper = u_smooth;
            best_w = s.weight;
        }
        const double u_sharp = s.sharp_grad.maxCoeff();
        if (u_sharp < upper) {
            upper = u_sharp;
            best_w = s.sharp;
        }
    };

    Smoothed cur = smooth(Mn, d, mu);
    absorb(cur, d);
    int it = 0;
    for (; it < options.budget; ++it) {
        if (upper <= refute_slack) break;
        if (upper - lower <= gap_tol) break;

        // backtracking projected ascent on f_mu
        Vector next;
        Smoothed trial;
        bool accepted = false;
        while (step > 1e-18) {
            next = project_simplex(d + step * cur.grad, floor);
            trial = smooth(Mn, next, mu);
            const Vector delta = next - d;
            if (trial.value >= cur.value + cur.grad.dot(delta) - delta.squaredNorm() / (2.0 * step)) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        ++stage_iters;
        const double moved = accepted ? (next - d).norm() / step : 0.0;
        if (accepted) {
            d = next;
            absorb(trial, d);
            step = std::min(step * 2.0, 1e6);
        }
        if (!accepted || moved < 1e-9 || stage_iters >= stage_cap) {
            if (mu <= mu_min && !accepted) break;
            mu = std::max(mu * 0.1, mu_min);
            stage_iters = 0;
            step = std::max(step, 1e-3 * mu);
            cur = smooth(Mn, d, mu);
            absorb(cur, d);
        } else {
            cur = trial;
        }
    }
    out.iterations = it;

    if (!(lower > tol) && !(upper <= refute_slack) && options.grid_fallback && k <= 3) {
        GridResult grid = simplex_grid(Mn, floor);
        if (grid.value > lower) {
            lower = grid.value;
            best_d = grid.d;
        }
    }

    if (lower > tol) {
        // prefer the best-conditioned diagonal with the same margin, moving toward uniform
        const Vector uniform = Vector::Constant(k, 1.0 / static_cast<double>(k));
        const double keep = lower - 1e-12 * std::max(1.0, std::abs(lower));
        for (double t = 1.0; t > 1e-6; t *= 0.5) {
            const Vector cand = (1.0 - t) * best_d + t * uniform;
            if (condition(cand) < condition(best_d) && min_eigenvalue(lyapunov_form(Mn, cand)) >= keep) {
                best_d = cand;
                break;
            }
        }
    }

    const double margin = verify_certificate(M, best_d);
    out.best_margin = margin;
    out.upper_bound = upper * scale;
    out.dual_witness = best_w;
    if (margin > options.tol) {
        out.status = VlStatus::Certified;
        out.certificate = VlCertificate{best_d, margin};
    } else if (upper <= refute_slack) {
        out.status = VlStatus::Refuted;
    } else {
        out.status = VlStatus::Undecided;
    }
    return out;
}

DominanceResult check_column_dominance(const Matrix& M)
{
    if (M.rows() != M.cols()) throw Error(ErrorKind::NonSquare, "matrix is not square");
    DominanceResult out;
    out.slack.resize(M.cols());
    out.dominant = true;
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
        const double off = M.col(j).cwiseAbs().sum() - std::abs(M(j, j));
        out.slack(j) = M(j, j) - off;
        if (!(M(j, j) > 0.0) || !(out.slack(j) > 0.0)) out.dominant = false;
    }
    return out;
}

std::vector<Vector> IndividualVlResult::certificates() const
{
    std::vector<Vector> out;
    out.reserve(verdicts.size());
    for (std::size_t i = 0; i < verdicts.size(); ++i) {
        if (!verdicts[i].certificate) throw Error(ErrorKind::MissingCertificate, "selection " + std::to_string(i) + " is not certified");
        out.push_back(verdicts[i].certificate->diagonal);
    }
    return out;
}

IndividualVlResult certify_individual_vl(const PartitionedGain& A, const VlOptions& options)
{
    IndividualVlResult out;
    const Partition& part = A.partition();
    for_each_selection(part, all_blocks(part), [&](std::uint64_t, const SquaredSelection& s) { out.selections.push_back(s); });
    out.verdicts.resize(out.selections.size());
    parallel_for(out.selections.size(), [&](std::size_t i) { out.verdicts[i] = check_vl(extract_squared(A, out.selections[i]), options); });

    bool any_refuted = false;
    out.min_margin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < out.verdicts.size(); ++i) {
        const VlVerdict& v = out.verdicts[i];
        out.min_margin = std::min(out.min_margin, v.best_margin);
        if (v.status != VlStatus::Certified) out.failing.push_back(i);
        if (v.status == VlStatus::Refuted) any_refuted = true;
    }
    if (out.failing.empty()) out.overall = VlStatus::Certified;
    else out.overall = any_refuted ? VlStatus::Refuted : VlStatus::Undecided;
    return out;
}

}  // namespace nsqstab
