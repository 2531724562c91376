#include <nsqstab/sim.hpp>
#include <nsqstab/dstab.hpp>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>

namespace nsqstab {

PlantRealization::PlantRealization(Matrix a, Matrix b, Matrix c, Matrix d)
    : a_(std::move(a)), b_(std::move(b)), c_(std::move(c)), d_(std::move(d))
{
    if (a_.rows() < 1) throw Error(ErrorKind::Precondition, "plant needs at least one state");
    if (a_.rows() != a_.cols()) throw Error(ErrorKind::NonSquare, "state matrix A is not square");
    if (b_.rows() != a_.rows()) throw Error(ErrorKind::DimensionMismatch, "B rows must equal state count");
    if (c_.cols() != a_.rows()) throw Error(ErrorKind::DimensionMismatch, "C columns must equal state count");
    if (d_.rows() != c_.rows() || d_.cols() != b_.cols()) throw Error(ErrorKind::DimensionMismatch, "D must be outputs x inputs");
    require_finite(a_, "A");
    require_finite(b_, "B");
    require_finite(c_, "C");
    require_finite(d_, "D");
    if (!is_hurwitz(a_)) throw Error(ErrorKind::NotHurwitz, "state matrix A is not Hurwitz");
}

double max_real_part(const Matrix& M)
{
    const ComplexVector ev = spectrum(M);
    if (ev.size() == 0) return -std::numeric_limits<double>::infinity();
    return ev.real().maxCoeff();
}

bool is_hurwitz(const Matrix& M)
{
    return max_real_part(M) < -1e-9 * std::max(1.0, M.norm());
}

Matrix steady_state_gain(const PlantRealization& p)
{
    Eigen::PartialPivLU<Matrix> lu(p.a());
    return p.d() - p.c() * lu.solve(p.b());
}

ClosedLoop closed_loop_matrix(const PlantRealization& p, const Matrix& kbar, double eta)
{
    if (kbar.rows() != p.inputs() || kbar.cols() != p.outputs())
        throw Error(ErrorKind::DimensionMismatch, "Kbar must be inputs x outputs");
    if (!(eta >= 0.0) || !std::isfinite(eta)) throw Error(ErrorKind::Precondition, "eta must be nonnegative");
    const int m = p.outputs();
    const int q = p.states();
    ClosedLoop cl;
    cl.eta = eta;
    cl.kbar = kbar;
    cl.matrix.resize(m + q, m + q);
    cl.matrix.topLeftCorner(m, m) = -eta * p.d() * kbar;
    cl.matrix.topRightCorner(m, q) = -eta * p.c();
    cl.matrix.bottomLeftCorner(q, m) = p.b() * kbar;
    cl.matrix.bottomRightCorner(q, q) = p.a();
    return cl;
}

std::vector<double> log_grid(double high, double low, int points)
{
    if (points < 1 || !(high > 0.0) || !(low > 0.0) || low > high) throw Error(ErrorKind::Precondition, "bad grid range");
    std::vector<double> grid;
    if (points == 1) return {high};
    const double lh = std::log10(high);
    const double ll = std::log10(low);
    for (int i = 0; i < points; ++i) grid.push_back(std::pow(10.0, lh + (ll - lh) * i / (points - 1)));
    return grid;
}

std::vector<double> default_eta_grid()
{
    return log_grid(1.0, 1e-4, 17);
}

EtaSweep eta_threshold(const PlantRealization& p, const Matrix& kbar, const std::vector<double>& grid)
{
    if (grid.empty()) throw Error(ErrorKind::Precondition, "empty eta grid");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] > 0.0)) throw Error(ErrorKind::Precondition, "eta grid must be positive");
        if (i > 0 && !(grid[i] < grid[i - 1])) throw Error(ErrorKind::Precondition, "eta grid must be strictly descending");
    }
    EtaSweep sweep;
    for (double eta : grid) {
        const ClosedLoop cl = closed_loop_matrix(p, kbar, eta);
        EtaPoint pt{eta, is_hurwitz(cl.matrix), max_real_part(cl.matrix)};
        if (pt.stable && !sweep.threshold) sweep.threshold = eta;
        sweep.points.push_back(pt);
    }
    sweep.stable_suffix_start = sweep.points.size();
    while (sweep.stable_suffix_start > 0 && sweep.points[sweep.stable_suffix_start - 1].stable) --sweep.stable_suffix_start;

    const Matrix reduced = -steady_state_gain(p) * kbar;
    sweep.reduced_max_real = max_real_part(reduced);
    sweep.reduced_hurwitz = is_hurwitz(reduced);
    sweep.consistent = !sweep.reduced_hurwitz || sweep.has_stable_suffix();
    return sweep;
}

void Trajectory::write_csv(std::ostream& os) const
{
    const auto width = states.empty() ? 0 : states.front().size();
    os << "t";
    for (int i = 0; i < slow_states; ++i) os << ",x" << (i + 1);
    for (Eigen::Index i = slow_states; i < width; ++i) os << ",z" << (i - slow_states + 1);
    os << '\n' << std::setprecision(17);
    for (std::size_t k = 0; k < times.size(); ++k) {
        os << times[k];
        for (Eigen::Index i = 0; i < width; ++i) os << ',' << states[k](i);
        os << '\n';
    }
}

Trajectory simulate(const PlantRealization& p, const Matrix& kbar, const SimulationSpec& spec)
{
    const ClosedLoop cl = closed_loop_matrix(p, kbar, spec.eta);
    const int m = p.outputs();
    const int q = p.states();
    if (spec.x0.size() != m || spec.z0.size() != q) throw Error(ErrorKind::DimensionMismatch, "initial state sizes");

    double h = spec.step;
    if (!(h > 0.0)) {
        const ComplexVector ev = spectrum(cl.matrix);
        const double rho = ev.size() ? ev.cwiseAbs().maxCoeff() : 0.0;
        h = rho > 0.0 ? std::min(1e-2, 0.1 / rho) : 1e-2;
    }
    if (!(spec.horizon >= h)) throw Error(ErrorKind::Precondition, "horizon must be at least one step");

    const auto steps = static_cast<long>(std::ceil(spec.horizon / h - 1e-9));
    const double last = spec.horizon - static_cast<double>(steps - 1) * h;

    // one RK4 step of a linear system is multiplication by the degree-4 Taylor polynomial of exp(hM)
    auto propagator = [&](double dt) {
        const Matrix hm = dt * cl.matrix;
        const Matrix i = Matrix::Identity(m + q, m + q);
        return Matrix(i + hm * (i + hm * (i + hm * (i + hm / 4.0) / 3.0) / 2.0));
    };
    const Matrix phi = propagator(h);
    const Matrix phi_last = propagator(last);

    Trajectory traj;
    traj.slow_states = m;
    Vector s(m + q);
    s << spec.x0, spec.z0;
    traj.times.reserve(static_cast<std::size_t>(steps + 1));
    traj.states.reserve(static_cast<std::size_t>(steps + 1));
    traj.times.push_back(0.0);
    traj.states.push_back(s);
    for (long k = 1; k <= steps; ++k) {
        s = (k == steps ? phi_last : phi) * s;
        traj.times.push_back(k == steps ? spec.horizon : static_cast<double>(k) * h);
        traj.states.push_back(s);
        if (!s.allFinite()) {
            traj.diverged = true;
            break;
        }
    }
    const double n0 = traj.states.front().norm();
    const double nT = traj.states.back().norm();
    if (traj.diverged) traj.convergence = std::numeric_limits<double>::infinity();
    else if (n0 > 0.0) traj.convergence = nT / n0;
    else traj.convergence = nT > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    return traj;
}

QuasiSteadyState quasi_steady_state_check(const PlantRealization& p, const Matrix& kbar, const Trajectory& trajectory)
{
    const int m = p.outputs();
    const int q = p.states();
    if (kbar.rows() != p.inputs() || kbar.cols() != m) throw Error(ErrorKind::DimensionMismatch, "Kbar must be inputs x outputs");
    QuasiSteadyState out;
    const double slowest = -max_real_part(p.a());
    out.cutoff_time = 10.0 / slowest;
    const Matrix gain = Eigen::PartialPivLU<Matrix>(p.a()).solve(p.b() * kbar);  // A^{-1} B Kbar
    for (std::size_t k = 0; k < trajectory.times.size(); ++k) {
        if (trajectory.times[k] <= out.cutoff_time) continue;
        const Vector& s = trajectory.states[k];
        if (s.size() != m + q) throw Error(ErrorKind::DimensionMismatch, "trajectory state size");
        const Vector x = s.head(m);
        const double dev = (s.tail(q) + gain * x).norm();
        out.max_deviation = std::max(out.max_deviation, dev);
        const double xn = x.norm();
        if (xn > 0.0) out.max_relative_deviation = std::max(out.max_relative_deviation, dev / xn);
        ++out.samples;
    }
    return out;
}

}  // namespace nsqstab
