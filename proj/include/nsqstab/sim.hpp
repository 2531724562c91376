#pragma once

#include <nsqstab/core.hpp>

#include <optional>
#include <ostream>
#include <vector>

namespace nsqstab {

/// Plant state space (A, B, C, D): z' = A z + B u, y = C z + D u. A must be Hurwitz.
class PlantRealization {
public:
    PlantRealization(Matrix a, Matrix b, Matrix c, Matrix d);

    const Matrix& a() const { return a_; }
    const Matrix& b() const { return b_; }
    const Matrix& c() const { return c_; }
    const Matrix& d() const { return d_; }
    int states() const { return static_cast<int>(a_.rows()); }
    int outputs() const { return static_cast<int>(c_.rows()); }
    int inputs() const { return static_cast<int>(b_.cols()); }

private:
    Matrix a_, b_, c_, d_;
};

/// max Re eigenvalue < -1e-9 * max(1, ||M||_F).
bool is_hurwitz(const Matrix& M);
double max_real_part(const Matrix& M);

/// H(0) = D - C A^{-1} B.
Matrix steady_state_gain(const PlantRealization& p);

struct ClosedLoop {
    double eta = 0.0;
    Matrix kbar;    // n x m
    Matrix matrix;  // states ordered (x, z)
};

/// [[-eta D Kbar, -eta C], [B Kbar, A]].
ClosedLoop closed_loop_matrix(const PlantRealization& p, const Matrix& kbar, double eta);

/// Logarithmic grid from `high` down to `low`.
std::vector<double> log_grid(double high, double low, int points);
std::vector<double> default_eta_grid();

struct EtaPoint {
    double eta = 0.0;
    bool stable = false;
    double max_real = 0.0;
};

struct EtaSweep {
    std::vector<EtaPoint> points;
    /// Largest grid eta whose closed loop is Hurwitz.
    std::optional<double> threshold;
    /// First index of the longest all-stable tail of the grid (points.size() if the last point is unstable).
    std::size_t stable_suffix_start = 0;
    bool reduced_hurwitz = false;
    double reduced_max_real = 0.0;   // max Re sigma(-H(0) Kbar)
    /// False when the reduced model is Hurwitz but the smallest grid eta is unstable.
    bool consistent = true;

    bool has_stable_suffix() const { return stable_suffix_start < points.size(); }
};

/// Hurwitz test of the closed loop at each grid eta plus the reduced-model test.
EtaSweep eta_threshold(const PlantRealization& p, const Matrix& kbar, const std::vector<double>& grid);

struct Trajectory {
    std::vector<double> times;
    std::vector<Vector> states;  // (x, z) at each time
    int slow_states = 0;         // m
    bool diverged = false;
    /// ||state(T)|| / ||state(0)|| (0 when both are zero).
    double convergence = 0.0;

    void write_csv(std::ostream& os) const;
};

struct SimulationSpec {
    double eta = 0.1;
    Vector x0;
    Vector z0;
    double horizon = 100.0;
    /// <= 0 selects min(1e-2, 0.1 / spectral radius).
    double step = 0.0;
};

/// Classical fixed-step fourth-order Runge-Kutta integration of the closed loop.
Trajectory simulate(const PlantRealization& p, const Matrix& kbar, const SimulationSpec& spec);

struct QuasiSteadyState {
    double cutoff_time = 0.0;       // 10 / min |Re sigma(A)|
    double max_deviation = 0.0;     // max ||z + A^{-1} B Kbar x|| after the cutoff
    double max_relative_deviation = 0.0;  // same, divided by ||x||
    std::size_t samples = 0;
};

/// Distance of the fast state from its quasi-steady value over the trajectory tail.
QuasiSteadyState quasi_steady_state_check(const PlantRealization& p, const Matrix& kbar, const Trajectory& trajectory);

}  // namespace nsqstab
