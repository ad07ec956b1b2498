#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "wscav/error.hpp"

namespace wscav::numerics {

// ---- ODE integration: Dormand-Prince 5(4) with the 4th-order dense output ----

struct OdeOptions {
    double rtol = 1e-10;
    double atol = 1e-12;
    double initial_step = 0.0;  // 0 selects a step automatically
    double max_step = 0.0;      // 0 means unbounded
    double min_step = 1e-13;    // relative to the integration span
    std::size_t max_steps = 100'000'000;
};

struct OdeStats {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::size_t rhs_evals = 0;
};

using OdeRhs = std::function<void(double t, const Eigen::VectorXd& y, Eigen::VectorXd& dydt)>;
using OdeObserver = std::function<void(std::size_t index, double t, const Eigen::VectorXd& y)>;

/// Thrown when the step size underflows; carries the last accepted state.
class IntegrationError : public NumericalError {
public:
    IntegrationError(const std::string& what, double t, Eigen::VectorXd y)
        : NumericalError(what), time(t), last_state(std::move(y)) {}
    double time;
    Eigen::VectorXd last_state;
};

/// Integrates y' = f(t, y) from t0 through the increasing sample times, calling
/// `observe` at each sample with the dense-output state. On return `y` holds the
/// state at the last sample time.
OdeStats integrate_dp45(const OdeRhs& f, Eigen::VectorXd& y, double t0,
                        std::span<const double> sample_times, const OdeObserver& observe,
                        const OdeOptions& opt = {});

// ---- Adaptive vector-valued Gauss-Kronrod (7, 15) quadrature ----

struct QuadOptions {
    double abs_tol = 1e-10;  // on every component
    int max_intervals = 200000;
};

struct QuadResult {
    Eigen::VectorXd value;
    Eigen::VectorXd error;  // |K15 - G7| summed over the final partition
    int intervals = 0;
    long evaluations = 0;
};

using VecIntegrand = std::function<void(double x, Eigen::Ref<Eigen::VectorXd> out)>;

/// Globally adaptive bisection starting from the partition given by `breakpoints`
/// (at least two, increasing). Throws NumericalError with a refinement trace when
/// the interval budget is exhausted.
QuadResult integrate_gk15(const VecIntegrand& f, int dim, std::span<const double> breakpoints,
                          const QuadOptions& opt = {});

/// Composite Simpson rule on an even number of panels. Intended for cross-checks.
double simpson(const std::function<double(double)>& f, double a, double b, int panels);

// ---- Roots and minima ----

struct RootScan {
    std::vector<double> roots;         // sorted, merged within merge_tol
    std::vector<double> double_roots;  // tangential zeros (no sign change)
    int scan_points = 0;
};

/// Dense sampling of f on [a, b] followed by TOMS748 refinement of every sign
/// change. Local extrema of f with |f| below `touch_tol` are reported as double
/// roots.
RootScan scan_roots(const std::function<double(double)>& f, double a, double b, int n_scan,
                    double xtol = 1e-12, double merge_tol = 1e-8, double touch_tol = 1e-12);

/// Brent minimization on [a, b]; returns (argmin, value).
std::pair<double, double> minimize_brent(const std::function<double(double)>& f, double a,
                                         double b, int bits = 40);

}  // namespace wscav::numerics
