#pragma once

#include <string>

namespace lid {

/// Smallest diffusion time at which a score may be evaluated. Scores scale like
/// 1/sigma(t), so anything below this is treated as a domain error.
inline constexpr double kTimeFloor = 1e-5;

enum class ScheduleKind { VE, VP, SubVP };

std::string to_string(ScheduleKind kind);
ScheduleKind schedule_kind_from_string(const std::string& name);

/// Diffusion SDE with linear drift f(x,t) = b(t) x and Gaussian transition
/// kernel N(psi(t) x0, sigma^2(t) I).
///
/// VP / SubVP use beta(t) = beta0 + (beta1 - beta0) t. VE uses the geometric
/// noise scale sigma(t) = sigma_min (sigma_max / sigma_min)^t, so sigma(0) is
/// sigma_min rather than zero.
class Schedule {
public:
    static Schedule vp(double beta0 = 0.1, double beta1 = 20.1);
    static Schedule sub_vp(double beta0 = 0.1, double beta1 = 20.1);
    static Schedule ve(double sigma_min = 0.01, double sigma_max = 50.0);

    ScheduleKind kind() const { return kind_; }
    double beta0() const { return p0_; }
    double beta1() const { return p1_; }
    double sigma_min() const { return p0_; }
    double sigma_max() const { return p1_; }

    /// beta(t); VP and SubVP only.
    double beta(double t) const;
    /// B(t) = integral of beta over [0, t]; VP and SubVP only.
    double integrated_beta(double t) const;

    double psi(double t) const;
    double sigma2(double t) const;
    double sigma(double t) const;
    /// Noise-to-signal ratio sigma(t) / psi(t).
    double lambda(double t) const;
    double log_lambda(double t) const;

    /// Drift coefficient b(t) and squared diffusion g^2(t).
    struct Coefficients {
        double drift;
        double diffusion2;
    };
    Coefficients drift_diffusion(double t) const;

    /// t(delta) = lambda^{-1}(e^delta), closed form for every built-in family.
    double t_of_delta(double delta) const;
    /// Same inverse by bisection on log lambda, to 1e-12 in t.
    double t_of_delta_bisect(double delta) const;

    /// Admissible delta interval [log lambda(0), log lambda(1)]; the lower end
    /// is -infinity for VP / SubVP.
    double delta_lower() const;
    double delta_upper() const;

    bool operator==(const Schedule&) const = default;

private:
    Schedule(ScheduleKind kind, double p0, double p1);
    void check_time(double t) const;
    void check_delta(double delta) const;

    ScheduleKind kind_;
    double p0_;
    double p1_;
};

}  // namespace lid
