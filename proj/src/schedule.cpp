#include "lid/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "lid/errors.hpp"

namespace lid {

std::string to_string(ScheduleKind kind)
{
    switch (kind) {
    case ScheduleKind::VE: return "VE";
    case ScheduleKind::VP: return "VP";
    case ScheduleKind::SubVP: return "SubVP";
    }
    return "?";
}

ScheduleKind schedule_kind_from_string(const std::string& name)
{
    if (name == "VE" || name == "ve") return ScheduleKind::VE;
    if (name == "VP" || name == "vp") return ScheduleKind::VP;
    if (name == "SubVP" || name == "subvp" || name == "sub_vp") return ScheduleKind::SubVP;
    throw ValidationError("unknown schedule kind '" + name + "'");
}

Schedule::Schedule(ScheduleKind kind, double p0, double p1) : kind_(kind), p0_(p0), p1_(p1)
{
    if (!(p0 > 0.0) || !(p1 > 0.0) || !std::isfinite(p0) || !std::isfinite(p1))
        throw ValidationError("schedule parameters must be positive and finite");
    if (kind == ScheduleKind::VE && !(p1 > p0))
        throw ValidationError("VE schedule needs sigma_max > sigma_min");
}

Schedule Schedule::vp(double beta0, double beta1) { return {ScheduleKind::VP, beta0, beta1}; }
Schedule Schedule::sub_vp(double beta0, double beta1) { return {ScheduleKind::SubVP, beta0, beta1}; }
Schedule Schedule::ve(double sigma_min, double sigma_max) { return {ScheduleKind::VE, sigma_min, sigma_max}; }

void Schedule::check_time(double t) const
{
    if (!(t >= 0.0 && t <= 1.0)) {
        std::ostringstream os;
        os << "diffusion time " << t << " outside [0, 1]";
        throw ValidationError(os.str());
    }
}

double Schedule::beta(double t) const
{
    check_time(t);
    if (kind_ == ScheduleKind::VE) throw ValidationError("beta(t) is undefined for VE schedules");
    return p0_ + (p1_ - p0_) * t;
}

double Schedule::integrated_beta(double t) const
{
    check_time(t);
    if (kind_ == ScheduleKind::VE) throw ValidationError("B(t) is undefined for VE schedules");
    return p0_ * t + 0.5 * (p1_ - p0_) * t * t;
}

double Schedule::psi(double t) const
{
    check_time(t);
    if (kind_ == ScheduleKind::VE) return 1.0;
    return std::exp(-0.5 * integrated_beta(t));
}

double Schedule::sigma2(double t) const
{
    check_time(t);
    switch (kind_) {
    case ScheduleKind::VE: {
        const double s = p0_ * std::pow(p1_ / p0_, t);
        return s * s;
    }
    case ScheduleKind::VP: return -std::expm1(-integrated_beta(t));
    case ScheduleKind::SubVP: {
        const double v = -std::expm1(-integrated_beta(t));
        return v * v;
    }
    }
    return 0.0;
}

double Schedule::sigma(double t) const { return std::sqrt(sigma2(t)); }

double Schedule::log_lambda(double t) const
{
    check_time(t);
    switch (kind_) {
    case ScheduleKind::VE: return std::log(p0_) + t * std::log(p1_ / p0_);
    case ScheduleKind::VP: return 0.5 * std::log(std::expm1(integrated_beta(t)));
    case ScheduleKind::SubVP: return std::log(2.0 * std::sinh(0.5 * integrated_beta(t)));
    }
    return 0.0;
}

double Schedule::lambda(double t) const { return std::exp(log_lambda(t)); }

Schedule::Coefficients Schedule::drift_diffusion(double t) const
{
    check_time(t);
    switch (kind_) {
    case ScheduleKind::VE: return {0.0, 2.0 * std::log(p1_ / p0_) * sigma2(t)};
    case ScheduleKind::VP: {
        const double b = beta(t);
        return {-0.5 * b, b};
    }
    case ScheduleKind::SubVP: {
        const double b = beta(t);
        return {-0.5 * b, -b * std::expm1(-2.0 * integrated_beta(t))};
    }
    }
    return {0.0, 0.0};
}

double Schedule::delta_lower() const
{
    if (kind_ == ScheduleKind::VE) return std::log(p0_);
    return -std::numeric_limits<double>::infinity();
}

double Schedule::delta_upper() const { return log_lambda(1.0); }

void Schedule::check_delta(double delta) const
{
    const double lo = delta_lower();
    const double hi = delta_upper();
    if (std::isnan(delta) || delta < lo || delta > hi) {
        std::ostringstream os;
        os << "log noise scale " << delta << " outside admissible interval [" << lo << ", " << hi << "]";
        throw ValidationError(os.str());
    }
}

namespace {

// Solve beta0 t + (beta1 - beta0) t^2 / 2 = B for t >= 0 without cancellation.
double invert_linear_beta(double beta0, double beta1, double big_b)
{
    const double slope = beta1 - beta0;
    if (slope == 0.0) return big_b / beta0;
    const double disc = beta0 * beta0 + 2.0 * slope * big_b;
    return 2.0 * big_b / (beta0 + std::sqrt(disc));
}

}  // namespace

double Schedule::t_of_delta(double delta) const
{
    check_delta(delta);
    double t = 0.0;
    switch (kind_) {
    case ScheduleKind::VE: t = (delta - std::log(p0_)) / std::log(p1_ / p0_); break;
    case ScheduleKind::VP: {
        // lambda^2 = e^B - 1
        const double big_b = std::log1p(std::exp(2.0 * delta));
        t = invert_linear_beta(p0_, p1_, big_b);
        break;
    }
    case ScheduleKind::SubVP: {
        // lambda = 2 sinh(B / 2)
        const double big_b = 2.0 * std::asinh(0.5 * std::exp(delta));
        t = invert_linear_beta(p0_, p1_, big_b);
        break;
    }
    }
    return std::clamp(t, 0.0, 1.0);
}

double Schedule::t_of_delta_bisect(double delta) const
{
    check_delta(delta);
    double lo = 0.0;
    double hi = 1.0;
    // log lambda(0) is -inf for VP/SubVP; the comparison below still works.
    while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        const double value = mid == 0.0 ? delta_lower() : log_lambda(mid);
        if (value < delta)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace lid
