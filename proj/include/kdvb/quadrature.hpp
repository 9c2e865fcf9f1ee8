#pragma once

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

#include <cmath>
#include <exception>
#include <functional>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>

namespace kdvb {

class QuadratureError : public std::runtime_error {
public:
    QuadratureError(const std::string& what, double estimate, double error_bound)
        : std::runtime_error(what), estimate_(estimate), error_bound_(error_bound)
    {
    }
    double estimate() const { return estimate_; }
    double error_bound() const { return error_bound_; }

private:
    double estimate_;
    double error_bound_;
};

struct QuadOptions {
    double abs_tol = 1e-10;
    double rel_tol = 0.0;
    std::size_t max_intervals = 2000;
};

struct QuadResult {
    double value = 0.0;
    double error = 0.0;
};

namespace detail {

struct WorkspaceDeleter {
    void operator()(gsl_integration_workspace* w) const { gsl_integration_workspace_free(w); }
};

// Exceptions must not unwind through GSL's C frames, so failures are parked here.
struct Trampoline {
    const std::function<double(double)>* f;
    std::exception_ptr failure;
    double bad_x = NAN;
};

inline double gsl_trampoline(double x, void* p)
{
    auto* t = static_cast<Trampoline*>(p);
    if (t->failure || std::isfinite(t->bad_x)) return 0.0;
    try {
        const double v = (*t->f)(x);
        if (std::isfinite(v)) return v;
        t->bad_x = x;
    } catch (...) {
        t->failure = std::current_exception();
    }
    return 0.0;
}

inline void disable_gsl_abort()
{
    static const bool once = [] {
        gsl_set_error_handler_off();
        return true;
    }();
    (void)once;
}

} // namespace detail

/**
 * Adaptive Gauss-Kronrod quadrature with epsilon-algorithm extrapolation.
 * Infinite endpoints are accepted; they are mapped to a finite interval.
 * Throws QuadratureError with the best estimate if the tolerance is not met.
 */
inline QuadResult adaptive_quad_detailed(const std::function<double(double)>& f, double a, double b,
                                         const QuadOptions& opt = {})
{
    detail::disable_gsl_abort();
    if (std::isnan(a) || std::isnan(b)) throw std::invalid_argument("adaptive_quad: NaN limit");
    if (a == b) return {};
    if (a > b) {
        QuadResult r = adaptive_quad_detailed(f, b, a, opt);
        r.value = -r.value;
        return r;
    }
    std::unique_ptr<gsl_integration_workspace, detail::WorkspaceDeleter> ws(
        gsl_integration_workspace_alloc(opt.max_intervals));
    gsl_function F;
    F.function = &detail::gsl_trampoline;
    detail::Trampoline tr{&f, nullptr};
    F.params = &tr;

    double value = 0.0, err = 0.0;
    int status;
    const bool lo_inf = std::isinf(a), hi_inf = std::isinf(b);
    if (lo_inf && hi_inf)
        status = gsl_integration_qagi(&F, opt.abs_tol, opt.rel_tol, opt.max_intervals, ws.get(), &value, &err);
    else if (hi_inf)
        status = gsl_integration_qagiu(&F, a, opt.abs_tol, opt.rel_tol, opt.max_intervals, ws.get(), &value, &err);
    else if (lo_inf)
        status = gsl_integration_qagil(&F, b, opt.abs_tol, opt.rel_tol, opt.max_intervals, ws.get(), &value, &err);
    else
        status = gsl_integration_qags(&F, a, b, opt.abs_tol, opt.rel_tol, opt.max_intervals, ws.get(), &value, &err);

    if (tr.failure) std::rethrow_exception(tr.failure);
    if (std::isfinite(tr.bad_x)) {
        std::ostringstream os;
        os << "adaptive_quad: integrand is not finite at x=" << tr.bad_x;
        throw QuadratureError(os.str(), NAN, INFINITY);
    }
    if (status != GSL_SUCCESS) {
        std::ostringstream os;
        os << "adaptive_quad: no convergence on [" << a << ", " << b << "] (" << gsl_strerror(status)
           << "), estimate=" << value << " error_bound=" << err;
        throw QuadratureError(os.str(), value, err);
    }
    return {value, err};
}

inline double adaptive_quad(const std::function<double(double)>& f, double a, double b, double tol = 1e-10)
{
    QuadOptions opt;
    opt.abs_tol = tol;
    return adaptive_quad_detailed(f, a, b, opt).value;
}

} // namespace kdvb
