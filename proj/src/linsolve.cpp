#include "chy/linsolve.hpp"

#include <cmath>

#include "chy/fft.hpp"
#include "chy/util.hpp"

namespace chy {

double dot_plain(const ScalarField& a, const ScalarField& b) {
    std::vector<double> prod(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) prod[i] = a.v[i] * b.v[i];
    return pairwise_sum(prod);
}

namespace {
double norm_plain(const ScalarField& a) { return std::sqrt(dot_plain(a, a)); }
} // namespace

KrylovResult conjugate_gradient(const FieldOp& apply, const FieldOp& precond, const ScalarField& b,
                                ScalarField& x, double rel_tol, int max_iter) {
    KrylovResult res;
    const double bnorm = norm_plain(b);
    if (bnorm == 0.0) {
        x = ScalarField(b.chart);
        res.converged = true;
        return res;
    }
    ScalarField r = b;
    ScalarField ax = apply(x);
    for (std::size_t i = 0; i < r.size(); ++i) r.v[i] -= ax.v[i];
    ScalarField z = precond(r);
    ScalarField p = z;
    double rz = dot_plain(r, z);
    for (int it = 0; it < max_iter; ++it) {
        ScalarField q = apply(p);
        double pq = dot_plain(p, q);
        if (pq == 0.0) break;
        double alpha = rz / pq;
        for (std::size_t i = 0; i < x.size(); ++i) {
            x.v[i] += alpha * p.v[i];
            r.v[i] -= alpha * q.v[i];
        }
        res.iterations = it + 1;
        res.residual = norm_plain(r) / bnorm;
        if (res.residual < rel_tol) {
            res.converged = true;
            return res;
        }
        z = precond(r);
        double rz_new = dot_plain(r, z);
        double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < p.size(); ++i) p.v[i] = z.v[i] + beta * p.v[i];
    }
    return res;
}

KrylovResult bicgstab(const FieldOp& apply, const FieldOp& precond, const ScalarField& b, ScalarField& x,
                      double rel_tol, int max_iter) {
    KrylovResult res;
    const double bnorm = norm_plain(b);
    if (bnorm == 0.0) {
        x = ScalarField(b.chart);
        res.converged = true;
        return res;
    }
    ScalarField r = b;
    ScalarField ax = apply(x);
    for (std::size_t i = 0; i < r.size(); ++i) r.v[i] -= ax.v[i];
    ScalarField rhat = r;
    double rho = 1.0, alpha = 1.0, omega = 1.0;
    ScalarField v(b.chart), p(b.chart);
    for (int it = 0; it < max_iter; ++it) {
        double rho_new = dot_plain(rhat, r);
        if (rho_new == 0.0) break;
        if (it == 0) {
            p = r;
        } else {
            double beta = (rho_new / rho) * (alpha / omega);
            for (std::size_t i = 0; i < p.size(); ++i) p.v[i] = r.v[i] + beta * (p.v[i] - omega * v.v[i]);
        }
        rho = rho_new;
        ScalarField phat = precond(p);
        v = apply(phat);
        double rv = dot_plain(rhat, v);
        if (rv == 0.0) break;
        alpha = rho / rv;
        ScalarField s = r;
        for (std::size_t i = 0; i < s.size(); ++i) s.v[i] -= alpha * v.v[i];
        if (norm_plain(s) / bnorm < rel_tol) {
            for (std::size_t i = 0; i < x.size(); ++i) x.v[i] += alpha * phat.v[i];
            res.iterations = it + 1;
            res.residual = norm_plain(s) / bnorm;
            res.converged = true;
            return res;
        }
        ScalarField shat = precond(s);
        ScalarField t = apply(shat);
        double tt = dot_plain(t, t);
        if (tt == 0.0) break;
        omega = dot_plain(t, s) / tt;
        for (std::size_t i = 0; i < x.size(); ++i) x.v[i] += alpha * phat.v[i] + omega * shat.v[i];
        for (std::size_t i = 0; i < r.size(); ++i) r.v[i] = s.v[i] - omega * t.v[i];
        res.iterations = it + 1;
        res.residual = norm_plain(r) / bnorm;
        if (res.residual < rel_tol) {
            res.converged = true;
            return res;
        }
        if (omega == 0.0) break;
    }
    return res;
}

std::vector<double> inverse_shifted_symbol(const GridChart& chart, double scale, double shift) {
    std::vector<double> sym = flat_chern_symbol(chart);
    for (double& s : sym) s = 1.0 / (scale * s + shift);
    return sym;
}

} // namespace chy
