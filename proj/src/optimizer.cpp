#include "hdrelay/optimizer.hpp"

#include "hdrelay/error.hpp"

#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <memory>
#include <numeric>
#include <random>

namespace hdrelay {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

bool better(double va, const std::vector<double>& xa, double vb, const std::vector<double>& xb) {
    if (va != vb) return va > vb;
    return std::lexicographical_compare(xa.begin(), xa.end(), xb.begin(), xb.end());
}

// Exceptions must not cross the OpenMP region; the first one is rethrown.
template <class Fn>
void parallel_for(long n, Fn&& fn) {
    std::exception_ptr first;
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < n; ++i) {
        try {
            fn(i);
        } catch (...) {
#pragma omp critical(hdrelay_parallel_error)
            if (!first) first = std::current_exception();
        }
    }
    if (first) std::rethrow_exception(first);
}

double safe_eval(const SearchSpec& spec, int branch, std::span<const double> x) {
    const double v = spec.objective(branch, x);
    return std::isnan(v) ? kNegInf : v;
}

struct Best {
    double value = kNegInf;
    std::vector<double> x;
    bool has = false;
    void offer(double v, const std::vector<double>& p) {
        if (!has || better(v, p, value, x)) {
            has = true;
            value = v;
            x = p;
        }
    }
};

struct NmContext {
    const SearchSpec* spec;
    int branch;
    long evals = 0;
    Best best;
};

double nm_objective(const gsl_vector* v, void* params) {
    auto* ctx = static_cast<NmContext*>(params);
    std::vector<double> raw(v->size);
    for (std::size_t i = 0; i < v->size; ++i) raw[i] = gsl_vector_get(v, i);
    const auto x = project(*ctx->spec, raw);
    const double f = safe_eval(*ctx->spec, ctx->branch, x);
    ++ctx->evals;
    ctx->best.offer(f, x);
    return std::isfinite(f) ? -f : 1e30;
}

struct MinimizerDeleter {
    void operator()(gsl_multimin_fminimizer* m) const { gsl_multimin_fminimizer_free(m); }
};
struct VectorDeleter {
    void operator()(gsl_vector* v) const { gsl_vector_free(v); }
};

// Nelder-Mead from `start` with restarts on collapse; never exceeds `budget`
// by more than one simplex iteration.
Best refine(const SearchSpec& spec, int branch, const std::vector<double>& start, double start_value,
            long budget, long& evals_out) {
    const std::size_t n = spec.dims.size();
    NmContext ctx{&spec, branch, 0, {}};
    ctx.best.offer(start_value, start);
    std::unique_ptr<gsl_vector, VectorDeleter> x(gsl_vector_alloc(n));
    std::unique_ptr<gsl_vector, VectorDeleter> step(gsl_vector_alloc(n));
    double scale = 0.2;
    double previous = start_value;
    std::vector<double> origin = start;
    while (ctx.evals < budget) {
        std::unique_ptr<gsl_multimin_fminimizer, MinimizerDeleter> m(
            gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n));
        for (std::size_t i = 0; i < n; ++i) {
            gsl_vector_set(x.get(), i, origin[i]);
            gsl_vector_set(step.get(), i, std::max(1e-6, scale * (spec.dims[i].upper - spec.dims[i].lower)));
        }
        gsl_multimin_function fn{&nm_objective, n, &ctx};
        gsl_multimin_fminimizer_set(m.get(), &fn, x.get(), step.get());
        while (ctx.evals < budget) {
            if (gsl_multimin_fminimizer_iterate(m.get()) != 0) break;
            if (gsl_multimin_fminimizer_size(m.get()) < 1e-9) break;
        }
        const double gain = ctx.best.value - previous;
        if (std::isfinite(previous) && gain <= spec.tolerance * (1.0 + std::abs(previous)) && scale < 0.2) break;
        previous = ctx.best.value;
        origin = ctx.best.x;
        scale *= 0.5;
        if (scale < 1e-4) break;
    }
    evals_out = ctx.evals;
    return ctx.best;
}

}  // namespace

void SearchSpec::validate() const {
    if (!objective) throw ValidationError("search needs an objective");
    if (budget <= 0) throw ValidationError("budget must be positive");
    if (branches < 1) throw ValidationError("need at least one branch");
    for (const auto& d : dims)
        if (!std::isfinite(d.lower) || !std::isfinite(d.upper) || d.lower > d.upper)
            throw ValidationError("search bounds must be finite and ordered");
    std::vector<int> owner(dims.size(), -1);
    for (std::size_t b = 0; b < blocks.size(); ++b)
        for (int i : blocks[b].dims) {
            if (i < 0 || i >= static_cast<int>(dims.size())) throw ValidationError("constraint block index out of range");
            if (owner[i] >= 0) throw ValidationError("dimension appears in two constraint blocks");
            owner[i] = static_cast<int>(b);
            if (blocks[b].type != ConstraintType::Box && (dims[i].lower != 0.0 || dims[i].upper != 1.0))
                throw ValidationError("simplex and sum-capped dimensions must span [0,1]");
        }
    for (const auto& s : seeds)
        if (s.size() != dims.size()) throw ValidationError("seed arity does not match dimensions");
}

std::vector<double> project(const SearchSpec& spec, std::span<const double> x) {
    std::vector<double> out(x.begin(), x.end());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::clamp(out[i], spec.dims[i].lower, spec.dims[i].upper);
    for (const auto& b : spec.blocks) {
        if (b.type == ConstraintType::Box) continue;
        double sum = 0.0;
        for (int i : b.dims) sum += out[i];
        if (b.type == ConstraintType::Simplex) {
            if (sum <= 0.0) {
                for (int i : b.dims) out[i] = 1.0 / static_cast<double>(b.dims.size());
            } else {
                for (int i : b.dims) out[i] /= sum;
            }
        } else if (sum > 1.0) {
            for (int i : b.dims) out[i] /= sum;
        }
    }
    return out;
}

std::vector<std::vector<double>> start_points(const SearchSpec& spec) {
    constexpr std::size_t kMaxStarts = 243;
    const std::size_t n = spec.dims.size();
    std::vector<std::vector<double>> pts;
    for (const auto& s : spec.seeds) pts.push_back(project(spec, s));
    if (n == 0) {
        pts.emplace_back();
        return pts;
    }
    std::size_t grid = 1;
    bool small = true;
    for (std::size_t i = 0; i < n && small; ++i) {
        grid *= 3;
        small = grid <= kMaxStarts;
    }
    if (small) {
        for (std::size_t g = 0; g < grid; ++g) {
            std::vector<double> x(n);
            std::size_t code = g;
            for (std::size_t i = 0; i < n; ++i) {
                const double t = 0.5 * static_cast<double>(code % 3);
                code /= 3;
                x[i] = spec.dims[i].lower + t * (spec.dims[i].upper - spec.dims[i].lower);
            }
            pts.push_back(project(spec, x));
        }
    } else {
        std::mt19937_64 rng(spec.seed);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (std::size_t s = 0; s < kMaxStarts; ++s) {
            std::vector<double> x(n);
            for (std::size_t i = 0; i < n; ++i)
                x[i] = spec.dims[i].lower + u(rng) * (spec.dims[i].upper - spec.dims[i].lower);
            pts.push_back(project(spec, x));
        }
    }
    return pts;
}

std::vector<double> evaluate_batch_serial(const SearchSpec& spec, int branch,
                                          const std::vector<std::vector<double>>& points) {
    std::vector<double> v(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) v[i] = safe_eval(spec, branch, points[i]);
    return v;
}

std::vector<double> evaluate_batch(const SearchSpec& spec, int branch,
                                   const std::vector<std::vector<double>>& points) {
    std::vector<double> v(points.size());
    parallel_for(static_cast<long>(points.size()), [&](long i) { v[i] = safe_eval(spec, branch, points[i]); });
    return v;
}

OptimizeResult optimize_rate(const SearchSpec& spec) {
    spec.validate();
    OptimizeResult result;
    Best overall;
    int overall_branch = 0;

    for (int branch = 0; branch < spec.branches; ++branch) {
        auto pts = start_points(spec);
        if (static_cast<long>(pts.size()) > spec.budget) pts.resize(static_cast<std::size_t>(spec.budget));
        const auto vals = spec.parallel ? evaluate_batch(spec, branch, pts) : evaluate_batch_serial(spec, branch, pts);
        result.trace.evaluations += static_cast<long>(pts.size());
        result.trace.starts += static_cast<int>(pts.size());

        std::vector<std::size_t> order(pts.size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return better(vals[a], pts[a], vals[b], pts[b]); });

        Best branch_best;
        std::vector<std::size_t> chosen;
        for (std::size_t idx : order) {
            if (!std::isfinite(vals[idx])) continue;
            branch_best.offer(vals[idx], pts[idx]);
            if (static_cast<int>(chosen.size()) >= spec.refine_starts) continue;
            bool dup = false;
            for (std::size_t c : chosen) dup = dup || pts[c] == pts[idx];
            if (!dup) chosen.push_back(idx);
        }

        const long remaining = spec.budget - static_cast<long>(pts.size());
        if (!spec.dims.empty() && !chosen.empty() && remaining > 0) {
            const long each = remaining / static_cast<long>(chosen.size());
            std::vector<Best> refined(chosen.size());
            std::vector<long> used(chosen.size(), 0);
            const auto nc = static_cast<long>(chosen.size());
            if (each > 0) {
                auto one = [&](long c) {
                    refined[c] = refine(spec, branch, pts[chosen[c]], vals[chosen[c]], each, used[c]);
                };
                if (spec.parallel) {
                    parallel_for(nc, one);
                } else {
                    for (long c = 0; c < nc; ++c) one(c);
                }
            }
            for (std::size_t c = 0; c < chosen.size(); ++c) {
                if (refined[c].has) branch_best.offer(refined[c].value, refined[c].x);
                result.trace.evaluations += used[c];
            }
            result.trace.refinements += static_cast<int>(chosen.size());
        }

        if (std::isfinite(branch_best.value) && (!overall.has || branch_best.value > overall.value)) {
            overall = branch_best;
            overall_branch = branch;
        }
    }
    if (!std::isfinite(overall.value)) throw InfeasibleError("no feasible parameter point found for " + spec.label);
    result.best = overall.value;
    result.params = overall.x;
    result.branch = overall_branch;
    return result;
}

}  // namespace hdrelay
