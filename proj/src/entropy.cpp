#include "hdrelay/entropy.hpp"

#include "hdrelay/error.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <memory>

namespace hdrelay {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kLn2 = std::numbers::ln2;

double gaussian_entropy(double variance) { return std::log2(kPi * std::numbers::e * variance); }

struct Scaled {
    std::vector<double> logc;  // ln(a_j / (pi v_j))
    std::vector<double> inv;   // 1 / v_j
};

double log_density(const Scaled& s, double y) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < s.inv.size(); ++j) mx = std::max(mx, s.logc[j] - y * s.inv[j]);
    double acc = 0.0;
    for (std::size_t j = 0; j < s.inv.size(); ++j) acc += std::exp(s.logc[j] - y * s.inv[j] - mx);
    return mx + std::log(acc);
}

struct WorkspaceDeleter {
    void operator()(gsl_integration_workspace* w) const { gsl_integration_workspace_free(w); }
};

// GSL reports failures through return codes only.
void quiet_gsl() {
    static const bool once = [] {
        gsl_set_error_handler_off();
        return true;
    }();
    (void)once;
}

}  // namespace

void MixtureSpec::validate() const {
    if (components.empty()) throw ValidationError("mixture needs at least one component");
    double sum = 0.0;
    for (const auto& c : components) {
        if (!(c.weight >= 0.0)) throw ValidationError("mixture weight must be >= 0");
        if (!(c.variance > 0.0) || !std::isfinite(c.variance))
            throw ValidationError("mixture variance must be positive");
        sum += c.weight;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw ValidationError("mixture weights must sum to one");
}

double mixture_entropy(const MixtureSpec& mix) {
    mix.validate();
    std::vector<MixtureComponent> comp;
    double wsum = 0.0;
    for (const auto& c : mix.components)
        if (c.weight >= 1e-15) {
            comp.push_back(c);
            wsum += c.weight;
        }
    double vmax = 0.0, vmin = std::numeric_limits<double>::infinity();
    for (auto& c : comp) {
        c.weight /= wsum;
        vmax = std::max(vmax, c.variance);
        vmin = std::min(vmin, c.variance);
    }
    if (vmax - vmin <= 1e-13 * vmax) {
        double mean = 0.0;
        for (const auto& c : comp) mean += c.weight * c.variance;
        return gaussian_entropy(mean);
    }

    // Work in units of the largest variance.
    Scaled s;
    double A = 0.0, top_weight = 0.0;
    std::vector<double> breaks{0.0};
    for (const auto& c : comp) {
        const double v = c.variance / vmax;
        s.logc.push_back(std::log(c.weight / (kPi * v)));
        s.inv.push_back(1.0 / v);
        A += c.weight / (kPi * v);
        if (v >= 1.0 - 1e-13) top_weight += c.weight;
        breaks.push_back(v);
    }
    // Tail beyond Y: density <= A e^{-y}, -ln p <= y + ln(pi / top_weight).
    const double c0 = std::max(0.0, std::log(kPi / top_weight));
    double ymax = 8.0;
    while (kPi * A * std::exp(-ymax) * (ymax + 1.0 + c0) / kLn2 >= 1e-12 || A * std::exp(-ymax) > 0.3)
        ymax += 1.0;
    for (double b = 4.0; b < ymax; b *= 4.0) breaks.push_back(b);
    breaks.push_back(ymax);
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end(),
                             [](double a, double b) { return std::abs(a - b) < 1e-14; }),
                 breaks.end());

    struct Params {
        const Scaled* s;
    } params{&s};
    gsl_function fn;
    fn.function = [](double y, void* raw) {
        const double lp = log_density(*static_cast<Params*>(raw)->s, y);
        return -kPi * std::exp(lp) * lp / kLn2;
    };
    fn.params = &params;
    quiet_gsl();
    constexpr std::size_t kLimit = 200;
    std::unique_ptr<gsl_integration_workspace, WorkspaceDeleter> ws(gsl_integration_workspace_alloc(kLimit));
    double total = 0.0, err_total = 0.0;
    bool ok = true;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        double v = 0.0, err = 0.0;
        const int status = gsl_integration_qag(&fn, breaks[i], breaks[i + 1], 1e-13, 1e-11, kLimit,
                                               GSL_INTEG_GAUSS15, ws.get(), &v, &err);
        ok = ok && (status == GSL_SUCCESS || err < 1e-11);
        total += v;
        err_total += err;
    }
    if (!ok || !(err_total < 1e-9) || !std::isfinite(total))
        throw QuadratureError("mixture entropy quadrature did not converge", err_total);
    return total + std::log2(vmax);
}

double q_mutual(int level, int sender, int receiver, NodeMask known, const StateDistribution& dist,
                const VarianceFn& variance) {
    if (level < 1) throw ValidationError("level must be >= 1");
    if (receiver == sender) throw ValidationError("receiver cannot be the sender");
    if (dist.knowledge_mode == KnowledgeMode::FixedSchedule) known = node_range(0, dist.num_relays);

    struct Entry {
        StateVector m;
        double p;
        double before;
        double after;
    };
    std::map<NodeMask, std::vector<Entry>> groups;
    for (std::size_t i = 0; i < dist.pmf.size(); ++i) {
        const double p = dist.pmf[i];
        const StateVector m = dist.state(i);
        if (p <= 0.0 || m.transmits(receiver)) continue;
        const auto b = variance(m, 0);
        const auto a = variance(m, 1);
        if (!b || !a) throw ValidationError("variance provider returned no output for a listening receiver");
        groups[m.mask() & known].push_back({m, p, *b, *a});
    }

    auto entropy_of = [](const std::vector<Entry>& es, bool after) {
        double mass = 0.0;
        for (const auto& e : es) mass += e.p;
        MixtureSpec mix;
        for (const auto& e : es) mix.components.push_back({e.p / mass, after ? e.after : e.before});
        // guard the 1e-12 sum check against rounding in the normalisation
        double s = 0.0;
        for (const auto& c : mix.components) s += c.weight;
        for (auto& c : mix.components) c.weight /= s;
        return mixture_entropy(mix);
    };

    double q = 0.0;
    for (const auto& [key, es] : groups) {
        double mass = 0.0;
        for (const auto& e : es) mass += e.p;
        if (es.size() == 1) {
            q += mass * std::log2(es[0].before / es[0].after);
            continue;
        }
        const double h0 = entropy_of(es, false);
        double h1 = 0.0;
        const bool sender_known = ((known >> sender) & 1u) != 0;
        if (level == 1 && !sender_known) {
            std::vector<Entry> on, off;
            for (const auto& e : es) (e.m.transmits(sender) ? on : off).push_back(e);
            for (const auto* part : {&on, &off}) {
                if (part->empty()) continue;
                double pm = 0.0;
                for (const auto& e : *part) pm += e.p;
                h1 += pm / mass * entropy_of(*part, true);
            }
        } else {
            h1 = entropy_of(es, true);
        }
        q += mass * (h0 - h1);
    }
    return q;
}

}  // namespace hdrelay
