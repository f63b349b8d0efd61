#include "hdrelay/protocols.hpp"

#include "hdrelay/error.hpp"
#include "hdrelay/lp.hpp"
#include "hdrelay/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace hdrelay {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

const std::vector<std::pair<Protocol, std::string>>& protocol_table() {
    static const std::vector<std::pair<Protocol, std::string>> t{
        {Protocol::SingleHop, "single-hop"}, {Protocol::DF, "df"},       {Protocol::PDF, "pdf"},
        {Protocol::DFNoReuse, "df-noreuse"}, {Protocol::CF, "cf"},       {Protocol::Combined, "combined"},
        {Protocol::Cutset, "cutset"}};
    return t;
}

std::vector<std::uint32_t> allowed_states(int n, int reuse_k) {
    std::vector<std::uint32_t> out;
    const int cap = reuse_cap(n, reuse_k);
    for (std::size_t s = 0; s < num_states(n); ++s)
        if (StateVector(n, static_cast<std::uint32_t>(s)).num_transmitters() <= cap) out.push_back(static_cast<std::uint32_t>(s));
    return out;
}

StateDistribution make_dist(int n, std::vector<double> pmf, KnowledgeMode mode, std::optional<int> reuse) {
    StateDistribution d;
    d.num_relays = n;
    double sum = 0.0;
    for (double& p : pmf) {
        p = std::max(0.0, p);
        sum += p;
    }
    for (double& p : pmf) p /= sum;
    d.pmf = std::move(pmf);
    d.knowledge_mode = mode;
    d.reuse_factor = reuse;
    return d;
}

// Power-fraction parameters of the DF search.
struct DfParams {
    struct Entry {
        int sender, origin, level;
    };
    int n = 0;
    int levels = 1;
    std::vector<Entry> entries;
    std::vector<ConstraintBlock> blocks;

    DfParams(int num_relays, int num_levels) : n(num_relays), levels(num_levels) {
        const auto layout = df_messages(n, levels);
        for (int sender = 0; sender <= n; ++sender) {
            ConstraintBlock b{ConstraintType::SumCapped, {}};
            for (const auto& m : layout) {
                const bool carries = m.kind == MessageKind::SourceLevel
                                         ? sender == kSource
                                         : (sender == kSource || (m.level <= sender && sender <= m.origin));
                if (!carries) continue;
                b.dims.push_back(static_cast<int>(entries.size()));
                entries.push_back({sender, m.kind == MessageKind::SourceLevel ? 0 : m.origin, m.level});
            }
            blocks.push_back(std::move(b));
        }
    }

    std::size_t size() const { return entries.size(); }

    PowerAllocation alloc(std::span<const double> x) const {
        PowerAllocation a(n);
        for (std::size_t i = 0; i < entries.size(); ++i) a.set_nu(entries[i].sender, entries[i].origin, entries[i].level, x[i]);
        return a;
    }

    std::vector<double> encode(const PowerAllocation& a) const {
        std::vector<double> x;
        for (const auto& e : entries) x.push_back(a.nu(e.sender, e.origin, e.level));
        return x;
    }

    // Every node spends everything on the first level of its own stack.
    std::vector<double> own_message_seed() const {
        std::vector<double> x(entries.size(), 0.0);
        for (std::size_t i = 0; i < entries.size(); ++i) {
            const auto& e = entries[i];
            if (e.level == 1 && e.origin == e.sender) x[i] = 1.0;
        }
        return x;
    }

    std::vector<double> even_seed() const {
        std::vector<double> x(entries.size(), 0.0);
        for (const auto& b : blocks)
            for (int i : b.dims) x[i] = 1.0 / static_cast<double>(b.dims.size());
        return x;
    }
};

std::vector<Dim> unit_dims(std::size_t n) { return std::vector<Dim>(n, Dim{0.0, 1.0}); }

NetworkConfig with_order(const NetworkConfig& config, const std::vector<int>& order) {
    NetworkConfig c = config;
    // `order` is expressed relative to the caller's numbering
    for (std::size_t i = 0; i < order.size(); ++i) c.relay_order[i] = config.relay_order[order[i] - 1];
    return c;
}

}  // namespace

std::string describe_schedule(const StateDistribution& d) {
    std::ostringstream os;
    bool first = true;
    for (std::size_t s = 0; s < d.pmf.size(); ++s) {
        if (d.pmf[s] <= 1e-9) continue;
        if (!first) os << ' ';
        first = false;
        os << d.state(s).to_string() << '=' << d.pmf[s];
    }
    return os.str();
}


std::string to_string(Protocol p) {
    for (const auto& [k, v] : protocol_table())
        if (k == p) return v;
    return "?";
}

const std::vector<std::string>& protocol_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> n;
        for (const auto& e : protocol_table()) n.push_back(e.second);
        return n;
    }();
    return names;
}

Protocol parse_protocol(const std::string& name) {
    for (const auto& [k, v] : protocol_table())
        if (v == name) return k;
    std::string valid;
    for (const auto& n : protocol_names()) valid += (valid.empty() ? "" : ", ") + n;
    throw ValidationError("unknown protocol '" + name + "' (valid: " + valid + ")");
}

std::vector<std::vector<int>> relay_orders(int num_relays) {
    std::vector<int> p(num_relays);
    std::iota(p.begin(), p.end(), 1);
    std::vector<std::vector<int>> out{p};
    if (num_relays > 3) return out;
    while (std::next_permutation(p.begin(), p.end())) out.push_back(p);
    return out;
}

ScheduleSolution maximin_schedule(const Eigen::MatrixXd& coeff, const std::vector<int>& row_group, int groups,
                                  const std::vector<std::uint32_t>& allowed) {
    const auto ns = static_cast<Eigen::Index>(allowed.size());
    const Eigen::Index rows = coeff.rows();
    LinearProgram lp;
    lp.c = Eigen::VectorXd::Zero(ns + groups);
    lp.c.tail(groups).setOnes();
    lp.a_ub = Eigen::MatrixXd::Zero(rows, ns + groups);
    lp.b_ub = Eigen::VectorXd::Zero(rows);
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index s = 0; s < ns; ++s) lp.a_ub(r, s) = -coeff(r, allowed[s]);
        lp.a_ub(r, ns + row_group[r]) = 1.0;
    }
    lp.a_eq = Eigen::MatrixXd::Zero(1, ns + groups);
    lp.a_eq.row(0).head(ns).setOnes();
    lp.b_eq = Eigen::VectorXd::Ones(1);
    const auto sol = solve_lp(lp);
    if (!sol.feasible || !sol.bounded) throw NumericalError("schedule program failed");
    ScheduleSolution out;
    out.pmf.assign(static_cast<std::size_t>(coeff.cols()), 0.0);
    for (Eigen::Index s = 0; s < ns; ++s) out.pmf[allowed[s]] = sol.x(s);
    out.value = sol.value;
    return out;
}

ProtocolResult single_hop_rate(const NetworkConfig& config, bool normalized) {
    config.validate();
    const Eigen::MatrixXd h = build_gains(config);
    const int d = config.destination();
    const double p = config.power(kSource) * (normalized ? config.num_relays + 1 : 1);
    ProtocolResult r;
    r.rate = std::log2(1.0 + p * h(kSource, d) * h(kSource, d) / config.noise(d));
    r.breakdown.per_level = {r.rate};
    r.breakdown.total = r.rate;
    r.breakdown.binding = {{1, d}};
    r.binding = "direct";
    r.evaluations = 1;
    return r;
}

ProtocolResult optimize_df(const NetworkConfig& config, int num_levels, int reuse_k, const SearchOptions& opt) {
    config.validate();
    const int n = config.num_relays;
    if (reuse_k < 1 || reuse_k > n + 1) throw ValidationError("reuse factor must be in [1, N+1]");
    const DfParams params(n, num_levels);
    const auto orders = relay_orders(n);
    const auto allowed = allowed_states(n, reuse_k);
    const std::optional<int> reuse = reuse_k > 1 ? std::optional<int>(reuse_k) : std::nullopt;

    std::vector<int> group;
    auto fixed_value = [&](const NetworkConfig& c, const PowerAllocation& a) {
        const auto cm = df_cut_matrix(c, a, num_levels);
        std::vector<int> g;
        for (const auto& cut : cm.cuts) g.push_back(cut.level - 1);
        return maximin_schedule(cm.coeff, g, num_levels, allowed);
    };

    ProtocolResult best;
    best.rate = kNegInf;
    long evals = 0;

    // Fixed schedule search (also the seed for the random one).
    SearchSpec fixed;
    fixed.label = "df-fixed";
    fixed.dims = unit_dims(params.size());
    fixed.blocks = params.blocks;
    fixed.branches = static_cast<int>(orders.size());
    fixed.budget = opt.budget;
    fixed.seed = opt.seed;
    fixed.parallel = opt.parallel;
    fixed.seeds = {params.own_message_seed(), params.even_seed()};
    if (num_levels > 1) {
        SearchOptions single = opt;
        single.schedule = KnowledgeMode::FixedSchedule;
        const auto base = optimize_df(config, 1, reuse_k, single);
        evals += base.evaluations;
        fixed.seeds.push_back(params.encode(*base.alloc));
    }
    fixed.objective = [&](int branch, std::span<const double> x) {
        return fixed_value(with_order(config, orders[branch]), params.alloc(x)).value;
    };
    const auto fr = optimize_rate(fixed);
    evals += fr.trace.evaluations;
    {
        const NetworkConfig c = with_order(config, orders[fr.branch]);
        const auto alloc = params.alloc(fr.params);
        const auto sched = fixed_value(c, alloc);
        const auto dist = make_dist(n, sched.pmf, KnowledgeMode::FixedSchedule, reuse);
        best.breakdown = df_rate(c, alloc, dist, num_levels);
        best.rate = best.breakdown.total;
        best.relay_order = c.relay_order;
        best.state_dist = dist;
        best.alloc = alloc;
        best.schedule = KnowledgeMode::FixedSchedule;
    }

    if (opt.schedule == KnowledgeMode::RandomAccess) {
        SearchSpec rnd;
        rnd.label = "df-random";
        rnd.dims = unit_dims(params.size() + allowed.size());
        rnd.blocks = params.blocks;
        ConstraintBlock simplex{ConstraintType::Simplex, {}};
        for (std::size_t i = 0; i < allowed.size(); ++i) simplex.dims.push_back(static_cast<int>(params.size() + i));
        rnd.blocks.push_back(simplex);
        rnd.branches = static_cast<int>(orders.size());
        rnd.budget = opt.budget;
        rnd.seed = opt.seed + 1;
        rnd.parallel = opt.parallel;
        std::vector<double> seed = params.encode(*best.alloc);
        for (auto s : allowed) seed.push_back(best.state_dist->pmf[s]);
        rnd.seeds = {seed};
        if (num_levels > 1) {
            const auto base = optimize_df(config, 1, reuse_k, opt);
            evals += base.evaluations;
            std::vector<double> s1 = params.encode(*base.alloc);
            for (auto s : allowed) s1.push_back(base.state_dist->pmf[s]);
            rnd.seeds.push_back(std::move(s1));
        }
        auto decode = [&](std::span<const double> x) {
            std::vector<double> pmf(num_states(n), 0.0);
            for (std::size_t i = 0; i < allowed.size(); ++i) pmf[allowed[i]] = x[params.size() + i];
            return make_dist(n, pmf, KnowledgeMode::RandomAccess, reuse);
        };
        rnd.objective = [&](int branch, std::span<const double> x) {
            try {
                return df_rate(with_order(config, orders[branch]), params.alloc(x.first(params.size())), decode(x),
                               num_levels)
                    .total;
            } catch (const QuadratureError&) {
                return kNegInf;
            }
        };
        const auto rr = optimize_rate(rnd);
        evals += rr.trace.evaluations;
        const NetworkConfig c = with_order(config, orders[rr.branch]);
        const auto alloc = params.alloc(std::span<const double>(rr.params).first(params.size()));
        const auto dist = decode(rr.params);
        const auto rb = df_rate(c, alloc, dist, num_levels);
        if (rb.total > best.rate) {
            best.breakdown = rb;
            best.rate = rb.total;
            best.relay_order = c.relay_order;
            best.state_dist = dist;
            best.alloc = alloc;
            best.schedule = KnowledgeMode::RandomAccess;
        }
    }
    best.binding = best.breakdown.binding_label();
    best.evaluations = evals;
    return best;
}

namespace {

// log10(nhat / source_scale); the top of the range switches the relay off
constexpr double kLogNoiseLow = -6.0;
constexpr double kLogNoiseOff = 3.0;

struct CfPoint {
    PowerAllocation alloc;
    QuantizationParams quant;
};

// Independent of the omegas so that one relay's power does not move the
// other relay's noise coordinate.
double source_scale(const NetworkConfig& c, int relay) {
    PowerAllocation src_only(c.num_relays);
    src_only.set_nu(kSource, kSource, 1, 1.0);
    return cf_noise_scale(c, src_only, relay);
}

CfPoint cf_point(const NetworkConfig& c, std::span<const double> x) {
    const int n = c.num_relays;
    CfPoint pt{PowerAllocation(n), QuantizationParams::all_off(n)};
    pt.alloc.set_nu(kSource, kSource, 1, 1.0);
    for (int l = 1; l <= n; ++l) pt.alloc.set_omega(l, x[l - 1]);
    for (int l = 1; l <= n; ++l) {
        const double e = x[n + l - 1];
        if (e < kLogNoiseOff - 1e-12) pt.quant.nhat[l - 1] = std::pow(10.0, e) * source_scale(c, l);
    }
    return pt;
}

struct CfSchedule {
    double value = kNegInf;
    std::vector<double> pmf;
};

CfSchedule cf_schedule(const NetworkConfig& c, const CfPoint& pt) {
    const auto co = cf_state_coefficients(c, pt.alloc, pt.quant);
    const auto ns = co.rate.size();
    LinearProgram lp;
    lp.c = co.rate;
    lp.a_ub = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(co.constraint.size()), ns);
    lp.b_ub = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(co.constraint.size()));
    for (std::size_t i = 0; i < co.constraint.size(); ++i) lp.a_ub.row(static_cast<Eigen::Index>(i)) = co.constraint[i].transpose();
    lp.a_eq = Eigen::MatrixXd::Ones(1, ns);
    lp.b_eq = Eigen::VectorXd::Ones(1);
    const auto sol = solve_lp(lp);
    CfSchedule out;
    if (!sol.feasible || !sol.bounded) return out;
    out.value = sol.value;
    out.pmf.assign(sol.x.data(), sol.x.data() + sol.x.size());
    return out;
}

}  // namespace

ProtocolResult optimize_cf(const NetworkConfig& config, const SearchOptions& opt) {
    config.validate();
    const int n = config.num_relays;
    if (n == 0) return single_hop_rate(config, false);
    const auto orders = relay_orders(n);

    SearchSpec spec;
    spec.label = "cf";
    spec.dims.assign(n, Dim{0.0, 1.0});
    spec.dims.resize(2 * n, Dim{kLogNoiseLow, kLogNoiseOff});
    spec.branches = static_cast<int>(orders.size());
    spec.budget = opt.budget;
    spec.seed = opt.seed;
    spec.parallel = opt.parallel;
    std::vector<double> off(2 * n, 1.0), mid(2 * n, 1.0);
    for (int l = 0; l < n; ++l) {
        off[n + l] = kLogNoiseOff;
        mid[n + l] = 0.0;
    }
    spec.seeds = {off, mid};
    // quantization noise at the relay noise level, per relay order
    for (const auto& order : orders) {
        const NetworkConfig c = with_order(config, order);
        std::vector<double> at_noise(2 * n, 1.0);
        for (int l = 1; l <= n; ++l)
            at_noise[n + l - 1] = std::clamp(std::log10(c.noise(l) / source_scale(c, l)), kLogNoiseLow, kLogNoiseOff);
        spec.seeds.push_back(std::move(at_noise));
    }
    spec.objective = [&](int branch, std::span<const double> x) {
        const NetworkConfig c = with_order(config, orders[branch]);
        return cf_schedule(c, cf_point(c, x)).value;
    };
    const auto res = optimize_rate(spec);

    // Polish: alternate exact quantization noise and schedule.
    const NetworkConfig c = with_order(config, orders[res.branch]);
    CfPoint pt = cf_point(c, res.params);
    CfSchedule sched = cf_schedule(c, pt);
    StateDistribution dist = make_dist(n, sched.pmf, KnowledgeMode::FixedSchedule, std::nullopt);
    double rate = cf_rate(c, pt.alloc, pt.quant, dist);
    for (int it = 0; it < 8; ++it) {
        CfPoint trial = pt;
        trial.quant = solve_quantization_noise(c, pt.alloc, dist);
        const double r_solved = cf_rate(c, trial.alloc, trial.quant, dist);
        const CfSchedule s2 = cf_schedule(c, trial);
        if (s2.value <= rate + 1e-12 && r_solved <= rate + 1e-12) break;
        pt = trial;
        if (s2.value >= r_solved) {
            sched = s2;
            dist = make_dist(n, sched.pmf, KnowledgeMode::FixedSchedule, std::nullopt);
        }
        rate = cf_rate(c, pt.alloc, pt.quant, dist);
    }

    ProtocolResult out;
    out.rate = rate;
    out.breakdown.per_level = {rate};
    out.breakdown.total = rate;
    out.breakdown.binding = {{1, c.destination()}};
    std::string b;
    for (int l = 1; l <= n; ++l)
        if (!pt.quant.off(l)) b += (b.empty() ? "q" : ";q") + std::to_string(c.relay_order[l - 1]);
    out.binding = b.empty() ? "direct" : b;
    out.evaluations = res.trace.evaluations;
    out.relay_order = c.relay_order;
    out.state_dist = dist;
    out.alloc = pt.alloc;
    out.quant = pt.quant;
    return out;
}

ProtocolResult optimize_combined(const NetworkConfig& config, const SearchOptions& opt) {
    config.validate();
    if (config.num_relays != 2) throw ValidationError("combined protocol needs exactly two relays");
    const auto orders = relay_orders(2);
    auto decode = [](int branch, std::span<const double> x) {
        CombinedParams p;
        p.p1 = x[0];
        p.p2 = 1.0 - x[0];
        p.nu_s_s1 = x[1];
        p.nu_s_s2 = x[2];
        p.nu_s_11 = x[3];
        p.nu_1_11 = x[4];
        p.omega_2 = x[5];
        p.decode_interference = branch % 2 == 0;
        return p;
    };
    SearchSpec spec;
    spec.label = "combined";
    spec.dims = unit_dims(6);
    spec.blocks = {{ConstraintType::SumCapped, {2, 3}}};
    spec.branches = 2 * static_cast<int>(orders.size());
    spec.budget = opt.budget;
    spec.seed = opt.seed;
    spec.parallel = opt.parallel;
    spec.seeds = {{0.5, 1.0, 0.5, 0.5, 1.0, 1.0}, {0.5, 1.0, 0.0, 1.0, 1.0, 0.0}, {0.5, 1.0, 1.0, 0.0, 1.0, 1.0}};
    spec.objective = [&](int branch, std::span<const double> x) {
        return combined_rate(with_order(config, orders[branch / 2]), decode(branch, x)).total;
    };
    const auto res = optimize_rate(spec);
    const NetworkConfig c = with_order(config, orders[res.branch / 2]);
    CombinedParams p = decode(res.branch, res.params);
    p.nhat_2 = quantization_feasibility(c, p).nhat_lower;

    ProtocolResult out;
    out.breakdown = combined_rate(c, p);
    out.rate = out.breakdown.total;
    out.binding = out.breakdown.binding_label() + (p.decode_interference ? ";dec" : ";nodec");
    out.evaluations = res.trace.evaluations;
    out.relay_order = c.relay_order;
    out.combined = p;
    return out;
}

namespace {

struct PairIndex {
    std::size_t state;
    int a, b;
};

std::vector<PairIndex> correlation_pairs(int n) {
    std::vector<PairIndex> out;
    for (std::size_t s = 0; s < num_states(n); ++s) {
        const StateVector m(n, static_cast<std::uint32_t>(s));
        for (int a = 0; a <= n; ++a)
            for (int b = a + 1; b <= n; ++b)
                if (m.transmits(a) && m.transmits(b)) out.push_back({s, a, b});
    }
    return out;
}

}  // namespace

ProtocolResult optimize_cutset(const NetworkConfig& config, const SearchOptions& opt) {
    config.validate();
    const int n = config.num_relays;
    const auto cuts = cutset_cuts(n);
    const std::vector<int> group(cuts.size(), 0);
    std::vector<std::uint32_t> all(num_states(n));
    std::iota(all.begin(), all.end(), 0u);

    InputCorrelations corr;
    long evals = 1;
    if (config.combining == Combining::Coherent) {
        const auto pairs = correlation_pairs(n);
        auto build = [&](std::span<const double> x) {
            InputCorrelations c;
            c.per_state.assign(num_states(n), Eigen::MatrixXd::Identity(n + 1, n + 1));
            for (std::size_t i = 0; i < pairs.size(); ++i) {
                c.per_state[pairs[i].state](pairs[i].a, pairs[i].b) = x[i];
                c.per_state[pairs[i].state](pairs[i].b, pairs[i].a) = x[i];
            }
            return c;
        };
        if (!pairs.empty()) {
            SearchSpec spec;
            spec.label = "cutset";
            spec.dims = unit_dims(pairs.size());
            spec.budget = opt.budget;
            spec.seed = opt.seed;
            spec.parallel = opt.parallel;
            spec.seeds = {std::vector<double>(pairs.size(), 0.0), std::vector<double>(pairs.size(), 1.0)};
            spec.objective = [&](int, std::span<const double> x) {
                const auto c = build(x);
                try {
                    c.validate(n);
                } catch (const ValidationError&) {
                    return kNegInf;
                }
                return maximin_schedule(cutset_coefficients(config, c), group, 1, all).value;
            };
            const auto res = optimize_rate(spec);
            corr = build(res.params);
            evals = res.trace.evaluations;
        }
    }
    const auto sched = maximin_schedule(cutset_coefficients(config, corr), group, 1, all);
    const auto dist = make_dist(n, sched.pmf, KnowledgeMode::FixedSchedule, std::nullopt);
    const auto v = cutset_bound(config, dist, corr);

    ProtocolResult out;
    out.rate = v.bits;
    out.breakdown.per_level = {v.bits};
    out.breakdown.total = v.bits;
    out.breakdown.binding = {{1, config.destination()}};
    std::string s = "S={s";
    for (int j = 1; j <= n; ++j)
        if ((v.binding >> j) & 1u) s += "," + std::to_string(j);
    out.binding = s + "}";
    out.evaluations = evals;
    out.state_dist = dist;
    out.relay_order = config.relay_order;
    return out;
}

ProtocolResult run_protocol(Protocol protocol, const NetworkConfig& config, const SearchOptions& opt) {
    const int n = config.num_relays;
    ProtocolResult r;
    switch (protocol) {
        case Protocol::SingleHop: r = single_hop_rate(config, opt.normalize_power); break;
        case Protocol::DF: r = n == 0 ? single_hop_rate(config, false) : optimize_df(config, 1, 1, opt); break;
        case Protocol::PDF: r = n == 0 ? single_hop_rate(config, false) : optimize_df(config, n + 1, 1, opt); break;
        case Protocol::DFNoReuse:
            r = n == 0 ? single_hop_rate(config, false) : optimize_df(config, 1, n + 1, opt);
            break;
        case Protocol::CF: r = optimize_cf(config, opt); break;
        case Protocol::Combined: r = optimize_combined(config, opt); break;
        case Protocol::Cutset: r = optimize_cutset(config, opt); break;
    }
    return r;
}

}  // namespace hdrelay
