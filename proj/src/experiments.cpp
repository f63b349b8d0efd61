#include "hdrelay/experiments.hpp"

#include "hdrelay/error.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace hdrelay {

namespace {

const std::array<std::pair<SweepKind, const char*>, 5> kKinds{{
    {SweepKind::TwoRelayDistance, "TwoRelayDistance"},
    {SweepKind::SingleRelayDistance, "SingleRelayDistance"},
    {SweepKind::RelayCount, "RelayCount"},
    {SweepKind::PathLoss, "PathLoss"},
    {SweepKind::SinglePoint, "SinglePoint"},
}};

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string shortest(double v) {
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

double parse_double(const std::string& s, const std::string& what) {
    double v = 0.0;
    const auto* b = s.data();
    const auto* e = s.data() + s.size();
    const auto res = std::from_chars(b, e, v);
    if (res.ec != std::errc() || res.ptr != e) throw ValidationError(what + ": not a number: '" + s + "'");
    return v;
}

long long parse_int(const std::string& s, const std::string& what) {
    long long v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw ValidationError(what + ": not an integer: '" + s + "'");
    return v;
}

bool parse_bool(const std::string& s, const std::string& what) {
    const auto l = lower(s);
    if (l == "true" || l == "1" || l == "yes") return true;
    if (l == "false" || l == "0" || l == "no") return false;
    throw ValidationError(what + ": expected true or false, got '" + s + "'");
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) out.push_back(cur);
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

std::string sanitize(std::string s) {
    for (char& c : s)
        if (c == ',' || c == '\n' || c == '\r' || c == '"') c = ';';
    return s;
}

struct Range {
    double start, stop, step;
};

Range default_range(SweepKind k) {
    switch (k) {
        case SweepKind::TwoRelayDistance: return {-0.5, 0.5, 0.1};
        case SweepKind::SingleRelayDistance: return {-0.5, 1.5, 0.1};
        case SweepKind::RelayCount: return {0, 6, 1};
        case SweepKind::PathLoss: return {2, 6, 1};
        case SweepKind::SinglePoint: return {0, 0, 1};
    }
    return {0, 0, 1};
}

}  // namespace

std::string to_string(SweepKind k) {
    for (const auto& [kind, name] : kKinds)
        if (kind == k) return name;
    return "?";
}

SweepKind parse_sweep_kind(const std::string& name) {
    for (const auto& [kind, n] : kKinds)
        if (lower(n) == lower(name)) return kind;
    std::string valid;
    for (const auto& e : kKinds) valid += (valid.empty() ? "" : ", ") + std::string(e.second);
    throw ValidationError("unknown sweep kind '" + name + "' (valid: " + valid + ")");
}

void SweepSpec::validate() const {
    if (step && !(*step > 0.0)) throw ValidationError("step must be positive");
    if (start && stop && *stop < *start) throw ValidationError("stop must not be below start");
    if (protocols.empty()) throw ValidationError("protocol list is empty");
    if (!std::isfinite(snr_db)) throw ValidationError("snr_db must be finite");
    if (!(theta > 0.0) || !std::isfinite(theta)) throw ValidationError("theta must be positive");
    if (budget <= 0) throw ValidationError("budget must be positive");
    if (n_relays < 0 || n_relays > 6) throw ValidationError("n_relays must be in [0, 6]");
    if (!std::isfinite(r)) throw ValidationError("r must be finite");
    if (kind == SweepKind::RelayCount) {
        const auto g = grid();
        for (double n : g)
            if (n < 0 || n > 6 || n != std::floor(n)) throw ValidationError("relay counts must be integers in [0, 6]");
    }
    if (kind == SweepKind::PathLoss)
        for (double t : grid())
            if (!(t > 0.0)) throw ValidationError("path loss exponents must be positive");
}

std::vector<double> SweepSpec::grid() const {
    if (kind == SweepKind::SinglePoint) return {kind == SweepKind::SinglePoint ? r : 0.0};
    const Range d = default_range(kind);
    const double a = start.value_or(d.start), b = stop.value_or(d.stop), h = step.value_or(d.step);
    if (!(h > 0.0)) throw ValidationError("step must be positive");
    const auto count = static_cast<long>(std::floor((b - a) / h + 1e-9)) + 1;
    if (count > 100000) throw ValidationError("sweep grid too large");
    std::vector<double> out;
    for (long i = 0; i < count; ++i) out.push_back(std::round((a + static_cast<double>(i) * h) * 1e12) / 1e12);
    return out;
}

SweepSpec parse_config(std::istream& in, const std::string& origin) {
    SweepSpec spec;
    std::map<std::string, int> seen;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::string where = origin + ":" + std::to_string(lineno);
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ValidationError(where + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (val.empty()) throw ValidationError(where + ": empty value for '" + key + "'");
        if (seen.count(key)) throw ValidationError(where + ": duplicate key '" + key + "'");
        seen[key] = lineno;
        try {
            if (key == "kind") spec.kind = parse_sweep_kind(val);
            else if (key == "start") spec.start = parse_double(val, key);
            else if (key == "stop") spec.stop = parse_double(val, key);
            else if (key == "step") spec.step = parse_double(val, key);
            else if (key == "snr_db") spec.snr_db = parse_double(val, key);
            else if (key == "theta") spec.theta = parse_double(val, key);
            else if (key == "protocols") {
                spec.protocols.clear();
                for (const auto& p : split(val, ',')) spec.protocols.push_back(parse_protocol(trim(p)));
            } else if (key == "combining") {
                const auto l = lower(val);
                if (l == "coherent") spec.combining = Combining::Coherent;
                else if (l == "noncoherent") spec.combining = Combining::NonCoherent;
                else throw ValidationError("combining must be coherent or noncoherent");
            } else if (key == "schedule") {
                const auto l = lower(val);
                if (l == "fixed") spec.schedule = KnowledgeMode::FixedSchedule;
                else if (l == "random") spec.schedule = KnowledgeMode::RandomAccess;
                else throw ValidationError("schedule must be fixed or random");
            } else if (key == "normalize_power") spec.normalize_power = parse_bool(val, key);
            else if (key == "seed") {
                const auto v = parse_int(val, key);
                if (v < 0) throw ValidationError("seed must be nonnegative");
                spec.seed = static_cast<std::uint64_t>(v);
            } else if (key == "budget") spec.budget = static_cast<long>(parse_int(val, key));
            else if (key == "n_relays") spec.n_relays = static_cast<int>(parse_int(val, key));
            else if (key == "r") spec.r = parse_double(val, key);
            else throw ValidationError("unknown key '" + key + "'");
        } catch (const ValidationError& e) {
            const std::string msg = e.what();
            if (msg.rfind(where, 0) == 0) throw;
            throw ValidationError(where + ": " + msg);
        }
    }
    spec.validate();
    return spec;
}

SweepSpec load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file " + path.string());
    return parse_config(in, path.string());
}

NetworkConfig point_network(const SweepSpec& spec, double value, int num_relays) {
    const double power = std::pow(10.0, spec.snr_db / 10.0);
    double theta = spec.theta;
    std::vector<double> pos{0.0};
    switch (spec.kind) {
        case SweepKind::TwoRelayDistance:
            pos.push_back(value);
            pos.push_back(1.0 - value);
            break;
        case SweepKind::SingleRelayDistance: pos.push_back(value); break;
        case SweepKind::PathLoss:
            theta = value;
            [[fallthrough]];
        case SweepKind::RelayCount:
            for (int i = 1; i <= num_relays; ++i) pos.push_back(static_cast<double>(i) / (num_relays + 1));
            break;
        case SweepKind::SinglePoint:
            if (num_relays == 1) pos.push_back(value);
            else if (num_relays == 2) {
                pos.push_back(value);
                pos.push_back(1.0 - value);
            } else
                for (int i = 1; i <= num_relays; ++i) pos.push_back(static_cast<double>(i) / (num_relays + 1));
            break;
    }
    pos.push_back(1.0);
    return linear_network(pos, theta, power, 1.0, spec.combining);
}

bool ResultRow::failed() const { return std::isnan(rate_bpcu); }

bool operator==(const ResultRow& a, const ResultRow& b) {
    auto same = [](double x, double y) { return x == y || (std::isnan(x) && std::isnan(y)); };
    return same(a.r, b.r) && a.n == b.n && same(a.theta, b.theta) && same(a.snr_db, b.snr_db) &&
           a.protocol == b.protocol && a.schedule == b.schedule && a.combining == b.combining &&
           same(a.rate_bpcu, b.rate_bpcu) && a.binding == b.binding && a.evals == b.evals && a.seed == b.seed;
}

ResultTable run_sweep(const SweepSpec& spec, bool parallel) {
    spec.validate();
    struct Job {
        double value;
        int n;
        Protocol protocol;
    };
    std::vector<Job> jobs;
    for (double v : spec.grid()) {
        std::vector<int> ns;
        switch (spec.kind) {
            case SweepKind::TwoRelayDistance: ns = {2}; break;
            case SweepKind::SingleRelayDistance: ns = {1}; break;
            case SweepKind::RelayCount: ns = {static_cast<int>(v)}; break;
            case SweepKind::PathLoss: ns = {1, 3}; break;
            case SweepKind::SinglePoint: ns = {spec.n_relays}; break;
        }
        for (int n : ns)
            for (auto p : spec.protocols) jobs.push_back({v, n, p});
    }

    ResultTable rows(jobs.size());
    auto run = [&](std::size_t i) {
        const Job& j = jobs[i];
        ResultRow row;
        row.n = j.n;
        row.theta = spec.kind == SweepKind::PathLoss ? j.value : spec.theta;
        row.snr_db = spec.snr_db;
        row.r = j.n == 0 ? 0.0
                         : (spec.kind == SweepKind::TwoRelayDistance || spec.kind == SweepKind::SingleRelayDistance ||
                                    (spec.kind == SweepKind::SinglePoint && j.n <= 2)
                                ? j.value
                                : 1.0 / (j.n + 1));
        row.protocol = to_string(j.protocol);
        if (j.protocol == Protocol::SingleHop && spec.normalize_power) row.protocol += "-norm";
        row.combining = to_string(spec.combining);
        row.seed = spec.seed;
        SearchOptions opt;
        opt.schedule = spec.schedule;
        opt.budget = spec.budget;
        opt.seed = spec.seed;
        opt.normalize_power = spec.normalize_power;
        row.schedule = to_string(j.protocol == Protocol::DF || j.protocol == Protocol::PDF ||
                                         j.protocol == Protocol::DFNoReuse
                                     ? spec.schedule
                                     : KnowledgeMode::FixedSchedule);
        try {
            const auto res = run_protocol(j.protocol, point_network(spec, j.value, j.n), opt);
            row.rate_bpcu = std::round(res.rate * 1e5) / 1e5;
            row.binding = sanitize(res.binding);
            row.evals = res.evaluations;
        } catch (const std::exception& e) {
            row.rate_bpcu = std::numeric_limits<double>::quiet_NaN();
            row.binding = sanitize(std::string("error: ") + e.what());
            row.evals = 0;
        }
        rows[i] = row;
    };
    const auto nj = static_cast<long>(jobs.size());
    if (parallel) {
#pragma omp parallel for schedule(dynamic)
        for (long i = 0; i < nj; ++i) run(static_cast<std::size_t>(i));
    } else {
        for (long i = 0; i < nj; ++i) run(static_cast<std::size_t>(i));
    }
    return rows;
}

std::string format_csv(const ResultTable& table) {
    std::ostringstream os;
    os << kCsvHeader << '\n';
    for (const auto& r : table) {
        char rate[64];
        if (r.failed())
            std::snprintf(rate, sizeof rate, "nan");
        else
            std::snprintf(rate, sizeof rate, "%.5f", r.rate_bpcu);
        os << shortest(r.r) << ',' << r.n << ',' << shortest(r.theta) << ',' << shortest(r.snr_db) << ','
           << r.protocol << ',' << r.schedule << ',' << r.combining << ',' << rate << ',' << sanitize(r.binding) << ','
           << r.evals << ',' << r.seed << '\n';
    }
    return os.str();
}

ResultTable parse_csv(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line) || trim(line) != kCsvHeader) throw ValidationError("CSV header mismatch");
    ResultTable out;
    int lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto f = split(line, ',');
        if (f.size() != 11) throw ValidationError("CSV line " + std::to_string(lineno) + ": expected 11 fields");
        ResultRow r;
        r.r = parse_double(f[0], "r");
        r.n = static_cast<int>(parse_int(f[1], "N"));
        r.theta = parse_double(f[2], "theta");
        r.snr_db = parse_double(f[3], "snr_db");
        r.protocol = f[4];
        r.schedule = f[5];
        r.combining = f[6];
        r.rate_bpcu = f[7] == "nan" ? std::numeric_limits<double>::quiet_NaN() : parse_double(f[7], "rate_bpcu");
        r.binding = f[8];
        r.evals = static_cast<long>(parse_int(f[9], "evals"));
        r.seed = static_cast<std::uint64_t>(parse_int(f[10], "seed"));
        out.push_back(r);
    }
    return out;
}

std::string format_svg(const ResultTable& table, SweepKind kind) {
    auto xval = [kind](const ResultRow& r) {
        switch (kind) {
            case SweepKind::RelayCount: return static_cast<double>(r.n);
            case SweepKind::PathLoss: return r.theta;
            default: return r.r;
        }
    };
    const char* xlabel = kind == SweepKind::RelayCount ? "N" : kind == SweepKind::PathLoss ? "theta" : "r";
    std::map<std::string, std::vector<std::pair<double, double>>> series;
    std::vector<std::string> order;
    for (const auto& r : table) {
        std::string key = r.protocol;
        if (kind == SweepKind::PathLoss) key += " N=" + std::to_string(r.n);
        if (!series.count(key)) order.push_back(key);
        auto& s = series[key];
        if (!r.failed()) s.emplace_back(xval(r), r.rate_bpcu);
    }
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = 0.0, y1 = 1.0;
    for (const auto& [k, pts] : series)
        for (const auto& [x, y] : pts) {
            x0 = std::min(x0, x);
            x1 = std::max(x1, x);
            y1 = std::max(y1, y);
        }
    if (!std::isfinite(x0)) x0 = 0.0, x1 = 1.0;
    if (x1 <= x0) x1 = x0 + 1.0;
    y1 = std::ceil(y1 + 0.5);
    const double W = 760, H = 480, L = 60, R = 200, T = 20, B = 50;
    auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
    auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#17becf", "#bcbd22"};

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 5; ++i) {
        const double x = x0 + (x1 - x0) * i / 5.0, y = y0 + (y1 - y0) * i / 5.0;
        os << "<text x=\"" << px(x) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\">" << shortest(std::round(x * 1000) / 1000) << "</text>\n";
        os << "<text x=\"" << L - 6 << "\" y=\"" << py(y) + 4 << "\" text-anchor=\"end\">" << shortest(std::round(y * 100) / 100) << "</text>\n";
    }
    os << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\">" << xlabel << "</text>\n";
    os << "<text x=\"16\" y=\"" << (T + H - B) / 2 << "\" transform=\"rotate(-90 16 " << (T + H - B) / 2 << ")\" text-anchor=\"middle\">rate [bit/channel use]</text>\n";
    for (std::size_t i = 0; i < order.size(); ++i) {
        const auto& pts = series[order[i]];
        const char* c = colors[i % 10];
        os << "<g id=\"series-" << order[i] << "\">\n<polyline fill=\"none\" stroke=\"" << c << "\" stroke-width=\"1.5\" points=\"";
        for (const auto& [x, y] : pts) os << px(x) << ',' << py(y) << ' ';
        os << "\"/>\n";
        for (const auto& [x, y] : pts) os << "<circle cx=\"" << px(x) << "\" cy=\"" << py(y) << "\" r=\"2\" fill=\"" << c << "\"/>\n";
        os << "</g>\n";
        const double ly = T + 16 + 18 * static_cast<double>(i);
        os << "<line x1=\"" << W - R + 12 << "\" y1=\"" << ly << "\" x2=\"" << W - R + 36 << "\" y2=\"" << ly << "\" stroke=\"" << c << "\" stroke-width=\"2\"/>\n";
        os << "<text x=\"" << W - R + 42 << "\" y=\"" << ly + 4 << "\">" << order[i] << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

std::vector<std::filesystem::path> emit_outputs(const ResultTable& table, const std::filesystem::path& dir,
                                                SweepKind kind, OutputFlags flags) {
    if (table.empty()) throw ValidationError("result table is empty");
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    std::vector<std::filesystem::path> out;
    auto write = [&](const std::filesystem::path& p, const std::string& text) {
        std::ofstream f(p, std::ios::binary);
        if (!f) throw ValidationError("cannot write " + p.string());
        f << text;
        if (!f) throw ValidationError("cannot write " + p.string());
        out.push_back(p);
    };
    write(dir / "results.csv", format_csv(table));
    if (flags.plot) write(dir / "results.svg", format_svg(table, kind));
    return out;
}

}  // namespace hdrelay
