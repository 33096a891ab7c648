#include "ellipsum/cli.hpp"

#include "ellipsum/averaging.hpp"
#include "ellipsum/cache.hpp"
#include "ellipsum/counting.hpp"
#include "ellipsum/diophantine.hpp"
#include "ellipsum/errors.hpp"
#include "ellipsum/expsums.hpp"
#include "ellipsum/lattice.hpp"
#include "ellipsum/quadform.hpp"
#include "ellipsum/theta.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace ellipsum::cli {

namespace {

using json = nlohmann::json;

// nlohmann prints the shortest round-trip form; we want 17 digits everywhere.
void dump17(const json& j, std::string& out, int indent, int depth) {
    const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
    const std::string pad0(static_cast<std::size_t>(indent * depth), ' ');
    const char* nl = indent ? "\n" : "";
    switch (j.type()) {
    case json::value_t::object: {
        if (j.empty()) { out += "{}"; return; }
        out += "{";
        out += nl;
        bool first = true;
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (!first) { out += ","; out += nl; }
            first = false;
            out += pad + json(it.key()).dump() + (indent ? ": " : ":");
            dump17(it.value(), out, indent, depth + 1);
        }
        out += nl + pad0 + "}";
        return;
    }
    case json::value_t::array: {
        if (j.empty()) { out += "[]"; return; }
        out += "[";
        out += nl;
        for (std::size_t i = 0; i < j.size(); ++i) {
            if (i) { out += ","; out += nl; }
            out += pad;
            dump17(j[i], out, indent, depth + 1);
        }
        out += nl + pad0 + "]";
        return;
    }
    case json::value_t::number_float: {
        const double x = j.get<double>();
        out += std::isfinite(x) ? fmt17(x) : "null";
        return;
    }
    default: out += j.dump(); return;
    }
}

std::string to_text(const json& j) {
    std::string s;
    dump17(j, s, 2, 0);
    return s + "\n";
}

std::string hex64(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

int exit_code_for(ErrorCode c) {
    switch (c) {
    case ErrorCode::BudgetExceeded:
    case ErrorCode::SearchSpaceTooLarge: return 3;
    case ErrorCode::CorruptCache:
    case ErrorCode::Io: return 1;
    default: return 2;
    }
}

struct Context {
    const RunConfig& cfg;
    CacheStore cache;
    unsigned workers;
    json results = json::array(); // name and est_error per result
    json extra = json::object();  // goes into the manifest
    std::string output;           // main artifact text
};

struct Form {
    Rationalized rz;
    ShiftVector alpha;
};

Form load_form(const RunConfig& cfg, bool alpha_required) {
    if (!cfg.has("matrix")) throw Error(ErrorCode::InvalidArgument, "missing --matrix");
    Form f;
    try {
        f.rz = parse_matrix(cfg.get_text("matrix"));
    } catch (const Error& e) {
        throw Error(e.code(), cfg.where("matrix") + ": matrix: " + e.what());
    }
    const int n = f.rz.ctx.n;
    std::string spec;
    if (cfg.has("alpha")) spec = cfg.get_text("alpha");
    else if (alpha_required) throw Error(ErrorCode::InvalidArgument, "missing --alpha");
    else {
        for (int i = 0; i < n; ++i) spec += i ? ",0" : "0";
    }
    try {
        f.alpha = parse_shift(spec, n);
    } catch (const Error& e) {
        throw Error(e.code(), cfg.where("alpha") + ": alpha: " + e.what());
    }
    return f;
}

void require_integral(const Form& f, const std::string& cmd) {
    if (f.rz.c != 1)
        throw Error(ErrorCode::InvalidArgument,
                    "rational matrices are accepted by 'count' only; scale the form to integers for '" + cmd + "'");
}

void property_1_guard(const RunConfig& cfg, const Form& f) {
    if (is_diagonal(f.rz.ctx.M) || cfg.get_bool("assume_property_1")) return;
    throw Error(ErrorCode::InvalidArgument,
                "non-diagonal matrix: the mean-square asymptotics used here are proved only for diagonal forms, "
                "and their extension to general M depends on Property 1, whose validity is not claimed. "
                "Pass --assume-property-1 to run anyway.");
}

AveragingKernel load_kernel(const RunConfig& cfg) {
    const std::string spec = cfg.get_text("kernel", "bump");
    if (spec == "bump") return AveragingKernel::bump();
    if (spec.rfind("bump:", 0) == 0) {
        std::istringstream in(spec.substr(5));
        double c0 = 0, c1 = 0;
        char comma = 0;
        if ((in >> c0 >> comma >> c1) && comma == ',' && in.peek() == EOF && c0 > 0 && c1 > c0)
            return AveragingKernel::bump(c0, c1);
    }
    throw Error(ErrorCode::InvalidArgument, cfg.where("kernel") + ": kernel: expected bump or bump:c0,c1 with 0 < c0 < c1");
}

PiecewiseOptions piece_opts(const Context& cx) {
    PiecewiseOptions po;
    po.workers = cx.workers;
    po.order = static_cast<int>(cx.cfg.get_int("order", 8));
    if (po.order < 2 || po.order > 64) throw Error(ErrorCode::InvalidArgument, "order must lie in [2, 64]");
    return po;
}

EnumOptions enum_opts(const Context& cx) {
    EnumOptions eo;
    eo.workers = cx.workers;
    return eo;
}

ExpSumSeries cached_series(Context& cx, const QuadFormCtx& ctx, const ShiftVector& alpha, std::int64_t pmax) {
    const EnumOptions eo = enum_opts(cx);
    return cx.cache.series(ctx.M, alpha.spec, pmax, [&] { return rep_sums(ctx, alpha, pmax, eo); });
}

RadiiMultiset cached_radii(Context& cx, const QuadFormCtx& ctx, const ShiftVector& alpha, double R) {
    const EnumOptions eo = enum_opts(cx);
    return cx.cache.radii(ctx.M, alpha.spec, R, [&] { return build_radii(ctx, alpha, R, eo); });
}

std::vector<std::int64_t> checkpoints(const RunConfig& cfg, std::int64_t pmax) {
    auto cps = cfg.get_ints("checkpoints");
    if (cps.empty()) {
        for (std::int64_t c = 10; c < pmax; c *= 10) cps.push_back(c);
        cps.push_back(pmax);
    }
    for (auto c : cps)
        if (c > pmax)
            throw Error(ErrorCode::CheckpointOutOfRange, cfg.where("checkpoints") + ": checkpoint " + std::to_string(c) +
                                                             " exceeds pmax " + std::to_string(pmax));
    return cps;
}

void cmd_dio(Context& cx) {
    const auto& cfg = cx.cfg;
    if (!cfg.has("alpha")) throw Error(ErrorCode::InvalidArgument, "missing --alpha");
    const ShiftVector alpha = parse_shift(cfg.get_text("alpha"));
    const DioReport r = estimate_type(alpha, cfg.get_int("qmax", 10000));
    json j;
    j["alpha"] = alpha.spec;
    j["n"] = alpha.n;
    j["norm"] = "euclidean";
    j["normalization_constant"] = kHurwitzC0;
    j["q_max"] = r.q_max;
    j["kappa_hat"] = r.kappa_hat;
    j["worst_q"] = r.worst_q;
    j["worst_dist"] = r.worst_dist;
    j["rational_hit"] = r.rational_hit;
    if (r.rational_hit) j["hit_q"] = r.hit_q;
    if (cfg.has("coeff_bound")) {
        const RelationResult rel = independence_scan(alpha, cfg.get_int("coeff_bound", 1));
        j["relation_found"] = rel.found;
        j["relation_bound"] = cfg.get_int("coeff_bound", 1);
        if (rel.found) j["relation"] = rel.witness;
    }
    cx.output = to_text(j);
}

void cmd_repsums(Context& cx) {
    const auto& cfg = cx.cfg;
    const Form f = load_form(cfg, false);
    require_integral(f, "repsums");
    const std::int64_t pmax = cfg.get_int("pmax", 10000);
    const auto cps = checkpoints(cfg, pmax);
    const ExpSumSeries s = cached_series(cx, f.rz.ctx, f.alpha, pmax);
    std::string o = "p,re_r,im_r,abs2_r,R_cum\n";
    for (std::int64_t p = 1; p <= pmax; ++p) {
        const auto& z = s.r[static_cast<std::size_t>(p)];
        o += std::to_string(p) + "," + fmt17(z.real()) + "," + fmt17(z.imag()) + "," + fmt17(std::norm(z)) + "," +
             fmt17(s.R_cum[static_cast<std::size_t>(p)]) + "\n";
    }
    cx.output = std::move(o);
    json sum;
    sum["n"] = s.n;
    sum["detM"] = s.detM;
    sum["target_volume"] = s.volume;
    json rows = json::array();
    for (const auto& row : mean_square_trace(s, cps)) rows.push_back({{"N", row.N}, {"ratio", row.ratio}});
    sum["ratios_at_checkpoints"] = rows;
    if (cfg.has("summary")) {
        std::ofstream os(cfg.get_text("summary"));
        if (!os) throw Error(ErrorCode::Io, "cannot write " + cfg.get_text("summary"));
        os << to_text(sum);
    } else {
        cx.extra["summary"] = sum;
    }
}

void cmd_meansq(Context& cx) {
    const auto& cfg = cx.cfg;
    const Form f = load_form(cfg, true);
    require_integral(f, "meansq");
    property_1_guard(cfg, f);
    const std::int64_t pmax = cfg.get_int("pmax", 1000000);
    const auto cps = checkpoints(cfg, pmax);
    const ExpSumSeries s = cached_series(cx, f.rz.ctx, f.alpha, pmax);
    std::string o = "N,ratio,target\n";
    for (const auto& row : mean_square_trace(s, cps))
        o += std::to_string(row.N) + "," + fmt17(row.ratio) + "," + fmt17(row.target) + "\n";
    cx.output = std::move(o);
}

void cmd_count(Context& cx) {
    const auto& cfg = cx.cfg;
    const Form f = load_form(cfg, true);
    const auto ts = cfg.get_reals("t");
    if (ts.empty()) throw Error(ErrorCode::InvalidArgument, "missing --t");
    // a rational form Q = M/c counts like M at radius sqrt(c) t
    const double sc = std::sqrt(static_cast<double>(f.rz.c));
    const double tmax = *std::max_element(ts.begin(), ts.end()) * sc;
    const RadiiMultiset rm = cached_radii(cx, f.rz.ctx, f.alpha, tmax);
    const DeviationEvaluator ev = make_deviation(f.rz.ctx, rm);
    const double fscale = std::pow(static_cast<double>(f.rz.c), (f.rz.ctx.n - 1) / 4.0);
    std::string o = "t,N,F\n";
    for (double t : ts) {
        const double s = t * sc;
        o += fmt17(t) + "," + std::to_string(count_upto(rm, s)) + "," + fmt17(F(ev, s) * fscale) + "\n";
    }
    cx.output = std::move(o);
}

void cmd_fdev(Context& cx) {
    const auto& cfg = cx.cfg;
    const Form f = load_form(cfg, true);
    require_integral(f, "fdev");
    const AveragingKernel k = load_kernel(cfg);
    if (cfg.has("t")) {
        const auto ts = cfg.get_reals("t");
        const double gamma = cfg.get_real("gamma", 0.5);
        std::vector<double> eps;
        double reach = 0.0;
        for (double t : ts) {
            eps.push_back(cfg.has("eps") ? cfg.get_real("eps", 0.0) : eps_rule(t, gamma));
            reach = std::max(reach, t + eps.back());
        }
        const RadiiMultiset rm = cached_radii(cx, f.rz.ctx, f.alpha, reach);
        const DeviationEvaluator ev = make_deviation(f.rz.ctx, rm);
        std::string o = "t,eps,S\n";
        for (std::size_t i = 0; i < ts.size(); ++i)
            o += fmt17(ts[i]) + "," + fmt17(eps[i]) + "," + fmt17(S(ev, ts[i], eps[i])) + "\n";
        cx.output = std::move(o);
        return;
    }
    auto Ts = cfg.get_reals("T");
    if (Ts.empty()) Ts = {100.0, 200.0, 400.0, 800.0};
    const double reach = k.c1() * *std::max_element(Ts.begin(), Ts.end());
    const RadiiMultiset rm = cached_radii(cx, f.rz.ctx, f.alpha, reach);
    const DeviationEvaluator ev = make_deviation(f.rz.ctx, rm);
    const PiecewiseOptions po = piece_opts(cx);
    std::string o = "T,mean_F,mean_F_err,msq_F,msq_F_err\n";
    for (double T : Ts) {
        const AverageResult m1 = mean_F(ev, k, T, po);
        const AverageResult m2 = mean_F2(ev, k, T, po);
        o += fmt17(T) + "," + fmt17(m1.value) + "," + fmt17(m1.est_error) + "," + fmt17(m2.value) + "," +
             fmt17(m2.est_error) + "\n";
        cx.results.push_back({{"name", "mean_F@" + fmt17(T)}, {"est_error", m1.est_error}});
        cx.results.push_back({{"name", "msq_F@" + fmt17(T)}, {"est_error", m2.est_error}});
    }
    cx.output = std::move(o);
}

json single_or_list(json rows) { return rows.size() == 1 ? rows[0] : rows; }

void cmd_variance(Context& cx) {
    const auto& cfg = cx.cfg;
    const Form f = load_form(cfg, true);
    require_integral(f, "variance");
    property_1_guard(cfg, f);
    const AveragingKernel k = load_kernel(cfg);
    auto Ts = cfg.get_reals("T");
    if (Ts.empty()) Ts = {800.0};
    const std::int64_t P = cfg.get_int("P", 100000);
    const QuadFormCtx& ctx = f.rz.ctx;
    const QuadFormCtx adj = adjugate_ctx(ctx);
    const ExpSumSeries adj_series = cached_series(cx, adj, f.alpha, P);
    const VarianceSeries A = variance_series(adj_series, ctx.detM, P);
    const RadiiMultiset rm = cached_radii(cx, ctx, f.alpha, k.c1() * *std::max_element(Ts.begin(), Ts.end()));
    const DeviationEvaluator ev = make_deviation(ctx, rm);
    const PiecewiseOptions po = piece_opts(cx);
    json rows = json::array();
    for (double T : Ts) {
        const VarFResult r = var_F(ev, k, T, A, po);
        rows.push_back({{"T", T},
                        {"value", r.msq.value},
                        {"est_error", r.msq.est_error},
                        {"target", r.target},
                        {"ratio", r.ratio},
                        {"mean", r.mean.value},
                        {"mean_est_error", r.mean.est_error},
                        {"A", A.A},
                        {"tail_bound", A.tail_bound},
                        {"P", P}});
        cx.results.push_back({{"name", "variance@" + fmt17(T)}, {"est_error", r.msq.est_error}});
    }
    cx.output = to_text(single_or_list(rows));
}

void cmd_shell(Context& cx) {
    const auto& cfg = cx.cfg;
    const Form f = load_form(cfg, true);
    require_integral(f, "shell");
    property_1_guard(cfg, f);
    const AveragingKernel k = load_kernel(cfg);
    auto Ts = cfg.get_reals("T");
    if (Ts.empty()) Ts = {800.0};
    const double gamma = cfg.get_real("gamma", 0.5);
    const QuadFormCtx& ctx = f.rz.ctx;
    std::vector<double> eps;
    double reach = 0.0;
    for (double T : Ts) {
        eps.push_back(cfg.has("eps") ? cfg.get_real("eps", 0.0) : eps_rule(T, gamma));
        reach = std::max(reach, k.c1() * T + eps.back());
    }
    const RadiiMultiset rm = cached_radii(cx, ctx, f.alpha, reach);
    const DeviationEvaluator ev = make_deviation(ctx, rm);
    const PiecewiseOptions po = piece_opts(cx);

    std::optional<ExpSumSeries> adj_series;
    const double zeta = cfg.get_real("zeta", 0.5);
    const Mollifier mol = cfg.get_text("mollifier", "gaussian") == "bump" ? Mollifier::bump(ctx.n) : Mollifier::gaussian(ctx.n);
    if (cfg.has("K")) {
        const QuadFormCtx adj = adjugate_ctx(ctx);
        adj_series = cached_series(cx, adj, f.alpha, spectral_cut(cfg.get_real("K", 1.0), zeta));
    }
    json rows = json::array();
    for (std::size_t i = 0; i < Ts.size(); ++i) {
        const VarSResult r = var_S(ev, k, Ts[i], eps[i], po);
        json row = {{"T", Ts[i]},
                    {"eps", eps[i]},
                    {"value", r.msq.value},
                    {"est_error", r.msq.est_error},
                    {"target", r.target},
                    {"ratio", r.ratio},
                    {"mean", r.mean.value},
                    {"mean_est_error", r.mean.est_error}};
        if (adj_series)
            row["diagonal_part"] = diag_shell_variance(*adj_series, ctx.detM, eps[i], cfg.get_real("K", 1.0), zeta, mol);
        rows.push_back(row);
        cx.results.push_back({{"name", "shell@" + fmt17(Ts[i])}, {"est_error", r.msq.est_error}});
    }
    cx.output = to_text(single_or_list(rows));
}

void cmd_theta(Context& cx) {
    const auto& cfg = cx.cfg;
    const auto a = cfg.get_ints("a");
    if (a.empty()) throw Error(ErrorCode::InvalidArgument, "missing --a");
    if (static_cast<int>(a.size()) > kMaxDim) throw Error(ErrorCode::DimensionTooLarge, "too many weights");
    if (!cfg.has("alpha")) throw Error(ErrorCode::InvalidArgument, "missing --alpha");
    const ShiftVector alpha = parse_shift(cfg.get_text("alpha"), static_cast<int>(a.size()));
    auto v = cfg.get_reals("v");
    if (v.empty()) throw Error(ErrorCode::InvalidArgument, "missing --v");
    const ThetaProfile prof = cfg.get_text("profile", "smooth") == "indicator"
                                  ? ThetaProfile::indicator()
                                  : ThetaProfile::smooth_cutoff(cfg.get_real("delta", 0.02));
    const auto rows = bridge_check(a, alpha, v, prof, cx.workers);
    std::string o = "v,theta_msq,repsum_msq,target\n";
    for (const auto& r : rows)
        o += fmt17(r.v) + "," + fmt17(r.theta_msq) + "," + fmt17(r.repsum_msq) + "," + fmt17(r.target) + "\n";
    cx.output = std::move(o);
}

void cmd_cache(Context& cx) {
    const std::string action = cx.cfg.get_text("action", "inspect");
    if (action == "clear") {
        cx.output = to_text(json{{"dir", cx.cache.dir().string()}, {"removed", clear_cache(cx.cache.dir())}});
        return;
    }
    json list = json::array();
    for (const auto& e : inspect_cache(cx.cache.dir())) {
        json j = {{"file", e.file}, {"kind", e.kind}, {"bytes", e.bytes}, {"valid", e.valid}};
        if (e.valid) {
            j["n"] = e.n;
            j["matrix"] = e.matrix;
            j["alpha"] = e.alpha_spec;
            j["bound"] = e.bound;
            j["digest"] = hex64(e.digest);
        } else {
            j["error"] = e.error;
        }
        list.push_back(j);
    }
    cx.output = to_text(json{{"dir", cx.cache.dir().string()}, {"entries", list}});
}

} // namespace

int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
        validate(cfg);
        const std::filesystem::path dir =
            cfg.has("cache_dir") ? std::filesystem::path(cfg.get_text("cache_dir")) : default_cache_dir();
        Context cx{cfg, CacheStore(dir, !cfg.get_bool("no_cache") || cfg.command == "cache"),
                   static_cast<unsigned>(cfg.get_int("workers", 1)), json::array(), json::object(), {}};

        const std::string& c = cfg.command;
        if (c == "dio") cmd_dio(cx);
        else if (c == "repsums") cmd_repsums(cx);
        else if (c == "meansq") cmd_meansq(cx);
        else if (c == "count") cmd_count(cx);
        else if (c == "fdev") cmd_fdev(cx);
        else if (c == "variance") cmd_variance(cx);
        else if (c == "shell") cmd_shell(cx);
        else if (c == "theta-check") cmd_theta(cx);
        else if (c == "cache") cmd_cache(cx);
        else throw Error(ErrorCode::InvalidArgument, "unknown command '" + c + "'");

        std::string out_path;
        if (cfg.has("out")) {
            out_path = cfg.get_text("out");
            std::ofstream os(out_path, std::ios::binary | std::ios::trunc);
            if (!os) throw Error(ErrorCode::Io, "cannot write " + out_path);
            os << cx.output;
        } else {
            out << cx.output << std::flush;
        }
        if (c == "cache") return 0;

        json m;
        m["tool"] = "ellipsum";
        m["version"] = kToolVersion;
        m["command"] = c;
        m["config"] = serialize(cfg);
        json cache = json::array();
        for (const auto& e : cx.cache.events())
            cache.push_back({{"file", e.file}, {"status", e.status}, {"digest", hex64(e.digest)}});
        m["cache"] = cache;
        m["results"] = cx.results;
        for (auto it = cx.extra.begin(); it != cx.extra.end(); ++it) m[it.key()] = it.value();
        m["output"] = out_path.empty() ? "stdout" : out_path;
        m["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const std::string text = to_text(m);
        if (cfg.has("manifest") || !out_path.empty()) {
            const std::string mp = cfg.has("manifest") ? cfg.get_text("manifest") : out_path + ".manifest.json";
            std::ofstream os(mp, std::ios::binary | std::ios::trunc);
            if (!os) throw Error(ErrorCode::Io, "cannot write " + mp);
            os << text;
        } else {
            err << text;
        }
        return 0;
    } catch (const Error& e) {
        err << "ellipsum: " << e.what() << "\n";
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        err << "ellipsum: " << e.what() << "\n";
        return 1;
    }
}

namespace {

const char* csv_schema(const std::string& c) {
    if (c == "dio") return "Output: JSON {alpha, n, norm, normalization_constant, q_max, kappa_hat, worst_q, worst_dist, rational_hit[, hit_q][, relation_found, relation]}.";
    if (c == "repsums") return "Output CSV columns: p,re_r,im_r,abs2_r,R_cum (p = 1..pmax). JSON summary {n, detM, target_volume, ratios_at_checkpoints} goes to --summary or the manifest.";
    if (c == "meansq") return "Output CSV columns: N,ratio,target with ratio = R(N)/N^(n/2) and target the ellipsoid volume.";
    if (c == "count") return "Output CSV columns: t,N,F.";
    if (c == "fdev") return "Output CSV columns: T,mean_F,mean_F_err,msq_F,msq_F_err; with --t instead: t,eps,S.";
    if (c == "variance") return "Output: JSON {T, value, est_error, target, ratio, mean, mean_est_error, A, tail_bound, P}.";
    if (c == "shell") return "Output: JSON {T, eps, value, est_error, target, ratio, mean, mean_est_error[, diagonal_part]}.";
    if (c == "theta-check") return "Output CSV columns: v,theta_msq,repsum_msq,target.";
    return "Output: JSON listing of cache entries, or the number of files removed.";
}

const char* describe(const std::string& c) {
    if (c == "dio") return "Estimate the diophantine type of a shift vector";
    if (c == "repsums") return "Twisted representation sums r(p) and their cumulative mean square";
    if (c == "meansq") return "Trace of R(N)/N^(n/2) against the ellipsoid volume";
    if (c == "count") return "Lattice point counts N(t) and the normalized deviation F(t)";
    if (c == "fdev") return "Smoothed averages of F over [T, 2T], or shell deviations S(t, eps)";
    if (c == "variance") return "Averaged |F|^2 against the variance series";
    if (c == "shell") return "Averaged shell variance |S|^2 against n times the ellipsoid volume";
    if (c == "theta-check") return "Theta-sum mean square against the representation-sum mean square";
    return "Inspect or clear the binary cache";
}

} // namespace

int cli_main(int argc, const char* const* argv) {
    CLI::App app{"ellipsum: lattice points in shifted ellipsoids"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);

    std::map<std::string, std::map<std::string, std::string>> raw;
    std::map<std::string, std::map<std::string, std::int64_t>> flags;
    std::map<std::string, std::string> config_path;
    std::map<std::string, CLI::App*> subs;
    std::map<std::string, std::map<std::string, CLI::Option*>> opts;

    for (const auto& c : commands()) {
        CLI::App* sub = app.add_subcommand(c, describe(c));
        sub->footer(csv_schema(c));
        sub->add_option("--config", config_path[c], "key=value config file; flags override it");
        for (const auto& key : command_keys(c)) {
            const KeySpec* ks = find_key(key);
            if (key == "action") {
                sub->add_option("action", raw[c][key], ks->help)->check(CLI::IsMember({"inspect", "clear"}));
                continue;
            }
            opts[c][key] = ks->type == ValType::Bool ? sub->add_flag(flag_name(key), flags[c][key], ks->help)
                                                     : sub->add_option(flag_name(key), raw[c][key], ks->help);
        }
        subs[c] = sub;
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    std::string cmd;
    for (const auto& [c, sub] : subs)
        if (sub->parsed()) cmd = c;

    try {
        RunConfig cfg;
        if (!config_path[cmd].empty()) {
            RunConfig file = load_config_file(config_path[cmd]);
            if (!file.command.empty() && file.command != cmd)
                throw Error(ErrorCode::InvalidArgument,
                            config_path[cmd] + ": config is for '" + file.command + "', not '" + cmd + "'");
            const auto& allowed = command_keys(cmd);
            for (const auto& [k, v] : file.values) {
                if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) {
                    std::cerr << "ellipsum: " << file.where(k) << ": key '" << k << "' is not used by " << cmd
                              << "; ignored\n";
                    continue;
                }
                cfg.values[k] = v;
                cfg.origin[k] = file.where(k);
            }
        }
        cfg.command = cmd;
        for (const auto& key : command_keys(cmd)) {
            const KeySpec* ks = find_key(key);
            if (key == "action") {
                if (!raw[cmd][key].empty()) set_value(cfg, key, raw[cmd][key], "argument action");
                continue;
            }
            // integer-bound flags report count 1 even when absent, so read the value
            if (ks->type == ValType::Bool ? flags[cmd][key] == 0 : opts[cmd][key]->count() == 0) continue;
            const std::string v = ks->type == ValType::Bool ? "true" : raw[cmd][key];
            set_value(cfg, key, v, "flag " + flag_name(key));
        }
        return run(cfg, std::cout, std::cerr);
    } catch (const Error& e) {
        std::cerr << "ellipsum: " << e.what() << "\n";
        return exit_code_for(e.code());
    }
}

} // namespace ellipsum::cli
