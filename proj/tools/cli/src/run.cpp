#include "mkvcyl_cli/run.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "mkvcyl/mkvcyl.hpp"
#include "mkvcyl_cli/csv.hpp"

namespace mkvcyl::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

struct Artifact {
    std::string name;
    std::string bytes;                                  // text artifacts
    std::function<void(const std::string&)> writer;     // binary artifacts
};

struct Context {
    const RunConfig& cfg;
    HurstSpectrum spec;
    TimeLattice lattice;
    std::vector<double> x0;
    std::vector<double> C;
    std::vector<Artifact> artifacts;
    json results = json::object();

    bool wants(const std::string& fmt) const
    {
        const auto& f = cfg.output.formats;
        return std::find(f.begin(), f.end(), fmt) != f.end();
    }
    void add_csv(const std::string& name, const Table& t) { artifacts.push_back({name, format_csv(t), {}}); }
    void add_text(const std::string& name, std::string s) { artifacts.push_back({name, std::move(s), {}}); }
};

std::string utc_timestamp()
{
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

DriftSpec make_drift(const Context& ctx)
{
    const auto& d = ctx.cfg.drift;
    const auto& lam = ctx.spec.weights;
    if (d.family == "zero") return zero_drift(ctx.C, lam);
    if (d.family == "constant") return constant_drift(d.value.resolve(ctx.spec.modes(), "drift.params.value"), ctx.C, lam);
    if (d.family == "mean_field_ou") return mean_field_ou(d.rate, ctx.C, lam);
    if (d.family == "tanh_mode") return tanh_mode(d.gain, ctx.C, lam);
    if (d.family == "custom_table")
        return custom_table(DriftTable{d.x_grid, d.m_grid, d.rows, d.table}, ctx.lattice, ctx.C, lam);
    throw ConfigError("unknown drift family '" + d.family + "'");
}

CylindricalPathSet make_paths(const Context& ctx, const HurstSpectrum& spec)
{
    const auto& e = ctx.cfg.ensemble;
    if (e.generator == "volterra") return volterra_fbm(spec, ctx.lattice, e.particles, e.seed);
    return cholesky_fbm(spec, ctx.lattice, e.particles, e.seed);
}

MetricOptions metric_options(const Context& ctx) { return MetricOptions{ctx.cfg.command.metric_cap}; }

double ms_or_nan(const Context& ctx, double ms) { return ctx.cfg.output.timing ? ms : std::nan(""); }

Table moments_table(const StatePaths& st)
{
    std::vector<std::string> names{"t"};
    for (std::size_t k = 0; k < st.modes; ++k) names.push_back("mean_x_" + std::to_string(k + 1));
    for (std::size_t k = 0; k < st.modes; ++k) names.push_back("var_x_" + std::to_string(k + 1));
    Table tab(names);
    const double M = static_cast<double>(st.particles);
    for (std::size_t i = 0; i < st.lattice.size(); ++i) {
        std::vector<double> row{st.lattice.t(i)};
        std::vector<double> s1(st.modes, 0.0), s2(st.modes, 0.0);
        for (std::size_t m = 0; m < st.particles; ++m)
            for (std::size_t k = 0; k < st.modes; ++k) {
                const double x = st.at(m, i)[k];
                s1[k] += x;
                s2[k] += x * x;
            }
        for (std::size_t k = 0; k < st.modes; ++k) row.push_back(s1[k] / M);
        for (std::size_t k = 0; k < st.modes; ++k) {
            const double mean = s1[k] / M;
            row.push_back(st.particles > 1 ? (s2[k] - M * mean * mean) / (M - 1.0) : 0.0);
        }
        tab.add_row(row);
    }
    return tab;
}

void cmd_simulate(Context& ctx)
{
    const auto paths = make_paths(ctx, ctx.spec);
    const auto drift = make_drift(ctx);
    const auto st = simulate_interacting(drift, paths, ctx.x0);
    const auto flow = empirical_flow(st);

    ctx.add_csv("state_moments.csv", moments_table(st));

    const auto prof = second_moment_profile(weighted_view(paths, ctx.spec));
    Table nm({"t", "second_moment", "stderr", "exact"});
    for (std::size_t i = 0; i < ctx.lattice.size(); ++i)
        nm.add_row({ctx.lattice.t(i), prof.mean[i], prof.stderr_[i], prof.exact[i]});
    ctx.add_csv("noise_moments.csv", nm);

    const std::size_t sub = ctx.cfg.command.subsample;
    const auto out_flow = sub > 0 ? subsample(flow, sub, ctx.cfg.ensemble.seed) : flow;
    ctx.add_csv("flow.csv", flow_table(out_flow));
    ctx.add_csv("law.csv", measure_table(flow.measures.back(), ctx.lattice.t(ctx.lattice.steps)));

    const auto env = holder_envelope(ctx.spec);
    const auto small = subsample(flow, std::min<std::size_t>(sub > 0 ? sub : 200, ctx.cfg.command.metric_cap / 2),
                                 ctx.cfg.ensemble.seed);
    ctx.results["kappa"] = env.kappa;
    ctx.results["rho"] = env.rho;
    ctx.results["holder_modulus"] = holder_modulus(small, env.kappa, metric_options(ctx));
    ctx.results["noise_second_moment_bound"] = prof.bound;
    ctx.results["drift_clamps"] = drift.clamp_count();

    if (ctx.wants("binary")) {
        auto shared = std::make_shared<CylindricalPathSet>(paths);
        ctx.artifacts.push_back({"paths.bin", {}, [shared](const std::string& f) { write_paths(*shared, f); }});
    }
}

void cmd_fixpoint(Context& ctx)
{
    const auto& c = ctx.cfg.command;
    const auto paths = make_paths(ctx, ctx.spec);
    const auto drift = make_drift(ctx);
    FixedPointOptions opt;
    opt.tol = c.tol;
    opt.max_iter = c.max_iter;
    opt.damping = c.damping;
    opt.metric_subsample = c.subsample;
    opt.subsample_seed = ctx.cfg.ensemble.seed;
    opt.metric = metric_options(ctx);
    opt.keep_iterates = false;

    const auto tr = fixed_point(drift, paths, ctx.x0, opt);
    Table trace({"iter", "sup_distance", "wallclock_ms"});
    for (std::size_t n = 0; n < tr.distances.size(); ++n)
        trace.add_row({static_cast<double>(n + 1), tr.distances[n], ms_or_nan(ctx, tr.wallclock_ms[n])});
    ctx.add_csv("trace.csv", trace);
    const auto& last = tr.iterates.back();
    ctx.add_csv("law.csv", measure_table(last.measures.back(), ctx.lattice.t(ctx.lattice.steps)));

    ctx.results["iterations_used"] = tr.iterations_used;
    ctx.results["converged"] = tr.converged;
    ctx.results["final_distance"] = tr.distances.empty() ? 0.0 : tr.distances.back();
    ctx.results["drift_clamps"] = drift.clamp_count();

    if (c.probe) {
        const auto a = dispersed_flow(ctx.lattice, ctx.x0, 1.0, 0.5, 50);
        const auto b = dispersed_flow(ctx.lattice, ctx.x0, -1.0, 0.5, 50);
        const double p = uniqueness_probe(drift, paths, ctx.x0, a, b, opt);
        ctx.results["probe_distance"] = p;
        ctx.results["probe_within_3tol"] = p <= 3.0 * c.tol;
    }
}

void cmd_girsanov(Context& ctx)
{
    const auto& spec = ctx.spec;
    const std::size_t K = spec.modes(), N = ctx.lattice.steps, M = ctx.cfg.ensemble.particles;
    const auto paths = make_paths(ctx, spec);
    const auto drift = make_drift(ctx);

    // shifts are read along the driftless states x0 + lambda B and their law
    const auto base = solve_frozen(zero_drift(ctx.C, spec.weights),
                                   EmpiricalFlow::constant(ctx.lattice, EmpiricalMeasure::dirac(ctx.x0)), paths,
                                   ctx.x0);
    const auto flow = empirical_flow(base);
    std::vector<double> u(M * K * N);
    for (std::size_t m = 0; m < M; ++m)
        for (std::size_t k = 0; k < K; ++k)
            for (std::size_t i = 0; i < N; ++i) {
                const double b = drift(k, ctx.lattice.t(i), base.at(m, i), flow.measures[i]);
                const double lam = spec.weights[k];
                if (lam == 0.0 && b != 0.0)
                    throw DomainError("mode " + std::to_string(k + 1) + " has lambda = 0 but a nonzero drift");
                u[(m * K + k) * N + i] = lam == 0.0 ? 0.0 : b / lam;
            }

    Table adm({"K", "l1_lambda", "l1_lambda_over_sqrtH", "l1_C_over_sqrt1mH", "kappa", "rho", "ok"});
    for (std::size_t k = 1; k <= K; ++k) {
        const auto sub = truncate(spec, k);
        const std::vector<double> Ck(ctx.C.begin(), ctx.C.begin() + static_cast<std::ptrdiff_t>(k));
        const auto r = admissibility(sub, Ck);
        adm.add_row({static_cast<double>(k), r.l1_lambda, r.l1_lambda_over_sqrtH, r.l1_C_over_sqrt1mH, r.kappa, r.rho,
                     r.ok ? 1.0 : 0.0});
    }
    ctx.add_csv("admissibility.csv", adm);

    const auto ex = stochastic_exponential(u, paths);
    double s1 = 0.0, s2 = 0.0, lo = INFINITY, hi = -INFINITY;
    for (const auto& e : ex) {
        const double w = std::exp(e.log_density);
        s1 += w;
        s2 += w * w;
        lo = std::min(lo, e.log_density);
        hi = std::max(hi, e.log_density);
    }
    const double Md = static_cast<double>(M);
    const double mean = s1 / Md;
    const double se = M > 1 ? std::sqrt(std::max(0.0, (s2 / Md - mean * mean) / (Md - 1.0))) : 0.0;
    Table et({"particles", "mean", "stderr", "min_log_density", "max_log_density"});
    et.add_row({Md, mean, se, lo, hi});
    ctx.add_csv("exponential.csv", et);

    const auto cert = evaluate_certificate(
        spec, ctx.C, paths, [&](std::size_t m, std::size_t k, std::size_t i) { return u[(m * K + k) * N + i]; },
        ctx.cfg.command.slack);
    ctx.add_text("certificate.txt", format_certificate(cert, spec));
    ctx.results["conditions_ok"] = cert.conditions_ok;
    ctx.results["dk_sum"] = cert.dk_sum;
    ctx.results["exponential_mean"] = mean;
    ctx.results["exponential_stderr"] = se;
    if (!cert.conditions_ok) {
        std::string modes;
        for (auto k : cert.violating) modes += (modes.empty() ? "" : ", ") + std::to_string(k + 1);
        throw CertificateError("certificate fails on mode(s) " + modes);
    }
}

std::string resolve_input(const Context& ctx, const std::string& p)
{
    if (p.empty() || p.front() == '/' || ctx.cfg.base_dir.empty()) return p;
    return (fs::path(ctx.cfg.base_dir) / p).string();
}

void cmd_metric(Context& ctx)
{
    const auto& c = ctx.cfg.command;
    const auto opt = metric_options(ctx);
    std::vector<double> times;
    std::vector<EmpiricalMeasure> mus, nus;
    if (!c.mu.empty() || !c.nu.empty()) {
        if (c.mu.empty() || c.nu.empty()) throw ConfigError("metric needs both command.mu and command.nu");
        auto a = read_measure_csv(resolve_input(ctx, c.mu));
        auto b = read_measure_csv(resolve_input(ctx, c.nu));
        if (a.measures.size() != b.measures.size())
            throw ConfigError("mu and nu hold different numbers of time slices");
        times = a.times;
        mus = std::move(a.measures);
        nus = std::move(b.measures);
    } else {
        // terminal law of x0 + lambda B against its translate by `shift`
        const auto paths = make_paths(ctx, ctx.spec);
        const std::size_t K = ctx.spec.modes(), M = paths.particles, N = ctx.lattice.steps;
        std::vector<double> p(M * K), q(M * K);
        for (std::size_t m = 0; m < M; ++m)
            for (std::size_t k = 0; k < K; ++k) {
                p[m * K + k] = ctx.x0[k] + ctx.spec.weights[k] * paths.path(m, k)[N];
                q[m * K + k] = p[m * K + k] + c.shift;
            }
        times.push_back(ctx.lattice.t(N));
        mus.push_back(EmpiricalMeasure::uniform(K, std::move(p)));
        nus.push_back(EmpiricalMeasure::uniform(K, std::move(q)));
    }
    Table tab({"t", "bl", "w1", "support_mu", "support_nu"});
    double sup = 0.0;
    for (std::size_t i = 0; i < mus.size(); ++i) {
        auto a = c.subsample > 0 ? subsample(mus[i], c.subsample, ctx.cfg.ensemble.seed) : mus[i];
        auto b = c.subsample > 0 ? subsample(nus[i], c.subsample, ctx.cfg.ensemble.seed) : nus[i];
        const double bl = bl_distance(a, b, opt);
        const double w1 = w1_distance(a, b, opt);
        sup = std::max(sup, bl);
        tab.add_row({times[i], bl, w1, static_cast<double>(a.size()), static_cast<double>(b.size())});
    }
    ctx.add_csv("metric.csv", tab);
    ctx.results["sup_bl"] = sup;
}

void cmd_fbm_test(Context& ctx)
{
    std::set<double> hs(ctx.spec.hurst.begin(), ctx.spec.hurst.end());
    const std::size_t N = ctx.lattice.steps, M = ctx.cfg.ensemble.particles;
    const double Md = static_cast<double>(M);
    Table cov({"hurst", "i", "j", "t_i", "t_j", "sample_cov", "exact_cov", "stderr", "deviation", "z"});
    Table summary({"hurst", "max_deviation", "max_z"});
    double worst_z = 0.0;
    for (double H : hs) {
        const HurstSpectrum one{{H}, {1.0}, ctx.spec.horizon};
        const auto paths = make_paths(ctx, one);
        std::vector<double> acc((N + 1) * (N + 1), 0.0);
        for (std::size_t m = 0; m < M; ++m) {
            const double* b = paths.path(m, 0);
            for (std::size_t i = 1; i <= N; ++i)
                for (std::size_t j = i; j <= N; ++j)
                    acc[i * (N + 1) + j] += b[i] * b[j];
        }
        double max_dev = 0.0, max_z = 0.0;
        for (std::size_t i = 1; i <= N; ++i)
            for (std::size_t j = i; j <= N; ++j) {
                const double ti = ctx.lattice.t(i), tj = ctx.lattice.t(j);
                const double sample = acc[i * (N + 1) + j] / Md;
                const double exact = fbm_covariance(H, ti, tj);
                const double rii = fbm_covariance(H, ti, ti), rjj = fbm_covariance(H, tj, tj);
                const double se = std::sqrt((rii * rjj + exact * exact) / Md);
                const double dev = std::abs(sample - exact);
                max_dev = std::max(max_dev, dev);
                max_z = std::max(max_z, dev / se);
                cov.add_row({H, static_cast<double>(i), static_cast<double>(j), ti, tj, sample, exact, se, dev, dev / se});
            }
        summary.add_row({H, max_dev, max_z});
        worst_z = std::max(worst_z, max_z);
    }
    ctx.add_csv("covariance.csv", cov);
    ctx.add_csv("fbm_summary.csv", summary);
    ctx.results["max_z"] = worst_z;
    ctx.results["within_5se"] = worst_z <= 5.0;
}

void write_file(const fs::path& p, const std::string& bytes)
{
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << bytes;
    if (!out) throw std::runtime_error("write failed: " + p.string());
}

std::string read_file(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

int RunManifest::exit_code() const
{
    if (status == "ok") return 0;
    return error_kind == "ConfigError" ? 2 : 1;
}

json RunManifest::to_json() const
{
    json j;
    j["artifact"] = "mkvcyl";
    j["version"] = version;
    j["timestamp"] = timestamp;
    j["command"] = command;
    j["status"] = status;
    if (status != "ok") j["error"] = {{"kind", error_kind}, {"message", error_message}};
    j["outputs"] = json::array();
    for (const auto& o : outputs) j["outputs"].push_back({{"file", o.file}, {"sha256", o.sha256}, {"bytes", o.bytes}});
    j["results"] = results;
    j["config"] = config_echo;
    return j;
}

RunManifest run(const RunConfig& cfg)
{
    RunManifest man;
    man.command = cfg.command.name;
    man.version = MKVCYL_VERSION;
    man.timestamp = utc_timestamp();
    man.config_echo = serialize_config(cfg);

    const std::size_t K = cfg.spectrum.modes;
    Context ctx{cfg, {}, {}, {}, {}, {}, json::object()};
    try {
        ctx.spec = HurstSpectrum{cfg.spectrum.hurst.resolve(K, "spectrum.hurst"),
                                 cfg.spectrum.lambda.resolve(K, "spectrum.lambda"), cfg.spectrum.horizon};
        validate_spectrum(ctx.spec);
        ctx.lattice = TimeLattice{cfg.spectrum.horizon, cfg.lattice.steps};
        ctx.x0 = cfg.ensemble.x0.resolve(K, "ensemble.x0");
        ctx.C = cfg.drift.bounds.resolve(K, "drift.bounds");
        for (double c : ctx.C)
            if (!(c >= 0.0) || !std::isfinite(c)) throw ConfigError("drift.bounds must be finite and >= 0");

        const auto& name = cfg.command.name;
        if (name == "simulate") cmd_simulate(ctx);
        else if (name == "fixpoint") cmd_fixpoint(ctx);
        else if (name == "girsanov-check") cmd_girsanov(ctx);
        else if (name == "metric") cmd_metric(ctx);
        else if (name == "fbm-test") cmd_fbm_test(ctx);
        else throw ConfigError("unknown command '" + name + "'");
    } catch (const Error& e) {
        man.status = "error";
        man.error_kind = e.kind();
        man.error_message = e.what();
    } catch (const std::exception& e) {
        man.status = "error";
        man.error_kind = "InternalError";
        man.error_message = e.what();
    }
    man.results = ctx.results;

    const fs::path dir(cfg.output.dir);
    fs::create_directories(dir);
    for (const auto& a : ctx.artifacts) {
        const fs::path p = dir / a.name;
        std::string bytes = a.bytes;
        if (a.writer) {
            a.writer(p.string());
            bytes = read_file(p);
        } else {
            write_file(p, bytes);
        }
        man.outputs.push_back({a.name, sha256_hex(bytes), bytes.size()});
    }
    write_file(dir / "manifest.json", man.to_json().dump(2) + "\n");
    return man;
}

} // namespace mkvcyl::cli
