#include "fvsim/experiment.hpp"

#include "fvsim/error.hpp"
#include "fvsim/oracle.hpp"

#include <cstdio>
#include <cstdlib>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace fvsim {

namespace {

using stats::TestReport;

json matrix_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

json vector_json(const Eigen::VectorXd& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
}

std::string lambda_tag(double lambda) {
    std::ostringstream os;
    os << "[lambda=" << lambda << "]";
    return os.str();
}

json estimate_json(const stats::Estimate& e) {
    return {{"value", e.value}, {"std_error", e.std_error}, {"n", e.n}};
}

// Skeleton of one report; the experiment fills in the rest.
json report_header(const ExperimentConfig& c) {
    json r;
    r["schema"] = "fvsim.report";
    r["schema_version"] = kReportSchemaVersion;
    r["experiment"] = to_string(c.experiment);
    r["config_hash"] = config_hash(c);
    r["model_hash"] = content_hash(to_json(c.model));
    r["master_seed"] = c.master_seed;
    r["estimates"] = json::object();
    r["verdicts"] = json::object();
    r["tie_counts"] = {{"total", 0}, {"max_per_replicate", 0}};
    return r;
}

ExperimentResult finish(json report, const std::vector<TestReport>& tests,
                        std::map<std::string, std::string> files = {}) {
    ExperimentResult out;
    json arr = json::array();
    for (const auto& t : tests) {
        arr.push_back(to_json(t));
        out.pass = out.pass && t.pass;
    }
    report["tests"] = arr;
    report["pass"] = out.pass;
    out.report = std::move(report);
    out.files = std::move(files);
    return out;
}

const FiniteChainModel& require_chain(const AnyModel& model, const char* experiment) {
    if (const auto* chain = std::get_if<FiniteChainModel>(&model)) return *chain;
    throw ConfigParseError(std::string(experiment) + " needs a finite_chain model");
}

Eigen::VectorXd as_vector(const TestFunction& f, std::size_t n) {
    const auto v = f.values(n);
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(n));
}

// ---------------------------------------------------------------- oracle

ExperimentResult run_oracle(const ExperimentConfig& c, const FiniteChainModel& chain) {
    const std::size_t n = chain.size();
    const auto survival = oracle::survival_classification(chain);
    std::vector<TestReport> tests;

    json doc;
    doc["n"] = n;
    doc["ordering"] = oracle::kProductOrdering;
    doc["ref_measure"] = vector_json(chain.ref_measure());
    doc["irreducible"] = oracle::irreducibility_check(chain);
    doc["survival"] = {{"absorption", vector_json(survival.absorption)},
                       {"conservative_states", survival.conservative_states},
                       {"zero_one", survival.zero_one}};
    tests.push_back(stats::tolerance_report("survival_zero_one", survival.zero_one ? 0.0 : 1.0, 0.0,
                                            n, "P^x(zeta < inf) is 0 or 1"));

    json resolvents = json::array();
    for (double lambda : c.params.lambdas) {
        if (lambda == 0.0 && !survival.all_die()) continue;
        const auto u = oracle::resolvent(chain, lambda);
        resolvents.push_back({{"lambda", lambda}, {"entries", matrix_json(u.entries)}});
        tests.push_back(stats::tolerance_report("resolvent_symmetry" + lambda_tag(lambda),
                                                oracle::kernel_asymmetry(chain, u),
                                                oracle::kExactTolerance, n,
                                                "m_i U(i,j) = m_j U(j,i)"));
    }
    doc["resolvents"] = resolvents;

    if (survival.all_die()) {
        const auto g = oracle::potential_kernel(chain);
        const auto mu = oracle::invariant_measure(chain);
        const auto z = oracle::z_distribution_exact(chain, oracle::delta_law(chain));
        doc["potential_kernel"] = {{"lambda", 0.0}, {"entries", matrix_json(g.entries)}};
        doc["g_norm"] = mu.g_norm;
        doc["invariant_measure"] = matrix_json(mu.weights);
        doc["z_distribution_delta"] = {{"states", vector_json(z.states)}, {"cemetery", z.cemetery}};
    } else {
        doc["potential_kernel"] = nullptr;
        doc["g_norm"] = nullptr;
        doc["invariant_measure"] = nullptr;
        doc["z_distribution_delta"] = nullptr;
    }

    json report = report_header(c);
    if (survival.all_die()) report["estimates"]["g_norm"] = doc["g_norm"];
    return finish(std::move(report), tests, {{"oracle.json", dump_json(doc)}});
}

// ---------------------------------------------------------------- verify

template <typename Model>
std::vector<Excursion<point_t<Model>>> delta_excursions(const Model& model, std::size_t count,
                                                        std::uint64_t seed, unsigned threads) {
    std::vector<Excursion<point_t<Model>>> out(count);
    parallel_for(count, threads, [&](std::size_t i) {
        Rng rng = make_rng(seed, i);
        const auto x = model.sample_reference(rng);
        out[i] = sample_excursion(model, x, x, kDefaultHorizon, rng);
    });
    return out;
}

template <typename Point> std::size_t count_ties(const std::vector<Excursion<Point>>& samples) {
    std::size_t ties = 0;
    for (const auto& ex : samples) ties += ex.tie ? 1 : 0;
    return ties;
}

ExperimentResult verify_chain(const ExperimentConfig& c, const FiniteChainModel& chain,
                              unsigned threads) {
    const std::size_t n = chain.size();
    const auto& p = c.params;
    const TestFunction f_fn = resolve_function(p.f, n);
    const Eigen::VectorXd f = as_vector(f_fn, n);
    const Eigen::VectorXd g = as_vector(resolve_function(p.g, n), n);
    const auto survival = oracle::survival_classification(chain);
    const bool finite_g = survival.all_die();
    const double tol = oracle::kExactTolerance;
    std::vector<TestReport> tests;
    json report = report_header(c);

    for (double lambda : p.lambdas) {
        if (lambda == 0.0 && !finite_g) continue;
        const std::string tag = lambda_tag(lambda);
        tests.push_back(stats::tolerance_report(
            "resolvent_symmetry" + tag,
            oracle::kernel_asymmetry(chain, oracle::resolvent(chain, lambda)), tol, n,
            "m_i U(i,j) = m_j U(j,i)"));
        if (lambda > 0.0)
            tests.push_back(stats::tolerance_report(
                "resolvent_equation" + tag,
                oracle::verify_resolvent_equation(chain, lambda, lambda + 1.0), tol, n,
                "U_l - U_m = (m - l) U_l U_m"));
        tests.push_back(stats::tolerance_report(
            "reduction_identity" + tag, oracle::reduction_identity_check(chain, f, g, lambda).deviation,
            tol, n, "E^delta int exp(-2 l t) f(X) g(Y) dt = <f, U_l g>/2"));
        tests.push_back(stats::tolerance_report(
            "key_identity" + tag, oracle::key_identity_exact(chain, f, lambda).deviation, tol, n,
            "E^delta exp(-2 l sigma) f(Z) = sum f(x) E^x exp(-l zeta) m_x"));
    }

    if (finite_g) {
        const auto z = oracle::z_distribution_exact(chain, oracle::delta_law(chain));
        tests.push_back(stats::tolerance_report("z_law_equals_m",
                                                (z.states - chain.ref_measure()).cwiseAbs().maxCoeff(),
                                                tol, n, "Z under delta has law m"));
        oracle::StationaryProbe probe;
        for (double lambda : p.lambdas)
            if (lambda > 0.0) {
                probe.lambda = lambda;
                break;
            }
        probe.f = f;
        probe.g = g;
        const auto inv = oracle::invariant_measure_check(chain, probe);
        tests.push_back(stats::tolerance_report("invariant_measure_stationarity",
                                                inv.stationarity_deviation, tol, n * n,
                                                "mu^T A_FV = 0"));
        tests.push_back(stats::tolerance_report(
            "pair_resolvent_identity" + lambda_tag(probe.lambda), inv.resolvent_identity.deviation,
            tol, n * n, "1/2 sum phi G m = 1/(2 l) sum f g G m"));
        report["estimates"]["g_norm"] = inv.measure.g_norm;
    }

    if (p.replicates >= 100) {
        const auto samples = delta_excursions(chain, p.replicates, c.master_seed, threads);
        const std::span<const Excursion<std::size_t>> view(samples);
        for (double lambda : p.lambdas) {
            const double target = oracle::key_identity_exact(chain, f, lambda).rhs;
            tests.push_back(stats::laplace_functional_test(
                view, lambda, f_fn, target, "laplace_functional_mc" + lambda_tag(lambda),
                "E^delta exp(-2 l sigma) f(Z) against the exact target"));
        }

        const auto zlaw = oracle::z_distribution_exact(chain, oracle::delta_law(chain));
        std::vector<std::uint64_t> counts(n + 1, 0);
        for (const auto& ex : samples) ++counts[ex.survivor ? *ex.survivor : n];
        std::vector<double> probs(zlaw.states.data(), zlaw.states.data() + n);
        probs.push_back(zlaw.cemetery);
        const double total = std::accumulate(probs.begin(), probs.end(), 0.0);
        for (auto& q : probs) q /= total;
        auto chi = stats::chi_square_gof(counts, probs, "z_law_mc");
        chi.target_ref = "empirical law of Z from delta against the exact law";
        tests.push_back(chi);

        if (finite_g) {
            std::vector<double> sigmas;
            sigmas.reserve(samples.size());
            for (const auto& ex : samples) sigmas.push_back(ex.sigma);
            const double half_norm = 0.5 * oracle::g_norm(chain);
            tests.push_back(stats::three_sigma_test(sigmas, half_norm, "mean_sigma_mc",
                                                    "E^delta sigma = ||G|| / 2"));
            report["estimates"]["mean_sigma"] = estimate_json(stats::estimate(sigmas));
        }
        report["tie_counts"] = {{"total", count_ties(samples)}, {"max_per_replicate", 0}};
    }
    return finish(std::move(report), tests);
}

ExperimentResult verify_brownian(const ExperimentConfig& c, const DiffusionModel& model,
                                 unsigned threads) {
    if (c.params.f.name != "one")
        throw ConfigParseError("verify on brownian_interval supports f = \"one\" only");
    if (c.params.replicates < 100)
        throw ConfigParseError("verify on brownian_interval needs replicates >= 100");
    const double lo = model.lo;
    const double hi = model.hi;
    std::vector<TestReport> tests;
    json report = report_header(c);

    const auto samples = delta_excursions(model, c.params.replicates, c.master_seed, threads);
    const std::span<const Excursion<double>> view(samples);

    std::vector<double> scaled;
    std::vector<double> sigmas;
    for (const auto& ex : samples) {
        sigmas.push_back(ex.sigma);
        if (ex.survivor) scaled.push_back((*ex.survivor - lo) / (hi - lo));
    }
    auto ks = stats::ks_uniform_test(scaled, "z_uniform_ks");
    ks.target_ref = "Z from the uniform diagonal start is uniform";
    tests.push_back(ks);

    tests.push_back(stats::three_sigma_test(sigmas, 0.5 * interval_closed_form::g_norm(lo, hi),
                                            "mean_sigma_mc", "E^delta sigma = ||G|| / 2"));
    report["estimates"]["mean_sigma"] = estimate_json(stats::estimate(sigmas));

    for (double lambda : c.params.lambdas)
        tests.push_back(stats::laplace_functional_test(
            view, lambda, TestFunction::one(), interval_closed_form::mean_laplace_lifetime(lo, hi, lambda),
            "laplace_functional_mc" + lambda_tag(lambda),
            "E^delta exp(-2 l sigma) = mean of E^x exp(-l zeta)"));

    const std::size_t ties = count_ties(samples);
    report["tie_counts"] = {{"total", ties}, {"max_per_replicate", ties > 0 ? 1 : 0}};
    return finish(std::move(report), tests);
}

// ---------------------------------------------------------------- runs

template <typename Point> struct RunSummary {
    Verdict verdict = Verdict::SurvivedToCap;
    std::size_t branches = 0;
    std::size_t ties = 0;
    double end_time = 0.0;
    double last_branch_time = 0.0;
    std::optional<double> extinction_time;
    Point start_x{};
    Point start_y{};
    Eigen::MatrixXd occupation;
    std::string csv;
};

template <typename Point> Initial<Point> make_initial(const InitialSpec& spec) {
    if (spec.kind == "delta") return Initial<Point>::delta();
    if (spec.kind == "product") return Initial<Point>::product();
    if constexpr (std::is_integral_v<Point>) {
        if (spec.x < 0 || spec.y < 0 || spec.x != std::floor(spec.x) || spec.y != std::floor(spec.y))
            throw ConfigParseError("finite chain start points must be state indices");
        return Initial<Point>::point(static_cast<Point>(spec.x), static_cast<Point>(spec.y));
    } else {
        return Initial<Point>::point(spec.x, spec.y);
    }
}

template <typename Model>
std::vector<RunSummary<point_t<Model>>> run_replicates(const ExperimentConfig& c, const Model& model,
                                                       unsigned threads, bool want_occupation) {
    using P = point_t<Model>;
    const auto& p = c.params;
    std::vector<Initial<P>> initials;
    if (!p.starts.empty()) {
        for (const auto& [x, y] : p.starts) initials.push_back(make_initial<P>({"point", x, y}));
    } else {
        initials.assign(p.replicates, make_initial<P>(p.initial));
    }
    RunOptions options;
    options.record_skeleton = p.dump_trajectories || want_occupation;

    std::vector<RunSummary<P>> out(initials.size());
    parallel_for(initials.size(), threads, [&](std::size_t i) {
        Rng rng = make_rng(c.master_seed, i);
        const auto traj = run_fv(model, initials[i], p.stop, rng, options);
        auto& s = out[i];
        s.verdict = traj.verdict;
        s.branches = traj.branches();
        s.ties = traj.tie_count;
        s.end_time = traj.end_time;
        if (!traj.branch_times.empty()) s.last_branch_time = traj.branch_times.back();
        s.extinction_time = traj.extinction_time;
        s.start_x = traj.start_x;
        s.start_y = traj.start_y;
        if constexpr (std::is_integral_v<P>) {
            if (want_occupation)
                s.occupation = occupation_fractions(traj, model.size(), *p.stop.time_horizon);
        }
        if (p.dump_trajectories) s.csv = trajectory_csv(traj);
    });
    return out;
}

template <typename Point>
void summarize_runs(const ExperimentConfig& c, const std::vector<RunSummary<Point>>& runs,
                    json& report, std::map<std::string, std::string>& files) {
    std::map<std::string, std::size_t> verdicts{{"survived_to_cap", 0},
                                                {"extinct_simultaneous", 0},
                                                {"extinct_detected", 0},
                                                {"horizon_reached", 0}};
    std::size_t ties = 0, max_ties = 0;
    json rows = json::array();
    const std::string model_hash = content_hash(to_json(c.model));
    for (std::size_t i = 0; i < runs.size(); ++i) {
        const auto& r = runs[i];
        ++verdicts[std::string(to_string(r.verdict))];
        ties += r.ties;
        max_ties = std::max(max_ties, r.ties);
        json row = {{"replicate", i},
                    {"seed", derive_replicate_seed(c.master_seed, i)},
                    {"model_hash", model_hash},
                    {"start", {r.start_x, r.start_y}},
                    {"verdict", to_string(r.verdict)},
                    {"branch_count", r.branches},
                    {"tie_count", r.ties},
                    {"end_time", r.end_time}};
        row["extinction_time"] = r.extinction_time ? json(*r.extinction_time) : json(nullptr);
        rows.push_back(row);
        if (!r.csv.empty()) {
            char name[64];
            std::snprintf(name, sizeof name, "trajectories/replicate_%06zu.csv", i);
            files[name] = r.csv;
        }
    }
    report["verdicts"] = verdicts;
    report["tie_counts"] = {{"total", ties}, {"max_per_replicate", max_ties}};
    files["runs.json"] = dump_json(rows);

    std::vector<double> branches;
    for (const auto& r : runs) branches.push_back(static_cast<double>(r.branches));
    report["estimates"]["branch_count"] = estimate_json(stats::estimate(branches));
}

template <typename Model>
ExperimentResult run_simulate(const ExperimentConfig& c, const Model& model, unsigned threads) {
    using P = point_t<Model>;
    json report = report_header(c);
    std::map<std::string, std::string> files;
    std::vector<TestReport> tests;

    bool want_occupation = false;
    double half_norm = 0.0;
    if constexpr (std::is_integral_v<P>) {
        if (c.params.stop.time_horizon && oracle::survival_classification(model).all_die()) {
            want_occupation = true;
            half_norm = 0.5 * oracle::g_norm(model);
        }
    }
    const auto runs = run_replicates(c, model, threads, want_occupation);
    summarize_runs(c, runs, report, files);

    if constexpr (std::is_integral_v<P>) {
        if (want_occupation) {
            const auto n = static_cast<Eigen::Index>(model.size());
            Eigen::MatrixXd occ = Eigen::MatrixXd::Zero(n, n);
            std::vector<double> rates;
            for (const auto& r : runs) {
                occ += r.occupation;
                if (r.branches > 0)
                    rates.push_back(r.last_branch_time / static_cast<double>(r.branches));
            }
            occ /= static_cast<double>(runs.size());
            const auto mu = oracle::invariant_measure(model);
            report["estimates"]["occupation"] = matrix_json(occ);
            report["estimates"]["invariant_measure"] = matrix_json(mu.weights);
            tests.push_back(stats::tolerance_report(
                "occupation_measure", (occ - mu.weights).cwiseAbs().maxCoeff(),
                c.params.occupation_tolerance, runs.size(),
                "time averages converge to G(x,dy)m(dx)/||G||"));
            if (!rates.empty()) {
                const auto e = stats::estimate(rates);
                report["estimates"]["time_per_branch"] = estimate_json(e);
                tests.push_back(stats::tolerance_report("time_per_branch",
                                                        std::abs(e.value / half_norm - 1.0), 0.02,
                                                        rates.size(), "tau_n / n -> ||G|| / 2"));
            }
        }
    } else {
        if (model.kind == DiffusionKind::UniformLeft && !c.params.starts.empty()) {
            std::size_t mismatches = 0;
            for (const auto& r : runs) {
                const bool exact = r.verdict == Verdict::ExtinctSimultaneous && r.extinction_time &&
                                   *r.extinction_time == std::max(r.start_x, r.start_y);
                mismatches += exact ? 0 : 1;
            }
            tests.push_back(stats::tolerance_report(
                "deterministic_supremum", static_cast<double>(mismatches), 0.0, runs.size(),
                "extinction time equals max of the two starts, bit-exact"));
        }
    }
    return finish(std::move(report), tests, std::move(files));
}

template <typename Model>
ExperimentResult run_extinction(const ExperimentConfig& c, const Model& model, unsigned threads) {
    json report = report_header(c);
    std::map<std::string, std::string> files;
    std::vector<TestReport> tests;
    const auto runs = run_replicates(c, model, threads, false);
    summarize_runs(c, runs, report, files);

    std::size_t extinct = 0;
    for (const auto& r : runs)
        extinct += (r.verdict == Verdict::ExtinctDetected ||
                    r.verdict == Verdict::ExtinctSimultaneous) ? 1 : 0;
    const double fraction = static_cast<double>(extinct) / static_cast<double>(runs.size());
    report["estimates"]["extinct_fraction"] = fraction;
    if (c.params.min_extinct_fraction)
        tests.push_back(stats::minimum_report("extinct_fraction_min", fraction,
                                              *c.params.min_extinct_fraction, runs.size(),
                                              "fraction of runs with a detected extinction"));
    if (c.params.max_extinct_fraction)
        tests.push_back(stats::tolerance_report("extinct_fraction_max", fraction,
                                                *c.params.max_extinct_fraction, runs.size(),
                                                "fraction of runs with a detected extinction"));
    return finish(std::move(report), tests, std::move(files));
}

std::string point_text(std::size_t v) { return std::to_string(v); }
std::string point_text(double v) { return format_double(v); }

} // namespace

json to_json(const stats::TestReport& r) {
    json j;
    j["name"] = r.name;
    j["statistic"] = std::isfinite(r.statistic) ? json(r.statistic) : json(nullptr);
    j["p_value"] = r.p_value;
    j["n_samples"] = r.n_samples;
    j["pass"] = r.pass;
    j["gate"] = stats::to_string(r.gate);
    j["threshold"] = r.threshold;
    j["target_ref"] = r.target_ref;
    if (r.estimate) j["estimate"] = *r.estimate;
    if (r.std_error) j["std_error"] = *r.std_error;
    if (r.target) j["target"] = *r.target;
    return j;
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

void dump_value(const json& v, int depth, std::string& out) {
    const std::string pad(2 * static_cast<std::size_t>(depth + 1), ' ');
    const std::string close(2 * static_cast<std::size_t>(depth), ' ');
    if (v.is_object()) {
        if (v.empty()) {
            out += "{}";
            return;
        }
        out += "{\n";
        bool first = true;
        for (auto it = v.begin(); it != v.end(); ++it) {
            if (!first) out += ",\n";
            first = false;
            out += pad + json(it.key()).dump() + ": ";
            dump_value(it.value(), depth + 1, out);
        }
        out += "\n" + close + "}";
    } else if (v.is_array()) {
        if (v.empty()) {
            out += "[]";
            return;
        }
        out += "[\n";
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i > 0) out += ",\n";
            out += pad;
            dump_value(v[i], depth + 1, out);
        }
        out += "\n" + close + "]";
    } else if (v.is_number_float()) {
        const double d = v.get<double>();
        out += std::isfinite(d) ? format_double(d) : "null";
    } else {
        out += v.dump();
    }
}

} // namespace

std::string dump_json(const json& doc) {
    std::string out;
    dump_value(doc, 0, out);
    out += "\n";
    return out;
}

template <typename Point> std::string trajectory_csv(const FVTrajectory<Point>& traj) {
    std::string out = "event_index,time,kind,x,y\n";
    for (std::size_t i = 0; i < traj.skeleton.size(); ++i) {
        const auto& e = traj.skeleton[i];
        out += std::to_string(i) + "," + format_double(e.time) + "," + std::string(to_string(e.kind)) +
               "," + (e.x ? point_text(*e.x) : std::string()) + "," +
               (e.y ? point_text(*e.y) : std::string()) + "\n";
    }
    return out;
}

template std::string trajectory_csv(const FVTrajectory<std::size_t>&);
template std::string trajectory_csv(const FVTrajectory<double>&);

unsigned resolve_threads(std::optional<unsigned> requested, const ExperimentConfig& config) {
    if (requested && *requested > 0) return *requested;
    if (config.threads) return *config.threads;
    if (const char* env = std::getenv("FVSIM_THREADS")) {
        char* end = nullptr;
        const unsigned long v = std::strtoul(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

ExperimentResult run_experiment(const ExperimentConfig& config, unsigned threads) {
    const AnyModel model = build_model(config.model);
    switch (config.experiment) {
    case ExperimentKind::Oracle: return run_oracle(config, require_chain(model, "oracle"));
    case ExperimentKind::Verify:
        if (const auto* chain = std::get_if<FiniteChainModel>(&model))
            return verify_chain(config, *chain, threads);
        if (const auto& d = std::get<DiffusionModel>(model); d.kind == DiffusionKind::BrownianInterval)
            return verify_brownian(config, d, threads);
        throw ConfigParseError("verify supports finite_chain and brownian_interval models");
    case ExperimentKind::Simulate:
        return std::visit([&](const auto& m) { return run_simulate(config, m, threads); }, model);
    case ExperimentKind::Extinction:
        return std::visit([&](const auto& m) { return run_extinction(config, m, threads); }, model);
    }
    throw ConfigParseError("unknown experiment");
}

void write_result(const ExperimentResult& result, const std::filesystem::path& out_dir,
                  double wall_seconds) {
    namespace fs = std::filesystem;
    std::map<std::string, std::string> files = result.files;
    files["report.json"] = dump_json(result.report);
    files["timing.json"] = dump_json(json{{"wall_time_seconds", wall_seconds}});

    std::vector<std::pair<fs::path, fs::path>> staged;
    try {
        for (const auto& [name, content] : files) {
            const fs::path target = out_dir / name;
            fs::create_directories(target.parent_path());
            fs::path tmp = target;
            tmp += ".partial";
            std::ofstream out(tmp, std::ios::binary);
            out << content;
            out.close();
            if (!out) throw Error("failed writing " + tmp.string());
            staged.emplace_back(tmp, target);
        }
    } catch (...) {
        for (const auto& [tmp, _] : staged) fs::remove(tmp);
        throw;
    }
    for (const auto& [tmp, target] : staged) fs::rename(tmp, target);
}

} // namespace fvsim
