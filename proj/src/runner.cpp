#include "spdelab/runner.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <ostream>
#include <sstream>
#include <thread>

#include "spdelab/noise.hpp"
#include "spdelab/report.hpp"

namespace spdelab::cli {

using nlohmann::ordered_json;

namespace {

spectral::CovarianceSpec covariance_from_string(const std::string& spec, const std::string& key) {
    if (spec == "white") return spectral::CovarianceSpec::white();
    if (spec.rfind("fractional:", 0) == 0) {
        const double s = std::strtod(spec.c_str() + 11, nullptr);
        return spectral::CovarianceSpec::fractional(s);
    }
    if (spec.rfind("diagonal:", 0) == 0) {
        std::vector<double> q;
        std::string rest = spec.substr(9);
        std::size_t pos = 0;
        while (pos < rest.size()) {
            auto comma = rest.find(',', pos);
            if (comma == std::string::npos) comma = rest.size();
            q.push_back(std::strtod(rest.substr(pos, comma - pos).c_str(), nullptr));
            pos = comma + 1;
        }
        return spectral::CovarianceSpec::diagonal(std::move(q));
    }
    throw ConfigError("config key '" + key + "': unknown covariance '" + spec + "'");
}

sde::InitialValue x0_from_string(const std::string& spec, const std::string& key) {
    if (spec == "zero") return sde::InitialValue::zero();
    if (spec.rfind("parabola:", 0) == 0)
        return sde::InitialValue::parabola(std::strtod(spec.c_str() + 9, nullptr));
    if (spec.rfind("mode:", 0) == 0) {
        const std::string rest = spec.substr(5);
        const auto comma = rest.find(',');
        if (comma == std::string::npos)
            throw ConfigError("config key '" + key + "': x0 mode needs 'mode:i,amp'");
        return sde::InitialValue::eigenmode(std::atoi(rest.substr(0, comma).c_str()),
                                            std::strtod(rest.c_str() + comma + 1, nullptr));
    }
    throw ConfigError("config key '" + key + "': unknown x0 '" + spec + "'");
}

int resolve_threads(const Config& cfg) {
    const int t = static_cast<int>(cfg.get_int("experiment.threads"));
    if (t > 0) return t;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

ordered_json json_header(const Config& cfg, const std::string& suite) {
    ordered_json j;
    j["suite"] = suite;
    j["seed"] = cfg.get_u64("experiment.seed");
    char hash[24];
    std::snprintf(hash, sizeof hash, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(cfg.canonical_text())));
    j["config_hash"] = hash;
    j["config"] = ordered_json::object();
    for (const auto& [k, v] : cfg.entries()) j["config"][k] = v;
    return j;
}

ordered_json json_levels(const std::vector<lab::LevelResult>& levels) {
    ordered_json arr = ordered_json::array();
    for (const auto& l : levels)
        arr.push_back({{"h", l.h}, {"error", l.error}, {"stderr", l.stderr_}});
    return arr;
}

ordered_json json_fit(const lab::RateFit& fit) {
    return {{"slope", fit.slope},
            {"intercept", fit.intercept},
            {"ci_lo", fit.ci_lo},
            {"ci_hi", fit.ci_hi},
            {"se", fit.se}};
}

ordered_json json_saturation(const lab::SaturationInfo& sat) {
    return {{"saturated", sat.saturated},
            {"max_rel_change", sat.max_rel_change},
            {"half_dt_levels", json_levels(sat.half_dt_levels)}};
}

// Reported strong errors must decrease along the ladder, allowing a single
// inversion that stays within 2 combined MC standard errors.
bool monotone_enough(const std::vector<lab::LevelResult>& levels) {
    int inversions = 0;
    for (std::size_t l = 1; l < levels.size(); ++l) {
        if (levels[l].error < levels[l - 1].error) continue;
        const double slack = 2.0 * std::hypot(levels[l].stderr_, levels[l - 1].stderr_);
        if (levels[l].error > levels[l - 1].error + slack) return false;
        if (++inversions > 1) return false;
    }
    return true;
}

lab::ExperimentPlan plan_common(const Config& cfg) {
    lab::ExperimentPlan plan{
        model_from_config(cfg),
        cfg.get_int_list("space.ladder"),
        lab::ReferenceSpec{},
        cfg.get_double("experiment.dt"),
        static_cast<int>(cfg.get_int("experiment.samples")),
        cfg.get_u64("experiment.seed"),
        {},
        static_cast<int>(cfg.get_int("experiment.truncation")),
        resolve_threads(cfg),
        sde::SchemeKind::exponential};
    const std::string ref = cfg.get_string("space.reference");
    if (ref.rfind("spectral:", 0) == 0)
        plan.reference = lab::ReferenceSpec::spectral_modes(std::atoi(ref.c_str() + 9));
    else if (ref.rfind("fem:", 0) == 0)
        plan.reference = lab::ReferenceSpec::fem_mesh(std::atoi(ref.c_str() + 4));
    else
        throw ConfigError("config key 'space.reference': unknown reference '" + ref + "'");
    const std::string scheme = cfg.get_string("experiment.scheme");
    if (scheme == "exponential")
        plan.scheme = sde::SchemeKind::exponential;
    else if (scheme == "semi_implicit")
        plan.scheme = sde::SchemeKind::semi_implicit;
    else
        throw ConfigError("config key 'experiment.scheme': unknown scheme '" + scheme + "'");
    return plan;
}

int run_assemble_check(const Config& cfg, ordered_json& j, std::ostream& log) {
    const auto ladder = cfg.get_int_list("space.check_ladder");
    bool all_pass = true;
    ordered_json checks = ordered_json::array();
    for (int k : ladder) {
        fem::FemSpace space(fem::Mesh1D::uniform(1 << k));
        const int n = space.dim();
        double ortho_err = 0.0;
        const Eigen::MatrixXd& w = space.eigenvectors();
        for (int a = 0; a < n; ++a)
            for (int b = a; b < n; ++b) {
                const double v = w.col(a).dot(space.mass_apply(w.col(b))) - (a == b ? 1.0 : 0.0);
                ortho_err = std::max(ortho_err, std::abs(v));
            }
        bool eig_lower = space.eigenvalues()(0) >= spectral::eigenvalue(1) - 1e-9;
        double minmax_viol = 0.0;
        for (int i = 1; i <= n; ++i)
            minmax_viol =
                std::max(minmax_viol, spectral::eigenvalue(i) - space.eigenvalues()(i - 1));
        // Ritz identity R_h = A_h^{-1} P_h A on a few smooth vectors.
        double ritz_identity_err = 0.0;
        for (int mode : {1, 2, 5}) {
            const auto u = spectral::SpectralVector::unit(64, mode);
            const auto direct = fem::ritz_project(space, u);
            const auto via_elliptic = fem::elliptic_solve(
                space, fem::load_from_spectral_A(space, u));
            ritz_identity_err = std::max(
                ritz_identity_err,
                (direct.coeffs() - via_elliptic.coeffs()).cwiseAbs().maxCoeff());
        }
        const bool pass = ortho_err < 1e-10 && eig_lower && minmax_viol <= 1e-6 &&
                          ritz_identity_err < 1e-9;
        all_pass = all_pass && pass;
        checks.push_back({{"cells", 1 << k},
                          {"m_orthonormality_error", ortho_err},
                          {"eigenvalue_lower_bound_ok", eig_lower},
                          {"minmax_violation", minmax_viol},
                          {"ritz_identity_error", ritz_identity_err},
                          {"pass", pass}});
        log << "  assemble 2^-" << k << (pass ? " pass" : " FAIL") << "\n";
    }
    j["checks"] = checks;
    j["all_pass"] = all_pass;
    return all_pass ? 0 : 2;
}

int run_operator_check(const Config& cfg, ordered_json& j, std::ostream& log) {
    const auto report = lab::operator_checks(cfg.get_int_list("space.check_ladder"),
                                             static_cast<int>(cfg.get_int("space.mode_budget")),
                                             cfg.get_u64("experiment.seed"));
    ordered_json arr = ordered_json::array();
    std::vector<std::string> families;
    for (const auto& c : report.checks) {
        if (std::find(families.begin(), families.end(), c.family) == families.end())
            families.push_back(c.family);
        ordered_json meas = ordered_json::array();
        for (const auto& [x, v] : c.measured) meas.push_back({{"at", x}, {"value", v}});
        arr.push_back({{"family", c.family},
                       {"name", c.name},
                       {"kind", c.kind},
                       {"measured", meas},
                       {"statistic", c.statistic},
                       {"threshold", c.threshold},
                       {"pass", c.pass}});
        log << "  " << c.name << ": statistic " << c.statistic << " vs " << c.threshold
            << (c.pass ? " pass" : " FAIL") << "\n";
    }
    j["checks"] = arr;
    j["families"] = families;
    j["family_count"] = families.size();
    j["all_pass"] = report.all_pass;
    return report.all_pass ? 0 : 2;
}

int run_ito_check(const Config& cfg, ordered_json& j, std::ostream& log) {
    const int threads = resolve_threads(cfg);
    const int samples = static_cast<int>(cfg.get_int("ito.samples"));
    const int K = static_cast<int>(cfg.get_int("ito.truncation"));
    const std::uint64_t seed = cfg.get_u64("experiment.seed");

    const noise::WienerConfig identity_cfg{
        K, covariance_from_string(cfg.get_string("ito.identity_covariance"),
                                  "ito.identity_covariance"),
        seed};
    const auto identity = noise::ito_isometry_check(
        identity_cfg, noise::ItoIntegrand::identity, cfg.get_double("ito.identity_T"),
        cfg.get_double("ito.identity_dt"), samples, threads);

    const noise::WienerConfig heat_cfg{K, spectral::CovarianceSpec::white(), seed + 1};
    const auto heat = noise::ito_isometry_check(heat_cfg, noise::ItoIntegrand::heat_kernel,
                                                cfg.get_double("ito.heat_T"),
                                                cfg.get_double("ito.heat_dt"), samples, threads);

    lab::AnchorConfig anchor;
    anchor.drift_a = cfg.get_double("anchor.drift_a");
    anchor.covariance_s = cfg.get_double("anchor.covariance_s");
    anchor.T = cfg.get_double("anchor.T");
    anchor.dt = cfg.get_double("anchor.dt");
    anchor.ref_modes = static_cast<int>(cfg.get_int("anchor.reference_modes"));
    anchor.mesh_exponent = static_cast<int>(cfg.get_int("anchor.mesh_exponent"));
    anchor.samples = static_cast<int>(cfg.get_int("anchor.samples"));
    anchor.seed = seed + 2;
    anchor.threads = threads;
    const auto anchor_rep = lab::estimator_anchor(anchor);

    const auto ito_json = [](const noise::ItoReport& r) {
        return ordered_json{{"empirical", r.empirical},   {"analytic", r.analytic},
                            {"discrete_mean", r.discrete_mean}, {"stderr", r.stderr_},
                            {"z", r.z},                   {"samples", r.samples},
                            {"pass", r.pass}};
    };
    j["identity"] = ito_json(identity);
    j["heat_kernel"] = ito_json(heat);
    j["anchor"] = {{"exact_ref", anchor_rep.exact_ref},
                   {"exact_fem", anchor_rep.exact_fem},
                   {"exact_diff", anchor_rep.exact_diff},
                   {"estimate", anchor_rep.estimate},
                   {"stderr", anchor_rep.stderr_},
                   {"deviation_sigmas", anchor_rep.deviation_sigmas},
                   {"pass", anchor_rep.pass}};
    log << "  identity integrand: z = " << identity.z << (identity.pass ? " pass" : " FAIL")
        << "\n  heat kernel integrand: z = " << heat.z << (heat.pass ? " pass" : " FAIL")
        << "\n  estimator anchor: deviation " << anchor_rep.deviation_sigmas << " sigma"
        << (anchor_rep.pass ? " pass" : " FAIL") << "\n";
    const bool all = identity.pass && heat.pass && anchor_rep.pass;
    j["all_pass"] = all;
    return all ? 0 : 2;
}

int run_strong_rate(const Config& cfg, ordered_json& j, std::ostream& log,
                    const std::filesystem::path& dir) {
    auto plan = plan_common(cfg);
    const auto rep = lab::strong_error(plan);

    const double target = cfg.get_double("acceptance.strong_slope");
    const double tol = cfg.get_double("acceptance.strong_tol");
    const bool slope_ok = std::abs(rep.fit.slope - target) <= tol;
    const bool mono_ok = monotone_enough(rep.levels);
    const bool pass = slope_ok && mono_ok && rep.saturation.saturated;

    j["levels"] = json_levels(rep.levels);
    j["fit"] = json_fit(rep.fit);
    j["saturation"] = json_saturation(rep.saturation);
    j["reference_floor"] = rep.reference_floor;
    j["tail_variance_bound"] = rep.tail_variance_bound;
    j["dt"] = rep.dt;
    j["samples"] = rep.samples;
    j["truncation"] = rep.truncation;
    j["acceptance"] = {{"target_slope", target}, {"tolerance", tol},
                       {"slope_ok", slope_ok},   {"monotone_ok", mono_ok},
                       {"saturated", rep.saturation.saturated}, {"pass", pass}};
    write_text_file(dir / "rates.csv", rates_csv(rep.levels));
    log << "  strong rate: slope " << rep.fit.slope << " (target " << target << " +- " << tol
        << ")" << (pass ? " pass" : " FAIL") << "\n";
    return pass ? 0 : 2;
}

int run_weak_rate(const Config& cfg, ordered_json& j, std::ostream& log,
                  const std::filesystem::path& dir) {
    auto plan = plan_common(cfg);
    std::istringstream tf_list(cfg.get_string("weak.test_functions"));
    std::string name;
    while (std::getline(tf_list, name, ',')) {
        if (name == "gauss")
            plan.test_functions.push_back(lab::TestFunction::gauss());
        else if (name == "cosine")
            plan.test_functions.push_back(lab::TestFunction::cosine());
        else
            throw ConfigError("config key 'weak.test_functions': unknown functional '" + name +
                              "'");
    }
    const auto rep = lab::weak_error(plan);

    const double slope_min = cfg.get_double("acceptance.weak_slope_min");
    const double stderr_ratio = cfg.get_double("acceptance.weak_stderr_ratio");
    bool pass = true;
    ordered_json fns = ordered_json::array();
    for (const auto& f : rep.functions) {
        const bool slope_ok = f.fit.slope >= slope_min;
        bool noise_ok = true;
        for (const auto& l : f.levels) noise_ok = noise_ok && l.stderr_ <= stderr_ratio * l.error;
        const bool fpass = slope_ok && noise_ok && f.saturation.saturated;
        pass = pass && fpass;
        fns.push_back({{"name", f.name},
                       {"levels", json_levels(f.levels)},
                       {"fit", json_fit(f.fit)},
                       {"saturation", json_saturation(f.saturation)},
                       {"slope_ok", slope_ok},
                       {"stderr_ok", noise_ok},
                       {"pass", fpass}});
        write_text_file(dir / ("weak_" + f.name + ".csv"), rates_csv(f.levels));
        log << "  weak rate [" << f.name << "]: slope " << f.fit.slope << " (min " << slope_min
            << ")" << (fpass ? " pass" : " FAIL") << "\n";
    }
    j["functions"] = fns;
    j["strong_diagnostic"] = {{"levels", json_levels(rep.strong.levels)},
                              {"fit", json_fit(rep.strong.fit)}};
    j["reference_floor"] = rep.strong.reference_floor;
    j["tail_variance_bound"] = rep.strong.tail_variance_bound;
    j["dt"] = rep.strong.dt;
    j["samples"] = rep.strong.samples;
    j["truncation"] = rep.strong.truncation;
    j["all_pass"] = pass;
    write_text_file(dir / "strong_diag.csv", rates_csv(rep.strong.levels));
    return pass ? 0 : 2;
}

}  // namespace

sde::ModelSpec model_from_config(const Config& cfg) {
    const std::string drift = cfg.get_string("model.drift");
    sde::DriftKind fk = sde::DriftKind::zero;
    double fa = 0.0;
    if (drift == "zero")
        fk = sde::DriftKind::zero;
    else if (drift == "sin")
        fk = sde::DriftKind::sine;
    else if (drift == "ratio")
        fk = sde::DriftKind::ratio;
    else if (drift.rfind("linear:", 0) == 0) {
        fk = sde::DriftKind::linear;
        fa = std::strtod(drift.c_str() + 7, nullptr);
    } else
        throw ConfigError("config key 'model.drift': unknown drift '" + drift + "'");

    const std::string diff = cfg.get_string("model.diffusion");
    sde::DiffusionKind gk;
    if (diff == "zero")
        gk = sde::DiffusionKind::zero;
    else if (diff == "additive")
        gk = sde::DiffusionKind::additive;
    else if (diff == "mult_sin")
        gk = sde::DiffusionKind::mult_sine;
    else if (diff == "mult_invsqrt")
        gk = sde::DiffusionKind::mult_inv_sqrt;
    else
        throw ConfigError("config key 'model.diffusion': unknown diffusion '" + diff + "'");

    const double T = cfg.get_double("model.final_time");
    if (T <= 0.0) throw ConfigError("config key 'model.final_time': must be > 0");
    const double dt = cfg.get_double("experiment.dt");
    if (dt <= 0.0) throw ConfigError("config key 'experiment.dt': must be > 0");

    try {
        return sde::ModelSpec(fk, fa, gk,
                              covariance_from_string(cfg.get_string("model.covariance"),
                                                     "model.covariance"),
                              x0_from_string(cfg.get_string("model.x0"), "model.x0"), T);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config section 'model': ") + e.what());
    }
}

lab::ExperimentPlan plan_from_config(const Config& cfg) { return plan_common(cfg); }

bool known_subcommand(const std::string& name) {
    return name == "assemble-check" || name == "operator-check" || name == "ito-check" ||
           name == "strong-rate" || name == "weak-rate" || name == "all";
}

SuiteResult run_suite(const std::string& subcommand, const Config& cfg, std::ostream& log) {
    if (subcommand == "all") {
        int worst = 0;
        SuiteResult last;
        for (const char* name :
             {"assemble-check", "operator-check", "ito-check", "strong-rate", "weak-rate"}) {
            last = run_suite(name, cfg, log);
            worst = std::max(worst, last.exit_code);
        }
        last.exit_code = worst;
        return last;
    }
    if (!known_subcommand(subcommand))
        throw ConfigError("unknown subcommand '" + subcommand + "'");

    const std::filesystem::path out_root = cfg.get_string("output.dir");
    const auto dir = make_run_dir(out_root, subcommand);
    log << subcommand << " -> " << dir.string() << "\n";

    ordered_json j = json_header(cfg, subcommand);
    int code;
    if (subcommand == "assemble-check")
        code = run_assemble_check(cfg, j, log);
    else if (subcommand == "operator-check")
        code = run_operator_check(cfg, j, log);
    else if (subcommand == "ito-check")
        code = run_ito_check(cfg, j, log);
    else if (subcommand == "strong-rate")
        code = run_strong_rate(cfg, j, log, dir);
    else
        code = run_weak_rate(cfg, j, log, dir);

    j["exit_code"] = code;
    write_text_file(dir / "report.json", j.dump(2) + "\n");
    return {code, dir};
}

}  // namespace spdelab::cli
