#include "liapcert/cli.hpp"

#include "liapcert/errors.hpp"
#include "liapcert/gallery.hpp"
#include "liapcert/scalar.hpp"
#include "liapcert/strong.hpp"
#include "liapcert/weak.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

namespace liapcert::cli {

using nlohmann::json;

std::string format_float(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.16e", x);
    return buf;
}

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string format_bool(bool b) { return b ? "1" : "0"; }

// ---------------------------------------------------------------------------
// report assembly

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
};

struct Report {
    // Either a flat key/value record, a table, or both (record first).
    std::vector<std::pair<std::string, std::string>> record;
    std::optional<Table> table;
};

void write_csv(const Report& report, std::ostream& out) {
    if (!report.record.empty()) {
        out << "key,value\n";
        for (const auto& [k, v] : report.record) {
            out << k << ',' << v << '\n';
        }
        if (report.table) out << '\n';
    }
    if (report.table) {
        const Table& t = *report.table;
        for (size_t i = 0; i < t.columns.size(); ++i) {
            out << (i ? "," : "") << t.columns[i];
        }
        out << '\n';
        for (const auto& row : t.rows) {
            for (size_t i = 0; i < row.size(); ++i) {
                out << (i ? "," : "") << row[i];
            }
            out << '\n';
        }
    }
}

void write_json(const Report& report, std::ostream& out) {
    json doc = json::object();
    for (const auto& [k, v] : report.record) {
        doc[k] = v;
    }
    if (report.table) {
        json rows = json::array();
        for (const auto& row : report.table->rows) {
            json obj = json::object();
            for (size_t i = 0; i < row.size(); ++i) {
                obj[report.table->columns[i]] = row[i];
            }
            rows.push_back(std::move(obj));
        }
        doc["rows"] = std::move(rows);
    }
    out << doc.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// configuration

struct Tolerances {
    double positivity = 0.0;
    double root_residual = 1e-10;
    double envelope = 1e-6;
};

struct GlobalOptions {
    std::string config_path;
    std::string output_path;
    std::string format = "csv";
    int jobs = 1;
    Tolerances tol;
};

const std::vector<std::string> kKnownGlobalKeys = {
    "output", "format", "jobs", "tolerances",
    "roots",  "scan",   "certify", "simulate", "pde", "weak"};

// documented schema: every key of every section must be known
const std::map<std::string, std::vector<std::string>> kSectionKeys = {
    {"tolerances", {"positivity", "root_residual", "envelope"}},
    {"roots", {"lambda", "c"}},
    {"scan",
     {"lambda_min", "lambda_max", "cfrac_min", "cfrac_max", "grid_lambda",
      "grid_c"}},
    {"certify",
     {"variant", "example", "modes", "L", "gamma", "lambda", "c", "d", "p",
      "eps", "potential_a", "potential_b", "multiplier"}},
    {"simulate",
     {"system", "lambda", "c", "d", "modes", "L", "gamma", "T", "dt", "method",
      "p", "eps", "potential_a", "potential_b", "multiplier"}},
    {"pde",
     {"example", "modes", "L", "gamma", "lambda", "c", "d", "p", "eps", "T",
      "dt", "potential_a", "potential_b", "multiplier"}},
    {"weak", {"modes", "c", "p", "T", "L"}},
};

json load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw InvalidInputError("config: cannot open " + path);
    }
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw InvalidInputError(std::string("config: parse error: ") + e.what());
    }
    if (!doc.is_object()) {
        throw InvalidInputError("config: top level must be an object");
    }
    for (const auto& [key, value] : doc.items()) {
        if (std::find(kKnownGlobalKeys.begin(), kKnownGlobalKeys.end(), key) ==
            kKnownGlobalKeys.end()) {
            throw InvalidInputError("config: unknown key '" + key + "'");
        }
        const auto section = kSectionKeys.find(key);
        if (section == kSectionKeys.end()) continue;
        if (!value.is_object()) {
            throw InvalidInputError("config: '" + key + "' must be an object");
        }
        for (const auto& [subkey, _] : value.items()) {
            if (std::find(section->second.begin(), section->second.end(),
                          subkey) == section->second.end()) {
                throw InvalidInputError("config: unknown key '" + key + "." +
                                        subkey + "'");
            }
        }
    }
    return doc;
}

// Fills an option from the subcommand's config section unless the flag was
// given on the command line (flags win over the file).
class ConfigMerger {
public:
    ConfigMerger(const json& doc, const std::string& section,
                 const std::vector<std::string>& known_keys)
        : section_(doc.contains(section) ? doc.at(section) : json::object()) {
        for (const auto& [key, _] : section_.items()) {
            if (std::find(known_keys.begin(), known_keys.end(), key) ==
                known_keys.end()) {
                throw InvalidInputError("config: unknown key '" + section +
                                        "." + key + "'");
            }
        }
    }

    template <typename T>
    void fill(const CLI::Option* opt, const std::string& key, T& value) const {
        if (opt != nullptr && opt->count() > 0) return;
        if (!section_.contains(key)) return;
        try {
            value = section_.at(key).get<T>();
        } catch (const json::exception&) {
            throw InvalidInputError("config: bad value for '" + key + "'");
        }
    }

private:
    json section_;
};

std::function<double(double)> named_potential(const std::string& name,
                                              double L) {
    if (name == "zero") return [](double) { return 0.0; };
    if (name == "one") return [](double) { return 1.0; };
    if (name == "sin") return [](double x) { return std::sin(x); };
    if (name == "cos") return [](double x) { return std::cos(x); };
    if (name == "1+x") return [](double x) { return 1.0 + x; };
    if (name == "x(L-x)") return [L](double x) { return x * (L - x); };
    throw InvalidInputError(
        "unknown potential '" + name +
        "' (known: zero, one, sin, cos, 1+x, x(L-x))");
}

// ---------------------------------------------------------------------------
// system construction shared by certify / simulate / pde

struct PdeOptions {
    std::string example;
    int modes = 16;
    double L = kPi;
    double gamma = 0.5;
    double lambda = 1.0;
    double c = 0.3;
    double d = 0.4;
    std::string potential_a = "sin";
    std::string potential_b = "cos";
    std::string multiplier = "x(L-x)";
};

struct PdeSystem {
    std::shared_ptr<const strong::OperatorPair> pair;
    // Certificates use the general functional for every example; the string's
    // displayed variant (with its redundant lower-order terms) is exposed in
    // the library for inspection but does not certify.
    std::function<forms::QuadraticForm(double, double)> H_of;
};

PdeSystem build_pde_system(const PdeOptions& opt) {
    const gallery::DiscretizationSpec spec{opt.modes, opt.L};
    PdeSystem sys;
    if (opt.example == "complex") {
        sys.pair = std::make_shared<strong::OperatorPair>(
            gallery::complex_scalar(opt.lambda, opt.c, opt.d));
    } else if (opt.example == "wave") {
        sys.pair = std::make_shared<strong::OperatorPair>(
            gallery::wave_strong(spec, opt.gamma));
    } else if (opt.example == "plate") {
        sys.pair = std::make_shared<strong::OperatorPair>(
            gallery::plate_structural(spec, opt.gamma));
    } else if (opt.example == "string") {
        sys.pair = std::make_shared<strong::OperatorPair>(
            gallery::string_periodic(spec, opt.gamma));
    } else if (opt.example == "wave-potential") {
        sys.pair = std::make_shared<strong::OperatorPair>(gallery::wave_potentials(
            spec, opt.gamma, named_potential(opt.potential_a, opt.L),
            named_potential(opt.potential_b, opt.L)));
    } else if (opt.example == "plate-multiplication") {
        sys.pair = std::make_shared<strong::OperatorPair>(
            gallery::plate_multiplication(spec, opt.gamma,
                                          named_potential(opt.multiplier, opt.L)));
    } else {
        throw InvalidInputError("unknown example '" + opt.example +
                                "' (known: complex, wave, plate, string, "
                                "wave-potential, plate-multiplication)");
    }
    sys.H_of = [pair = sys.pair](double p, double eps) {
        return strong::liapunov_form_strong(*pair, p, eps);
    };
    return sys;
}

// Deterministic smooth initial state, normalized so H0(U0) = 1.
Eigen::VectorXd default_datum(const strong::OperatorPair& pair) {
    const int n = pair.n;
    Eigen::VectorXd U(4 * n);
    for (int k = 1; k <= n; ++k) {
        U(k - 1) = 1.0 / double(k * k);
        U(n + k - 1) = 1.0 / double((k + 1) * (k + 1));
        U(2 * n + k - 1) = 1.0 / double((k + 2) * (k + 2));
        U(3 * n + k - 1) = (k % 2 == 0 ? -1.0 : 1.0) / double((k + 2) * (k + 2));
    }
    const double h0 = strong::base_energy_form(pair)(U);
    return U / std::sqrt(h0);
}

void append_condition_report(Report& report, const strong::ConditionReport& c) {
    report.record.emplace_back("norm_C_V_Vprime", format_float(c.norm_C_V_Vprime));
    report.record.emplace_back("norm_Cinv_H_V", format_float(c.norm_Cinv_H_V));
    report.record.emplace_back("norm_Cinv_Vprime_H",
                               format_float(c.norm_Cinv_Vprime_H));
    report.record.emplace_back("norm_commutator_D",
                               format_float(c.norm_commutator_D));
    report.record.emplace_back("conditions_pass", format_bool(c.passes));
}

void append_certificate_report(Report& report,
                               const forms::CertificateReport& c) {
    report.record.emplace_back("positivity_margin",
                               format_float(c.positivity_margin));
    report.record.emplace_back("gamma_strict", format_float(c.gamma));
    report.record.emplace_back("certified_delta", format_float(c.delta));
    report.record.emplace_back("certified_norm_rate",
                               format_float(0.5 * c.delta));
    report.record.emplace_back("certificate_valid", format_bool(c.valid));
    if (std::isfinite(c.dissipation_bound_slack)) {
        report.record.emplace_back("dissipation_bound_slack",
                                   format_float(c.dissipation_bound_slack));
    }
    for (size_t i = 0; i < c.notes.size(); ++i) {
        report.record.emplace_back("note_" + std::to_string(i), c.notes[i]);
    }
}

// ---------------------------------------------------------------------------
// worker pool: deterministic order, rows independent

void parallel_rows(int n_rows, int jobs, const std::function<void(int)>& work) {
    jobs = std::max(1, jobs);
    if (jobs == 1 || n_rows <= 1) {
        for (int i = 0; i < n_rows; ++i) work(i);
        return;
    }
    std::vector<std::thread> pool;
    std::mutex mtx;
    int next = 0;
    std::exception_ptr first_error;
    for (int t = 0; t < std::min(jobs, n_rows); ++t) {
        pool.emplace_back([&] {
            for (;;) {
                int i;
                {
                    std::lock_guard<std::mutex> lock(mtx);
                    if (next >= n_rows || first_error) return;
                    i = next++;
                }
                try {
                    work(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(mtx);
                    if (!first_error) first_error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

// ---------------------------------------------------------------------------
// subcommands

// An undersized positivity margin invalidates the certificate when the
// caller raised the threshold above zero.
void apply_positivity_tolerance(forms::CertificateReport& cert,
                                const Tolerances& tol) {
    if (cert.positivity_margin <= tol.positivity) {
        cert.valid = false;
    }
}

int cmd_roots(const GlobalOptions& global, double lambda, double c,
              Report& report) {
    const scalar::ScalarParams params(lambda, c);
    const auto poly = scalar::char_poly(params);
    const auto roots = numerics::poly_roots(poly);
    for (const auto& z : roots) {
        const double residual = numerics::root_residual(poly, z);
        if (residual > global.tol.root_residual) {
            throw NumericalError("roots: residual " + format_float(residual) +
                                 " above the bound " +
                                 format_float(global.tol.root_residual));
        }
    }
    const double decrement = scalar::decrement_spectral(params);
    const auto [has_real, real_root] =
        scalar::real_root_onset(lambda, std::abs(c));
    (void)real_root;

    report.record.emplace_back("lambda", format_float(lambda));
    report.record.emplace_back("c", format_float(c));
    report.record.emplace_back("decrement", format_float(decrement));
    report.record.emplace_back("has_real_root", format_bool(has_real));

    Table table;
    table.columns = {"index", "re",     "im",         "res_imag",
                     "res_a2", "a2_singular", "residual"};
    for (size_t i = 0; i < roots.size(); ++i) {
        const auto res = scalar::check_root_relations(params, roots[i]);
        table.rows.push_back({std::to_string(i), format_float(roots[i].real()),
                              format_float(roots[i].imag()),
                              format_float(res.res_imag),
                              format_float(res.res_a2),
                              format_bool(res.a2_singular),
                              format_float(numerics::root_residual(poly, roots[i]))});
    }
    report.table = std::move(table);
    (void)global;
    return 0;
}

struct ScanRow {
    double lambda = 0.0, c = 0.0;
    double spectral_decrement = 0.0;
    double certified_delta = 0.0;
    double certified_norm_rate = 0.0;
    bool has_real_root = false;
    bool certificate_valid = false;
};

int cmd_scan(const GlobalOptions& global, double lambda_min, double lambda_max,
             double cfrac_min, double cfrac_max, int grid_lambda, int grid_c,
             Report& report) {
    if (grid_lambda < 2 || grid_c < 2) {
        throw InvalidInputError("scan: grid must be at least 2x2");
    }
    if (!(lambda_min > 0.0) || !(lambda_max >= lambda_min)) {
        throw InvalidInputError("scan: need 0 < lambda_min <= lambda_max");
    }
    if (!(cfrac_min > 0.0) || !(cfrac_max < 1.0) || !(cfrac_max >= cfrac_min)) {
        throw InvalidInputError("scan: need 0 < cfrac_min <= cfrac_max < 1");
    }

    const int n_rows = grid_lambda * grid_c;
    std::vector<ScanRow> rows(static_cast<size_t>(n_rows));
    parallel_rows(n_rows, global.jobs, [&](int idx) {
        const int i = idx / grid_c; // lambda outer
        const int j = idx % grid_c; // c inner
        ScanRow& row = rows[static_cast<size_t>(idx)];
        row.lambda = lambda_min * std::pow(lambda_max / lambda_min,
                                           double(i) / (grid_lambda - 1));
        const double frac =
            cfrac_min + (cfrac_max - cfrac_min) * double(j) / (grid_c - 1);
        row.c = frac * row.lambda;
        const scalar::ScalarParams params(row.lambda, row.c);
        row.spectral_decrement = scalar::decrement_spectral(params);
        row.has_real_root = scalar::real_root_onset(row.lambda, row.c).first;
        try {
            const auto bound = scalar::optimize_rate_bound(params);
            row.certified_delta = bound.delta;
            row.certified_norm_rate = 0.5 * bound.delta;
            row.certificate_valid = true;
        } catch (const NoCertificateError&) {
            row.certified_delta = 0.0;
            row.certified_norm_rate = 0.0;
            row.certificate_valid = false;
        }
        if (row.certified_norm_rate > row.spectral_decrement + 1e-8) {
            throw NumericalError("scan: certified rate exceeds the spectrum");
        }
    });

    Table table;
    table.columns = {"lambda",          "c",
                     "spectral_decrement", "certified_delta",
                     "certified_norm_rate", "has_real_root",
                     "certificate_valid"};
    for (const auto& row : rows) {
        table.rows.push_back({format_float(row.lambda), format_float(row.c),
                              format_float(row.spectral_decrement),
                              format_float(row.certified_delta),
                              format_float(row.certified_norm_rate),
                              format_bool(row.has_real_root),
                              format_bool(row.certificate_valid)});
    }
    report.table = std::move(table);
    return 0;
}

struct CertifyOptions {
    std::string variant = "strong";
    PdeOptions pde;
    // weak variant
    int modes = 8;
    double L = kPi;
    double c = 0.2;
    double p = 0.0; // 0: default per variant (3 strong, 2 weak)
    double eps = -1.0; // < 0: choose automatically
};

int cmd_certify(const GlobalOptions& global, const CertifyOptions& opt,
                Report& report) {
    (void)global;
    if (opt.variant == "strong") {
        const double p = opt.p > 0.0 ? opt.p : 3.0;
        const PdeSystem sys = build_pde_system(opt.pde);
        append_condition_report(report, strong::check_conditions(*sys.pair));
        const forms::LinearFlow flow = strong::generator(*sys.pair);

        double eps = opt.eps;
        if (eps < 0.0) {
            eps = forms::maximize_certificate(
                      flow, [&](double e) { return sys.H_of(p, e); })
                      .eps;
        }
        const forms::CertificateReport cert =
            strong::certify_strong(*sys.pair, p, eps);
        report.record.emplace_back("variant", "strong");
        report.record.emplace_back("example", opt.pde.example);
        report.record.emplace_back("p", format_float(p));
        report.record.emplace_back("eps", format_float(eps));
        append_certificate_report(report, cert);
        return cert.valid ? 0 : 2;
    }
    if (opt.variant == "weak") {
        const double p = opt.p > 0.0 ? opt.p : 2.0;
        Eigen::MatrixXd A = Eigen::MatrixXd::Zero(opt.modes, opt.modes);
        for (int k = 1; k <= opt.modes; ++k) {
            const double mu = double(k) * kPi / opt.L;
            A(k - 1, k - 1) = mu * mu;
        }
        const weak::WeakSystem sys = weak::WeakSystem::create(std::move(A), opt.c);
        weak::WeakLiapunovParams params{};
        forms::CertificateReport cert;
        if (opt.eps >= 0.0) {
            params = weak::make_weak_params(sys, p, opt.eps);
            cert = weak::certify_weak(sys, params);
        } else {
            std::tie(params, cert) = weak::auto_epsilon_weak(sys, p);
        }
        report.record.emplace_back("variant", "weak");
        report.record.emplace_back("modes", std::to_string(opt.modes));
        report.record.emplace_back("lambda1", format_float(sys.lambda1));
        report.record.emplace_back("c", format_float(sys.c));
        report.record.emplace_back("p", format_float(p));
        report.record.emplace_back("eps", format_float(params.eps));
        report.record.emplace_back("rho", format_float(params.rho));
        append_certificate_report(report, cert);
        return cert.valid ? 0 : 2;
    }
    throw InvalidInputError("certify: variant must be strong or weak");
}

struct SimulateOptions {
    std::string system = "scalar";
    double lambda = 1.0;
    double c = 0.5;
    PdeOptions pde;
    int modes = 8;
    double L = kPi;
    double T = 20.0;
    double dt = 0.01;
    std::string method = "expm-step";
    double p = 0.0;
    double eps = -1.0;
};

int cmd_simulate(const GlobalOptions& global, const SimulateOptions& opt,
                 Report& report) {
    (void)global;
    const numerics::StepMethod method = [&] {
        if (opt.method == "rk4") return numerics::StepMethod::rk4;
        if (opt.method == "expm-step") return numerics::StepMethod::expm_step;
        throw InvalidInputError("simulate: method must be rk4 or expm-step");
    }();

    forms::LinearFlow flow{{}, {}};
    std::vector<forms::QuadraticForm> observers;
    Eigen::VectorXd U0;
    bool weak_system = false;

    if (opt.system == "scalar") {
        const scalar::ScalarParams params(opt.lambda, opt.c);
        flow = scalar::flow_matrix(params);
        const double p = opt.p > 0.0 ? opt.p : 2.0;
        double eps = opt.eps;
        if (eps < 0.0) {
            const auto bound = scalar::optimize_rate_bound(params);
            eps = bound.eps;
        }
        observers.push_back(
            forms::QuadraticForm(scalar::energy_form(params).matrix(), "E"));
        observers.push_back(forms::QuadraticForm(
            scalar::liapunov_form(params, p, eps).matrix(), "H_eps"));
        U0 = Eigen::VectorXd::Zero(4);
        U0 << 1.0, 1.0, 0.0, 0.0;
    } else if (opt.system == "weak") {
        weak_system = true;
        Eigen::MatrixXd A = Eigen::MatrixXd::Zero(opt.modes, opt.modes);
        for (int k = 1; k <= opt.modes; ++k) {
            const double mu = double(k) * kPi / opt.L;
            A(k - 1, k - 1) = mu * mu;
        }
        const weak::WeakSystem sys = weak::WeakSystem::create(std::move(A), opt.c);
        flow = weak::flow(sys);
        const double p = opt.p > 0.0 ? opt.p : 2.0;
        weak::WeakLiapunovParams params =
            opt.eps >= 0.0 ? weak::make_weak_params(sys, p, opt.eps)
                           : weak::auto_epsilon_weak(sys, p).first;
        const auto energies = weak::weak_energy_forms(sys);
        observers.push_back(forms::QuadraticForm(energies.E.matrix(), "E"));
        observers.push_back(forms::QuadraticForm(
            weak::liapunov_form_weak(sys, params).matrix(), "H_eps"));
        observers.push_back(forms::QuadraticForm(energies.K.matrix(), "K"));
        strong::OperatorPair pair = strong::OperatorPair::create(
            sys.A, sys.c * Eigen::MatrixXd::Identity(sys.n, sys.n));
        U0 = default_datum(pair);
    } else {
        PdeOptions pde = opt.pde;
        pde.example = opt.system;
        const PdeSystem sys = build_pde_system(pde);
        flow = strong::generator(*sys.pair);
        const double p = opt.p > 0.0 ? opt.p : 3.0;
        double eps = opt.eps;
        if (eps < 0.0) {
            eps = forms::maximize_certificate(
                      flow, [&](double e) { return sys.H_of(p, e); })
                      .eps;
        }
        observers.push_back(forms::QuadraticForm(
            strong::base_energy_form(*sys.pair).matrix(), "E"));
        observers.push_back(
            forms::QuadraticForm(sys.H_of(p, eps).matrix(), "H_eps"));
        U0 = default_datum(*sys.pair);
    }
    observers.push_back(forms::QuadraticForm(
        Eigen::MatrixXd::Identity(flow.dim(), flow.dim()), "norm_sq"));

    const auto trace =
        numerics::integrate(flow, U0, opt.dt, opt.T, method, observers);

    // The base energy is non-increasing along every trajectory; a violation
    // beyond integrator tolerance is a numerical failure.
    const auto& E = trace.functionals.at("E");
    const double slack = 1e-9 * (1.0 + std::abs(E.front()));
    for (size_t i = 1; i < E.size(); ++i) {
        if (E[i] > E[i - 1] + slack) {
            throw NumericalError("simulate: energy increased at t = " +
                                 format_float(trace.times[i]));
        }
    }

    Table table;
    table.columns = {"t", "E", "H_eps"};
    if (weak_system) table.columns.push_back("K");
    table.columns.push_back("norm_sq");
    for (size_t i = 0; i < trace.times.size(); ++i) {
        std::vector<std::string> row = {format_float(trace.times[i]),
                                        format_float(E[i]),
                                        format_float(trace.functionals.at("H_eps")[i])};
        if (weak_system) {
            row.push_back(format_float(trace.functionals.at("K")[i]));
        }
        row.push_back(format_float(trace.functionals.at("norm_sq")[i]));
        table.rows.push_back(std::move(row));
    }
    report.table = std::move(table);
    return 0;
}

struct PdeCmdOptions {
    PdeOptions pde;
    double p = 3.0;
    double eps = -1.0;
    double T = 40.0;
    double dt = 0.05;
};

int cmd_pde(const GlobalOptions& global, const PdeCmdOptions& opt,
            Report& report) {
    const PdeSystem sys = build_pde_system(opt.pde);
    report.record.emplace_back("example", opt.pde.example);
    append_condition_report(report, strong::check_conditions(*sys.pair));

    const forms::LinearFlow flow = strong::generator(*sys.pair);
    double eps = opt.eps;
    if (eps < 0.0) {
        eps = forms::maximize_certificate(
                  flow, [&](double e) { return sys.H_of(opt.p, e); })
                  .eps;
    }
    const forms::CertificateReport cert =
        strong::certify_strong(*sys.pair, opt.p, eps);
    report.record.emplace_back("p", format_float(opt.p));
    report.record.emplace_back("eps", format_float(eps));
    append_certificate_report(report, cert);
    if (!cert.valid) return 2;

    // Decay summary: simulate the certificate functional and compare its
    // fitted log-slope against the certified rate; the pass criterion is the
    // certified envelope H(t) <= H(0) e^{-delta t} (1 + tol).
    const forms::QuadraticForm H = sys.H_of(opt.p, eps);
    const forms::QuadraticForm H_obs(H.matrix(), "H_eps");
    const Eigen::VectorXd U0 = default_datum(*sys.pair);
    const auto trace = numerics::integrate(flow, U0, opt.dt, opt.T,
                                           numerics::StepMethod::expm_step,
                                           {H_obs});
    const auto& series = trace.functionals.at("H_eps");

    double sxx = 0.0, sxy = 0.0, sx = 0.0, sy = 0.0;
    const auto n = static_cast<double>(series.size());
    bool envelope_ok = true;
    for (size_t i = 0; i < series.size(); ++i) {
        const double t = trace.times[i];
        const double y = std::log(std::max(series[i], 1e-300));
        sx += t;
        sy += y;
        sxx += t * t;
        sxy += t * y;
        if (series[i] > series.front() * std::exp(-cert.delta * t) *
                            (1.0 + global.tol.envelope)) {
            envelope_ok = false;
        }
    }
    const double fitted_slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    report.record.emplace_back("fitted_log_slope", format_float(fitted_slope));
    report.record.emplace_back("certified_rate_neg", format_float(-cert.delta));
    report.record.emplace_back("decay_envelope_ok", format_bool(envelope_ok));
    return envelope_ok ? 0 : 2;
}

struct WeakCmdOptions {
    std::vector<int> modes = {8, 16, 32, 64};
    double c = 0.2;
    double p = 2.0;
    double T = 2000.0;
    double L = kPi;
};

int cmd_weak(const GlobalOptions& global, const WeakCmdOptions& opt,
             Report& report) {
    if (opt.modes.empty()) {
        throw InvalidInputError("weak: modes list must not be empty");
    }
    // Rows are independent; compute them through the shared pool, then
    // assemble in the given order.
    std::vector<weak::UniformityRow> rows(opt.modes.size());
    parallel_rows(static_cast<int>(opt.modes.size()), global.jobs, [&](int i) {
        const weak::UniformityTable one = weak::uniformity_check(
            {opt.modes[static_cast<size_t>(i)]}, opt.c, opt.p, opt.T, opt.L);
        rows[static_cast<size_t>(i)] = one.rows.front();
    });

    Table table;
    table.columns = {"n",           "gamma",     "eps",
                     "C_observed",  "C_theoretical", "spectral_decrement",
                     "certified",   "note"};
    int certified = 0;
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const auto& row : rows) {
        table.rows.push_back(
            {std::to_string(row.n), format_float(row.gamma),
             format_float(row.eps), format_float(row.C_observed),
             format_float(row.C_theoretical),
             format_float(row.spectral_decrement), format_bool(row.certified),
             row.note});
        if (row.certified) {
            ++certified;
            lo = std::min(lo, row.C_observed);
            hi = std::max(hi, row.C_observed);
        }
    }
    const bool uniform = certified == static_cast<int>(rows.size()) &&
                         lo > 0.0 && hi / lo <= 2.0;
    report.record.emplace_back("rows", std::to_string(rows.size()));
    report.record.emplace_back("uniform", format_bool(uniform));
    report.table = std::move(table);
    return certified == 0 ? 2 : 0;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
    CLI::App app{"Explicit quadratic Liapunov certificates for partially "
                 "damped coupled second-order systems"};
    app.require_subcommand(1);
    app.fallthrough(); // global flags may follow the subcommand

    GlobalOptions global;
    app.add_option("--config", global.config_path,
                   "JSON config file (flags win)");
    auto* opt_output =
        app.add_option("--output", global.output_path, "report file path");
    auto* opt_format = app.add_option("--format", global.format,
                                      "report format: csv or json");
    auto* opt_jobs =
        app.add_option("--jobs", global.jobs, "worker pool size for grid rows");
    auto* opt_tol_pos = app.add_option("--tol-positivity", global.tol.positivity,
                                       "positivity margin threshold");
    auto* opt_tol_root = app.add_option(
        "--tol-root-residual", global.tol.root_residual, "root residual bound");
    auto* opt_tol_env = app.add_option("--tol-envelope", global.tol.envelope,
                                       "decay envelope tolerance");

    // roots
    auto* sub_roots = app.add_subcommand("roots", "characteristic roots and "
                                                  "root-relation residuals");
    double r_lambda = 1.0, r_c = 0.5;
    auto* r_lambda_opt = sub_roots->add_option("--lambda", r_lambda, "stiffness");
    auto* r_c_opt = sub_roots->add_option("--c", r_c, "coupling");

    // scan
    auto* sub_scan =
        app.add_subcommand("scan", "decrement and certified-rate surface");
    double s_lmin = 0.5, s_lmax = 50.0, s_fmin = 0.05, s_fmax = 0.95;
    int s_gl = 10, s_gc = 10;
    auto* s_lmin_o = sub_scan->add_option("--lambda-min", s_lmin, "smallest stiffness");
    auto* s_lmax_o = sub_scan->add_option("--lambda-max", s_lmax, "largest stiffness");
    auto* s_fmin_o = sub_scan->add_option("--cfrac-min", s_fmin, "smallest c/lambda");
    auto* s_fmax_o = sub_scan->add_option("--cfrac-max", s_fmax, "largest c/lambda");
    auto* s_gl_o = sub_scan->add_option("--grid-lambda", s_gl, "stiffness grid points");
    auto* s_gc_o = sub_scan->add_option("--grid-c", s_gc, "coupling grid points");

    // certify
    auto* sub_certify =
        app.add_subcommand("certify", "certificate for a configured system");
    CertifyOptions cert_opt;
    auto* c_variant = sub_certify->add_option("--variant", cert_opt.variant,
                                              "strong or weak");
    auto* c_example = sub_certify->add_option("--example", cert_opt.pde.example,
                                              "gallery example (strong variant)");
    auto* c_modes = sub_certify->add_option("--modes", cert_opt.modes,
                                            "Galerkin modes");
    auto* c_L = sub_certify->add_option("--L", cert_opt.L, "domain length");
    auto* c_gamma = sub_certify->add_option("--gamma", cert_opt.pde.gamma,
                                            "coupling strength");
    auto* c_lambda = sub_certify->add_option("--lambda", cert_opt.pde.lambda,
                                             "stiffness (complex example)");
    auto* c_c = sub_certify->add_option("--c", cert_opt.c, "coupling coefficient");
    auto* c_d = sub_certify->add_option("--d", cert_opt.pde.d,
                                        "imaginary coupling part (complex example)");
    auto* c_p = sub_certify->add_option("--p", cert_opt.p,
                                        "candidate parameter p > 1");
    auto* c_eps = sub_certify->add_option("--eps", cert_opt.eps,
                                          "perturbation size (omit for automatic)");
    auto* c_pa = sub_certify->add_option("--potential-a", cert_opt.pde.potential_a,
                                         "named potential a(x)");
    auto* c_pb = sub_certify->add_option("--potential-b", cert_opt.pde.potential_b,
                                         "named potential b(x)");
    auto* c_m = sub_certify->add_option("--multiplier", cert_opt.pde.multiplier,
                                        "named multiplier m(x)");

    // simulate
    auto* sub_sim = app.add_subcommand("simulate", "trajectory functionals");
    SimulateOptions sim_opt;
    auto* m_system = sub_sim->add_option("--system", sim_opt.system,
                                         "scalar, weak or a gallery example");
    auto* m_lambda = sub_sim->add_option("--lambda", sim_opt.lambda, "stiffness");
    auto* m_c = sub_sim->add_option("--c", sim_opt.c, "coupling coefficient");
    auto* m_d = sub_sim->add_option("--d", sim_opt.pde.d,
                                    "imaginary coupling part (complex example)");
    auto* m_modes = sub_sim->add_option("--modes", sim_opt.modes, "Galerkin modes");
    auto* m_L = sub_sim->add_option("--L", sim_opt.L, "domain length");
    auto* m_gamma = sub_sim->add_option("--gamma", sim_opt.pde.gamma,
                                        "coupling strength");
    auto* m_T = sub_sim->add_option("--T", sim_opt.T, "horizon");
    auto* m_dt = sub_sim->add_option("--dt", sim_opt.dt, "step size");
    auto* m_method = sub_sim->add_option("--method", sim_opt.method,
                                         "rk4 or expm-step");
    auto* m_p = sub_sim->add_option("--p", sim_opt.p, "candidate parameter p > 1");
    auto* m_eps = sub_sim->add_option("--eps", sim_opt.eps,
                                      "perturbation size (omit for automatic)");
    auto* m_pa = sub_sim->add_option("--potential-a", sim_opt.pde.potential_a,
                                     "named potential a(x)");
    auto* m_pb = sub_sim->add_option("--potential-b", sim_opt.pde.potential_b,
                                     "named potential b(x)");
    auto* m_m = sub_sim->add_option("--multiplier", sim_opt.pde.multiplier,
                                    "named multiplier m(x)");

    // pde
    auto* sub_pde = app.add_subcommand(
        "pde", "conditions + certificate + decay summary for a gallery example");
    PdeCmdOptions pde_opt;
    auto* p_example = sub_pde->add_option("--example", pde_opt.pde.example,
                                          "complex, wave, plate, string, wave-potential, plate-multiplication");
    auto* p_modes = sub_pde->add_option("--modes", pde_opt.pde.modes, "Galerkin modes");
    auto* p_L = sub_pde->add_option("--L", pde_opt.pde.L, "domain length");
    auto* p_gamma = sub_pde->add_option("--gamma", pde_opt.pde.gamma,
                                        "coupling strength");
    auto* p_lambda = sub_pde->add_option("--lambda", pde_opt.pde.lambda,
                                         "stiffness (complex example)");
    auto* p_c = sub_pde->add_option("--c", pde_opt.pde.c,
                                    "real coupling part (complex example)");
    auto* p_d = sub_pde->add_option("--d", pde_opt.pde.d,
                                    "imaginary coupling part (complex example)");
    auto* p_p = sub_pde->add_option("--p", pde_opt.p, "candidate parameter p > 1");
    auto* p_eps = sub_pde->add_option("--eps", pde_opt.eps,
                                      "perturbation size (omit for automatic)");
    auto* p_T = sub_pde->add_option("--T", pde_opt.T, "decay-summary horizon");
    auto* p_dt = sub_pde->add_option("--dt", pde_opt.dt, "decay-summary step");
    auto* p_pa = sub_pde->add_option("--potential-a", pde_opt.pde.potential_a,
                                     "named potential a(x)");
    auto* p_pb = sub_pde->add_option("--potential-b", pde_opt.pde.potential_b,
                                     "named potential b(x)");
    auto* p_m = sub_pde->add_option("--multiplier", pde_opt.pde.multiplier,
                                    "named multiplier m(x)");

    // weak
    auto* sub_weak =
        app.add_subcommand("weak", "uniformity table for weak coupling");
    WeakCmdOptions weak_opt;
    auto* w_modes = sub_weak->add_option("--modes", weak_opt.modes,
                                         "truncation sizes (comma separated)")
                        ->delimiter(',');
    auto* w_c = sub_weak->add_option("--c", weak_opt.c, "coupling coefficient");
    auto* w_p = sub_weak->add_option("--p", weak_opt.p, "candidate parameter p > 1");
    auto* w_T = sub_weak->add_option("--T", weak_opt.T, "simulation horizon");
    auto* w_L = sub_weak->add_option("--L", weak_opt.L, "domain length");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            // --help and friends
            out << app.help() << std::flush;
            return 0;
        }
        err << "error: " << e.what() << '\n';
        return 1;
    }

    try {
        json config = json::object();
        if (!global.config_path.empty()) {
            config = load_config(global.config_path);
        }
        {
            ConfigMerger top(json{{"_", config}}, "_", kKnownGlobalKeys);
            top.fill(opt_output, "output", global.output_path);
            top.fill(opt_format, "format", global.format);
            top.fill(opt_jobs, "jobs", global.jobs);
        }
        if (config.contains("tolerances")) {
            ConfigMerger tol(config, "tolerances",
                             {"positivity", "root_residual", "envelope"});
            tol.fill(opt_tol_pos, "positivity", global.tol.positivity);
            tol.fill(opt_tol_root, "root_residual", global.tol.root_residual);
            tol.fill(opt_tol_env, "envelope", global.tol.envelope);
        }
        if (global.format != "csv" && global.format != "json") {
            throw InvalidInputError("format must be csv or json");
        }
        if (global.jobs < 1) {
            throw InvalidInputError("jobs must be >= 1");
        }

        Report report;
        int code = 0;
        if (sub_roots->parsed()) {
            ConfigMerger cfg(config, "roots", {"lambda", "c"});
            cfg.fill(r_lambda_opt, "lambda", r_lambda);
            cfg.fill(r_c_opt, "c", r_c);
            code = cmd_roots(global, r_lambda, r_c, report);
        } else if (sub_scan->parsed()) {
            ConfigMerger cfg(config, "scan",
                             {"lambda_min", "lambda_max", "cfrac_min",
                              "cfrac_max", "grid_lambda", "grid_c"});
            cfg.fill(s_lmin_o, "lambda_min", s_lmin);
            cfg.fill(s_lmax_o, "lambda_max", s_lmax);
            cfg.fill(s_fmin_o, "cfrac_min", s_fmin);
            cfg.fill(s_fmax_o, "cfrac_max", s_fmax);
            cfg.fill(s_gl_o, "grid_lambda", s_gl);
            cfg.fill(s_gc_o, "grid_c", s_gc);
            code = cmd_scan(global, s_lmin, s_lmax, s_fmin, s_fmax, s_gl, s_gc,
                            report);
        } else if (sub_certify->parsed()) {
            ConfigMerger cfg(config, "certify",
                             {"variant", "example", "modes", "L", "gamma",
                              "lambda", "c", "d", "p", "eps", "potential_a",
                              "potential_b", "multiplier"});
            cfg.fill(c_variant, "variant", cert_opt.variant);
            cfg.fill(c_example, "example", cert_opt.pde.example);
            cfg.fill(c_modes, "modes", cert_opt.modes);
            cfg.fill(c_L, "L", cert_opt.L);
            cfg.fill(c_gamma, "gamma", cert_opt.pde.gamma);
            cfg.fill(c_lambda, "lambda", cert_opt.pde.lambda);
            cfg.fill(c_c, "c", cert_opt.c);
            cfg.fill(c_d, "d", cert_opt.pde.d);
            cfg.fill(c_p, "p", cert_opt.p);
            cfg.fill(c_eps, "eps", cert_opt.eps);
            cfg.fill(c_pa, "potential_a", cert_opt.pde.potential_a);
            cfg.fill(c_pb, "potential_b", cert_opt.pde.potential_b);
            cfg.fill(c_m, "multiplier", cert_opt.pde.multiplier);
            cert_opt.pde.modes = cert_opt.modes;
            cert_opt.pde.L = cert_opt.L;
            cert_opt.pde.c = cert_opt.c;
            code = cmd_certify(global, cert_opt, report);
        } else if (sub_sim->parsed()) {
            ConfigMerger cfg(config, "simulate",
                             {"system", "lambda", "c", "d", "modes", "L",
                              "gamma", "T", "dt", "method", "p", "eps",
                              "potential_a", "potential_b", "multiplier"});
            cfg.fill(m_system, "system", sim_opt.system);
            cfg.fill(m_lambda, "lambda", sim_opt.lambda);
            cfg.fill(m_c, "c", sim_opt.c);
            cfg.fill(m_d, "d", sim_opt.pde.d);
            cfg.fill(m_modes, "modes", sim_opt.modes);
            cfg.fill(m_L, "L", sim_opt.L);
            cfg.fill(m_gamma, "gamma", sim_opt.pde.gamma);
            cfg.fill(m_T, "T", sim_opt.T);
            cfg.fill(m_dt, "dt", sim_opt.dt);
            cfg.fill(m_method, "method", sim_opt.method);
            cfg.fill(m_p, "p", sim_opt.p);
            cfg.fill(m_eps, "eps", sim_opt.eps);
            cfg.fill(m_pa, "potential_a", sim_opt.pde.potential_a);
            cfg.fill(m_pb, "potential_b", sim_opt.pde.potential_b);
            cfg.fill(m_m, "multiplier", sim_opt.pde.multiplier);
            sim_opt.pde.modes = sim_opt.modes;
            sim_opt.pde.L = sim_opt.L;
            sim_opt.pde.lambda = sim_opt.lambda;
            sim_opt.pde.c = sim_opt.c;
            code = cmd_simulate(global, sim_opt, report);
        } else if (sub_pde->parsed()) {
            ConfigMerger cfg(config, "pde",
                             {"example", "modes", "L", "gamma", "lambda", "c",
                              "d", "p", "eps", "T", "dt", "potential_a",
                              "potential_b", "multiplier"});
            cfg.fill(p_example, "example", pde_opt.pde.example);
            cfg.fill(p_modes, "modes", pde_opt.pde.modes);
            cfg.fill(p_L, "L", pde_opt.pde.L);
            cfg.fill(p_gamma, "gamma", pde_opt.pde.gamma);
            cfg.fill(p_lambda, "lambda", pde_opt.pde.lambda);
            cfg.fill(p_c, "c", pde_opt.pde.c);
            cfg.fill(p_d, "d", pde_opt.pde.d);
            cfg.fill(p_p, "p", pde_opt.p);
            cfg.fill(p_eps, "eps", pde_opt.eps);
            cfg.fill(p_T, "T", pde_opt.T);
            cfg.fill(p_dt, "dt", pde_opt.dt);
            cfg.fill(p_pa, "potential_a", pde_opt.pde.potential_a);
            cfg.fill(p_pb, "potential_b", pde_opt.pde.potential_b);
            cfg.fill(p_m, "multiplier", pde_opt.pde.multiplier);
            if (pde_opt.pde.example.empty()) {
                throw InvalidInputError("pde: --example is required");
            }
            code = cmd_pde(global, pde_opt, report);
        } else if (sub_weak->parsed()) {
            ConfigMerger cfg(config, "weak", {"modes", "c", "p", "T", "L"});
            cfg.fill(w_modes, "modes", weak_opt.modes);
            cfg.fill(w_c, "c", weak_opt.c);
            cfg.fill(w_p, "p", weak_opt.p);
            cfg.fill(w_T, "T", weak_opt.T);
            cfg.fill(w_L, "L", weak_opt.L);
            code = cmd_weak(global, weak_opt, report);
        }

        std::ostringstream rendered;
        if (global.format == "json") {
            write_json(report, rendered);
        } else {
            write_csv(report, rendered);
        }
        if (!global.output_path.empty()) {
            std::ofstream file(global.output_path, std::ios::binary);
            if (!file) {
                throw InvalidInputError("cannot open output file " +
                                        global.output_path);
            }
            file << rendered.str();
        } else {
            out << rendered.str();
        }
        return code;
    } catch (const InvalidInputError& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const CertificationError& e) {
        err << "certification failure: " << e.what() << '\n';
        return 2;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << '\n';
        if (const auto* step = dynamic_cast<const StepSizeError*>(&e)) {
            err << "suggested dt: " << format_float(step->suggested_dt) << '\n';
        }
        return 3;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

} // namespace liapcert::cli
