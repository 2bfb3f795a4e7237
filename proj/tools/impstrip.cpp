#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "impstrip/suite.hpp"

namespace fs = std::filesystem;
using namespace impstrip;

namespace {

enum Exit { ok = 0, verification_failed = 1, config_error = 2, numerical_failure = 3 };

std::string g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error(ErrorKind::config, "cannot write " + p.string());
    out << text;
}

fs::path prepare_out(const RunConfig& rc, const std::string& flag) {
    fs::path dir = flag.empty() ? fs::path(rc.output_dir) : fs::path(flag);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorKind::config, "cannot create output directory " + dir.string());
    return dir;
}

std::string directivity_csv(const DirectivityTable& t) {
    std::string s = "theta_deg,S_re,S_im,Sa_re,Sa_im,Ss_re,Ss_im\n";
    for (std::size_t i = 0; i < t.theta.size(); ++i)
        s += g(t.theta[i] * 180.0 / kPi) + "," + g(t.s[i].real()) + "," + g(t.s[i].imag()) + "," + g(t.sa[i].real()) +
             "," + g(t.sa[i].imag()) + "," + g(t.ss[i].real()) + "," + g(t.ss[i].imag()) + "\n";
    return s;
}

std::string densities_csv(const Density& a, const Density& s) {
    std::string out = "parity,n,re,im\n";
    for (const Density* d : {&a, &s})
        for (int n = 0; n < d->size(); ++n)
            out += std::string(to_string(d->parity)) + "," + std::to_string(n) + "," + g(d->coeffs[n].real()) + "," +
                   g(d->coeffs[n].imag()) + "\n";
    return out;
}

nlohmann::ordered_json diagnostics_json(const SolveDiagnostics& d) {
    nlohmann::ordered_json j;
    j["N"] = d.N;
    j["bc_residual"] = d.bc_residual;
    j["tail_decay"] = d.tail_decay;
    j["condition_estimate"] = d.condition_estimate;
    j["converged"] = d.converged;
    return j;
}

struct Solved {
    SolveResult a, s;
    DirectivityTable table;
};

Solved solve_both(const RunConfig& rc) {
    const ProblemConfig cfg = rc.problem();
    Solved out;
    out.a = solve_antisymmetric(cfg, rc.N);
    out.s = solve_symmetric(cfg, rc.N);
    const auto ba = make_bundle(out.a.density, cfg, TailOptions{.build = false});
    const auto bs = make_bundle(out.s.density, cfg, TailOptions{.build = false});
    out.table = directivity(ba, bs, theta_grid(rc.theta_count));
    return out;
}

int cmd_solve(const RunConfig& rc, const std::string& out_flag) {
    const fs::path dir = prepare_out(rc, out_flag);
    const Solved s = solve_both(rc);
    write_file(dir / "directivity.csv", directivity_csv(s.table));
    write_file(dir / "densities.csv", densities_csv(s.a.density, s.s.density));
    nlohmann::ordered_json j;
    j["config"] = to_json(rc);
    j["config_hash"] = config_hash(rc);
    j["antisymmetric"] = diagnostics_json(s.a.diagnostics);
    j["symmetric"] = diagnostics_json(s.s.diagnostics);
    write_file(dir / "diagnostics.json", j.dump(2) + "\n");
    if (!s.a.diagnostics.converged || !s.s.diagnostics.converged) {
        std::cerr << "solver did not converge (see diagnostics.json)\n";
        return numerical_failure;
    }
    return ok;
}

// 20-node panels of width pi/Re(k0) resolve about 13 rad of phase each.
double spectra_window(const ProblemConfig& cfg) { return (13.0 / kPi - 1.0) * cfg.k0.real(); }

int cmd_spectra(const RunConfig& rc, const std::string& out_flag) {
    const ProblemConfig cfg = rc.problem();
    if (!(cfg.k0.imag() > 0.0)) throw Error(ErrorKind::config, "spectra need Im(k0) > 0 for convergent tail transforms");
    const fs::path dir = prepare_out(rc, out_flag);
    TailOptions topt;
    topt.tol = rc.tail_tol;
    const auto ba = make_bundle(solve_antisymmetric(cfg, rc.N).density, cfg, topt);
    const auto bs = make_bundle(solve_symmetric(cfg, rc.N).density, cfg, topt);
    const bool have_v = cfg.eta != 0.0;
    std::string s =
        "k_re,k_im,Um_re,Um_im,U0_re,U0_im,Up_re,Up_im,U0t_re,U0t_im,"
        "Vm_re,Vm_im,V0_re,V0_im,Vp_re,Vp_im,V0t_re,V0t_im,residual\n";
    const double window = spectra_window(cfg);
    int near = 0, outside = 0;
    for (double k : linspace(rc.k_lo(), rc.k_hi(), rc.k_count)) {
        const cd kk = k;
        if (near_pole(ba, kk)) ++near;
        if (std::abs(k) > window) ++outside;
        const cd um = u_minus(ba, kk), u0v = u0(ba, kk), up = u_plus(ba, kk), ut = u0_tilde(ba, kk);
        const cd vm = v_minus(bs, kk), vp = v_plus(bs, kk), vt = v0_tilde(bs, kk);
        const cd v0v = have_v ? v0(bs, kk) : cd{std::nan(""), std::nan("")};
        double res = functional_residual_at(ba, kk);
        if (have_v) res = std::max(res, functional_residual_at(bs, kk));
        s += g(k) + ",0," + g(um.real()) + "," + g(um.imag()) + "," + g(u0v.real()) + "," + g(u0v.imag()) + "," +
             g(up.real()) + "," + g(up.imag()) + "," + g(ut.real()) + "," + g(ut.imag()) + "," + g(vm.real()) + "," +
             g(vm.imag()) + "," + g(v0v.real()) + "," + g(v0v.imag()) + "," + g(vp.real()) + "," + g(vp.imag()) +
             "," + g(vt.real()) + "," + g(vt.imag()) + "," + g(res) + "\n";
    }
    write_file(dir / "spectra.csv", s);
    if (near) std::cerr << "warning: " << near << " row(s) inside the pole exclusion radius around k_star\n";
    if (outside)
        std::cerr << "warning: " << outside << " row(s) with |k| > " << window
                  << " lie outside the window the tail quadrature resolves\n";
    if (!have_v) std::cerr << "warning: V0 is undefined for eta = 0; column left as nan\n";
    return ok;
}

int cmd_verify(const RunConfig& rc, const std::string& out_flag, const std::string& suite_name) {
    const fs::path dir = prepare_out(rc, out_flag);
    const Suite suite = suite_name == "full" ? Suite::full : Suite::fast;
    const SuiteResult r = run_suite(rc, suite);
    nlohmann::ordered_json j;
    j["suite"] = to_string(suite);
    j["config"] = to_json(rc);
    j["config"].erase("threads");
    j["config"].erase("output_dir");
    j["config_hash"] = config_hash(rc);
    const auto body = to_json(r.report);
    for (auto it = body.begin(); it != body.end(); ++it) j[it.key()] = it.value();
    write_file(dir / "report.json", j.dump(2) + "\n");
    write_file(dir / "timing.json", timing_json(r).dump(2) + "\n");
    int failed = 0;
    for (const auto& c : r.report.checks)
        if (c.mandatory && !c.pass) {
            ++failed;
            std::cerr << "FAIL " << c.id << " value " << c.value << " tolerance " << c.tolerance
                      << (c.note.empty() ? "" : " (" + c.note + ")") << "\n";
        }
    std::cout << (failed ? "verification failed: " + std::to_string(failed) + " mandatory check(s)" : "all mandatory checks passed")
              << " [" << r.report.checks.size() << " checks]\n";
    return failed ? verification_failed : ok;
}

std::vector<double> parse_values(const std::string& s) {
    std::vector<double> v;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        try {
            std::size_t used = 0;
            v.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw Error(ErrorKind::config, "bad sweep value: " + item);
        }
    }
    if (v.empty()) throw Error(ErrorKind::config, "sweep needs at least one value");
    return v;
}

RunConfig with_param(RunConfig rc, const std::string& param, double v) {
    if (param == "theta_in") rc.theta_in_deg = v;
    else if (param == "eta_re") rc.eta = {v, rc.eta.imag()};
    else if (param == "eta_im") rc.eta = {rc.eta.real(), v};
    else if (param == "k0a") rc.k0 = {v / rc.a, rc.k0.imag()};
    else throw Error(ErrorKind::config, "sweep parameter must be one of theta_in, eta_re, eta_im, k0a");
    return rc;
}

struct SweepPoint {
    std::string status = "ok";
    DirectivityTable table;
    cd forward = 0.0;
    double scattered = 0.0;
    EdgeCoefficients edge;
    bool deform = false;
    std::vector<cd> w_a, w_s;  // embedding kernel columns
};

int cmd_sweep(const RunConfig& rc, const std::string& out_flag, const std::string& param, const std::string& values) {
    const auto vals = parse_values(values);
    with_param(rc, param, vals.front());  // reject unknown parameter before any work
    const fs::path dir = prepare_out(rc, out_flag);
    const auto kp = linspace(-1.5 * std::abs(rc.k0), 1.5 * std::abs(rc.k0), 40);
    const auto points = parallel_map<SweepPoint>(static_cast<int>(vals.size()), rc.threads, [&](int i) {
        SweepPoint p;
        try {
            const RunConfig r = with_param(rc, param, vals[i]);
            r.validate();
            const ProblemConfig cfg = r.problem();
            const Solved s = solve_both(r);
            p.table = s.table;
            const auto ba = make_bundle(s.a.density, cfg, TailOptions{.build = false});
            const auto bs = make_bundle(s.s.density, cfg, TailOptions{.build = false});
            const double fwd = kPi - cfg.theta_in;
            p.forward = directivity_s(bs, fwd) - directivity_a(ba, fwd);
            PhysicsOptions po;
            po.N = r.N;
            p.scattered = power_balance(cfg, po).scattered;
            p.edge = edge_coefficients(s.a.density, s.s.density, cfg);
            p.deform = deformation_needed(cfg);
            for (double k : kp) {
                p.w_a.push_back(embedding_kernel(ba, k));
                if (cfg.eta != 0.0) p.w_s.push_back(embedding_kernel(bs, k));
            }
        } catch (const std::exception& e) {
            p.status = std::string("error: ") + e.what();
            for (char& ch : p.status)
                if (ch == ',' || ch == '\n') ch = ';';
        }
        return p;
    });

    // rank of the kernel matrix across the sweep (meaningful for incidence sweeps)
    auto ratio = [&](bool anti) -> std::string {
        std::vector<const SweepPoint*> good;
        for (const auto& p : points)
            if (p.status == "ok" && !(anti ? p.w_a : p.w_s).empty()) good.push_back(&p);
        if (param != "theta_in" || good.size() < 3) return "";
        Eigen::MatrixXcd W(kp.size(), good.size());
        for (std::size_t j = 0; j < good.size(); ++j)
            for (std::size_t i = 0; i < kp.size(); ++i) W(i, j) = (anti ? good[j]->w_a : good[j]->w_s)[i];
        const auto sv = Eigen::JacobiSVD<Eigen::MatrixXcd>(W).singularValues();
        return g(sv(2) / sv(0));
    };
    const std::string ra = ratio(true), rs = ratio(false);

    std::string summary =
        "value,status,forward_re,forward_im,scattered_power,c_plus_re,c_plus_im,c_minus_re,c_minus_im,"
        "d_plus_re,d_plus_im,d_minus_re,d_minus_im,deformation_needed,sigma3_over_sigma1_a,sigma3_over_sigma1_s\n";
    int failures = 0;
    for (std::size_t i = 0; i < vals.size(); ++i) {
        const auto& p = points[i];
        if (p.status != "ok") {
            ++failures;
            summary += g(vals[i]) + "," + p.status + ",,,,,,,,,,,,,,\n";
            continue;
        }
        write_file(dir / ("directivity_" + std::to_string(i) + ".csv"), directivity_csv(p.table));
        const auto& e = p.edge;
        summary += g(vals[i]) + ",ok," + g(p.forward.real()) + "," + g(p.forward.imag()) + "," + g(p.scattered) + "," +
                   g(e.c_plus.real()) + "," + g(e.c_plus.imag()) + "," + g(e.c_minus.real()) + "," +
                   g(e.c_minus.imag()) + "," + g(e.d_plus.real()) + "," + g(e.d_plus.imag()) + "," +
                   g(e.d_minus.real()) + "," + g(e.d_minus.imag()) + "," + (p.deform ? "1" : "0") + "," + ra + "," +
                   rs + "\n";
    }
    write_file(dir / "summary.csv", summary);
    if (failures) std::cerr << failures << " sweep point(s) failed; see summary.csv\n";
    return ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Impedance strip diffraction: solves, spectra, sweeps and verification"};
    app.require_subcommand(1);
    std::string config_path, out_dir, suite = "fast", param, values;
    int threads = 0;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON run configuration (defaults apply when omitted)");
        sub->add_option("--out", out_dir, "output directory (overrides output_dir)");
        sub->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
    };
    auto* solve_cmd = app.add_subcommand("solve", "solve both parities and write directivity tables");
    auto* spectra_cmd = app.add_subcommand("spectra", "tabulate the spectral functions on the k grid");
    auto* verify_cmd = app.add_subcommand("verify", "run the verification suite");
    auto* sweep_cmd = app.add_subcommand("sweep", "sweep one parameter");
    for (auto* s : {solve_cmd, spectra_cmd, verify_cmd, sweep_cmd}) add_common(s);
    verify_cmd->add_option("--suite", suite, "fast or full")->check(CLI::IsMember({"fast", "full"}));
    sweep_cmd->add_option("--param", param, "theta_in, eta_re, eta_im or k0a")->required();
    sweep_cmd->add_option("--values", values, "comma separated values (degrees for theta_in)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? ok : config_error;
    }

    try {
        RunConfig rc = config_path.empty() ? RunConfig{} : load_run_config(config_path);
        if (threads > 0) rc.threads = threads;
        rc.validate();
        if (*solve_cmd) return cmd_solve(rc, out_dir);
        if (*spectra_cmd) return cmd_spectra(rc, out_dir);
        if (*verify_cmd) return cmd_verify(rc, out_dir, suite);
        if (*sweep_cmd) return cmd_sweep(rc, out_dir, param, values);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.kind() == ErrorKind::config ? config_error : numerical_failure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return numerical_failure;
    }
    return ok;
}
