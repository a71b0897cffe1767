#include "bilop/config.hpp"
#include "bilop/operator.hpp"
#include "bilop/tilemodel.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

using namespace bilop;

namespace {

struct ConfigFlags {
    std::string file;
    std::map<std::string, std::string> values;
    bool print_config = false;
    bool quiet = false;
    CLI::App* app = nullptr;
};

/// --config FILE plus one --<key> flag per config key.
void add_config_flags(CLI::App* sub, ConfigFlags& f, bool file_positional) {
    f.app = sub;
    if (file_positional)
        sub->add_option("config", f.file, "config file")->required()->check(CLI::ExistingFile);
    else
        sub->add_option("--config", f.file, "config file")->check(CLI::ExistingFile);
    sub->add_flag("--print-config", f.print_config, "print the effective config and exit");
    sub->add_flag("-q,--quiet", f.quiet, "no report summary on stdout");
    for (const auto& k : config_keys()) sub->add_option("--" + k, f.values[k])->group("Config keys");
}

std::string read_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw Error("cannot read " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

int run_config_command(const ConfigFlags& f, const std::string& forced_kind) {
    std::vector<std::pair<std::string, std::string>> overrides;
    if (!forced_kind.empty()) overrides.emplace_back("kind", forced_kind);
    for (const auto& k : config_keys())
        if (f.app->count("--" + k) > 0) overrides.emplace_back(k, f.values.at(k));
    const ConfigResult r = parse_config(f.file.empty() ? "" : read_file(f.file), overrides);
    if (!r.ok()) {
        std::cerr << "config errors:\n";
        for (const auto& e : r.errors) std::cerr << "  " << to_string(e) << "\n";
        return 2;
    }
    if (f.print_config) {
        std::cout << serialize_config(*r.config);
        return 0;
    }
    const int code = run(*r.config, std::cerr);
    if (code != 2 && !f.quiet) {
        const auto path = std::filesystem::path(r.config->output) / "report.json";
        std::cout << render_report(nlohmann::json::parse(read_file(path.string())));
        std::cout << "written to " << r.config->output << "\n";
    }
    return code;
}

SampledFunction load_function(const std::string& path) {
    return std::filesystem::path(path).extension() == ".csv" ? load_csv(path) : load_binary(path);
}

void save_function(const std::string& path, const SampledFunction& f) {
    if (std::filesystem::path(path).extension() == ".csv") save_csv(path, f);
    else save_binary(path, f);
}

struct SymbolFlags {
    SymbolSpec spec;
    SymbolFlags() { spec.kind = "bht_sign"; }
};

void add_symbol_flags(CLI::App* sub, SymbolFlags& s) {
    sub->add_option("--symbol.kind", s.spec.kind, "product | bht_sign | table")
        ->check(CLI::IsMember({"product", "bht_sign", "table"}))
        ->capture_default_str();
    sub->add_option("--symbol.l1", s.spec.l1)->capture_default_str();
    sub->add_option("--symbol.l2", s.spec.l2)->capture_default_str();
    sub->add_option("--symbol.truncate", s.spec.truncate, "L of the near-line truncation, 0 for none")
        ->capture_default_str();
    sub->add_option("--symbol.scale", s.spec.scale)->capture_default_str();
    sub->add_option("--symbol.path", s.spec.path, "table file");
}

// ---- tiles render: coverage counts of the time-frequency plane
void render_collection(std::ostream& os, const Collection& S, int cols, int rows) {
    if (S.empty()) {
        os << "(empty collection)\n";
        return;
    }
    double t0 = S.tiles[0].time.left(), t1 = S.tiles[0].time.right();
    double w0 = S.tiles[0].freq.left(), w1 = S.tiles[0].freq.right();
    for (const auto& s : S.tiles) {
        t0 = std::min(t0, s.time.left());
        t1 = std::max(t1, s.time.right());
        w0 = std::min(w0, s.freq.left());
        w1 = std::max(w1, s.freq.right());
    }
    std::vector<int> count(static_cast<std::size_t>(rows * cols), 0);
    for (const auto& s : S.tiles)
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c) {
                const double t = t0 + (c + 0.5) * (t1 - t0) / cols;
                const double w = w1 - (r + 0.5) * (w1 - w0) / rows;
                if (s.time.contains_point(t) && s.freq.contains_point(w)) ++count[r * cols + c];
            }
    os << "freq [" << w0 << ", " << w1 << ") top to bottom, time [" << t0 << ", " << t1 << ") left to right\n";
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            const int k = count[r * cols + c];
            os << (k == 0 ? '.' : k < 10 ? static_cast<char>('0' + k) : '+');
        }
        os << '\n';
    }
}

void print_validation(std::ostream& os, const ValidationReport& v) {
    os << (v.pass ? "PASS" : "FAIL") << " collection of " << v.tiles << " tri-tiles\n"
       << "  area " << (v.area_ok ? "ok" : "FAIL") << ", disjoint " << (v.disjoint_ok ? "ok" : "FAIL")
       << ", time grid " << (v.time_grid_ok ? "ok" : "FAIL") << ", freq grid " << (v.freq_grid_ok ? "ok" : "FAIL")
       << ", nesting " << (v.nesting_ok ? "ok" : "FAIL") << ", distinct " << (v.distinct_ok ? "ok" : "FAIL") << "\n"
       << "  time overlap " << v.time.overlap << " (scale " << v.time.scale << ", x = " << v.time.witness << ")\n"
       << "  freq overlap " << v.freq.overlap << " (scale " << v.freq.scale << ", xi = " << v.freq.witness << ")\n"
       << "  overlap bound " << v.overlap_bound << "\n";
    for (const auto& w : v.witnesses) os << "  witness: " << w << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"bilop: bilinear operators with a singular line, their wave-packet models and desk-scale checks"};
    app.require_subcommand(1);

    // experiments
    const std::vector<std::pair<std::string, std::string>> experiments{
        {"decay", "offdiag_decay"},  {"sweep", "holder_sweep"},     {"weighted", "weighted_continuity"},
        {"restricted", "restricted_type"}, {"limsup", "limsup_bound"}, {"local", "local_estimate"}};
    std::map<std::string, ConfigFlags> exp_flags;
    for (const auto& [name, kind] : experiments)
        add_config_flags(app.add_subcommand(name, "run " + kind), exp_flags[name], false);
    ConfigFlags run_flags;
    add_config_flags(app.add_subcommand("run", "run the experiment a config file describes"), run_flags, true);

    // eval
    auto* eval = app.add_subcommand("eval", "evaluate T_sigma(f, g) on a grid");
    SymbolFlags eval_sym;
    add_symbol_flags(eval, eval_sym);
    std::string f_path, g_path, out_path;
    std::vector<double> f_bump, g_bump;
    std::size_t eval_n = 256;
    double eval_period = 64.0;
    eval->add_option("--f", f_path, "input f (.csv or binary)")->check(CLI::ExistingFile);
    eval->add_option("--g", g_path, "input g (.csv or binary)")->check(CLI::ExistingFile);
    eval->add_option("--f-bump", f_bump, "centre,width of a bump used as f")->expected(2)->delimiter(',');
    eval->add_option("--g-bump", g_bump, "centre,width of a bump used as g")->expected(2)->delimiter(',');
    eval->add_option("--grid.n", eval_n, "grid size for bump inputs")->capture_default_str();
    eval->add_option("--grid.period", eval_period, "period for bump inputs")->capture_default_str();
    eval->add_option("-o,--out", out_path, "output (.csv or binary)")->required();

    // kernel
    auto* kernel = app.add_subcommand("kernel", "kernel of a symbol on a (u, v) box");
    SymbolFlags kernel_sym;
    add_symbol_flags(kernel, kernel_sym);
    KernelBox box;
    std::string kernel_out;
    double r_min = 2.0, r_max = 12.0;
    kernel->add_option("--freq-half-width", box.freq_half_width)->capture_default_str();
    kernel->add_option("--freq-points", box.freq_points)->capture_default_str();
    kernel->add_option("--rolloff", box.rolloff)->capture_default_str();
    kernel->add_option("--space-half-width", box.space_half_width)->capture_default_str();
    kernel->add_option("--space-points", box.space_points)->capture_default_str();
    kernel->add_option("--x", box.x)->capture_default_str();
    kernel->add_option("--fit-min", r_min, "decay fit range start")->capture_default_str();
    kernel->add_option("--fit-max", r_max, "decay fit range end")->capture_default_str();
    kernel->add_option("-o,--out", kernel_out, "CSV of u, v, re K, im K, |K|");

    // tiles
    auto* tiles = app.add_subcommand("tiles", "tri-tile collections");
    tiles->require_subcommand(1);
    std::string tiles_file;
    double overlap_bound = 4.0;
    auto* validate = tiles->add_subcommand("validate", "check the collection axioms");
    validate->add_option("file", tiles_file)->required()->check(CLI::ExistingFile);
    validate->add_option("--overlap-bound", overlap_bound)->capture_default_str();
    auto* render = tiles->add_subcommand("render", "text view of a collection");
    int cols = 64, rows = 24;
    render->add_option("file", tiles_file)->required()->check(CLI::ExistingFile);
    render->add_option("--cols", cols)->capture_default_str()->check(CLI::Range(1, 400));
    render->add_option("--rows", rows)->capture_default_str()->check(CLI::Range(1, 400));
    render->add_option("--overlap-bound", overlap_bound)->capture_default_str();
    auto* generate = tiles->add_subcommand("generate", "random dyadic collection");
    std::size_t gen_count = 8, gen_n = 256;
    std::uint64_t gen_seed = 1;
    double gen_period = 64.0, gen_min = 2.0, gen_max = 16.0;
    std::string gen_out;
    generate->add_option("--count", gen_count)->capture_default_str();
    generate->add_option("--seed", gen_seed)->capture_default_str();
    generate->add_option("--grid.n", gen_n)->capture_default_str();
    generate->add_option("--grid.period", gen_period)->capture_default_str();
    generate->add_option("--min-len", gen_min)->capture_default_str();
    generate->add_option("--max-len", gen_max)->capture_default_str();
    generate->add_option("-o,--out", gen_out, "output file (stdout if absent)");

    // report
    auto* report = app.add_subcommand("report", "report files");
    report->require_subcommand(1);
    std::string report_file;
    auto* report_render = report->add_subcommand("render", "plain-text summary of report.json");
    report_render->add_option("file", report_file)->required()->check(CLI::ExistingFile);

    CLI11_PARSE(app, argc, argv);

    try {
        for (const auto& [name, kind] : experiments)
            if (app.got_subcommand(name)) return run_config_command(exp_flags[name], kind);
        if (app.got_subcommand("run")) return run_config_command(run_flags, "");

        if (eval->parsed()) {
            const Symbol s = make_symbol(eval_sym.spec);
            SampledFunction f, g;
            if (!f_path.empty() && !g_path.empty()) {
                f = load_function(f_path);
                g = load_function(g_path);
            } else if (f_bump.size() == 2 && g_bump.size() == 2) {
                if (!is_pow2(eval_n)) throw ParameterError("grid.n must be a power of two");
                const Grid grid = Grid::centered(eval_period, eval_n);
                f = make_bump(f_bump[0], f_bump[1], grid);
                g = make_bump(g_bump[0], g_bump[1], grid);
            } else {
                throw ParameterError("eval needs --f and --g, or --f-bump and --g-bump");
            }
            const SampledFunction T = eval_direct(s, f, g);
            save_function(out_path, T);
            std::cout << "T(f,g): n = " << T.grid.count << ", |T|_2 = " << lp_norm(T, 2.0)
                      << ", |T|_inf = " << lp_norm(T, kInf) << "\nwritten to " << out_path << "\n";
            return 0;
        }
        if (kernel->parsed()) {
            const BilinearKernel K = kernel_from_symbol(make_symbol(kernel_sym.spec), box);
            if (!kernel_out.empty()) {
                std::ofstream os(kernel_out);
                if (!os) throw Error("cannot write " + kernel_out);
                os << "u,v,re,im,abs\n" << std::setprecision(17);
                for (std::size_t i = 0; i < K.u_axis.count; ++i)
                    for (std::size_t j = 0; j < K.v_axis.count; ++j) {
                        const cplx k = K.at(i, j);
                        os << K.u_axis.x(i) << ',' << K.v_axis.x(j) << ',' << k.real() << ',' << k.imag() << ','
                           << std::abs(k) << '\n';
                    }
            }
            const DecayFit fit = fit_kernel_decay(K, r_min, r_max);
            std::cout << "kernel on " << K.u_axis.count << " x " << K.v_axis.count << " points, window " << K.window
                      << "\ndecay exponent M = " << fit.exponent << " (residual " << fit.residual << ", "
                      << fit.points << " shells in [" << r_min << ", " << r_max << "])\n";
            return 0;
        }
        if (validate->parsed()) {
            const ValidationReport v = collection_validate(load_collection(tiles_file), overlap_bound);
            print_validation(std::cout, v);
            return v.pass ? 0 : 1;
        }
        if (render->parsed()) {
            const Collection S = load_collection(tiles_file);
            const ValidationReport v = collection_validate(S, overlap_bound);
            write_collection(std::cout, S, &v);
            render_collection(std::cout, S, cols, rows);
            print_validation(std::cout, v);
            return 0;
        }
        if (generate->parsed()) {
            if (!is_pow2(gen_n)) throw ParameterError("grid.n must be a power of two");
            Rng rng(gen_seed);
            const Collection S = random_collection(Grid::centered(gen_period, gen_n), gen_count, rng, gen_min, gen_max);
            if (gen_out.empty()) {
                write_collection(std::cout, S);
            } else {
                save_collection(gen_out, S);
                std::cout << S.size() << " tri-tiles written to " << gen_out << "\n";
            }
            return 0;
        }
        if (report_render->parsed()) {
            std::cout << render_report(nlohmann::json::parse(read_file(report_file)));
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
