// gmatch: graph matching of two feature files.
//
//   gmatch compare a.json b.json --out report.json --viz out/ab
//   gmatch compare --batch pairs.txt --out-dir reports --jobs 4
//   gmatch viz a.json b.json --report report.json --method gsspf --out ab.svg
//
// Numeric options may come from a TOML/INI file given with --config; flags on
// the command line override it. GMATCH_LOG_LEVEL sets log verbosity.

#include "gmatch/gmatch.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace fs = std::filesystem;
using namespace gmatch;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;
constexpr Index kLargePresetPoints = 500;

struct Flags {
    std::optional<double> alpha, lambda, beta0, beta_r, beta_m, eps1, eps2;
    std::optional<int> max_iters, sinkhorn_max_iters;
    std::string preset;
    std::optional<Index> select;
    std::optional<Index> k;
    std::optional<double> ratio;
    bool no_normalize_descriptors = false;
    bool normalize_adjacency = false;
};

struct Job {
    std::string file_a;
    std::string file_b;
    std::string out;      // report path; empty writes to stdout
    std::string viz;      // SVG prefix; empty disables
};

std::shared_ptr<spdlog::logger> make_logger()
{
    auto log = spdlog::stderr_color_mt("gmatch");
    log->set_pattern("[%l] %v");
    log->set_level(spdlog::level::warn);
    if (const char* env = std::getenv("GMATCH_LOG_LEVEL")) {
        const auto level = spdlog::level::from_str(env);
        // from_str maps unknown names to off; only accept the literal "off".
        if (level != spdlog::level::off || std::string(env) == "off")
            log->set_level(level);
        else
            log->warn("ignoring unknown GMATCH_LOG_LEVEL '{}'", env);
    }
    return log;
}

/// Effective configuration: defaults, then the preset, then explicit values.
/// `large_preset_top` is set when the preset asks for selection clamped to
/// the input sizes.
RunConfig resolve(const Flags& f, bool& large_preset_top)
{
    RunConfig cfg;
    large_preset_top = false;
    if (f.preset == "small") {
        cfg.solver = SolverConfig::small();
    } else if (f.preset == "large") {
        cfg.solver = SolverConfig::large();
        large_preset_top = true;
    }
    auto set = [](auto& dst, const auto& src) {
        if (src) dst = *src;
    };
    set(cfg.solver.alpha, f.alpha);
    set(cfg.solver.lambda, f.lambda);
    set(cfg.solver.beta0, f.beta0);
    set(cfg.solver.beta_r, f.beta_r);
    set(cfg.solver.beta_m, f.beta_m);
    set(cfg.solver.eps1, f.eps1);
    set(cfg.solver.eps2, f.eps2);
    set(cfg.solver.max_iters, f.max_iters);
    set(cfg.solver.sinkhorn_max_iters, f.sinkhorn_max_iters);
    if (f.select) {
        cfg.select_top = *f.select;
        large_preset_top = false;
    }
    set(cfg.k, f.k);
    cfg.ratio = f.ratio;
    cfg.normalize_descriptors = !f.no_normalize_descriptors;
    cfg.graph.normalize_adjacency = f.normalize_adjacency;
    cfg.validate();
    return cfg;
}

void add_solver_flags(CLI::App& app, Flags& f)
{
    auto* g = "Solver";
    app.add_option("--alpha", f.alpha, "fixed-point step fraction in (0, 1]")->group(g);
    app.add_option("--lambda", f.lambda, "node-affinity weight")->group(g);
    app.add_option("--beta0", f.beta0, "initial softmax sharpness")->group(g);
    app.add_option("--beta-r", f.beta_r, "sharpness growth per stage")->group(g);
    app.add_option("--beta-m", f.beta_m, "stages run while beta < beta-m")->group(g);
    app.add_option("--eps1", f.eps1, "inner-loop tolerance")->group(g);
    app.add_option("--eps2", f.eps2, "Sinkhorn tolerance")->group(g);
    app.add_option("--max-iters", f.max_iters, "inner iterations per stage")->group(g);
    app.add_option("--sinkhorn-max-iters", f.sinkhorn_max_iters, "Sinkhorn sweep cap")->group(g);
    app.add_option("--preset", f.preset,
                   "large: beta0=1e-6, beta-m=5e-6, top 500 points; small: beta0=1e-5, beta-m=5e-5")
        ->check(CLI::IsMember({"large", "small"}))
        ->group(g);
    g = "Input";
    app.add_option("--select", f.select, "keep the T most similar points per image (0: all)")
        ->group(g);
    app.add_option("--k", f.k, "baseline candidates per query")->group(g);
    app.add_option("--ratio", f.ratio, "baseline ratio test threshold")->group(g);
    app.add_flag("--no-normalize-descriptors", f.no_normalize_descriptors,
                 "use descriptors as stored")
        ->group(g);
    app.add_flag("--normalize-adjacency", f.normalize_adjacency,
                 "divide pixel distances by the largest one")
        ->group(g);
}

void write_output(const std::string& path, const std::string& text)
{
    if (path.empty()) {
        std::cout << text << std::flush;
        return;
    }
    const auto parent = fs::path(path).parent_path();
    if (!parent.empty()) fs::create_directories(parent);
    write_text_file(path, text);
}

void check_beta_scale(spdlog::logger& log, const Prepared& p, const RunConfig& cfg)
{
    const Index n1 = p.ga.adjacency.rows();
    const Index n2 = p.gb.adjacency.rows();
    if (std::min(n1, n2) < 1) return;
    const double scale =
        initial_gradient_scale(p.ga.adjacency, p.gb.adjacency, p.k, cfg.solver.lambda);
    for (const auto& [name, beta] : {std::pair{"beta0", cfg.solver.beta0},
                                     std::pair{"beta-m", cfg.solver.beta_m}}) {
        const double spread = beta * scale;
        if (spread < 1e-3 || spread > 1e2)
            log.warn("{} * max|grad| = {:.3g} is outside [1e-3, 1e2]; consider another preset",
                     name, spread);
    }
}

/// One pair: parse, prepare, run the requested methods, write outputs.
int run_job(spdlog::logger& log, const std::string& command, const Job& job, RunConfig cfg,
            bool large_preset_top)
{
    ParseOptions popts{cfg.normalize_descriptors};
    const FeatureSet fa = load_features(job.file_a, popts);
    const FeatureSet fb = load_features(job.file_b, popts);
    if (large_preset_top) cfg.select_top = std::min({kLargePresetPoints, fa.size(), fb.size()});
    log.info("{}: {} ({} points) vs {} ({} points)", command, job.file_a, fa.size(), job.file_b,
             fb.size());

    const Prepared p = prepare(fa, fb, cfg);
    log.info("input digests: a={} b={}", p.digest_a, p.digest_b);

    std::vector<MatchReport> reports;
    auto record = [&](MethodRun run) {
        log.info("{} consumed a={} b={}", to_string(run.report.method), run.digest_a,
                 run.digest_b);
        if (run.digest_a != p.digest_a || run.digest_b != p.digest_b)
            throw std::logic_error("method consumed a different node set than prepared");
        log.info("{} total error {}", to_string(run.report.method), decomposition(run.report));
        reports.push_back(std::move(run.report));
    };

    if (command == "match" || command == "compare") {
        check_beta_scale(log, p, cfg);
        record(run_gsspf(p, cfg, [&](int stage, int it, const Matrix&) {
            log.trace("stage {} iteration {}", stage, it);
        }));
    }
    if (command == "baseline" || command == "compare") record(run_baseline(p, cfg));
    if (command == "oracle") record(run_oracle(p, cfg));

    write_output(job.out, render_report(command, p, cfg, reports));
    if (!job.viz.empty()) {
        for (const auto& r : reports) {
            const std::string path = job.viz + "." + to_string(r.method) + ".svg";
            write_output(path, render_svg(p.a, p.b, r.assignment));
            log.info("wrote {}", path);
        }
    }
    return kExitOk;
}

/// Maps exceptions to exit codes and logs the diagnostic.
template <class F>
int guarded(spdlog::logger& log, const std::string& what, F&& body)
{
    try {
        return body();
    } catch (const input_error& e) {
        log.error("{}: {}", what, e.what());
        return kExitInput;
    } catch (const numerical_error& e) {
        log.error("{}: numerical failure: {}", what, e.what());
        return kExitNumerical;
    } catch (const std::exception& e) {
        log.error("{}: {}", what, e.what());
        return kExitFailure;
    }
}

std::vector<Job> read_batch(const std::string& list, const std::string& out_dir, bool svg)
{
    const std::string text = read_text_file(list);
    const fs::path base = fs::path(list).parent_path();
    auto resolve_path = [&](const std::string& s) {
        const fs::path path(s);
        return (path.is_absolute() || base.empty() ? path : base / path).string();
    };
    std::vector<Job> jobs;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream fields(line);
        std::string a, b, extra;
        if (!(fields >> a)) continue;
        if (!(fields >> b) || (fields >> extra))
            throw input_error(list + ": line " + std::to_string(line_no)
                              + ": expected two feature files");
        char name[32];
        std::snprintf(name, sizeof name, "pair-%03zu", jobs.size());
        const std::string stem = (fs::path(out_dir) / name).string();
        jobs.push_back({resolve_path(a), resolve_path(b), stem + ".json", svg ? stem : ""});
    }
    if (jobs.empty()) throw input_error(list + ": no pairs");
    return jobs;
}

int run_batch(spdlog::logger& log, const std::string& command, const std::vector<Job>& jobs,
              const RunConfig& cfg, bool large_preset_top, int workers)
{
    std::vector<int> codes(jobs.size(), kExitOk);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++) {
            codes[i] = guarded(log, jobs[i].file_a + " vs " + jobs[i].file_b,
                               [&] { return run_job(log, command, jobs[i], cfg, large_preset_top); });
        }
    };
    workers = std::clamp(workers, 1, static_cast<int>(jobs.size()));
    {
        std::vector<std::jthread> pool;
        for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
        worker();
    }
    int worst = kExitOk;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        std::cout << jobs[i].out << " " << (codes[i] == kExitOk ? "ok" : "failed") << "\n";
        worst = std::max(worst, codes[i]);
    }
    return worst;
}

int render_viz(const std::string& file_a, const std::string& file_b, const std::string& report,
               const std::string& method, const std::string& out)
{
    const FeatureSet fa = load_features(file_a);
    const FeatureSet fb = load_features(file_b);
    Method m = Method::gsspf;
    for (Method cand : {Method::gsspf, Method::baseline, Method::oracle})
        if (to_string(cand) == method) m = cand;
    const ReportView view = read_report(read_text_file(report), m);
    auto pick = [](const FeatureSet& fs, const std::vector<Index>& kept) {
        if (kept.empty()) return fs;
        for (Index i : kept)
            detail::require(i >= 0 && i < fs.size(), "report selection does not fit the features");
        return fs.subset(kept);
    };
    write_output(out, render_svg(pick(fa, view.kept_a), pick(fb, view.kept_b), view.assignment));
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv)
{
    auto log = make_logger();

    CLI::App app{"Graph matching of keypoint feature files"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "TOML or INI file with option defaults");

    Flags flags;
    add_solver_flags(app, flags);

    Job job;
    std::string batch, out_dir;
    int jobs_n = 1;
    bool batch_svg = false;

    std::vector<CLI::App*> runs;
    for (const auto& [name, desc] :
         {std::pair{"match", "graph matching only"}, std::pair{"baseline", "point matching only"},
          std::pair{"compare", "graph matching and point matching on the same points"},
          std::pair{"oracle", "exhaustive search, at most 8 points per side"}}) {
        auto* sub = app.add_subcommand(name, desc);
        sub->add_option("features_a", job.file_a, "first feature file");
        sub->add_option("features_b", job.file_b, "second feature file");
        sub->add_option("--out,-o", job.out, "report path (default: stdout)");
        sub->add_option("--viz", job.viz, "write <prefix>.<method>.svg per method");
        runs.push_back(sub);
    }
    auto* compare = runs[2];
    auto* batch_opt =
        compare->add_option("--batch", batch, "file listing one 'a b' feature pair per line")
            ->check(CLI::ExistingFile);
    compare->add_option("--out-dir", out_dir, "report directory in batch mode")->needs(batch_opt);
    compare->add_option("--jobs,-j", jobs_n, "pairs processed concurrently in batch mode")
        ->check(CLI::PositiveNumber)
        ->needs(batch_opt);
    compare->add_flag("--svg", batch_svg, "write SVGs next to each batch report")->needs(batch_opt);

    std::string report, method = "gsspf";
    auto* viz = app.add_subcommand("viz", "draw the correspondences of a report as SVG");
    viz->add_option("features_a", job.file_a, "first feature file")->required();
    viz->add_option("features_b", job.file_b, "second feature file")->required();
    viz->add_option("--report", report, "report written by match/baseline/compare/oracle")
        ->required();
    viz->add_option("--method", method, "report entry to draw")
        ->check(CLI::IsMember({"gsspf", "baseline", "oracle"}));
    viz->add_option("--out,-o", job.out, "SVG path (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInput;
    }

    if (viz->parsed()) {
        return guarded(*log, "viz",
                       [&] { return render_viz(job.file_a, job.file_b, report, method, job.out); });
    }

    CLI::App* sub = app.get_subcommands().front();
    const std::string command = sub->get_name();
    bool large_preset_top = false;
    RunConfig cfg;
    if (const int code = guarded(*log, "config", [&] {
            cfg = resolve(flags, large_preset_top);
            return kExitOk;
        });
        code != kExitOk)
        return code;

    if (!batch.empty()) {
        if (!job.file_a.empty() || !job.out.empty() || !job.viz.empty()) {
            log->error("--batch replaces the feature file, --out and --viz arguments");
            return kExitInput;
        }
        return guarded(*log, "batch", [&] {
            return run_batch(*log, command, read_batch(batch, out_dir, batch_svg), cfg,
                             large_preset_top, jobs_n);
        });
    }
    if (job.file_a.empty() || job.file_b.empty()) {
        log->error("{}: two feature files are required", command);
        return kExitInput;
    }
    return guarded(*log, command, [&] { return run_job(*log, command, job, cfg, large_preset_top); });
}
