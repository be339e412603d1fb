#pragma once

// Match reports as JSON with a fixed field order. Reals carry 9 significant
// digits so golden files stay stable across platforms.

#include "gmatch/metrics.hpp"
#include "gmatch/pipeline.hpp"

#include <nlohmann/json.hpp>

#include <cctype>
#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

namespace gmatch {

using ordered_json = nlohmann::ordered_json;

inline constexpr int kReportFormat = 1;

inline std::string format_sig9(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

/// Round to 9 significant digits; the JSON writer then emits the shortest
/// representation, which is at most that long.
inline double sig9(double v)
{
    return std::isfinite(v) ? std::stod(format_sig9(v)) : v;
}

/// "total = edge + node", the decomposition line of a report.
inline std::string decomposition(const MatchReport& r)
{
    return format_sig9(r.total_error) + " = " + format_sig9(r.edge_error) + " + "
           + format_sig9(r.node_error);
}

inline ordered_json to_json(const SolveTrace& t)
{
    ordered_json j;
    j["outer_stages"] = t.outer_stages;
    j["inner_iterations"] = t.inner_iterations;
    j["total_iterations"] = t.total_iterations();
    ordered_json betas = ordered_json::array();
    for (double b : t.stage_beta) betas.push_back(sig9(b));
    j["stage_beta"] = betas;
    ordered_json conv = ordered_json::array();
    for (char c : t.converged) conv.push_back(c != 0);
    j["converged"] = conv;
    j["final_beta"] = sig9(t.final_beta);
    j["final_objective"] = t.objective_history.empty() ? 0.0 : sig9(t.objective_history.back());
    j["sinkhorn_sweeps"] = t.sinkhorn_sweeps;
    j["max_marginal_deviation"] = sig9(t.max_marginal_deviation);
    return j;
}

inline ordered_json to_json(const MatchReport& r)
{
    ordered_json j;
    j["method"] = to_string(r.method);
    j["n1"] = r.assignment.n1;
    j["n2"] = r.assignment.n2;
    ordered_json pairs = ordered_json::array();
    for (const auto& [a, b] : r.assignment.pairs) pairs.push_back({a, b});
    j["pairs"] = pairs;
    j["edge_error"] = sig9(r.edge_error);
    j["node_error"] = sig9(r.node_error);
    j["total_error"] = sig9(r.total_error);
    j["decomposition"] = decomposition(r);
    if (r.objective) j["objective"] = sig9(*r.objective);
    if (r.trace) j["trace"] = to_json(*r.trace);
    return j;
}

inline ordered_json to_json(const RunConfig& c)
{
    ordered_json j;
    j["alpha"] = sig9(c.solver.alpha);
    j["lambda"] = sig9(c.solver.lambda);
    j["beta0"] = sig9(c.solver.beta0);
    j["beta_r"] = sig9(c.solver.beta_r);
    j["beta_m"] = sig9(c.solver.beta_m);
    j["eps1"] = sig9(c.solver.eps1);
    j["eps2"] = sig9(c.solver.eps2);
    j["max_iters"] = c.solver.max_iters;
    j["sinkhorn_max_iters"] = c.solver.sinkhorn_max_iters;
    j["select_top"] = c.select_top;
    j["k"] = c.k;
    j["ratio"] = c.ratio ? ordered_json(sig9(*c.ratio)) : ordered_json(nullptr);
    j["normalize_descriptors"] = c.normalize_descriptors;
    j["normalize_adjacency"] = c.graph.normalize_adjacency;
    return j;
}

namespace detail {

/// dump(2) puts every number of a pair on its own line; fold "[\n  i,\n  j\n]"
/// back into "[i, j]". Only arrays of two integers are rewritten.
inline std::string inline_pairs(const std::string& text)
{
    std::string out;
    out.reserve(text.size());
    std::size_t pos = 0;
    auto skip_ws = [&](std::size_t p) {
        while (p < text.size() && (text[p] == ' ' || text[p] == '\n')) ++p;
        return p;
    };
    auto digits = [&](std::size_t p) {
        while (p < text.size() && std::isdigit(static_cast<unsigned char>(text[p]))) ++p;
        return p;
    };
    while (pos < text.size()) {
        if (text[pos] == '[') {
            const std::size_t a0 = skip_ws(pos + 1);
            const std::size_t a1 = digits(a0);
            if (a1 > a0 && a1 < text.size() && text[a1] == ',') {
                const std::size_t b0 = skip_ws(a1 + 1);
                const std::size_t b1 = digits(b0);
                const std::size_t close = skip_ws(b1);
                if (b1 > b0 && close < text.size() && text[close] == ']') {
                    out += '[';
                    out.append(text, a0, a1 - a0);
                    out += ", ";
                    out.append(text, b0, b1 - b0);
                    out += ']';
                    pos = close + 1;
                    continue;
                }
            }
        }
        out += text[pos++];
    }
    return out;
}

}  // namespace detail

/// Full report document for one invocation.
inline std::string render_report(std::string_view command, const Prepared& p,
                                 const RunConfig& cfg, const std::vector<MatchReport>& reports)
{
    ordered_json doc;
    doc["format"] = kReportFormat;
    doc["command"] = std::string(command);
    ordered_json inputs;
    inputs["a"] = {{"image", p.a.image_id}, {"nodes", p.a.size()}, {"digest", p.digest_a}};
    inputs["b"] = {{"image", p.b.image_id}, {"nodes", p.b.size()}, {"digest", p.digest_b}};
    doc["inputs"] = inputs;
    doc["config"] = to_json(cfg);
    if (cfg.select_top > 0) {
        doc["selection"] = {{"T", cfg.select_top}, {"kept_a", p.kept_a}, {"kept_b", p.kept_b}};
    }
    ordered_json reps = ordered_json::array();
    for (const auto& r : reports) reps.push_back(to_json(r));
    doc["reports"] = reps;
    return detail::inline_pairs(doc.dump(2)) + "\n";
}

struct ReportView {
    Assignment assignment;
    std::vector<Index> kept_a;  // empty when no selection was applied
    std::vector<Index> kept_b;
};

/// First report with the given method in a report document, plus the node
/// selection the run applied.
inline ReportView read_report(std::string_view text, Method method)
{
    ordered_json doc;
    try {
        doc = ordered_json::parse(text.begin(), text.end());
    } catch (const ordered_json::parse_error& e) {
        throw input_error(std::string("malformed report: ") + e.what());
    }
    detail::require(doc.is_object() && doc.value("format", 0) == kReportFormat,
                    "report: missing or unsupported 'format'");
    detail::require(doc.contains("reports") && doc["reports"].is_array(),
                    "report: missing 'reports' array");
    for (const auto& r : doc["reports"]) {
        if (r.value("method", std::string{}) != to_string(method)) continue;
        ReportView view;
        Assignment& a = view.assignment;
        try {
            a.n1 = r.at("n1").get<Index>();
            a.n2 = r.at("n2").get<Index>();
            for (const auto& pr : r.at("pairs"))
                a.pairs.emplace_back(pr.at(0).get<Index>(), pr.at(1).get<Index>());
            if (doc.contains("selection")) {
                view.kept_a = doc["selection"].at("kept_a").get<std::vector<Index>>();
                view.kept_b = doc["selection"].at("kept_b").get<std::vector<Index>>();
            }
        } catch (const ordered_json::exception& e) {
            throw input_error(std::string("report: malformed entry: ") + e.what());
        }
        a.validate();
        return view;
    }
    throw input_error(std::string("report: no '") + to_string(method) + "' entry");
}

inline Assignment read_report_assignment(std::string_view text, Method method)
{
    return read_report(text, method).assignment;
}

}  // namespace gmatch
