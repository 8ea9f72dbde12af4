#pragma once

#include <cstdio>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "ashock/errors.hpp"
#include "ashock/experiment.hpp"
#include "ashock/ns_destab.hpp"
#include "ashock/scalar_destab.hpp"

namespace ashock {

inline std::string fmt_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Minimal CSV writer: fixed column count, %.17g numbers so reruns are
/// byte-identical.
class csv_table {
public:
    explicit csv_table(std::vector<std::string> header) : cols_(header.size()) {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (i) body_ += ',';
            body_ += header[i];
        }
        body_ += '\n';
    }
    void row(const std::vector<std::string>& cells) {
        if (cells.size() != cols_)
            throw stage_error("csv row has wrong column count");
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) body_ += ',';
            body_ += cells[i];
        }
        body_ += '\n';
    }
    const std::string& str() const { return body_; }

private:
    std::size_t cols_;
    std::string body_;
};

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw stage_error("cannot open output file " + path);
    out << content;
}

/// key = value summary block, deterministic order.
class summary {
public:
    void set(const std::string& key, const std::string& value) {
        entries_.emplace_back(key, value);
    }
    void set(const std::string& key, double value) { set(key, fmt_num(value)); }
    void set(const std::string& key, bool value) {
        set(key, std::string(value ? "true" : "false"));
    }
    std::string str() const {
        std::string out;
        for (const auto& [k, v] : entries_) out += k + " = " + v + "\n";
        return out;
    }

private:
    std::vector<std::pair<std::string, std::string>> entries_;
};

// ---------------------------------------------------------------------------
// Serializers for the module outputs
// ---------------------------------------------------------------------------

inline std::string scan_csv(const search_result& res) {
    csv_table t({"K", "sigma", "Aprime_end", "J1", "J2", "F", "sigma_ok", "aprime_ok",
                 "abound_ok", "ratio_ok", "error"});
    for (const auto& r : res.rows)
        t.row({fmt_num(r.K), fmt_num(r.sigma), fmt_num(r.aprime_end), fmt_num(r.j1),
               fmt_num(r.j2), fmt_num(r.f), r.sigma_ok ? "1" : "0",
               r.aprime_ok ? "1" : "0", r.abound_ok ? "1" : "0",
               r.ratio_ok ? "1" : "0", r.error});
    return t.str();
}

inline std::string sweep_csv(const sweep_result& res) {
    csv_table t({"v_plus", "sigma", "p_jump", "alpha", "J1", "J2", "J3", "F",
                 "absJ1_pjump_over_sigma", "J2_over_sigma", "absJ3_pjump_over_sigma",
                 "alpha_sqrt_p", "q_ratio", "error"});
    for (const auto& r : res.rows)
        t.row({fmt_num(r.v_plus), fmt_num(r.sigma), fmt_num(r.p_jump), fmt_num(r.alpha),
               fmt_num(r.j1), fmt_num(r.j2), fmt_num(r.j3), fmt_num(r.f),
               fmt_num(r.d_j1), fmt_num(r.d_j2), fmt_num(r.d_j3), fmt_num(r.d_alpha),
               fmt_num(r.q_ratio), r.error});
    return t.str();
}

inline std::string entropy_csv(const entropy_report& rep) {
    csv_table t({"t", "strategy", "shift", "phi", "phi_minus_phi0"});
    for (const auto& st : rep.strategies)
        for (std::size_t s = 0; s < rep.times.size(); ++s)
            t.row({fmt_num(rep.times[s]), st.name, fmt_num(st.shift[s]),
                   fmt_num(st.phi[s]), fmt_num(st.phi[s] - rep.phi0)});
    return t.str();
}

inline std::string decomposition_csv(const entropy_report& rep) {
    csv_table t({"t", "rate", "derivative_formula", "shift_term", "rest_term"});
    for (std::size_t k = 0; k < rep.rates.size(); ++k)
        for (std::size_t s = 0; s < rep.times.size(); ++s)
            t.row({fmt_num(rep.times[s]), fmt_num(rep.rates[k]),
                   fmt_num(rep.decomposition[k][s]), fmt_num(rep.y_series[s]),
                   fmt_num(rep.rest_series[s])});
    return t.str();
}

// ---------------------------------------------------------------------------
// SVG line plot (no external renderer)
// ---------------------------------------------------------------------------

inline std::string entropy_svg(const entropy_report& rep) {
    const int W = 900, H = 560, ML = 70, MR = 20, MT = 30, MB = 50;
    double tmin = rep.times.front(), tmax = rep.times.back();
    double ymin = rep.phi0, ymax = rep.phi0;
    for (const auto& st : rep.strategies)
        for (double v : st.phi) {
            ymin = std::min(ymin, v);
            ymax = std::max(ymax, v);
        }
    if (ymax == ymin) ymax = ymin + 1.0;
    if (tmax == tmin) tmax = tmin + 1.0;
    auto px = [&](double t) { return ML + (W - ML - MR) * (t - tmin) / (tmax - tmin); };
    auto py = [&](double y) { return H - MB - (H - MT - MB) * (y - ymin) / (ymax - ymin); };
    static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                    "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
                                    "#bcbd22", "#17becf", "#393b79", "#637939"};
    std::string s;
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" height=\"%d\" "
                  "viewBox=\"0 0 %d %d\">\n",
                  W, H, W, H);
    s += buf;
    s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%d\" y1=\"%d\" x2=\"%d\" y2=\"%d\" stroke=\"black\"/>\n",
                  ML, H - MB, W - MR, H - MB);
    s += buf;
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%d\" y1=\"%d\" x2=\"%d\" y2=\"%d\" stroke=\"black\"/>\n",
                  ML, MT, ML, H - MB);
    s += buf;
    // phi0 reference line
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%d\" y1=\"%.2f\" x2=\"%d\" y2=\"%.2f\" stroke=\"#999\" "
                  "stroke-dasharray=\"4 3\"/>\n",
                  ML, py(rep.phi0), W - MR, py(rep.phi0));
    s += buf;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%d\" y=\"%d\" font-size=\"13\">t in [%.6g, %.6g], phi0 = "
                  "%.9g, T* = %.6g</text>\n",
                  ML, H - 14, tmin, tmax, rep.phi0, rep.t_star);
    s += buf;
    int ci = 0;
    int legend_y = MT + 8;
    for (const auto& st : rep.strategies) {
        const char* col = palette[ci % 12];
        std::string pts;
        for (std::size_t i = 0; i < rep.times.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%s%.2f,%.2f", i ? " " : "",
                          px(rep.times[i]), py(st.phi[i]));
            pts += buf;
        }
        s += "<polyline fill=\"none\" stroke=\"" + std::string(col) +
             "\" stroke-width=\"1.4\" points=\"" + pts + "\"/>\n";
        std::snprintf(buf, sizeof buf,
                      "<text x=\"%d\" y=\"%d\" font-size=\"12\" fill=\"%s\">%s</text>\n",
                      W - MR - 150, legend_y, col, st.name.c_str());
        s += buf;
        legend_y += 15;
        ++ci;
    }
    s += "</svg>\n";
    return s;
}

inline summary entropy_summary(const entropy_report& rep) {
    summary sm;
    sm.set("kind", rep.kind);
    if (rep.kind == "scalar") sm.set("K", rep.K);
    else {
        sm.set("v_plus", rep.v_plus);
        sm.set("gamma", rep.gamma);
    }
    sm.set("eps", rep.eps);
    sm.set("lipschitz", rep.lipschitz);
    sm.set("sigma", rep.sigma);
    sm.set("f_base", rep.f_base);
    sm.set("f_projected", rep.f_projected);
    sm.set("taper_delta", rep.delta);
    sm.set("lambda", rep.lambda);
    sm.set("lambda_star", rep.lambda_star);
    sm.set("grid_h", rep.grid_h);
    sm.set("grid_half_width", rep.grid_half_width);
    sm.set("dt", rep.dt);
    sm.set("phi0", rep.phi0);
    sm.set("fd_derivative0", rep.fd_derivative0);
    sm.set("formula_derivative0", rep.formula_derivative0);
    sm.set("decomposition_residual", rep.decomposition_residual());
    sm.set("verdict", std::string(rep.verdict ? "increase" : "no-increase"));
    sm.set("t_star", rep.t_star);
    sm.set("drift_t_star", rep.drift_t_star);
    return sm;
}

} // namespace ashock
