#include "cylwalk/report.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace cylwalk {

namespace {

void ensure_dir(const std::string& path) {
    std::filesystem::path p(path);
    if (!p.parent_path().empty()) std::filesystem::create_directories(p.parent_path());
}

// minimal SVG scatter/line plot
class SvgPlot {
  public:
    SvgPlot(std::string title, std::string xlabel, std::string ylabel)
        : title_(std::move(title)), xlabel_(std::move(xlabel)), ylabel_(std::move(ylabel)) {}

    // filled region between two curves over the same abscissae
    void add_band(const std::vector<double>& xs, const std::vector<double>& lo, const std::vector<double>& hi,
                  const std::string& color) {
        band_xs_ = xs;
        band_lo_ = lo;
        band_hi_ = hi;
        band_color_ = color;
        for (size_t i = 0; i < xs.size(); ++i) {
            xmin_ = std::min(xmin_, xs[i]);
            xmax_ = std::max(xmax_, xs[i]);
            ymin_ = std::min(ymin_, lo[i]);
            ymax_ = std::max(ymax_, hi[i]);
        }
    }

    void add_series(std::vector<double> xs, std::vector<double> ys, const std::string& color, bool line,
                    const std::string& label = "") {
        for (size_t i = 0; i < xs.size(); ++i) {
            if (!std::isfinite(xs[i]) || !std::isfinite(ys[i])) continue;
            xmin_ = std::min(xmin_, xs[i]);
            xmax_ = std::max(xmax_, xs[i]);
            ymin_ = std::min(ymin_, ys[i]);
            ymax_ = std::max(ymax_, ys[i]);
        }
        series_.push_back({std::move(xs), std::move(ys), color, line, label});
    }

    void render(const std::string& path) const {
        const double W = 640, H = 480, ml = 70, mr = 20, mt = 40, mb = 50;
        double xr = xmax_ - xmin_, yr = ymax_ - ymin_;
        if (xr <= 0) xr = 1;
        if (yr <= 0) yr = 1;
        auto X = [&](double x) { return ml + (x - xmin_) / xr * (W - ml - mr); };
        auto Y = [&](double y) { return H - mb - (y - ymin_) / yr * (H - mt - mb); };
        std::ostringstream os;
        os << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='" << H << "'>\n";
        os << "<rect width='100%' height='100%' fill='white'/>\n";
        os << "<text x='" << W / 2 << "' y='24' text-anchor='middle' font-size='16'>" << title_ << "</text>\n";
        os << "<line x1='" << ml << "' y1='" << H - mb << "' x2='" << W - mr << "' y2='" << H - mb
           << "' stroke='black'/>\n";
        os << "<line x1='" << ml << "' y1='" << mt << "' x2='" << ml << "' y2='" << H - mb
           << "' stroke='black'/>\n";
        for (int k = 0; k <= 4; ++k) {
            double xv = xmin_ + xr * k / 4, yv = ymin_ + yr * k / 4;
            os << "<text x='" << X(xv) << "' y='" << H - mb + 18 << "' text-anchor='middle' font-size='11'>"
               << format_tick(xv) << "</text>\n";
            os << "<text x='" << ml - 6 << "' y='" << Y(yv) + 4 << "' text-anchor='end' font-size='11'>"
               << format_tick(yv) << "</text>\n";
        }
        os << "<text x='" << (ml + W - mr) / 2 << "' y='" << H - 12 << "' text-anchor='middle' font-size='13'>"
           << xlabel_ << "</text>\n";
        os << "<text x='16' y='" << (mt + H - mb) / 2 << "' font-size='13' transform='rotate(-90 16 "
           << (mt + H - mb) / 2 << ")' text-anchor='middle'>" << ylabel_ << "</text>\n";
        if (!band_xs_.empty()) {
            os << "<path fill='" << band_color_ << "' fill-opacity='0.25' stroke='none' d='M";
            for (size_t i = 0; i < band_xs_.size(); ++i)
                os << (i ? " L" : "") << X(band_xs_[i]) << "," << Y(band_lo_[i]);
            for (size_t i = band_xs_.size(); i-- > 0;) os << " L" << X(band_xs_[i]) << "," << Y(band_hi_[i]);
            os << " Z'/>\n";
        }
        double ly = mt + 8;
        for (const Series& s : series_) {
            if (s.line) {
                os << "<polyline fill='none' stroke='" << s.color << "' stroke-width='1.5' points='";
                for (size_t i = 0; i < s.xs.size(); ++i) os << X(s.xs[i]) << "," << Y(s.ys[i]) << " ";
                os << "'/>\n";
            } else {
                for (size_t i = 0; i < s.xs.size(); ++i)
                    os << "<circle cx='" << X(s.xs[i]) << "' cy='" << Y(s.ys[i]) << "' r='3' fill='" << s.color
                       << "'/>\n";
            }
            if (!s.label.empty()) {
                os << "<rect x='" << W - mr - 150 << "' y='" << ly - 8 << "' width='10' height='10' fill='"
                   << s.color << "'/>\n";
                os << "<text x='" << W - mr - 135 << "' y='" << ly + 1 << "' font-size='11'>" << s.label
                   << "</text>\n";
                ly += 16;
            }
        }
        os << "</svg>\n";
        ensure_dir(path);
        std::ofstream f(path);
        f << os.str();
    }

  private:
    struct Series {
        std::vector<double> xs, ys;
        std::string color;
        bool line;
        std::string label;
    };
    static std::string format_tick(double v) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.3g", v);
        return buf;
    }
    std::string title_, xlabel_, ylabel_;
    std::vector<Series> series_;
    std::vector<double> band_xs_, band_lo_, band_hi_;
    std::string band_color_;
    double xmin_ = 1e300, xmax_ = -1e300, ymin_ = 1e300, ymax_ = -1e300;
};

}  // namespace

void write_csv(const RunRecord& rec, const std::string& path) {
    ensure_dir(path);
    std::ofstream f(path, std::ios::binary);
    std::istringstream kv(rec.config.to_kv());
    std::string line;
    while (std::getline(kv, line)) f << "# " << line << "\n";
    f << "# fingerprint=" << rec.fingerprint << "\n";
    for (size_t i = 0; i < rec.columns.size(); ++i) f << (i ? "," : "") << rec.columns[i];
    f << "\n";
    for (const auto& row : rec.rows) {
        for (size_t i = 0; i < row.size(); ++i) f << (i ? "," : "") << row[i];
        f << "\n";
    }
}

RunRecord read_csv(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("read_csv: cannot open " + path);
    RunRecord rec;
    std::string line, kv;
    bool header_done = false;
    while (std::getline(f, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.rfind("# ", 0) == 0) {
            std::string body = line.substr(2);
            if (body.rfind("fingerprint=", 0) != 0) kv += body + "\n";
            continue;
        }
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string tok;
        while (std::getline(ls, tok, ',')) cells.push_back(tok);
        // trailing empty cell
        if (!line.empty() && line.back() == ',') cells.push_back("");
        if (!header_done) {
            rec.columns = cells;
            header_done = true;
        } else {
            while (cells.size() < rec.columns.size()) cells.push_back("");
            rec.rows.push_back(cells);
        }
    }
    rec.config = ExperimentConfig::from_kv(kv);
    rec.fingerprint = rec.config.fingerprint();
    return rec;
}

void write_json_summary(const RunRecord& rec, const std::string& path) {
    ensure_dir(path);
    nlohmann::ordered_json j;
    j["schema"] = "cylwalk-summary/1";
    j["config"] = nlohmann::ordered_json::object();
    std::istringstream kv(rec.config.to_kv());
    std::string line;
    while (std::getline(kv, line)) {
        auto eq = line.find('=');
        j["config"][line.substr(0, eq)] = line.substr(eq + 1);
    }
    j["summary"] = rec.summary;
    std::ofstream f(path, std::ios::binary);
    f << j.dump(2) << "\n";
}

void write_record_svg(const RunRecord& rec, const std::string& path) {
    const std::string& kind = rec.config.kind;
    if (kind == "tdisc") {
        SvgPlot plot("disconnection time vs size", "log N", "log median T");
        std::vector<double> xs, ys;
        if (rec.summary.contains("per_N")) {
            for (const auto& j : rec.summary["per_N"]) {
                if (!j.contains("median")) continue;
                xs.push_back(std::log(j["N"].get<double>()));
                ys.push_back(std::log(j["median"].get<double>()));
            }
        }
        plot.add_series(xs, ys, "#1f77b4", false, "medians");
        if (xs.size() >= 2 && rec.summary.contains("slope")) {
            double s = rec.summary["slope"].get<double>();
            double x0 = xs.front(), y0 = ys.front();
            plot.add_series({x0, xs.back()}, {y0, y0 + s * (xs.back() - x0)}, "#d62728", true, "fit");
            double ref = 2.0 * rec.config.d;
            plot.add_series({x0, xs.back()}, {y0, y0 + ref * (xs.back() - x0)}, "#2ca02c", true, "reference 2d");
        }
        plot.render(path);
    } else if (kind == "cover") {
        SvgPlot plot("cover-time tail vs bound", "n", "log10 probability");
        if (rec.summary.contains("per_N") && !rec.summary["per_N"].empty()) {
            const auto& j = rec.summary["per_N"][0];
            std::vector<double> xs, tails, bounds;
            for (const auto& e : j["grid"]) {
                double t = e["tail"].get<double>();
                xs.push_back(e["n"].get<double>());
                tails.push_back(t > 0 ? std::log10(t) : -6.0);
                bounds.push_back(std::log10(std::max(1e-6, e["bound"].get<double>())));
            }
            plot.add_series(xs, tails, "#1f77b4", false, "empirical");
            plot.add_series(xs, bounds, "#d62728", true, "bound");
        }
        plot.render(path);
    } else if (kind == "green") {
        SvgPlot plot("killed Green function profile", "log r", "log g");
        std::vector<double> xs, ys;
        for (const auto& row : rec.rows) {
            double r = std::strtod(row[1].c_str(), nullptr);
            double gv = std::strtod(row[2].c_str(), nullptr);
            if (r > 0 && gv > 0) {
                xs.push_back(std::log(r));
                ys.push_back(std::log(gv));
            }
        }
        plot.add_series(xs, ys, "#1f77b4", false, "profile");
        plot.render(path);
    } else {
        // generic: first two numeric columns
        SvgPlot plot(kind, rec.columns.size() > 1 ? rec.columns[1] : "x",
                     rec.columns.size() > 2 ? rec.columns[2] : "y");
        std::vector<double> xs, ys;
        for (const auto& row : rec.rows) {
            if (row.size() < 3) continue;
            xs.push_back(std::strtod(row[1].c_str(), nullptr));
            ys.push_back(std::strtod(row[2].c_str(), nullptr));
        }
        plot.add_series(xs, ys, "#1f77b4", false);
        plot.render(path);
    }
}

std::vector<std::string> emit_report(const RunRecord& rec) {
    std::vector<std::string> written;
    std::filesystem::create_directories(rec.config.out_dir);
    std::string base = rec.config.out_dir + "/" + rec.config.kind;
    if (rec.config.format == "csv" || rec.config.format == "both") {
        write_csv(rec, base + ".csv");
        written.push_back(base + ".csv");
    }
    write_json_summary(rec, base + ".json");
    written.push_back(base + ".json");
    if (rec.config.svg) {
        write_record_svg(rec, base + ".svg");
        written.push_back(base + ".svg");
    }
    return written;
}

std::vector<std::string> emit_exponent_report(const ExponentTable& table, const std::string& out_dir,
                                              bool svg) {
    std::vector<std::string> written;
    std::filesystem::create_directories(out_dir);
    std::string csv_path = out_dir + "/exponents.csv";
    {
        std::ofstream f(csv_path, std::ios::binary);
        f << "alpha,phi,zeta,lower_exp,upper_exp\n";
        char buf[256];
        for (size_t i = 0; i < table.alpha.size(); ++i) {
            std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g\n", table.alpha[i], table.phi_v[i],
                          table.zeta_v[i], table.lower_exp[i], table.upper_exp[i]);
            f << buf;
        }
    }
    written.push_back(csv_path);
    if (!table.beta.empty() && table.alpha.size() * table.beta.size() <= 200'000) {
        std::string rates_path = out_dir + "/exponent_rates.csv";
        std::ofstream f(rates_path, std::ios::binary);
        f << "alpha,beta,f,f_star\n";
        char buf[160];
        size_t k = 0;
        for (double a : table.alpha)
            for (double b : table.beta) {
                std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g\n", a, b, table.f[k],
                              table.f_star[k]);
                f << buf;
                ++k;
            }
        written.push_back(rates_path);
    }
    {
        nlohmann::ordered_json j;
        j["schema"] = "cylwalk-exponents/1";
        j["d"] = table.d;
        j["identity_residual"] = exponent_identity_residual(table.d, 999);
        double max_fdiff = 0.0;
        for (double a : {0.05, 0.2, 0.4, 0.6, 0.8, 0.95})
            for (double b : {0.2, 0.5, 1.0, 1.5, 2.0})
                max_fdiff = std::max(max_fdiff, ldp_rate(a, b, table.d) - cover_ldp_rate(a, b, table.d));
        j["rate_below_cover_rate"] = max_fdiff <= 1e-12;
        std::string jpath = out_dir + "/exponents.json";
        std::ofstream f(jpath, std::ios::binary);
        f << j.dump(2) << "\n";
        written.push_back(jpath);
    }
    if (svg) {
        SvgPlot plot("scaling exponents (between the bounds)", "alpha", "exponent / d");
        std::vector<double> lo, hi;
        for (size_t i = 0; i < table.alpha.size(); ++i) {
            lo.push_back(table.lower_exp[i] / table.d);
            hi.push_back(table.upper_exp[i] / table.d);
        }
        plot.add_band(table.alpha, lo, hi, "#1f77b4");
        plot.add_series(table.alpha, lo, "#1f77b4", true, "1 - a - phi(a)");
        plot.add_series(table.alpha, hi, "#d62728", true, "1 - a");
        std::string spath = out_dir + "/exponents.svg";
        plot.render(spath);
        written.push_back(spath);
    }
    return written;
}

}  // namespace cylwalk
