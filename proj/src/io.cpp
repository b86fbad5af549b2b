#include "fibertwist/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace fibertwist {

std::string format17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

CoefficientProfile sample_profile(const Expr& e, double z0, double step,
                                  std::size_t count) {
    CoefficientProfile p;
    p.z0 = z0;
    p.step = step;
    p.source = e.text();
    p.samples.resize(count);
    for (std::size_t k = 0; k < count; ++k) p.samples[k] = e.eval(z0 + k * step);
    return p;
}

CoefficientProfile sample_on_grid(const Expr& e, const Grid& grid) {
    return sample_profile(e, 0.0, grid.h(),
                          static_cast<std::size_t>(grid.N) + 1);
}

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path);
    if (!f) throw ConfigError("cannot open '" + path + "' for writing");
    return f;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open '" + path + "'");
    return f;
}

std::vector<double> parse_row(const std::string& line, std::size_t ncols,
                              const std::string& path, std::size_t lineno) {
    std::vector<double> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        try {
            out.push_back(std::stod(cell));
        } catch (const std::exception&) {
            throw ConfigError(path + ":" + std::to_string(lineno) +
                              ": not a number: '" + cell + "'");
        }
    }
    if (out.size() != ncols)
        throw ConfigError(path + ":" + std::to_string(lineno) + ": expected " +
                          std::to_string(ncols) + " columns, got " +
                          std::to_string(out.size()));
    return out;
}

} // namespace

void write_trace_csv(const std::string& path, const BoundaryTrace& trace) {
    auto f = open_out(path);
    f << "t,m1,m3\n";
    for (std::size_t j = 0; j < trace.size(); ++j)
        f << format17(trace.t(j)) << ',' << format17(trace.m1[j]) << ','
          << format17(trace.m3[j]) << '\n';
}

BoundaryTrace read_trace_csv(const std::string& path) {
    auto f = open_in(path);
    std::string line;
    if (!std::getline(f, line) || line.rfind("t,m1,m3", 0) != 0)
        throw ConfigError(path + ": missing 't,m1,m3' header");
    BoundaryTrace trace;
    std::vector<double> ts;
    std::size_t lineno = 1;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto row = parse_row(line, 3, path, lineno);
        ts.push_back(row[0]);
        trace.m1.push_back(row[1]);
        trace.m3.push_back(row[2]);
    }
    if (ts.size() < 2) throw ConfigError(path + ": too few samples");
    trace.step = ts[1] - ts[0];
    return trace;
}

void write_profile_csv(const std::string& path,
                       const CoefficientProfile& profile) {
    auto f = open_out(path);
    f << "z,beta\n";
    for (std::size_t k = 0; k < profile.size(); ++k)
        f << format17(profile.z0 + k * profile.step) << ','
          << format17(profile.samples[k]) << '\n';
}

CoefficientProfile read_profile_csv(const std::string& path) {
    auto f = open_in(path);
    std::string line;
    if (!std::getline(f, line) || line.rfind("z,beta", 0) != 0)
        throw ConfigError(path + ": missing 'z,beta' header");
    CoefficientProfile p;
    std::vector<double> zs;
    std::size_t lineno = 1;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto row = parse_row(line, 2, path, lineno);
        zs.push_back(row[0]);
        p.samples.push_back(row[1]);
    }
    if (zs.size() < 2) throw ConfigError(path + ": too few samples");
    p.z0 = zs[0];
    p.step = zs[1] - zs[0];
    return p;
}

void write_field_csv(const std::string& path, const WaveField& field) {
    auto f = open_out(path);
    f << "z,t,m1,m2,m3,m4\n";
    const Grid& g = field.grid;
    // t-level order
    int jmax = 0;
    for (int k = 0; k < field.dom.cols(); ++k)
        jmax = std::max(jmax, field.dom.j_hi[k]);
    for (int j = 0; j <= jmax; ++j) {
        for (int i = field.dom.i0; i <= field.dom.i1(); ++i) {
            if (!field.has(i, j)) continue;
            const Vec4& m = field.at(i, j);
            f << format17(g.z(i)) << ',' << format17(g.t(j));
            for (int q = 0; q < 4; ++q) f << ',' << format17(m[q]);
            f << '\n';
        }
    }
}

void write_columns_csv(const std::string& path,
                       const std::vector<std::string>& names,
                       const std::vector<double>& x,
                       const std::vector<std::vector<double>>& ys) {
    auto f = open_out(path);
    f << "z";
    for (const auto& n : names) f << ',' << n;
    f << '\n';
    for (std::size_t i = 0; i < x.size(); ++i) {
        f << format17(x[i]);
        for (const auto& y : ys) f << ',' << format17(y[i]);
        f << '\n';
    }
}

void write_svg_plot(const std::string& path, const std::string& title,
                    const std::vector<std::string>& names,
                    const std::vector<double>& x,
                    const std::vector<std::vector<double>>& ys) {
    const int W = 860, H = 560, ml = 70, mr = 20, mt = 40, mb = 50;
    double xmin = x.empty() ? 0 : x.front(), xmax = x.empty() ? 1 : x.back();
    double ymin = 0, ymax = 1;
    bool first = true;
    for (const auto& y : ys)
        for (double v : y) {
            if (first) {
                ymin = ymax = v;
                first = false;
            }
            ymin = std::min(ymin, v);
            ymax = std::max(ymax, v);
        }
    if (xmax == xmin) xmax = xmin + 1;
    if (ymax == ymin) {
        ymax += 0.5;
        ymin -= 0.5;
    }
    const double pad = 0.05 * (ymax - ymin);
    ymin -= pad;
    ymax += pad;

    auto px = [&](double v) {
        return ml + (v - xmin) / (xmax - xmin) * (W - ml - mr);
    };
    auto py = [&](double v) {
        return H - mb - (v - ymin) / (ymax - ymin) * (H - mt - mb);
    };
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};

    auto f = open_out(path);
    f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W
      << "\" height=\"" << H << "\" viewBox=\"0 0 " << W << ' ' << H
      << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    f << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"16\">"
      << title << "</text>\n";

    // axes with a few ticks
    f << "<g stroke=\"#444\" stroke-width=\"1\" font-family=\"sans-serif\" "
         "font-size=\"11\">\n";
    f << "<line x1=\"" << ml << "\" y1=\"" << H - mb << "\" x2=\"" << W - mr
      << "\" y2=\"" << H - mb << "\"/>\n";
    f << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml
      << "\" y2=\"" << H - mb << "\"/>\n";
    for (int k = 0; k <= 5; ++k) {
        const double xv = xmin + k * (xmax - xmin) / 5;
        const double yv = ymin + k * (ymax - ymin) / 5;
        f << "<line x1=\"" << px(xv) << "\" y1=\"" << H - mb << "\" x2=\""
          << px(xv) << "\" y2=\"" << H - mb + 4 << "\"/>\n";
        char lbl[40];
        std::snprintf(lbl, sizeof(lbl), "%.4g", xv);
        f << "<text x=\"" << px(xv) << "\" y=\"" << H - mb + 18
          << "\" text-anchor=\"middle\" stroke=\"none\" fill=\"#222\">" << lbl
          << "</text>\n";
        f << "<line x1=\"" << ml - 4 << "\" y1=\"" << py(yv) << "\" x2=\""
          << ml << "\" y2=\"" << py(yv) << "\"/>\n";
        std::snprintf(lbl, sizeof(lbl), "%.4g", yv);
        f << "<text x=\"" << ml - 8 << "\" y=\"" << py(yv) + 4
          << "\" text-anchor=\"end\" stroke=\"none\" fill=\"#222\">" << lbl
          << "</text>\n";
    }
    f << "</g>\n";

    for (std::size_t s = 0; s < ys.size(); ++s) {
        f << "<polyline fill=\"none\" stroke=\"" << colors[s % 4]
          << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < x.size(); ++i)
            f << px(x[i]) << ',' << py(ys[s][i]) << ' ';
        f << "\"/>\n";
        f << "<text x=\"" << W - mr - 10 << "\" y=\"" << mt + 16 * (s + 1)
          << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
             "font-size=\"12\" fill=\""
          << colors[s % 4] << "\">" << names[s] << "</text>\n";
    }
    f << "</svg>\n";
}

} // namespace fibertwist
