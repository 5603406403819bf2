#include "output.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace qwg::cli {

namespace {

std::string num(double v) {
    if (std::isnan(v)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::ofstream open(const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    return os;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '&': out += "&amp;"; break;
        default: out += c;
        }
    }
    return out;
}

// Tick positions at 1, 2 or 5 times a power of ten.
std::vector<double> ticks(double lo, double hi) {
    const double raw = (hi - lo) / 5.0;
    const double p = std::pow(10.0, std::floor(std::log10(raw)));
    double step = p;
    for (double f : {1.0, 2.0, 5.0, 10.0})
        if (f * p >= raw) {
            step = f * p;
            break;
        }
    std::vector<double> out;
    for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * step; v += step) out.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
    return out;
}

const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

} // namespace

Table::Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

Table& Table::row() {
    rows_.emplace_back();
    return *this;
}

Table& Table::add(double v) {
    rows_.back().push_back(num(v));
    return *this;
}

Table& Table::add(long long v) {
    rows_.back().push_back(std::to_string(v));
    return *this;
}

Table& Table::add(const std::string& v) {
    rows_.back().push_back(v);
    return *this;
}

void Table::write(const std::filesystem::path& path) const {
    auto os = open(path);
    for (std::size_t i = 0; i < columns_.size(); ++i) os << (i ? "," : "") << columns_[i];
    os << "\n";
    for (const auto& r : rows_) {
        for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
        os << "\n";
    }
}

void Plot::write(const std::filesystem::path& path) const {
    const double W = 720, Hh = 450, left = 80, right = 150, top = 40, bottom = 60;
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            x0 = std::min(x0, s.x[i]);
            x1 = std::max(x1, s.x[i]);
            y0 = std::min(y0, s.y[i]);
            y1 = std::max(y1, s.y[i]);
        }
    for (double v : hlines) {
        y0 = std::min(y0, v);
        y1 = std::max(y1, v);
    }
    if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    if (x1 - x0 < 1e-12) x0 -= 0.5, x1 += 0.5;
    if (y1 - y0 < 1e-12 * std::max(1.0, std::abs(y0))) y0 -= 0.5, y1 += 0.5;
    const double pad = 0.04 * (y1 - y0);
    y0 -= pad;
    y1 += pad;
    const double pw = W - left - right, ph = Hh - top - bottom;
    auto X = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
    auto Y = [&](double y) { return top + (y1 - y) / (y1 - y0) * ph; };

    auto os = open(path);
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << Hh << "\" viewBox=\"0 0 " << W
       << " " << Hh << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(title) << "</text>\n";
    os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (double t : ticks(x0, x1)) {
        os << "<line x1=\"" << num(X(t)) << "\" y1=\"" << top + ph << "\" x2=\"" << num(X(t)) << "\" y2=\""
           << top + ph + 5 << "\" stroke=\"black\"/>";
        os << "<text x=\"" << num(X(t)) << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">" << num(t)
           << "</text>\n";
    }
    for (double t : ticks(y0, y1)) {
        os << "<line x1=\"" << left - 5 << "\" y1=\"" << num(Y(t)) << "\" x2=\"" << left << "\" y2=\"" << num(Y(t))
           << "\" stroke=\"black\"/>";
        os << "<text x=\"" << left - 8 << "\" y=\"" << num(Y(t) + 4) << "\" text-anchor=\"end\">" << num(t)
           << "</text>\n";
    }
    os << "<text x=\"" << left + pw / 2 << "\" y=\"" << Hh - 15 << "\" text-anchor=\"middle\">" << escape(xlabel)
       << "</text>\n";
    os << "<text x=\"18\" y=\"" << top + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
       << top + ph / 2 << ")\">" << escape(ylabel) << "</text>\n";
    for (double v : hlines)
        os << "<line x1=\"" << left << "\" y1=\"" << num(Y(v)) << "\" x2=\"" << left + pw << "\" y2=\"" << num(Y(v))
           << "\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n";

    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        const char* color = kColors[k % std::size(kColors)];
        std::string pts;
        auto flush = [&] {
            if (pts.empty()) return;
            os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"" << pts << "\"/>\n";
            pts.clear();
        };
        std::size_t drawn = 0;
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) {
                flush();
                continue;
            }
            pts += num(X(s.x[i])) + "," + num(Y(s.y[i])) + " ";
            ++drawn;
        }
        flush();
        if (drawn == 1)
            for (std::size_t i = 0; i < s.x.size(); ++i)
                if (std::isfinite(s.x[i]) && std::isfinite(s.y[i]))
                    os << "<circle cx=\"" << num(X(s.x[i])) << "\" cy=\"" << num(Y(s.y[i])) << "\" r=\"2.5\" fill=\""
                       << color << "\"/>\n";
        if (!s.name.empty() && k < 20) {
            const double ly = top + 12 + 16 * static_cast<double>(k);
            os << "<line x1=\"" << left + pw + 10 << "\" y1=\"" << ly << "\" x2=\"" << left + pw + 30 << "\" y2=\""
               << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>";
            os << "<text x=\"" << left + pw + 35 << "\" y=\"" << ly + 4 << "\">" << escape(s.name) << "</text>\n";
        }
    }
    os << "</svg>\n";
}

void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& j) {
    auto os = open(path);
    os << j.dump(2) << "\n";
}

} // namespace qwg::cli
