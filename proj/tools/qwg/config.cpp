#include "config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

namespace qwg::cli {

namespace {

constexpr double pi = std::numbers::pi;

double parse_number(const std::string& s, const std::string& what) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != s.size() || !std::isfinite(v)) throw UsageError(what + ": bad number '" + s + "'");
    return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) out.push_back(cur);
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

std::string num(double v) {
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

} // namespace

const char* command_name(Command c) {
    switch (c) {
    case Command::dispersion: return "dispersion";
    case Command::breathing: return "breathing";
    case Command::scattering: return "scattering";
    case Command::track_H: return "track-H";
    case Command::floquet_bands: return "floquet-bands";
    case Command::spectrum_vs_H: return "spectrum-vs-H";
    case Command::gap_model: return "gap-model";
    case Command::validate: return "validate";
    }
    return "?";
}

Range Range::parse(const std::string& text, const std::string& what) {
    Range r;
    r.text = text;
    if (text.find(',') != std::string::npos) {
        for (const auto& part : split(text, ',')) r.values.push_back(parse_number(part, what));
    } else {
        const auto parts = split(text, ':');
        if (parts.size() == 1) {
            r.values.push_back(parse_number(parts[0], what));
        } else if (parts.size() == 2 || parts.size() == 3) {
            const double a = parse_number(parts[0], what), b = parse_number(parts[1], what);
            if (parts.size() == 2) {
                if (b > a)
                    for (int i = 0; i < 50; ++i) r.values.push_back(a + (b - a) * i / 49.0);
            } else {
                const double step = parse_number(parts[2], what);
                if (!(step > 0)) throw UsageError(what + ": step must be positive in '" + text + "'");
                if (b >= a) {
                    const auto n = static_cast<long>(std::floor((b - a) / step * (1 + 1e-12))) + 1;
                    if (n > 1000000) throw UsageError(what + ": more than 10^6 samples in '" + text + "'");
                    for (long i = 0; i < n; ++i) r.values.push_back(std::min(a + static_cast<double>(i) * step, b));
                }
            }
        } else {
            throw UsageError(what + ": expected a, a:b, a:b:step or a,b,... but got '" + text + "'");
        }
    }
    if (r.values.empty()) throw UsageError(what + ": empty range '" + text + "'");
    return r;
}

ModelParams RunConfig::model(double rho_value) const {
    if (has_sin2theta) return ModelParams::from_sin2theta(sin2theta, T, rho_value);
    return {theta, T, rho_value};
}

void RunConfig::validate() const {
    auto need = [](bool ok, const std::string& msg) {
        if (!ok) throw UsageError(msg);
    };
    auto ascending = [&](const Range& r, const std::string& what) {
        for (std::size_t i = 1; i < r.values.size(); ++i)
            need(r.values[i] > r.values[i - 1], what + " values must be strictly ascending");
    };
    switch (command) {
    case Command::dispersion:
    case Command::breathing:
        need(T > 0, "T must be positive");
        if (has_sin2theta) need(sin2theta >= -1 && sin2theta <= 1, "sin2theta must lie in [-1, 1]");
        else need(theta >= 0 && theta < pi, "theta must lie in [0, pi)");
        need(m_max >= 1 && m_max <= 64, "m must lie in [1, 64]");
        if (command == Command::breathing) ascending(rho, "rho");
        else need(rho.values.size() == 1, "dispersion takes a single rho value");
        break;
    case Command::gap_model:
        need(lambda0 > 0, "lambda0 must be positive");
        break;
    case Command::scattering:
    case Command::track_H:
    case Command::floquet_bands:
    case Command::spectrum_vs_H:
        need(h > 0 && h <= 0.5, "h must lie in (0, 0.5]");
        need(order == 1 || order == 2, "order must be 1 or 2");
        try {
            GeometryTee g = geometry();
            if (command == Command::track_H || command == Command::spectrum_vs_H) {
                ascending(H_range, "H");
                need(H_range.values.size() >= 2 || command == Command::spectrum_vs_H, "track-H needs at least two H values");
                for (double v : H_range.values) {
                    g.H = v;
                    g.validate();
                }
            } else {
                g.validate();
            }
        } catch (const MeshError& e) {
            throw UsageError(e.what());
        }
        if (command == Command::floquet_bands || command == Command::spectrum_vs_H) {
            need(eps > 0 && eps <= 0.2, "eps must lie in (0, 0.2]");
            need(p_max >= 1 && p_max <= 64, "p must lie in [1, 64]");
            need(eta_samples >= 2, "eta-samples must be at least 2");
        }
        break;
    case Command::validate:
        break;
    }
}

std::string RunConfig::canonical() const {
    std::ostringstream os;
    os << "command=" << command_name(command) << "\n";
    switch (command) {
    case Command::dispersion:
    case Command::breathing:
        if (has_sin2theta) os << "sin2theta=" << num(sin2theta) << "\n";
        else os << "theta=" << num(theta) << "\n";
        os << "T=" << num(T) << "\nrho=" << rho.text << "\nm=" << m_max << "\n";
        if (command == Command::dispersion) os << "eta=" << eta.text << "\n";
        break;
    case Command::gap_model:
        os << "t=" << t.text << "\nm-omega=" << num(m_omega) << "\nM-omega=" << num(M_omega)
           << "\nlambda0=" << num(lambda0) << "\n";
        break;
    case Command::scattering:
    case Command::track_H:
    case Command::floquet_bands:
    case Command::spectrum_vs_H:
        os << "ell=" << num(ell) << "\nL=" << num(L) << "\nh=" << num(h) << "\norder=" << order << "\n";
        if (command == Command::track_H || command == Command::spectrum_vs_H) os << "H-range=" << H_range.text << "\n";
        else os << "H=" << num(H) << "\n";
        if (command == Command::floquet_bands || command == Command::spectrum_vs_H)
            os << "eps=" << num(eps) << "\np=" << p_max << "\neta-samples=" << eta_samples << "\n";
        break;
    case Command::validate:
        os << "seed=" << seed << "\n";
        break;
    }
    return os.str();
}

std::string RunConfig::hash() const {
    std::uint64_t x = 0xcbf29ce484222325ULL;
    for (unsigned char c : canonical()) {
        x ^= c;
        x *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
    return buf;
}

} // namespace qwg::cli
