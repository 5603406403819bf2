#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "qwg/mesh.hpp"
#include "qwg/reduced_model.hpp"
#include "qwg/scattering.hpp"

namespace qwg::cli {

class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

enum class Command { dispersion, breathing, scattering, track_H, floquet_bands, spectrum_vs_H, gap_model, validate };

const char* command_name(Command c);

// Sample specification: "a", "a:b" (50 samples), "a:b:step" or "a,b,c".
struct Range {
    std::string text;
    std::vector<double> values;

    static Range parse(const std::string& text, const std::string& what);
};

struct RunConfig {
    Command command = Command::validate;

    // geometry
    double ell = 1.6;
    double H = 2.5;
    double L = 2.0;
    double eps = 0.1;

    // reduced model; sin2theta overrides theta when set
    double theta = 0.7853981633974483;
    bool has_sin2theta = false;
    double sin2theta = 1.0;
    double T = 2.0;
    Range rho = Range::parse("0", "rho");
    Range eta = Range::parse("0:6.283185307179586:0.04908738521234052", "eta");
    int m_max = 4;

    // gap model
    Range t = Range::parse("-2:2", "t");
    double m_omega = 0.04;
    double M_omega = 0.06;
    double lambda0 = 9.869604401089358;

    // scattering / floquet
    Range H_range = Range::parse("1.5:6", "H-range");
    double h = 0.05;
    int order = 2;
    int p_max = 6;
    int eta_samples = 64;

    std::string out_dir = ".";
    std::uint64_t seed = 1;

    ModelParams model(double rho) const;
    GeometryTee geometry() const { return {ell, H, L, true}; }
    MeshParams mesh() const { return {h, order}; }

    // Rejects values outside the preconditions of the module the command calls.
    void validate() const;
    // Stable "key=value" listing of every field the command reads.
    std::string canonical() const;
    // 16 hex digits of FNV-1a over canonical().
    std::string hash() const;
};

} // namespace qwg::cli
