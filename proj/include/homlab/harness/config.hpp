#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace homlab::harness {

/// One real term a cos(2 pi k.x) + b sin(2 pi k.x) of a scalar coefficient.
struct FourierTerm {
    std::array<int, 3> k{};
    double a = 0.0;
    double b = 0.0;
};

struct ZetaSpec {
    double modulus = 1.0;
    double phi = 0.0;
};

/// Flat experiment description. Sections of the config file map onto the
/// field groups below; see README for the key list and defaults.
struct ExperimentConfig {
    // [experiment]
    std::string experiment_id = "homlab";

    // [problem]
    std::string preset = "cos1d";  // constant | cos1d | layered2d | checker2d-smooth | fourier
    int d = 1;
    std::string symbol = "gradient";  // gradient | elasticity2d
    double a = 2.0;                   // mean level of cos1d / layered2d / checker2d-smooth / constant
    std::vector<FourierTerm> fourier;

    // [grid]
    int N = 0;             // fixed points per axis; 0 derives N = cell_points * L * K per eps
    int cell_points = 16;  // samples per eps-period when N = 0
    int L = 16;            // torus side length
    int N_cell = 64;       // cell-problem resolution for `effective` and `cell`

    // [sweep]
    std::vector<int> K_list{4, 8, 16, 32};  // eps = 1/K
    std::vector<double> t_list{1.0};
    std::vector<ZetaSpec> zeta_list;
    std::string design = "star";  // star | product
    int anchor_K = 16;
    double anchor_t = 1.0;
    ZetaSpec anchor_zeta{1.0, 2.356194490192345};
    bool elliptic = true;
    bool parabolic = true;
    std::vector<std::string> metrics;  // empty = all

    // [solver]
    double cell_tol = 1e-10;
    double resolvent_tol = 1e-10;
    int max_iters = 2000;
    bool dealias = false;
    bool smoothing = true;

    // [contour]
    int n_arc = 64;
    int n_ray = 128;
    double contour_tol = 1e-12;
    double contour_check_tol = 1e-8;

    // [norms]
    std::uint64_t seed = 1;
    double norm_tol = 1e-4;
    int norm_max_iters = 200;
    bool gradient_diff = true;

    // [report]
    double uniformity_ratio = 3.0;
    double noise_floor = 1e-7;

    // [output]
    std::string out_dir = "out";
    std::string format = "csv";  // csv | json
    bool plot = false;
    bool timing = false;

    /// Throws ConfigInvalid naming the offending field.
    void validate() const;
};

/// Reads an INI-style file (sections, key = value). Unknown keys are rejected.
ExperimentConfig load_config(const std::string& path);

/// Parsers for the comma-separated list flags; eps entries accept "1/8" or "0.125".
std::vector<int> parse_eps_list(const std::string& text);
std::vector<double> parse_double_list(const std::string& text);
/// "modulus@phi" pairs separated by commas, phi in radians or as "<x>pi".
std::vector<ZetaSpec> parse_zeta_list(const std::string& text);
/// "k1 k2 k3 a b" terms separated by semicolons.
std::vector<FourierTerm> parse_fourier_table(const std::string& text);

}  // namespace homlab::harness
