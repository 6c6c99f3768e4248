#pragma once

#include "rdmono/design.hpp"
#include "rdmono/variance.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace rdmono {

enum class Family { F1, F2, F3, F4, Linear2D, Constant };
enum class XDist { Uniform, Beta22 };
enum class VarFn { Sigma1, Sigma2 };

std::string to_string(Family f);
Family family_from_string(const std::string& s);
std::string to_string(XDist x);
XDist xdist_from_string(const std::string& s);
std::string to_string(VarFn v);
VarFn varfn_from_string(const std::string& s);

struct DGPSpec {
    Family family = Family::F1;
    double C = 1.0;
    double theta = 1.0;
    std::pair<double, double> knots{1.0 / 3.0, 2.0 / 3.0};  // f2 only
    XDist x_dist = XDist::Uniform;
    VarFn var_fn = VarFn::Sigma1;
    double noise_scale = 0.5;
    std::size_t n = 500;
    std::size_t d = 1;

    void validate() const;
};

/// Regression function on the treated (x < 0) or control side.
double eval_dgp(const DGPSpec& spec, std::span<const double> x, bool treated);
/// Conditional standard deviation, noise_scale times sigma1 or sigma2.
double noise_sd(const DGPSpec& spec, std::span<const double> x);

/// Designs 1-8: odd designs draw x uniformly, even ones from 2 Beta(2,2) - 1;
/// 1, 2, 5, 6 are homoskedastic; the true C is 1 for 1-4 and 3 for 5-8.
DGPSpec sim_design(int design, Family family, double theta = 1.0);

/// One sample. Treated iff every coordinate is negative; `sigma` holds the
/// true conditional sd.
Dataset draw_sample(const DGPSpec& spec, std::uint64_t seed, std::size_t rep);

enum class MethodKind { Minimax, OneSided, Oracle };

struct MethodConfig {
    std::string label;
    MethodKind kind = MethodKind::Minimax;
    double C = 3.0;                 // class for coverage; +inf allowed for one-sided
    std::vector<double> C_list;     // one-sided adaptation grid; Oracle uses {spec.C}
    double alpha = 0.05;
    VarianceMode variance = VarianceMode::Estimate;
    std::size_t nn_j = 3;
    std::size_t mc_draws = 10000;
};

struct RepOutcome {
    bool covered = false;
    double length = 0.0;  // two-sided length, or theta - endpoint for a lower CI
    double lower = 0.0, upper = 0.0;
};

RepOutcome run_method(const MethodConfig& m, const DGPSpec& spec, const Dataset& sample, std::uint64_t method_seed);

struct SimResult {
    std::string label;
    double coverage = 0.0;
    double se = 0.0;  // sqrt(p (1 - p) / reps)
    double mean_length = 0.0;
    double length_se = 0.0;
    std::size_t reps = 0;
    std::uint64_t seed = 0;
    double runtime_s = 0.0;
};

/// All methods see the same samples. Results do not depend on `threads`
/// (0 means hardware concurrency).
std::vector<SimResult> run_mc(const DGPSpec& spec, const std::vector<MethodConfig>& methods, std::size_t reps,
                              std::uint64_t seed, unsigned threads = 0,
                              std::vector<std::vector<RepOutcome>>* per_rep = nullptr);

} // namespace rdmono
