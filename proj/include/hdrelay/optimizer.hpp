#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace hdrelay {

enum class ConstraintType { Box, Simplex, SumCapped };

struct Dim {
    double lower = 0.0;
    double upper = 1.0;
};

// Simplex: entries nonnegative and summing to one.
// SumCapped: entries in [0,1] summing to at most one.
struct ConstraintBlock {
    ConstraintType type = ConstraintType::Box;
    std::vector<int> dims;
};

// Returns -infinity for rejected parameters.
using Objective = std::function<double(int branch, std::span<const double> x)>;

struct SearchSpec {
    std::string label;
    Objective objective;
    std::vector<Dim> dims;
    std::vector<ConstraintBlock> blocks;  // dims outside any block are plain boxes
    int branches = 1;
    std::vector<std::vector<double>> seeds;  // tried first in every branch
    long budget = 4000;                      // evaluations per branch
    std::uint64_t seed = 1;
    double tolerance = 1e-9;
    int refine_starts = 16;
    bool parallel = true;

    void validate() const;
};

struct TraceSummary {
    long evaluations = 0;
    int starts = 0;
    int refinements = 0;
};

struct OptimizeResult {
    double best = 0.0;
    std::vector<double> params;
    int branch = 0;
    TraceSummary trace;
};

std::vector<double> project(const SearchSpec& spec, std::span<const double> x);

OptimizeResult optimize_rate(const SearchSpec& spec);

// Candidate batch evaluation; the parallel version is the production kernel,
// the serial one is kept as a reference.
std::vector<double> evaluate_batch(const SearchSpec& spec, int branch,
                                   const std::vector<std::vector<double>>& points);
std::vector<double> evaluate_batch_serial(const SearchSpec& spec, int branch,
                                          const std::vector<std::vector<double>>& points);

// Multistart candidates (seeds, then a 3-level grid or seeded random points).
std::vector<std::vector<double>> start_points(const SearchSpec& spec);

}  // namespace hdrelay
