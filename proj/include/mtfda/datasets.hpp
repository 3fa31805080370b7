#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "mtfda/pl_function.hpp"

namespace mtfda {

// Deterministic normal sampler on top of mt19937_64 (Box-Muller, two uniform
// draws per variate) so that outputs are reproducible for a given seed.
class SeededNormal {
  public:
    explicit SeededNormal(std::uint64_t seed) : engine_(seed) {}
    double normal(double mean, double sd);
    double uniform01();
    std::vector<int> permutation(int n);  // Fisher-Yates
    static const char* generator_name() { return "mt19937_64+box-muller"; }

  private:
    std::mt19937_64 engine_;
};

struct LabeledFunctions {
    std::vector<PLFunction> functions;
    std::vector<std::string> labels;  // same order as functions
};

// Ten deterministic functions on [0,11]: eleven unit bumps plus one height-5
// bump whose position distinguishes f_0..f_9.
LabeledFunctions gen_example1();

// Two clusters of 50: per cluster, 8 maxima ~ N(100,50) and 8 minima
// ~ N(-100,50); each function reorders both sets by one shared random
// permutation and interpolates min/max alternately over a 16-node grid.
LabeledFunctions gen_example2(std::uint64_t seed);

// Two clusters of 50 sharing 10 maxima ~ N(100,200) and 10 minima
// ~ N(-100,200); per-function N(0,100) jitter, then cluster-specific rank
// orderings over a 20-node grid starting with a maximum.
LabeledFunctions gen_example3(std::uint64_t seed);

extern const int kExample3Cluster2Order[10];

struct NoisySine {
    PLFunction clean;
    PLFunction noisy;
};
// f(x) = sin(10*pi*x) / (1+x^2) sampled on an equispaced grid over [0,1];
// the noisy copy adds i.i.d. N(0, sigma) per node. The default grid keeps the
// clean tree at one leaf per analytic minimum while the noise features stay
// below the 2(2*sigma) pruning scale.
NoisySine gen_noisy_sine(std::uint64_t seed, int n_grid = 100, double sigma = 0.1);

// CSV schema: header "id,x,y", rows grouped by id and sorted by x within id.
std::vector<PLFunction> load_functions_csv(const std::string& path);
void save_functions_csv(const std::string& path, const std::vector<PLFunction>& fns);
std::string functions_to_csv(const std::vector<PLFunction>& fns);
std::vector<PLFunction> functions_from_csv(const std::string& text);

// Labels CSV: header "id,label".
void save_labels_csv(const std::string& path, const std::vector<std::string>& ids,
                     const std::vector<std::string>& labels);
std::vector<std::pair<std::string, std::string>> load_labels_csv(const std::string& path);

}  // namespace mtfda
