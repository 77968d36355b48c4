#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "v2x/linalg.hpp"
#include "v2x/rng.hpp"

namespace v2x::nn {

enum class Activation { relu, identity };

inline double activate(Activation a, double x) { return a == Activation::relu ? (x > 0.0 ? x : 0.0) : x; }
inline double activate_grad(Activation a, double pre) { return a == Activation::relu ? (pre > 0.0 ? 1.0 : 0.0) : 1.0; }

struct DenseLayer {
    Matrix w;  // out x in
    Vec b;
    Activation act = Activation::relu;
};

DenseLayer make_dense(std::size_t in, std::size_t out, Activation act, Rng& rng);

struct Mlp {
    std::vector<DenseLayer> layers;

    std::size_t input_dim() const { return layers.front().w.cols; }
    std::size_t output_dim() const { return layers.back().w.rows; }

    static Mlp make(const std::vector<std::size_t>& dims, Rng& rng,
                    Activation hidden = Activation::relu, Activation output = Activation::identity);
};

struct ForwardCache {
    std::vector<Vec> inputs;    // input of each layer
    std::vector<Vec> preacts;   // pre-activation of each layer
    Vec output;
};

Vec forward(const Mlp& net, std::span<const double> x);
ForwardCache forward_cached(const Mlp& net, std::span<const double> x);

struct Gradients {
    std::vector<Matrix> dw;
    std::vector<Vec> db;

    static Gradients zeros_like(const Mlp& net);
    void scale(double s);
};

/// Accumulates parameter gradients for an arbitrary seed dL/d(output).
void backward(const Mlp& net, const ForwardCache& cache, std::span<const double> output_grad,
              Gradients& acc);

/// Gradients of sum_k (target_k - output_k)^2 for one sample.
Gradients backward_mse(const Mlp& net, const ForwardCache& cache, std::span<const double> target);

/// Stepwise-decaying learning rate with a hard floor.
struct LrSchedule {
    double initial = 0.01;
    double floor = 1e-4;
    double decay = 0.99;
    int decay_every = 100;

    double rate(long step) const;
};

/// params -= rate(step) * grads. Throws NumericalError on non-finite gradients.
void sgd_step(Mlp& net, const Gradients& grads, const LrSchedule& schedule, long step);

// ---------------------------------------------------------------------------
// Checkpoint container: versioned flat file of named double arrays.

struct NamedArray {
    std::string name;
    std::vector<std::uint64_t> dims;
    Vec data;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_arrays(const std::string& path, const std::vector<NamedArray>& arrays);
std::vector<NamedArray> load_arrays(const std::string& path);

std::vector<NamedArray> mlp_to_arrays(const std::string& prefix, const Mlp& net);
Mlp mlp_from_arrays(const std::string& prefix, const std::vector<NamedArray>& arrays);

}  // namespace v2x::nn
