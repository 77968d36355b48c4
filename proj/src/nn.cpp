#include "v2x/nn.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "v2x/errors.hpp"

namespace v2x::nn {

DenseLayer make_dense(std::size_t in, std::size_t out, Activation act, Rng& rng) {
    DenseLayer layer;
    layer.w = Matrix(out, in);
    layer.b.assign(out, 0.0);
    layer.act = act;
    const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
    for (double& v : layer.w.a) v = rng.uniform(-limit, limit);
    return layer;
}

Mlp Mlp::make(const std::vector<std::size_t>& dims, Rng& rng, Activation hidden, Activation output) {
    if (dims.size() < 2) throw StructuralError("Mlp::make needs at least input and output dims");
    Mlp net;
    for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
        const bool last = i + 2 == dims.size();
        net.layers.push_back(make_dense(dims[i], dims[i + 1], last ? output : hidden, rng));
    }
    return net;
}

Vec forward(const Mlp& net, std::span<const double> x) {
    if (x.size() != net.input_dim()) throw StructuralError("forward: input size mismatch");
    Vec cur(x.begin(), x.end());
    Vec next;
    for (const auto& layer : net.layers) {
        next.assign(layer.w.rows, 0.0);
        matvec(layer.w, cur, next);
        for (std::size_t i = 0; i < next.size(); ++i) next[i] = activate(layer.act, next[i] + layer.b[i]);
        cur.swap(next);
    }
    return cur;
}

ForwardCache forward_cached(const Mlp& net, std::span<const double> x) {
    if (x.size() != net.input_dim()) throw StructuralError("forward_cached: input size mismatch");
    ForwardCache cache;
    cache.inputs.reserve(net.layers.size());
    cache.preacts.reserve(net.layers.size());
    Vec cur(x.begin(), x.end());
    for (const auto& layer : net.layers) {
        cache.inputs.push_back(cur);
        Vec pre(layer.w.rows, 0.0);
        matvec(layer.w, cur, pre);
        for (std::size_t i = 0; i < pre.size(); ++i) pre[i] += layer.b[i];
        cache.preacts.push_back(pre);
        cur.resize(pre.size());
        for (std::size_t i = 0; i < pre.size(); ++i) cur[i] = activate(layer.act, pre[i]);
    }
    cache.output = cur;
    return cache;
}

Gradients Gradients::zeros_like(const Mlp& net) {
    Gradients g;
    for (const auto& layer : net.layers) {
        g.dw.emplace_back(layer.w.rows, layer.w.cols);
        g.db.emplace_back(layer.b.size(), 0.0);
    }
    return g;
}

void Gradients::scale(double s) {
    for (auto& m : dw)
        for (double& v : m.a) v *= s;
    for (auto& b : db)
        for (double& v : b) v *= s;
}

void backward(const Mlp& net, const ForwardCache& cache, std::span<const double> output_grad,
              Gradients& acc) {
    const std::size_t n = net.layers.size();
    if (output_grad.size() != net.output_dim()) throw StructuralError("backward: output grad size mismatch");
    Vec delta(output_grad.begin(), output_grad.end());
    Vec prev;
    for (std::size_t li = n; li-- > 0;) {
        const auto& layer = net.layers[li];
        const auto& pre = cache.preacts[li];
        for (std::size_t i = 0; i < delta.size(); ++i) delta[i] *= activate_grad(layer.act, pre[i]);
        outer_accumulate(delta, cache.inputs[li], acc.dw[li]);
        axpy(1.0, delta, acc.db[li]);
        if (li > 0) {
            prev.assign(layer.w.cols, 0.0);
            matvec_transposed(layer.w, delta, prev);
            delta.swap(prev);
        }
    }
}

Gradients backward_mse(const Mlp& net, const ForwardCache& cache, std::span<const double> target) {
    if (target.size() != cache.output.size()) throw StructuralError("backward_mse: target size mismatch");
    Vec seed(target.size());
    for (std::size_t i = 0; i < seed.size(); ++i) seed[i] = 2.0 * (cache.output[i] - target[i]);
    Gradients g = Gradients::zeros_like(net);
    backward(net, cache, seed, g);
    return g;
}

double LrSchedule::rate(long step) const {
    const long k = decay_every > 0 ? step / decay_every : 0;
    const double r = initial * std::pow(decay, static_cast<double>(k));
    return std::max(r, floor);
}

void sgd_step(Mlp& net, const Gradients& grads, const LrSchedule& schedule, long step) {
    const double eta = schedule.rate(step);
    for (std::size_t li = 0; li < net.layers.size(); ++li) {
        auto& layer = net.layers[li];
        const auto& dw = grads.dw[li];
        const auto& db = grads.db[li];
        for (std::size_t k = 0; k < layer.w.a.size(); ++k) {
            if (!std::isfinite(dw.a[k]))
                throw NumericalError("sgd_step: non-finite weight gradient in layer " + std::to_string(li));
            layer.w.a[k] -= eta * dw.a[k];
        }
        for (std::size_t k = 0; k < layer.b.size(); ++k) {
            if (!std::isfinite(db[k]))
                throw NumericalError("sgd_step: non-finite bias gradient in layer " + std::to_string(li));
            layer.b[k] -= eta * db[k];
        }
    }
}

// ---------------------------------------------------------------------------

namespace {
constexpr char kMagic[8] = {'V', '2', 'X', 'A', 'R', 'R', '0', '\n'};

template <typename T>
void write_pod(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw MissingArtifactError("checkpoint file truncated");
    return v;
}
}  // namespace

void save_arrays(const std::string& path, const std::vector<NamedArray>& arrays) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw MissingArtifactError("cannot open checkpoint for writing: " + path);
    os.write(kMagic, sizeof(kMagic));
    write_pod(os, kCheckpointVersion);
    write_pod(os, static_cast<std::uint32_t>(arrays.size()));
    for (const auto& arr : arrays) {
        write_pod(os, static_cast<std::uint32_t>(arr.name.size()));
        os.write(arr.name.data(), static_cast<std::streamsize>(arr.name.size()));
        write_pod(os, static_cast<std::uint32_t>(arr.dims.size()));
        std::uint64_t total = 1;
        for (auto d : arr.dims) {
            write_pod(os, d);
            total *= d;
        }
        if (total != arr.data.size()) throw StructuralError("save_arrays: dims do not match data size");
        os.write(reinterpret_cast<const char*>(arr.data.data()),
                 static_cast<std::streamsize>(arr.data.size() * sizeof(double)));
    }
    if (!os) throw MissingArtifactError("failed writing checkpoint: " + path);
}

std::vector<NamedArray> load_arrays(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw MissingArtifactError("cannot open checkpoint: " + path);
    char magic[8];
    is.read(magic, sizeof(magic));
    if (!is || std::memcmp(magic, kMagic, sizeof(magic)) != 0)
        throw MissingArtifactError("not a checkpoint file: " + path);
    const auto version = read_pod<std::uint32_t>(is);
    if (version != kCheckpointVersion)
        throw MissingArtifactError("unsupported checkpoint version in " + path);
    const auto count = read_pod<std::uint32_t>(is);
    std::vector<NamedArray> arrays(count);
    for (auto& arr : arrays) {
        const auto name_len = read_pod<std::uint32_t>(is);
        arr.name.resize(name_len);
        is.read(arr.name.data(), name_len);
        const auto ndim = read_pod<std::uint32_t>(is);
        arr.dims.resize(ndim);
        std::uint64_t total = 1;
        for (auto& d : arr.dims) {
            d = read_pod<std::uint64_t>(is);
            total *= d;
        }
        arr.data.resize(total);
        is.read(reinterpret_cast<char*>(arr.data.data()),
                static_cast<std::streamsize>(total * sizeof(double)));
        if (!is) throw MissingArtifactError("checkpoint file truncated: " + path);
    }
    return arrays;
}

std::vector<NamedArray> mlp_to_arrays(const std::string& prefix, const Mlp& net) {
    std::vector<NamedArray> out;
    NamedArray acts;
    acts.name = prefix + ".acts";
    acts.dims = {net.layers.size()};
    for (const auto& layer : net.layers) acts.data.push_back(layer.act == Activation::relu ? 1.0 : 0.0);
    out.push_back(std::move(acts));
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        const auto& layer = net.layers[i];
        out.push_back({prefix + ".layer" + std::to_string(i) + ".w", {layer.w.rows, layer.w.cols}, layer.w.a});
        out.push_back({prefix + ".layer" + std::to_string(i) + ".b", {layer.b.size()}, layer.b});
    }
    return out;
}

Mlp mlp_from_arrays(const std::string& prefix, const std::vector<NamedArray>& arrays) {
    auto find = [&](const std::string& name) -> const NamedArray& {
        for (const auto& arr : arrays)
            if (arr.name == name) return arr;
        throw MissingArtifactError("checkpoint missing array: " + name);
    };
    const auto& acts = find(prefix + ".acts");
    Mlp net;
    for (std::size_t i = 0; i < acts.data.size(); ++i) {
        const auto& w = find(prefix + ".layer" + std::to_string(i) + ".w");
        const auto& b = find(prefix + ".layer" + std::to_string(i) + ".b");
        DenseLayer layer;
        layer.w = Matrix(w.dims.at(0), w.dims.at(1));
        layer.w.a = w.data;
        layer.b = b.data;
        layer.act = acts.data[i] != 0.0 ? Activation::relu : Activation::identity;
        net.layers.push_back(std::move(layer));
    }
    return net;
}

}  // namespace v2x::nn
