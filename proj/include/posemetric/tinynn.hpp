#pragma once

// Minimal dense-network engine: batched forward/backward, MSE, Adam, seeded
// init and a versioned binary weight format. Everything is templated on the
// scalar so the same code trains in float and gradient-checks in double.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <random>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "posemetric/error.hpp"

namespace posemetric::nn {

enum class Activation : std::uint8_t { Linear = 0, Relu = 1 };

// Row-major dense matrix; rows index the batch for activations.
template <typename T>
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<T> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, T fill = T(0)) : rows(r), cols(c), data(r * c, fill) {}

    T& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    const T& operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    std::span<T> row(std::size_t r) { return {data.data() + r * cols, cols}; }
    std::span<const T> row(std::size_t r) const { return {data.data() + r * cols, cols}; }

    bool operator==(const Matrix&) const = default;
};

template <typename T>
struct Layer {
    Matrix<T> weight;  // out x in
    std::vector<T> bias;
    Activation activation = Activation::Linear;

    std::size_t in() const { return weight.cols; }
    std::size_t out() const { return weight.rows; }
    bool operator==(const Layer&) const = default;
};

template <typename T>
struct Mlp {
    std::vector<Layer<T>> layers;

    std::size_t input_size() const { return layers.empty() ? 0 : layers.front().in(); }
    std::size_t output_size() const { return layers.empty() ? 0 : layers.back().out(); }

    std::size_t parameter_count() const {
        std::size_t n = 0;
        for (const auto& l : layers) n += l.weight.data.size() + l.bias.size();
        return n;
    }

    void validate() const {
        if (layers.empty()) throw InvalidArgument("mlp has no layers");
        for (std::size_t k = 0; k < layers.size(); ++k) {
            const auto& l = layers[k];
            if (l.in() == 0 || l.out() == 0) throw InvalidArgument("mlp layer with zero size");
            if (l.weight.data.size() != l.in() * l.out() || l.bias.size() != l.out()) {
                throw DimensionMismatch("mlp layer storage disagrees with its shape");
            }
            if (k > 0 && layers[k - 1].out() != l.in()) {
                throw DimensionMismatch("mlp layers do not chain at layer " + std::to_string(k));
            }
        }
    }

    template <typename U>
    Mlp<U> cast() const {
        Mlp<U> out;
        for (const auto& l : layers) {
            Layer<U> c;
            c.weight = Matrix<U>(l.out(), l.in());
            for (std::size_t i = 0; i < l.weight.data.size(); ++i) c.weight.data[i] = static_cast<U>(l.weight.data[i]);
            c.bias.assign(l.bias.begin(), l.bias.end());
            c.activation = l.activation;
            out.layers.push_back(std::move(c));
        }
        return out;
    }

    bool operator==(const Mlp&) const = default;
};

// mt19937_64 stream with explicit bit-to-float mappings, so the values drawn do
// not depend on the standard library's distribution implementations.
class SeededRng {
public:
    explicit SeededRng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Uniform integer in [lo, hi], unbiased.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        if (hi < lo) throw InvalidArgument("uniform_int: empty range");
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        if (span == 0) return static_cast<std::int64_t>(next_u64());
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
        std::uint64_t r;
        do {
            r = next_u64();
        } while (r >= limit);
        return lo + static_cast<std::int64_t>(r % span);
    }

    std::size_t index(std::size_t n) { return static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(n) - 1)); }

private:
    std::mt19937_64 engine_;
};

// He-uniform weights (bound sqrt(6 / fan_in)), zero biases.
template <typename T = float>
Mlp<T> init_mlp(std::span<const std::size_t> sizes, std::span<const Activation> activations, SeededRng& rng) {
    if (sizes.size() < 2) throw InvalidArgument("init_mlp: need at least input and output sizes");
    if (activations.size() != sizes.size() - 1) {
        throw InvalidArgument("init_mlp: need one activation per layer");
    }
    for (auto s : sizes) {
        if (s == 0) throw InvalidArgument("init_mlp: layer size must be >= 1");
    }
    Mlp<T> mlp;
    for (std::size_t k = 0; k + 1 < sizes.size(); ++k) {
        Layer<T> l;
        l.weight = Matrix<T>(sizes[k + 1], sizes[k]);
        l.bias.assign(sizes[k + 1], T(0));
        l.activation = activations[k];
        const double bound = std::sqrt(6.0 / static_cast<double>(sizes[k]));
        for (auto& w : l.weight.data) w = static_cast<T>(rng.uniform(-bound, bound));
        mlp.layers.push_back(std::move(l));
    }
    return mlp;
}

template <typename T = float>
Mlp<T> init_mlp(std::initializer_list<std::size_t> sizes, std::initializer_list<Activation> activations,
                SeededRng& rng) {
    return init_mlp<T>(std::span<const std::size_t>(sizes.begin(), sizes.size()),
                       std::span<const Activation>(activations.begin(), activations.size()), rng);
}

template <typename T>
struct ForwardCache {
    std::vector<Matrix<T>> inputs;       // input of each layer
    std::vector<Matrix<T>> preactivations;
    Matrix<T> output;
};

namespace detail {

template <typename T>
void check_finite(std::span<const T> values, const char* what) {
    for (T v : values) {
        if (!std::isfinite(v)) throw NonFiniteValue(std::string(what) + ": non-finite value");
    }
}

template <typename T>
Matrix<T> transpose(const Matrix<T>& m) {
    constexpr std::size_t kTile = 16;
    Matrix<T> t(m.cols, m.rows);
    for (std::size_t r0 = 0; r0 < m.rows; r0 += kTile) {
        const std::size_t r1 = std::min(m.rows, r0 + kTile);
        for (std::size_t c0 = 0; c0 < m.cols; c0 += kTile) {
            const std::size_t c1 = std::min(m.cols, c0 + kTile);
            for (std::size_t r = r0; r < r1; ++r) {
                for (std::size_t c = c0; c < c1; ++c) t.data[c * m.rows + r] = m.data[r * m.cols + c];
            }
        }
    }
    return t;
}

// C (m x n) += A * B with B (k x n) and C row-major and densely packed; element
// (r, p) of A is read from a[r * a_row + p * a_col]. Every output element is
// summed over k in ascending order, so results do not depend on the blocking
// below, on vector width, or on how A is laid out.
template <typename T>
void gemm_strided(const T* a, std::size_t a_row, std::size_t a_col, const T* b, T* c, std::size_t m, std::size_t k,
                  std::size_t n) {
    for (std::size_t r = 0; r < m; ++r) {
        T* cr = c + r * n;
        for (std::size_t p = 0; p < k; ++p) {
            const T av = a[r * a_row + p * a_col];
            const T* br = b + p * n;
            for (std::size_t j = 0; j < n; ++j) cr[j] += av * br[j];
        }
    }
}

#if defined(__GNUC__) || defined(__clang__)
#if defined(__AVX512F__)
inline constexpr std::size_t kLanes = 16;
#elif defined(__AVX__)
inline constexpr std::size_t kLanes = 8;
#else
inline constexpr std::size_t kLanes = 4;
#endif
inline constexpr std::size_t kBlock = 2 * kLanes;
using FloatVec = float __attribute__((vector_size(kLanes * sizeof(float))));

inline FloatVec load_vec(const float* p) {
    FloatVec v;
    std::memcpy(&v, p, sizeof v);
    return v;
}

inline void store_vec(float* p, FloatVec v) { std::memcpy(p, &v, sizeof v); }

// Rows x kBlock register tile.
template <std::size_t Rows>
inline void gemm_tile(const float* a, std::size_t a_row, std::size_t a_col, const float* b, std::size_t ldb, float* c,
                      std::size_t ldc, std::size_t k) {
    FloatVec x[Rows][2];
#pragma GCC unroll 6
    for (std::size_t q = 0; q < Rows; ++q) {
        x[q][0] = load_vec(c + q * ldc);
        x[q][1] = load_vec(c + q * ldc + kLanes);
    }
    for (std::size_t p = 0; p < k; ++p) {
        const FloatVec b0 = load_vec(b + p * ldb);
        const FloatVec b1 = load_vec(b + p * ldb + kLanes);
        const float* ap = a + p * a_col;
#pragma GCC unroll 6
        for (std::size_t q = 0; q < Rows; ++q) {
            const float s = ap[q * a_row];
            x[q][0] += s * b0;
            x[q][1] += s * b1;
        }
    }
#pragma GCC unroll 6
    for (std::size_t q = 0; q < Rows; ++q) {
        store_vec(c + q * ldc, x[q][0]);
        store_vec(c + q * ldc + kLanes, x[q][1]);
    }
}

// Tiles of 6 rows; a trailing partial column block is copied into a zero-padded
// buffer and goes through the same tile.
template <>
inline void gemm_strided<float>(const float* a, std::size_t a_row, std::size_t a_col, const float* b, float* c,
                                std::size_t m, std::size_t k, std::size_t n) {
    const std::size_t full = n - n % kBlock;
    const std::size_t tail = n - full;
    std::vector<float> bpad;
    if (tail > 0) {
        bpad.assign(k * kBlock, 0.0f);
        for (std::size_t p = 0; p < k; ++p) std::copy(b + p * n + full, b + p * n + n, bpad.begin() + p * kBlock);
    }
    float cpad[6 * kBlock];
    auto rows = [&]<std::size_t Rows>(std::size_t r) {
        const float* ar = a + r * a_row;
        for (std::size_t j = 0; j < full; j += kBlock) gemm_tile<Rows>(ar, a_row, a_col, b + j, n, c + r * n + j, n, k);
        if (tail > 0) {
            for (std::size_t q = 0; q < Rows; ++q) {
                std::fill(cpad + q * kBlock, cpad + (q + 1) * kBlock, 0.0f);
                std::copy(c + (r + q) * n + full, c + (r + q) * n + n, cpad + q * kBlock);
            }
            gemm_tile<Rows>(ar, a_row, a_col, bpad.data(), kBlock, cpad, kBlock, k);
            for (std::size_t q = 0; q < Rows; ++q) {
                std::copy(cpad + q * kBlock, cpad + q * kBlock + tail, c + (r + q) * n + full);
            }
        }
    };
    std::size_t r = 0;
    for (; r + 6 <= m; r += 6) rows.template operator()<6>(r);
    for (; r < m; ++r) rows.template operator()<1>(r);
}
#endif

// C (m x n) += A (m x k) * B (k x n).
template <typename T>
void gemm_accumulate(const T* a, const T* b, T* c, std::size_t m, std::size_t k, std::size_t n) {
    gemm_strided(a, k, 1, b, c, m, k, n);
}

// C (m x n) += A^T * B where A is stored (k x m).
template <typename T>
void gemm_tn_accumulate(const T* a, const T* b, T* c, std::size_t m, std::size_t k, std::size_t n) {
    gemm_strided(a, 1, m, b, c, m, k, n);
}

}  // namespace detail

// Batched forward pass; each row of `input` is one sample.
template <typename T>
ForwardCache<T> forward(const Mlp<T>& mlp, Matrix<T> input) {
    if (mlp.layers.empty()) throw InvalidArgument("forward: empty network");
    if (input.cols != mlp.input_size()) {
        throw DimensionMismatch("forward: input has " + std::to_string(input.cols) + " columns, network expects " +
                                std::to_string(mlp.input_size()));
    }
    detail::check_finite<T>(input.data, "forward");

    ForwardCache<T> cache;
    cache.inputs.reserve(mlp.layers.size());
    cache.preactivations.reserve(mlp.layers.size());
    Matrix<T> x = std::move(input);
    const std::size_t batch = x.rows;
    for (const auto& layer : mlp.layers) {
        const std::size_t in = layer.in();
        const std::size_t out = layer.out();
        const Matrix<T> wt = detail::transpose(layer.weight);
        Matrix<T> z(batch, out);
        for (std::size_t b = 0; b < batch; ++b) std::copy(layer.bias.begin(), layer.bias.end(), z.row(b).begin());
        detail::gemm_accumulate(x.data.data(), wt.data.data(), z.data.data(), batch, in, out);
        Matrix<T> a = z;
        if (layer.activation == Activation::Relu) {
            for (auto& v : a.data) v = v > T(0) ? v : T(0);
        }
        cache.inputs.push_back(std::move(x));
        cache.preactivations.push_back(std::move(z));
        x = std::move(a);
    }
    cache.output = std::move(x);
    return cache;
}

// Single-sample forward pass.
template <typename T>
std::pair<std::vector<T>, ForwardCache<T>> forward(const Mlp<T>& mlp, std::span<const T> input) {
    Matrix<T> x(1, input.size());
    std::copy(input.begin(), input.end(), x.data.begin());
    ForwardCache<T> cache = forward(mlp, std::move(x));
    std::vector<T> out = cache.output.data;
    return {std::move(out), std::move(cache)};
}

template <typename T>
std::vector<T> predict(const Mlp<T>& mlp, std::span<const T> input) {
    return forward(mlp, input).first;
}

template <typename T>
struct Gradients {
    std::vector<Matrix<T>> weight;
    std::vector<std::vector<T>> bias;

    static Gradients zeros_like(const Mlp<T>& mlp) {
        Gradients g;
        for (const auto& l : mlp.layers) {
            g.weight.emplace_back(l.out(), l.in());
            g.bias.emplace_back(l.out(), T(0));
        }
        return g;
    }

    void add(const Gradients& o) {
        for (std::size_t k = 0; k < weight.size(); ++k) {
            for (std::size_t i = 0; i < weight[k].data.size(); ++i) weight[k].data[i] += o.weight[k].data[i];
            for (std::size_t i = 0; i < bias[k].size(); ++i) bias[k][i] += o.bias[k][i];
        }
    }

    bool all_zero() const {
        for (const auto& w : weight)
            for (T v : w.data)
                if (v != T(0)) return false;
        for (const auto& b : bias)
            for (T v : b)
                if (v != T(0)) return false;
        return true;
    }
};

// Reverse-mode pass. Parameter gradients are accumulated into `grads` when it is
// non-null; the gradient with respect to the network input is returned (empty
// when `want_input_grad` is false).
// The relu derivative at exactly 0 is 0.
template <typename T>
Matrix<T> backward_into(const Mlp<T>& mlp, const ForwardCache<T>& cache, Matrix<T> output_grad,
                        std::type_identity_t<Gradients<T>>* grads, bool want_input_grad = true) {
    if (cache.inputs.size() != mlp.layers.size()) throw DimensionMismatch("backward: cache from another network");
    if (output_grad.rows != cache.output.rows || output_grad.cols != cache.output.cols) {
        throw DimensionMismatch("backward: output gradient shape differs from forward output");
    }
    if (grads && grads->weight.size() != mlp.layers.size()) {
        throw DimensionMismatch("backward: gradient buffer shaped for another network");
    }
    Matrix<T> delta = std::move(output_grad);
    const std::size_t batch = delta.rows;
    for (std::size_t k = mlp.layers.size(); k-- > 0;) {
        const auto& layer = mlp.layers[k];
        const std::size_t in = layer.in();
        const std::size_t out = layer.out();
        const Matrix<T>& x = cache.inputs[k];
        if (layer.activation == Activation::Relu) {
            const auto& z = cache.preactivations[k].data;
            for (std::size_t i = 0; i < delta.data.size(); ++i) delta.data[i] = z[i] > T(0) ? delta.data[i] : T(0);
        }
        if (grads) {
            auto& gb = grads->bias[k];
            for (std::size_t b = 0; b < batch; ++b) {
                const T* dr = delta.data.data() + b * out;
                for (std::size_t o = 0; o < out; ++o) gb[o] += dr[o];
            }
            // dW += delta^T x, formed as (x^T delta)^T when that keeps the streamed operand narrow.
            if (out >= in) {
                detail::gemm_tn_accumulate(delta.data.data(), x.data.data(), grads->weight[k].data.data(), out, batch,
                                           in);
            } else {
                Matrix<T> gw_t = detail::transpose(grads->weight[k]);
                detail::gemm_tn_accumulate(x.data.data(), delta.data.data(), gw_t.data.data(), in, batch, out);
                grads->weight[k] = detail::transpose(gw_t);
            }
        }
        if (k == 0 && !want_input_grad) return {};
        Matrix<T> dx(batch, in);
        detail::gemm_accumulate(delta.data.data(), layer.weight.data.data(), dx.data.data(), batch, out, in);
        delta = std::move(dx);
    }
    return delta;
}

template <typename T>
struct BackwardResult {
    Gradients<T> grads;
    Matrix<T> input_grad;
};

template <typename T>
BackwardResult<T> backward(const Mlp<T>& mlp, const ForwardCache<T>& cache, Matrix<T> output_grad) {
    BackwardResult<T> r{Gradients<T>::zeros_like(mlp), {}};
    r.input_grad = backward_into(mlp, cache, std::move(output_grad), &r.grads);
    return r;
}

template <typename T>
BackwardResult<T> backward(const Mlp<T>& mlp, const ForwardCache<T>& cache, std::span<const T> output_grad) {
    Matrix<T> g(1, output_grad.size());
    std::copy(output_grad.begin(), output_grad.end(), g.data.begin());
    return backward(mlp, cache, std::move(g));
}

// loss = mean((target - pred)^2), gradient = 2 (pred - target) / D.
template <typename T>
std::pair<T, std::vector<T>> mse_loss(std::span<const T> prediction, std::span<const T> target) {
    if (prediction.size() != target.size() || prediction.empty()) {
        throw DimensionMismatch("mse_loss: prediction and target lengths differ");
    }
    const T d = static_cast<T>(prediction.size());
    T loss = 0;
    std::vector<T> grad(prediction.size());
    for (std::size_t i = 0; i < prediction.size(); ++i) {
        const T r = prediction[i] - target[i];
        loss += r * r;
        grad[i] = T(2) * r / d;
    }
    return {loss / d, std::move(grad)};
}

// Batch MSE: per-sample MSE averaged over rows. `scale_rows` lets a caller that
// splits one batch into chunks scale by the full batch size. Returns the sum of
// per-sample losses (not the mean) so chunk results add up.
template <typename T>
T mse_batch_sum(const Matrix<T>& prediction, const Matrix<T>& target, std::size_t scale_rows, Matrix<T>& grad) {
    if (prediction.rows != target.rows || prediction.cols != target.cols) {
        throw DimensionMismatch("mse_batch: shapes differ");
    }
    grad = Matrix<T>(prediction.rows, prediction.cols);
    const T d = static_cast<T>(prediction.cols);
    const T scale = T(2) / (d * static_cast<T>(scale_rows));
    double total = 0.0;
    for (std::size_t b = 0; b < prediction.rows; ++b) {
        T row = 0;
        for (std::size_t i = 0; i < prediction.cols; ++i) {
            const std::size_t k = b * prediction.cols + i;
            const T r = prediction.data[k] - target.data[k];
            row += r * r;
            grad.data[k] = scale * r;
        }
        total += static_cast<double>(row / d);
    }
    return static_cast<T>(total);
}

template <typename T>
struct AdamState {
    static constexpr double kBeta1 = 0.9;
    static constexpr double kBeta2 = 0.999;
    static constexpr double kEpsilon = 1e-8;

    Gradients<T> first_moment;
    Gradients<T> second_moment;
    std::uint64_t step = 0;
    double learning_rate = 1e-4;

    static AdamState for_network(const Mlp<T>& mlp, double lr) {
        return {Gradients<T>::zeros_like(mlp), Gradients<T>::zeros_like(mlp), 0, lr};
    }
};

namespace detail {

template <typename T>
void adam_update(std::span<T> params, std::span<const T> grad, std::span<T> m, std::span<T> v, T b1, T b2,
                 T lr_corrected, T inv_sqrt_c2, T eps) {
    for (std::size_t i = 0; i < params.size(); ++i) {
        const T g = grad[i];
        m[i] = b1 * m[i] + (T(1) - b1) * g;
        v[i] = b2 * v[i] + (T(1) - b2) * g * g;
        params[i] -= lr_corrected * m[i] / (std::sqrt(v[i]) * inv_sqrt_c2 + eps);
    }
}

}  // namespace detail

// One Adam step with bias correction:
//   p -= lr * (m / (1 - b1^t)) / (sqrt(v / (1 - b2^t)) + eps)
template <typename T>
void adam_step(Mlp<T>& mlp, AdamState<T>& state, const Gradients<T>& grads) {
    const std::size_t n = mlp.layers.size();
    if (grads.weight.size() != n || state.first_moment.weight.size() != n) {
        throw DimensionMismatch("adam_step: gradient or state shaped for another network");
    }
    for (std::size_t k = 0; k < n; ++k) {
        if (grads.weight[k].data.size() != mlp.layers[k].weight.data.size() ||
            grads.bias[k].size() != mlp.layers[k].bias.size() ||
            state.first_moment.weight[k].data.size() != mlp.layers[k].weight.data.size()) {
            throw DimensionMismatch("adam_step: shape mismatch at layer " + std::to_string(k));
        }
        detail::check_finite<T>(grads.weight[k].data, "adam_step");
        detail::check_finite<T>(grads.bias[k], "adam_step");
    }
    state.step += 1;
    const double t = static_cast<double>(state.step);
    const double c1 = 1.0 - std::pow(AdamState<T>::kBeta1, t);
    const double c2 = 1.0 - std::pow(AdamState<T>::kBeta2, t);
    const T lr_corrected = static_cast<T>(state.learning_rate / c1);
    const T inv_sqrt_c2 = static_cast<T>(1.0 / std::sqrt(c2));
    const T b1 = static_cast<T>(AdamState<T>::kBeta1);
    const T b2 = static_cast<T>(AdamState<T>::kBeta2);
    const T eps = static_cast<T>(AdamState<T>::kEpsilon);
    for (std::size_t k = 0; k < n; ++k) {
        auto& layer = mlp.layers[k];
        detail::adam_update<T>(layer.weight.data, grads.weight[k].data, state.first_moment.weight[k].data,
                               state.second_moment.weight[k].data, b1, b2, lr_corrected, inv_sqrt_c2, eps);
        detail::adam_update<T>(layer.bias, grads.bias[k], state.first_moment.bias[k], state.second_moment.bias[k],
                               b1, b2, lr_corrected, inv_sqrt_c2, eps);
    }
}

// Weight file: "TNN1", then per layer: u32 rows, u32 cols, u8 activation,
// rows*cols f32 weights (row-major), rows f32 biases. Little-endian throughout.
inline constexpr char kWeightMagic[3] = {'T', 'N', 'N'};
inline constexpr char kWeightVersion = '1';

namespace detail {

inline void put_u32(std::string& out, std::uint32_t v) {
    for (int s = 0; s < 32; s += 8) out.push_back(static_cast<char>((v >> s) & 0xffu));
}

inline std::uint32_t get_u32(std::span<const unsigned char> in, std::size_t& pos) {
    if (pos + 4 > in.size()) throw FormatError("weight file truncated");
    std::uint32_t v = 0;
    for (int s = 0; s < 4; ++s) v |= static_cast<std::uint32_t>(in[pos + s]) << (8 * s);
    pos += 4;
    return v;
}

inline void put_f32(std::string& out, float f) { put_u32(out, std::bit_cast<std::uint32_t>(f)); }

inline float get_f32(std::span<const unsigned char> in, std::size_t& pos) {
    return std::bit_cast<float>(get_u32(in, pos));
}

}  // namespace detail

inline std::string serialize_weights(const Mlp<float>& mlp) {
    mlp.validate();
    std::string out(kWeightMagic, kWeightMagic + 3);
    out.push_back(kWeightVersion);
    for (const auto& l : mlp.layers) {
        detail::put_u32(out, static_cast<std::uint32_t>(l.out()));
        detail::put_u32(out, static_cast<std::uint32_t>(l.in()));
        out.push_back(static_cast<char>(l.activation));
        for (float w : l.weight.data) detail::put_f32(out, w);
        for (float b : l.bias) detail::put_f32(out, b);
    }
    return out;
}

inline Mlp<float> deserialize_weights(std::span<const unsigned char> bytes) {
    if (bytes.size() < 4 || std::memcmp(bytes.data(), kWeightMagic, 3) != 0) {
        throw FormatError("not a weight file (bad magic)");
    }
    if (static_cast<char>(bytes[3]) != kWeightVersion) {
        throw FormatError(std::string("unsupported weight file version '") + static_cast<char>(bytes[3]) +
                          "', expected '" + kWeightVersion + "'");
    }
    Mlp<float> mlp;
    std::size_t pos = 4;
    while (pos < bytes.size()) {
        const std::uint32_t rows = detail::get_u32(bytes, pos);
        const std::uint32_t cols = detail::get_u32(bytes, pos);
        if (pos >= bytes.size()) throw FormatError("weight file truncated");
        const std::uint8_t tag = bytes[pos++];
        if (tag > static_cast<std::uint8_t>(Activation::Relu)) throw FormatError("unknown activation tag");
        if (rows == 0 || cols == 0) throw FormatError("layer with zero size");
        const std::uint64_t need = (static_cast<std::uint64_t>(rows) * cols + rows) * 4;
        if (need > bytes.size() - pos) throw FormatError("weight file truncated: layer payload shorter than its shape");
        Layer<float> l;
        l.weight = Matrix<float>(rows, cols);
        l.bias.resize(rows);
        l.activation = static_cast<Activation>(tag);
        for (auto& w : l.weight.data) w = detail::get_f32(bytes, pos);
        for (auto& b : l.bias) b = detail::get_f32(bytes, pos);
        mlp.layers.push_back(std::move(l));
    }
    if (mlp.layers.empty()) throw FormatError("weight file has no layers");
    try {
        mlp.validate();
    } catch (const InvalidArgument& e) {
        throw FormatError(std::string("weight file: ") + e.what());
    }
    return mlp;
}

inline void save_weights(const Mlp<float>& mlp, const std::string& path) {
    const std::string bytes = serialize_weights(mlp);
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot open '" + path + "' for writing");
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw Error("failed writing '" + path + "'");
}

inline Mlp<float> load_weights(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open '" + path + "'");
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return deserialize_weights(bytes);
}

}  // namespace posemetric::nn
