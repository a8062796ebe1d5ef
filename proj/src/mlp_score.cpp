#include "lid/mlp_score.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "lid/errors.hpp"
#include "lid/rng.hpp"

namespace lid {

namespace {

constexpr std::array<char, 4> kMagic = {'F', 'L', 'P', 'D'};
constexpr std::uint32_t kVersion = 1;

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

Eigen::MatrixXd silu(const Eigen::MatrixXd& z)
{
    return z.unaryExpr([](double v) { return v * sigmoid(v); });
}

Eigen::MatrixXd silu_grad(const Eigen::MatrixXd& z)
{
    return z.unaryExpr([](double v) {
        const double s = sigmoid(v);
        return s * (1.0 + v * (1.0 - s));
    });
}

template <class T>
void write_le(std::ostream& out, T value)
{
    static_assert(std::endian::native == std::endian::little, "big-endian hosts are not supported");
    std::array<char, sizeof(T)> bytes;
    std::memcpy(bytes.data(), &value, sizeof(T));
    out.write(bytes.data(), bytes.size());
}

template <class T>
T read_le(std::istream& in)
{
    std::array<char, sizeof(T)> bytes;
    in.read(bytes.data(), bytes.size());
    if (!in) throw ValidationError("checkpoint truncated");
    T value;
    std::memcpy(&value, bytes.data(), sizeof(T));
    return value;
}

}  // namespace

Eigen::MatrixXd time_embedding(const Eigen::VectorXd& times, int dim)
{
    if (dim < 2 || dim % 2 != 0) throw ValidationError("time embedding size must be even and >= 2");
    const int half = dim / 2;
    Eigen::MatrixXd emb(dim, times.size());
    for (int k = 0; k < half; ++k) {
        const double freq = half == 1 ? 1.0 : std::pow(1e4, static_cast<double>(k) / (half - 1));
        for (Eigen::Index i = 0; i < times.size(); ++i) {
            emb(k, i) = std::sin(times[i] * freq);
            emb(half + k, i) = std::cos(times[i] * freq);
        }
    }
    return emb;
}

MlpScore::MlpScore(MlpArchitecture arch, Schedule sched) : arch_(std::move(arch)), sched_(sched)
{
    if (arch_.input_dim < 1) throw ValidationError("input dimension must be positive");
    if (arch_.hidden.empty() || arch_.hidden.size() % 2 == 0)
        throw ValidationError("hidden layer count must be odd (2L + 1)");
    for (int h : arch_.hidden)
        if (h < 1) throw ValidationError("hidden widths must be positive");
    if (arch_.time_embed_dim < 2 || arch_.time_embed_dim % 2 != 0)
        throw ValidationError("time embedding size must be even and >= 2");

    const int n = hidden_count();
    const Eigen::Index input_width = arch_.input_dim + arch_.time_embed_dim;
    auto width = [&](int k) -> Eigen::Index { return k == 0 ? input_width : arch_.hidden[k - 1]; };

    layers_.resize(n + 1);
    for (int j = 1; j <= n + 1; ++j) {
        const Eigen::Index out = j <= n ? arch_.hidden[j - 1] : arch_.input_dim;
        Eigen::Index in = width(j - 1);
        if (const int s = skip_source(j); s >= 0) in += width(s);
        layers_[j - 1].weight = Eigen::MatrixXd::Zero(out, in);
        layers_[j - 1].bias = Eigen::VectorXd::Zero(out);
    }
}

int MlpScore::skip_source(int j) const
{
    return j > contracting_count() ? hidden_count() + 1 - j : -1;
}

void MlpScore::init_zero()
{
    for (auto& layer : layers_) {
        layer.weight.setZero();
        layer.bias.setZero();
    }
}

void MlpScore::init_random(std::uint64_t seed)
{
    auto rng = make_rng(seed, {0x1417});
    for (std::size_t j = 0; j + 1 < layers_.size(); ++j) {
        auto& layer = layers_[j];
        const double scale = 1.0 / std::sqrt(static_cast<double>(layer.weight.cols()));
        layer.weight = standard_normal(layer.weight.rows(), layer.weight.cols(), rng) * scale;
        layer.bias.setZero();
    }
    layers_.back().weight.setZero();
    layers_.back().bias.setZero();
}

Eigen::Index MlpScore::parameter_count() const
{
    Eigen::Index n = 0;
    for (const auto& layer : layers_) n += layer.weight.size() + layer.bias.size();
    return n;
}

Eigen::VectorXd MlpScore::flat_parameters() const
{
    Eigen::VectorXd flat(parameter_count());
    Eigen::Index at = 0;
    for (const auto& layer : layers_) {
        flat.segment(at, layer.weight.size()) = layer.weight.reshaped();
        at += layer.weight.size();
        flat.segment(at, layer.bias.size()) = layer.bias;
        at += layer.bias.size();
    }
    return flat;
}

void MlpScore::set_flat_parameters(const Eigen::VectorXd& flat)
{
    if (flat.size() != parameter_count()) throw ValidationError("parameter vector has the wrong length");
    Eigen::Index at = 0;
    for (auto& layer : layers_) {
        layer.weight.reshaped() = flat.segment(at, layer.weight.size());
        at += layer.weight.size();
        layer.bias = flat.segment(at, layer.bias.size());
        at += layer.bias.size();
    }
}

std::vector<MlpScore::Layer> MlpScore::zero_like() const
{
    std::vector<Layer> out(layers_.size());
    for (std::size_t j = 0; j < layers_.size(); ++j) {
        out[j].weight = Eigen::MatrixXd::Zero(layers_[j].weight.rows(), layers_[j].weight.cols());
        out[j].bias = Eigen::VectorXd::Zero(layers_[j].bias.size());
    }
    return out;
}

Eigen::MatrixXd MlpScore::forward(const Eigen::MatrixXd& points, const Eigen::VectorXd& times, Cache* cache) const
{
    if (points.rows() != arch_.input_dim) throw ValidationError("forward: input dimension mismatch");
    if (times.size() != points.cols()) throw ValidationError("forward: one time per column required");

    const int n = hidden_count();
    std::vector<Eigen::MatrixXd> post(n + 1);
    std::vector<Eigen::MatrixXd> pre(n + 1);
    post[0].resize(arch_.input_dim + arch_.time_embed_dim, points.cols());
    post[0].topRows(arch_.input_dim) = points;
    post[0].bottomRows(arch_.time_embed_dim) = time_embedding(times, arch_.time_embed_dim);

    auto affine = [&](int j) {
        const auto& layer = layers_[j - 1];
        const Eigen::Index main_width = post[j - 1].rows();
        Eigen::MatrixXd z = layer.weight.leftCols(main_width) * post[j - 1];
        if (const int s = skip_source(j); s >= 0) z.noalias() += layer.weight.rightCols(post[s].rows()) * post[s];
        z.colwise() += layer.bias;
        return z;
    };

    for (int j = 1; j <= n; ++j) {
        pre[j] = affine(j);
        post[j] = silu(pre[j]);
    }
    Eigen::MatrixXd out = affine(n + 1);

    if (cache) {
        cache->pre = std::move(pre);
        cache->post = std::move(post);
        cache->output = out;
    }
    return out;
}

void MlpScore::backward(const Cache& cache, const Eigen::MatrixXd& output_grad, std::vector<Layer>& grads) const
{
    const int n = hidden_count();
    std::vector<Eigen::MatrixXd> post_grad(n + 1);
    for (int j = 1; j <= n; ++j) post_grad[j] = Eigen::MatrixXd::Zero(cache.post[j].rows(), cache.post[j].cols());

    auto propagate = [&](int j, const Eigen::MatrixXd& dz) {
        const auto& layer = layers_[j - 1];
        auto& grad = grads[j - 1];
        const Eigen::Index main_width = cache.post[j - 1].rows();
        grad.weight.leftCols(main_width).noalias() += dz * cache.post[j - 1].transpose();
        grad.bias += dz.rowwise().sum();
        if (j - 1 >= 1) post_grad[j - 1].noalias() += layer.weight.leftCols(main_width).transpose() * dz;
        if (const int s = skip_source(j); s >= 0) {
            const Eigen::Index skip_width = cache.post[s].rows();
            grad.weight.rightCols(skip_width).noalias() += dz * cache.post[s].transpose();
            if (s >= 1) post_grad[s].noalias() += layer.weight.rightCols(skip_width).transpose() * dz;
        }
    };

    propagate(n + 1, output_grad);
    for (int j = n; j >= 1; --j) {
        const Eigen::MatrixXd dz = post_grad[j].cwiseProduct(silu_grad(cache.pre[j]));
        propagate(j, dz);
    }
}

double MlpScore::output_scale(double t) const
{
    return arch_.output == OutputParam::Noise ? -1.0 / sched_.sigma(t) : 1.0;
}


Eigen::MatrixXd MlpScore::score_batch(const Eigen::MatrixXd& points, double t) const
{
    check_query(points.rows(), t);
    return forward(points, Eigen::VectorXd::Constant(points.cols(), t)) * output_scale(t);
}

ScoreWithJvp MlpScore::score_with_jvp(const Eigen::VectorXd& x, double t, const Eigen::MatrixXd& directions) const
{
    check_query(x.size(), t);
    if (directions.rows() != x.size()) throw ValidationError("direction dimension mismatch");

    Cache cache;
    const Eigen::VectorXd out = forward(x, Eigen::VectorXd::Constant(1, t), &cache).col(0);

    // Tangents of the input are [V; 0]: only the first D weight columns of any
    // block reading the input contribute.
    const int n = hidden_count();
    const Eigen::Index d = arch_.input_dim;
    std::vector<Eigen::MatrixXd> tangent(n + 1);

    auto affine_tangent = [&](int j) {
        const auto& layer = layers_[j - 1];
        const Eigen::Index main_width = cache.post[j - 1].rows();
        Eigen::MatrixXd zdot = j - 1 == 0 ? Eigen::MatrixXd(layer.weight.leftCols(d) * directions)
                                          : Eigen::MatrixXd(layer.weight.leftCols(main_width) * tangent[j - 1]);
        if (const int s = skip_source(j); s >= 0) {
            if (s == 0)
                zdot.noalias() += layer.weight.middleCols(main_width, d) * directions;
            else
                zdot.noalias() += layer.weight.rightCols(cache.post[s].rows()) * tangent[s];
        }
        return zdot;
    };

    for (int j = 1; j <= n; ++j) {
        const Eigen::VectorXd slope = silu_grad(cache.pre[j]).col(0);
        tangent[j] = slope.asDiagonal() * affine_tangent(j);
    }
    const double scale = output_scale(t);
    return {out * scale, affine_tangent(n + 1) * scale};
}

void MlpScore::save(std::ostream& out) const
{
    out.write(kMagic.data(), kMagic.size());
    write_le<std::uint32_t>(out, kVersion);
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(arch_.input_dim));
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(arch_.hidden.size()));
    for (int h : arch_.hidden) write_le<std::uint32_t>(out, static_cast<std::uint32_t>(h));
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(arch_.time_embed_dim));
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(arch_.output));
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(sched_.kind()));
    write_le<double>(out, sched_.beta0());
    write_le<double>(out, sched_.beta1());
    for (const auto& layer : layers_) {
        for (Eigen::Index r = 0; r < layer.weight.rows(); ++r)
            for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) write_le<double>(out, layer.weight(r, c));
        for (Eigen::Index r = 0; r < layer.bias.size(); ++r) write_le<double>(out, layer.bias[r]);
    }
    if (!out) throw std::runtime_error("failed to write checkpoint");
}

void MlpScore::save(const std::filesystem::path& path) const
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    save(out);
}

MlpScore MlpScore::load(std::istream& in)
{
    std::array<char, 4> magic{};
    in.read(magic.data(), magic.size());
    if (!in || magic != kMagic) throw ValidationError("not a FLPD checkpoint");
    const auto version = read_le<std::uint32_t>(in);
    if (version != kVersion) throw ValidationError("unsupported checkpoint version " + std::to_string(version));

    MlpArchitecture arch;
    arch.input_dim = read_le<std::uint32_t>(in);
    const auto count = read_le<std::uint32_t>(in);
    if (count > 4096) throw ValidationError("implausible hidden layer count in checkpoint");
    arch.hidden.resize(count);
    for (auto& h : arch.hidden) h = static_cast<int>(read_le<std::uint32_t>(in));
    arch.time_embed_dim = static_cast<int>(read_le<std::uint32_t>(in));
    const auto output = read_le<std::uint32_t>(in);
    if (output > 1) throw ValidationError("unknown output parameterization in checkpoint");
    arch.output = static_cast<OutputParam>(output);

    const auto kind = read_le<std::uint32_t>(in);
    const double p0 = read_le<double>(in);
    const double p1 = read_le<double>(in);
    Schedule sched = Schedule::vp(1.0, 1.0);
    switch (kind) {
    case 0: sched = Schedule::ve(p0, p1); break;
    case 1: sched = Schedule::vp(p0, p1); break;
    case 2: sched = Schedule::sub_vp(p0, p1); break;
    default: throw ValidationError("unknown schedule kind in checkpoint");
    }

    MlpScore model(arch, sched);
    for (auto& layer : model.layers_) {
        for (Eigen::Index r = 0; r < layer.weight.rows(); ++r)
            for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) layer.weight(r, c) = read_le<double>(in);
        for (Eigen::Index r = 0; r < layer.bias.size(); ++r) layer.bias[r] = read_le<double>(in);
    }
    return model;
}

MlpScore MlpScore::load(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open checkpoint " + path.string());
    return load(in);
}

}  // namespace lid
