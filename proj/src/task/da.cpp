#include "semcom/task/da.hpp"

#include <cmath>

#include "semcom/rng.hpp"

namespace semcom::task {

namespace {

constexpr double kProbEps = 1e-7;

double clamp_prob(double p) {
    if (p < 0.0 || p > 1.0)
        throw NumericError("gan: discriminator output outside (0,1); add a sigmoid head");
    return p < kProbEps ? kProbEps : (p > 1.0 - kProbEps ? 1.0 - kProbEps : p);
}

double mean_log(const Tensor& p, bool one_minus) {
    double acc = 0.0;
    for (double v : p.data) {
        const double q = clamp_prob(v);
        acc += std::log(one_minus ? 1.0 - q : q);
    }
    return acc / static_cast<double>(p.size());
}

/// Mean of per-sample L1 norms and its gradient w.r.t. `a`.
double l1_mean(const Tensor& a, const Tensor& b, Tensor* grad, double weight) {
    if (!a.same_shape(b)) throw ShapeError("cycle: shape mismatch");
    const double B = static_cast<double>(a.shape.empty() ? 1 : a.shape[0]);
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a.data[i] - b.data[i];
        acc += std::abs(d);
        if (grad) grad->data[i] = weight * (d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0)) / B;
    }
    return acc / B;
}

std::vector<std::size_t> pick(std::size_t n, std::size_t v, Rng& rng) {
    std::vector<std::size_t> idx(v);
    for (auto& i : idx) i = rng() % n;
    return idx;
}

}  // namespace

double gan_loss(Model& g, Model& d, const Tensor& real_batch, const Tensor& source_batch) {
    const Tensor p_real = d.forward(real_batch);
    const Tensor fake = g.forward(source_batch);
    const Tensor p_fake = d.forward(fake);
    return mean_log(p_real, false) + mean_log(p_fake, true);
}

double cycle_loss(Model& g_k, Model& g_s, const Tensor& k_batch, const Tensor& s_batch) {
    const Tensor k_cycle = g_k.forward(g_s.forward(k_batch));
    const double fwd = l1_mean(Tensor(k_batch.shape, k_cycle.data), k_batch, nullptr, 1.0);
    const Tensor s_cycle = g_s.forward(g_k.forward(s_batch));
    const double bwd = l1_mean(Tensor(s_batch.shape, s_cycle.data), s_batch, nullptr, 1.0);
    return fwd + bwd;
}

double cgan_total(CganBundle& b, const Tensor& k_batch, const Tensor& s_batch) {
    const double gan_s = gan_loss(b.g_s, b.d_s, s_batch, k_batch);
    const double gan_k = gan_loss(b.g_k, b.d_k, k_batch, s_batch);
    return gan_s + gan_k + cycle_loss(b.g_k, b.g_s, k_batch, s_batch);
}

namespace {

/// Generator-side gradient of E[log(1 - D(G(src)))] pushed through d into g.
/// Backward runs immediately after each forward chain so layer caches stay valid.
void generator_gan_term(Model& g, Model& d, const Tensor& source) {
    const Tensor fake = g.forward(source);
    const Tensor p = d.forward(fake);
    Tensor gp(p.shape);
    const double B = static_cast<double>(p.size());
    for (std::size_t i = 0; i < p.size(); ++i)
        gp.data[i] = -1.0 / (B * (1.0 - clamp_prob(p.data[i])));
    g.backward(d.backward(gp));
}

/// One cycle direction: a -> g1(a) -> g2(g1(a)) ~ a, weighted L1.
void generator_cycle_term(Model& g1, Model& g2, const Tensor& a, double weight) {
    const Tensor mid = g1.forward(a);
    const Tensor back = g2.forward(mid);
    Tensor gL(back.shape);
    l1_mean(Tensor(a.shape, back.data), a, &gL, weight);
    g1.backward(g2.backward(Tensor(back.shape, gL.data)));
}

/// Accumulates the descent gradient of (-gan value) into d's parameters.
void discriminator_terms(Model& g, Model& d, const Tensor& real, const Tensor& source) {
    {
        const Tensor p = d.forward(real);
        Tensor gp(p.shape);
        const double B = static_cast<double>(p.size());
        for (std::size_t i = 0; i < p.size(); ++i)
            gp.data[i] = -1.0 / (B * clamp_prob(p.data[i]));
        d.backward(gp);
    }
    {
        const Tensor fake = g.forward(source);
        const Tensor p = d.forward(fake);
        Tensor gp(p.shape);
        const double B = static_cast<double>(p.size());
        for (std::size_t i = 0; i < p.size(); ++i)
            gp.data[i] = 1.0 / (B * (1.0 - clamp_prob(p.data[i])));
        d.backward(gp);
    }
}

}  // namespace

void train_cgan(CganBundle& bundle, const Dataset& lib, const Dataset& obs,
                const CganTrainOptions& opts) {
    if (lib.images.empty() || obs.images.empty())
        throw NumericError("train_cgan: empty dataset");
    Adam adam_gk(opts.adam, bundle.g_k.params());
    Adam adam_gs(opts.adam, bundle.g_s.params());
    // slower discriminators keep the minimax game away from the saturated
    // regime where the generators' gradient vanishes
    AdamConfig disc_cfg = opts.adam;
    disc_cfg.eta *= opts.disc_lr_scale;
    Adam adam_dk(disc_cfg, bundle.d_k.params());
    Adam adam_ds(disc_cfg, bundle.d_s.params());
    Rng rng = derive_rng(opts.seed, 0xda);

    const std::size_t larger = std::max(lib.size(), obs.size());
    const std::size_t iters = (larger + opts.batch_size - 1) / opts.batch_size;

    for (std::size_t epoch = 0; epoch < opts.epochs; ++epoch) {
        for (std::size_t it = 0; it < iters; ++it) {
            const Tensor k = stack_batch(lib.images, pick(lib.size(), opts.batch_size, rng));
            const Tensor s = stack_batch(obs.images, pick(obs.size(), opts.batch_size, rng));

            // generators descend
            bundle.g_k.zero_grad();
            bundle.g_s.zero_grad();
            generator_gan_term(bundle.g_k, bundle.d_k, s);
            generator_gan_term(bundle.g_s, bundle.d_s, k);
            generator_cycle_term(bundle.g_s, bundle.g_k, k, opts.cycle_weight);
            generator_cycle_term(bundle.g_k, bundle.g_s, s, opts.cycle_weight);
            adam_gk.step(bundle.g_k.params());
            adam_gs.step(bundle.g_s.params());

            // discriminators ascend (descend the negated objective)
            bundle.d_k.zero_grad();
            discriminator_terms(bundle.g_k, bundle.d_k, k, s);
            adam_dk.step(bundle.d_k.params());
            bundle.d_s.zero_grad();
            discriminator_terms(bundle.g_s, bundle.d_s, s, k);
            adam_ds.step(bundle.d_s.params());
        }
    }
}

Tensor adapt(Model& g_k, const Tensor& s, const Shape& lib_shape) {
    Tensor in = s;
    if (lib_shape.size() == 2 && in.shape.size() == 2 && in.shape != lib_shape)
        in = resample_image(in, lib_shape[0], lib_shape[1]);
    Tensor out = g_k.forward_one(in);
    if (!lib_shape.empty()) {
        if (numel(lib_shape) != out.size())
            throw ShapeError("adapt: generator output cannot take library shape " +
                             shape_str(lib_shape));
        out = Tensor(lib_shape, out.data);
    }
    return out;
}

Tensor adapt_batch(Model& g_k, const Tensor& s_batch) { return g_k.forward(s_batch); }

}  // namespace semcom::task
