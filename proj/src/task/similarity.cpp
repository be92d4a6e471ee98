#include "semcom/task/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "semcom/layers.hpp"
#include "semcom/rng.hpp"

namespace semcom::task {

MergedDataset build_merged(const Dataset& lib, const Dataset& obs, std::size_t per_domain,
                           std::uint64_t seed) {
    if (lib.size() < per_domain || obs.size() < per_domain)
        throw NumericError("build_merged: need at least " + std::to_string(per_domain) +
                           " samples per domain");
    const Shape& target = lib.images.front().shape;
    MergedDataset m;
    for (std::size_t i = 0; i < per_domain; ++i) {
        m.samples.emplace_back(Shape{numel(target)}, lib.images[i].data);
        m.domain_labels.push_back(0);
    }
    for (std::size_t i = 0; i < per_domain; ++i) {
        Tensor img = obs.images[i];
        if (img.shape != target) img = resample_image(img, target[0], target[1]);
        m.samples.emplace_back(Shape{numel(target)}, std::move(img.data));
        m.domain_labels.push_back(1);
    }
    std::vector<std::size_t> order(2 * per_domain);
    std::iota(order.begin(), order.end(), 0);
    Rng rng = derive_rng(seed, 0x9adULL);
    std::shuffle(order.begin(), order.end(), rng);
    const std::size_t n_train = (2 * per_domain) * 8 / 10;
    m.train_idx.assign(order.begin(), order.begin() + n_train);
    m.test_idx.assign(order.begin() + n_train, order.end());
    if (m.test_idx.empty()) throw NumericError("build_merged: test split is empty");
    return m;
}

namespace {

double error_rate(Model& clf, const MergedDataset& m, const std::vector<std::size_t>& idx) {
    std::size_t wrong = 0;
    for (std::size_t i : idx) {
        const Tensor p = clf.forward_one(m.samples[i]);
        const int pred = p.data[0] >= 0.5 ? 1 : 0;
        wrong += pred != m.domain_labels[i];
    }
    return static_cast<double>(wrong) / static_cast<double>(idx.size());
}

}  // namespace

DomainClassifier train_domain_classifier(const MergedDataset& m, std::uint64_t seed,
                                         std::size_t epochs, double lr) {
    if (m.samples.empty()) throw NumericError("train_domain_classifier: empty merged set");
    (void)seed;  // zero-init linear probe; training is already deterministic
    const std::size_t dim = m.samples.front().size();

    DomainClassifier out;
    out.model.add(std::make_unique<Dense>(dim, 1));
    out.model.add(std::make_unique<Sigmoid>());

    const std::size_t B = m.train_idx.size();
    Tensor x({B, dim});
    Tensor y({B, std::size_t(1)});
    for (std::size_t r = 0; r < B; ++r) {
        const Tensor& s = m.samples[m.train_idx[r]];
        std::copy(s.data.begin(), s.data.end(), x.data.begin() + r * dim);
        y.data[r] = m.domain_labels[m.train_idx[r]];
    }

    // full-batch gradient descent on binary cross entropy
    for (std::size_t e = 0; e < epochs; ++e) {
        const Tensor p = out.model.forward(x);
        Tensor gp(p.shape);
        for (std::size_t r = 0; r < B; ++r) {
            const double pr = std::clamp(p.data[r], 1e-12, 1.0 - 1e-12);
            gp.data[r] = (pr - y.data[r]) / (pr * (1.0 - pr)) / static_cast<double>(B);
        }
        out.model.zero_grad();
        out.model.backward(gp);
        for (Tensor* param : out.model.params())
            for (std::size_t i = 0; i < param->size(); ++i)
                param->data[i] -= lr * param->grad[i];
    }

    out.train_error = error_rate(out.model, m, m.train_idx);
    out.test_error = error_rate(out.model, m, m.test_idx);
    return out;
}

double pad(double epsilon) {
    if (epsilon < 0.0 || epsilon > 1.0) throw NumericError("pad: epsilon outside [0,1]");
    const double d = 2.0 * (1.0 - 2.0 * epsilon);
    return std::clamp(d, 0.0, 2.0);
}

PadResult proxy_a_distance(const Dataset& lib, const Dataset& obs, std::size_t per_domain,
                           std::uint64_t seed) {
    const MergedDataset m = build_merged(lib, obs, per_domain, seed);
    const DomainClassifier clf = train_domain_classifier(m, seed);
    return {clf.test_error, pad(clf.test_error)};
}

}  // namespace semcom::task
