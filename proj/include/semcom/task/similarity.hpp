#pragma once

#include <cstdint>
#include <vector>

#include "semcom/data.hpp"
#include "semcom/model.hpp"

namespace semcom::task {

/// Balanced two-domain dataset: label 0 = library draw, 1 = observed draw,
/// with a disjoint 80/20 train/test partition.
struct MergedDataset {
    std::vector<Tensor> samples;      // flattened to a common dimension
    std::vector<int> domain_labels;   // exactly {0,1}
    std::vector<std::size_t> train_idx;
    std::vector<std::size_t> test_idx;
};

MergedDataset build_merged(const Dataset& lib, const Dataset& obs, std::size_t per_domain,
                           std::uint64_t seed);

struct DomainClassifier {
    Model model;          // single dense layer + sigmoid
    double train_error = 0.0;
    double test_error = 0.0;  // the epsilon that feeds pad()
};

/// Linear probe distinguishing the two domains; test error estimates epsilon.
DomainClassifier train_domain_classifier(const MergedDataset& m, std::uint64_t seed,
                                         std::size_t epochs = 400, double lr = 0.1);

/// Proxy A-distance d_A = 2(1 - 2 epsilon), clamped to [0, 2].
double pad(double epsilon);

/// Convenience: merged set + linear probe + pad in one call.
struct PadResult {
    double epsilon = 0.5;
    double d_a = 0.0;
};

PadResult proxy_a_distance(const Dataset& lib, const Dataset& obs, std::size_t per_domain,
                           std::uint64_t seed);

}  // namespace semcom::task
