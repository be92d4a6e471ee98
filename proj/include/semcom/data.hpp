#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "semcom/tensor.hpp"

namespace semcom {

/// Labeled image collection. Images are [H,W] tensors with values in [0,1].
/// `labels` holds class indices for discrete tasks; `masks` holds per-pixel
/// ground truth for continuous tasks. Either may be empty.
struct Dataset {
    std::string name;
    std::vector<Tensor> images;
    std::vector<std::size_t> labels;
    std::vector<Tensor> masks;

    std::size_t size() const { return images.size(); }
};

/// IDX (big-endian) ingestion: magic 0x00000803 for images, 0x00000801 for labels.
Dataset load_idx(const std::string& images_path, const std::string& labels_path);
Dataset load_idx_images(const std::string& images_path);
void save_idx(const Dataset& d, const std::string& images_path, const std::string& labels_path);

enum class SynthKind { TwoClassDigits8x8, ShiftedBlobs, MaskShapes };

SynthKind synth_kind_from_name(const std::string& name);

struct SynthOptions {
    /// Constant intensity offset added to every pixel (used to realize a
    /// shifted observation domain for ShiftedBlobs). Output stays in [0,1]
    /// as long as offset <= 0.5.
    double domain_offset = 0.0;
};

Dataset synth_dataset(SynthKind kind, std::size_t n, std::uint64_t seed,
                      const SynthOptions& opt = {});

/// Bilinear resampling of a [H,W] image (corner-aligned). Values stay in [0,1].
Tensor resample_image(const Tensor& img, std::size_t target_h, std::size_t target_w);

/// Stack selected images into a [B, n] batch (flattened) or [B, 1, H, W].
Tensor stack_batch(const std::vector<Tensor>& images, const std::vector<std::size_t>& idx,
                   bool flatten = true);

/// Deterministic epoch batching shared by both protocol endpoints: a seeded
/// shuffle of [0, n) chopped into batches of at most `batch` samples.
std::vector<std::vector<std::size_t>> batch_indices(std::size_t n, std::size_t batch,
                                                    std::uint64_t shuffle_seed,
                                                    std::size_t epoch);

}  // namespace semcom
