#include "semcom/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "semcom/rng.hpp"

namespace semcom {

namespace {

constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

std::uint32_t read_u32_be(std::istream& in, const std::string& path) {
    std::uint8_t b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4))
        throw NumericError("idx: truncated file " + path);
    return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
           (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
}

void write_u32_be(std::ostream& out, std::uint32_t v) {
    const std::uint8_t b[4] = {std::uint8_t(v >> 24), std::uint8_t(v >> 16),
                               std::uint8_t(v >> 8), std::uint8_t(v)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

double clamp01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

}  // namespace

Dataset load_idx_images(const std::string& images_path) {
    std::ifstream in(images_path, std::ios::binary);
    if (!in) throw NumericError("idx: cannot open " + images_path);
    if (read_u32_be(in, images_path) != kIdxImagesMagic)
        throw NumericError("idx: bad image magic in " + images_path);
    const std::uint32_t count = read_u32_be(in, images_path);
    const std::uint32_t rows = read_u32_be(in, images_path);
    const std::uint32_t cols = read_u32_be(in, images_path);
    Dataset d;
    d.name = images_path;
    d.images.reserve(count);
    std::vector<std::uint8_t> buf(static_cast<std::size_t>(rows) * cols);
    for (std::uint32_t i = 0; i < count; ++i) {
        if (!in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size())))
            throw NumericError("idx: truncated image data in " + images_path);
        Tensor img({rows, cols});
        for (std::size_t p = 0; p < buf.size(); ++p) img.data[p] = buf[p] / 255.0;
        img.check_finite("idx image");
        d.images.push_back(std::move(img));
    }
    return d;
}

Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
    Dataset d = load_idx_images(images_path);
    std::ifstream in(labels_path, std::ios::binary);
    if (!in) throw NumericError("idx: cannot open " + labels_path);
    if (read_u32_be(in, labels_path) != kIdxLabelsMagic)
        throw NumericError("idx: bad label magic in " + labels_path);
    const std::uint32_t count = read_u32_be(in, labels_path);
    if (count != d.images.size())
        throw NumericError("idx: image count " + std::to_string(d.images.size()) +
                           " does not match label count " + std::to_string(count));
    d.labels.resize(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        std::uint8_t b;
        if (!in.read(reinterpret_cast<char*>(&b), 1))
            throw NumericError("idx: truncated label data in " + labels_path);
        d.labels[i] = b;
    }
    return d;
}

void save_idx(const Dataset& d, const std::string& images_path, const std::string& labels_path) {
    if (d.images.empty()) throw NumericError("idx: refusing to write empty dataset");
    const Shape& s = d.images.front().shape;
    if (s.size() != 2) throw ShapeError("idx: images must be [H,W]");
    {
        std::ofstream out(images_path, std::ios::binary);
        if (!out) throw NumericError("idx: cannot write " + images_path);
        write_u32_be(out, kIdxImagesMagic);
        write_u32_be(out, static_cast<std::uint32_t>(d.images.size()));
        write_u32_be(out, static_cast<std::uint32_t>(s[0]));
        write_u32_be(out, static_cast<std::uint32_t>(s[1]));
        for (const Tensor& img : d.images) {
            if (img.shape != s) throw ShapeError("idx: inhomogeneous image shapes");
            for (double v : img.data) {
                const auto b = static_cast<std::uint8_t>(std::lround(clamp01(v) * 255.0));
                out.write(reinterpret_cast<const char*>(&b), 1);
            }
        }
    }
    if (!labels_path.empty()) {
        if (d.labels.size() != d.images.size())
            throw NumericError("idx: label count does not match image count");
        std::ofstream out(labels_path, std::ios::binary);
        if (!out) throw NumericError("idx: cannot write " + labels_path);
        write_u32_be(out, kIdxLabelsMagic);
        write_u32_be(out, static_cast<std::uint32_t>(d.labels.size()));
        for (std::size_t l : d.labels) {
            const auto b = static_cast<std::uint8_t>(l);
            out.write(reinterpret_cast<const char*>(&b), 1);
        }
    }
}

SynthKind synth_kind_from_name(const std::string& name) {
    if (name == "two_class_digits_8x8") return SynthKind::TwoClassDigits8x8;
    if (name == "shifted_blobs") return SynthKind::ShiftedBlobs;
    if (name == "mask_shapes") return SynthKind::MaskShapes;
    throw NumericError("unknown synthetic dataset kind: " + name);
}

namespace {

Tensor digit_glyph(std::size_t cls, Rng& rng) {
    Tensor img({8, 8});
    for (double& v : img.data) v = 0.05 + uniform(rng, 0.0, 0.08);
    const long jr = static_cast<long>(rng() % 3) - 1;
    const long jc = static_cast<long>(rng() % 3) - 1;
    auto set = [&](long r, long c, double v) {
        r += jr;
        c += jc;
        if (r >= 0 && r < 8 && c >= 0 && c < 8)
            img.data[static_cast<std::size_t>(r) * 8 + static_cast<std::size_t>(c)] =
                clamp01(v + uniform(rng, -0.08, 0.08));
    };
    if (cls == 0) {
        // crude "0": a ring
        for (long c = 2; c <= 5; ++c) {
            set(1, c, 0.9);
            set(6, c, 0.9);
        }
        for (long r = 2; r <= 5; ++r) {
            set(r, 2, 0.9);
            set(r, 5, 0.9);
        }
    } else {
        // crude "1": a vertical bar with a serif
        for (long r = 1; r <= 6; ++r) set(r, 4, 0.9);
        set(2, 3, 0.9);
        set(6, 3, 0.9);
        set(6, 5, 0.9);
    }
    return img;
}

Tensor blob_image(std::size_t cls, Rng& rng, double offset) {
    Tensor img({8, 8});
    // class 0: small dim bump; class 1: wide bright bump. The classes differ
    // in total intensity so a constant domain offset actually disturbs a
    // linear classifier trained on the un-shifted domain.
    const double amp = cls == 0 ? 0.18 : 0.48;
    const double sigma = cls == 0 ? 1.1 : 1.8;
    const double cr = 3.5 + uniform(rng, -1.0, 1.0);
    const double cc = 3.5 + uniform(rng, -1.0, 1.0);
    for (std::size_t r = 0; r < 8; ++r)
        for (std::size_t c = 0; c < 8; ++c) {
            const double d2 = (r - cr) * (r - cr) + (c - cc) * (c - cc);
            double v = amp * std::exp(-d2 / (2.0 * sigma * sigma));
            v += uniform(rng, 0.0, 0.02);
            img.data[r * 8 + c] = clamp01(std::min(v, 0.5) + offset);
        }
    return img;
}

}  // namespace

Dataset synth_dataset(SynthKind kind, std::size_t n, std::uint64_t seed,
                      const SynthOptions& opt) {
    if (n < 1) throw NumericError("synth_dataset: n must be >= 1");
    Rng rng = derive_rng(seed, static_cast<std::uint64_t>(kind));
    Dataset d;
    switch (kind) {
        case SynthKind::TwoClassDigits8x8:
            d.name = "two_class_digits_8x8";
            for (std::size_t i = 0; i < n; ++i) {
                const std::size_t cls = i % 2;
                d.images.push_back(digit_glyph(cls, rng));
                d.labels.push_back(cls);
            }
            break;
        case SynthKind::ShiftedBlobs:
            d.name = "shifted_blobs";
            for (std::size_t i = 0; i < n; ++i) {
                const std::size_t cls = i % 2;
                d.images.push_back(blob_image(cls, rng, opt.domain_offset));
                d.labels.push_back(cls);
            }
            break;
        case SynthKind::MaskShapes:
            d.name = "mask_shapes";
            for (std::size_t i = 0; i < n; ++i) {
                Tensor img({8, 8});
                Tensor mask({8, 8});
                for (double& v : img.data) v = 0.1 + uniform(rng, 0.0, 0.05);
                const std::size_t h = 2 + rng() % 3, w = 2 + rng() % 3;
                const std::size_t r0 = rng() % (8 - h), c0 = rng() % (8 - w);
                for (std::size_t r = r0; r < r0 + h; ++r)
                    for (std::size_t c = c0; c < c0 + w; ++c) {
                        img.data[r * 8 + c] = clamp01(0.8 + uniform(rng, -0.05, 0.05));
                        mask.data[r * 8 + c] = 1.0;
                    }
                d.images.push_back(std::move(img));
                d.masks.push_back(std::move(mask));
            }
            break;
    }
    return d;
}

Tensor resample_image(const Tensor& img, std::size_t target_h, std::size_t target_w) {
    if (img.shape.size() != 2) throw ShapeError("resample_image: expected [H,W] image");
    if (target_h < 1 || target_w < 1) throw NumericError("resample_image: target must be positive");
    const std::size_t H = img.shape[0], W = img.shape[1];
    Tensor out({target_h, target_w});
    for (std::size_t r = 0; r < target_h; ++r)
        for (std::size_t c = 0; c < target_w; ++c) {
            const double sr = target_h == 1 ? 0.0
                                            : static_cast<double>(r) * (H - 1) / (target_h - 1);
            const double sc = target_w == 1 ? 0.0
                                            : static_cast<double>(c) * (W - 1) / (target_w - 1);
            const std::size_t r0 = static_cast<std::size_t>(sr);
            const std::size_t c0 = static_cast<std::size_t>(sc);
            const std::size_t r1 = std::min(r0 + 1, H - 1);
            const std::size_t c1 = std::min(c0 + 1, W - 1);
            const double fr = sr - r0, fc = sc - c0;
            const double v = (1 - fr) * (1 - fc) * img.data[r0 * W + c0] +
                             (1 - fr) * fc * img.data[r0 * W + c1] +
                             fr * (1 - fc) * img.data[r1 * W + c0] +
                             fr * fc * img.data[r1 * W + c1];
            out.data[r * target_w + c] = clamp01(v);
        }
    return out;
}

Tensor stack_batch(const std::vector<Tensor>& images, const std::vector<std::size_t>& idx,
                   bool flatten) {
    if (idx.empty()) throw ShapeError("stack_batch: empty batch");
    const Shape& s = images.at(idx[0]).shape;
    const std::size_t per = numel(s);
    Shape out_shape;
    if (flatten)
        out_shape = {idx.size(), per};
    else if (s.size() == 2)
        out_shape = {idx.size(), 1, s[0], s[1]};
    else
        throw ShapeError("stack_batch: unbatched image must be [H,W]");
    Tensor out(out_shape);
    for (std::size_t b = 0; b < idx.size(); ++b) {
        const Tensor& img = images.at(idx[b]);
        if (img.shape != s) throw ShapeError("stack_batch: inhomogeneous shapes");
        std::copy(img.data.begin(), img.data.end(), out.data.begin() + b * per);
    }
    return out;
}

std::vector<std::vector<std::size_t>> batch_indices(std::size_t n, std::size_t batch,
                                                    std::uint64_t shuffle_seed,
                                                    std::size_t epoch) {
    if (batch < 1) throw NumericError("batch_indices: batch must be >= 1");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng = derive_rng(shuffle_seed, epoch);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<std::vector<std::size_t>> out;
    for (std::size_t i = 0; i < n; i += batch) {
        out.emplace_back(order.begin() + i, order.begin() + std::min(i + batch, n));
    }
    return out;
}

}  // namespace semcom
