#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "semcom/data.hpp"
#include "semcom/metrics.hpp"
#include "semcom/rng.hpp"

using namespace semcom;

namespace {

std::filesystem::path temp_path(const char* name) {
    return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("idx round trip and pixel scaling") {
    Rng rng(3);
    Dataset d;
    d.name = "tiny";
    for (int i = 0; i < 5; ++i) {
        Tensor img({4, 3});
        // stick to exact 8-bit levels so the round trip is lossless
        for (auto& v : img.data) v = static_cast<double>(rng() % 256) / 255.0;
        d.images.push_back(img);
        d.labels.push_back(i % 3);
    }
    const auto imgs = temp_path("semcom_test_images.idx");
    const auto labs = temp_path("semcom_test_labels.idx");
    save_idx(d, imgs.string(), labs.string());
    const Dataset back = load_idx(imgs.string(), labs.string());
    REQUIRE(back.size() == d.size());
    CHECK(back.labels == d.labels);
    for (std::size_t i = 0; i < d.size(); ++i) {
        CHECK(back.images[i].shape == d.images[i].shape);
        CHECK(back.images[i].data == d.images[i].data);
    }
    std::filesystem::remove(imgs);
    std::filesystem::remove(labs);
}

TEST_CASE("idx loader: full-scale pixel maps to 1.0") {
    Dataset d;
    d.images.push_back(Tensor({1, 1}, {1.0}));  // 255 on disk
    d.labels.push_back(0);
    const auto imgs = temp_path("semcom_test_one.idx");
    const auto labs = temp_path("semcom_test_one_labels.idx");
    save_idx(d, imgs.string(), labs.string());
    const Dataset back = load_idx(imgs.string(), labs.string());
    CHECK(back.images[0].data[0] == 1.0);
    std::filesystem::remove(imgs);
    std::filesystem::remove(labs);
}

TEST_CASE("idx loader error cases") {
    CHECK_THROWS(load_idx("/nonexistent/images.idx", "/nonexistent/labels.idx"));

    const auto bad = temp_path("semcom_test_bad.idx");
    {
        std::ofstream out(bad, std::ios::binary);
        out.write("garbage!", 8);
    }
    CHECK_THROWS(load_idx_images(bad.string()));

    // count mismatch between image and label files
    Dataset two, one;
    two.images = {Tensor({1, 1}), Tensor({1, 1})};
    two.labels = {0, 1};
    one.images = {Tensor({1, 1})};
    one.labels = {0};
    const auto imgs2 = temp_path("semcom_test_two_images.idx");
    const auto labs2 = temp_path("semcom_test_two_labels.idx");
    const auto imgs1 = temp_path("semcom_test_one_images.idx");
    const auto labs1 = temp_path("semcom_test_one_labels2.idx");
    save_idx(two, imgs2.string(), labs2.string());
    save_idx(one, imgs1.string(), labs1.string());
    CHECK_THROWS(load_idx(imgs2.string(), labs1.string()));
    for (const auto& p : {imgs2, labs2, imgs1, labs1}) std::filesystem::remove(p);
}

TEST_CASE("synthetic datasets are deterministic and well formed") {
    for (SynthKind kind :
         {SynthKind::TwoClassDigits8x8, SynthKind::ShiftedBlobs, SynthKind::MaskShapes}) {
        const Dataset a = synth_dataset(kind, 20, 9);
        const Dataset b = synth_dataset(kind, 20, 9);
        REQUIRE(a.size() == 20);
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.images[i].data == b.images[i].data);
        for (const Tensor& img : a.images)
            for (double v : img.data) {
                CHECK(v >= 0.0);
                CHECK(v <= 1.0);
            }
    }
    const Dataset digits = synth_dataset(SynthKind::TwoClassDigits8x8, 50, 2);
    for (std::size_t l : digits.labels) CHECK(l <= 1);
    CHECK(digits.images.front().shape == Shape{8, 8});

    const Dataset masks = synth_dataset(SynthKind::MaskShapes, 10, 2);
    REQUIRE(masks.masks.size() == 10);
    for (const Tensor& m : masks.masks)
        for (double v : m.data) CHECK((v == 0.0 || v == 1.0));
}

TEST_CASE("shifted_blobs honors the domain offset") {
    const Dataset base = synth_dataset(SynthKind::ShiftedBlobs, 10, 3);
    SynthOptions opt;
    opt.domain_offset = 0.5;
    const Dataset shifted = synth_dataset(SynthKind::ShiftedBlobs, 10, 3, opt);
    for (std::size_t i = 0; i < base.size(); ++i)
        for (std::size_t j = 0; j < base.images[i].size(); ++j)
            CHECK(shifted.images[i].data[j] ==
                  doctest::Approx(base.images[i].data[j] + 0.5).epsilon(1e-12));
}

TEST_CASE("resample_image") {
    // identity at same size
    Tensor img({2, 2}, {0.1, 0.2, 0.3, 0.4});
    CHECK(resample_image(img, 2, 2).data == img.data);

    // constant image stays constant at any size
    Tensor flat({2, 2}, {0.7, 0.7, 0.7, 0.7});
    const Tensor up = resample_image(flat, 5, 3);
    for (double v : up.data) CHECK(v == doctest::Approx(0.7).epsilon(1e-12));

    // 1x2 ramp [0,1] to 1x3 -> [0, 0.5, 1]
    Tensor ramp({1, 2}, {0.0, 1.0});
    const Tensor three = resample_image(ramp, 1, 3);
    REQUIRE(three.size() == 3);
    CHECK(three.data[0] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(three.data[1] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(three.data[2] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("psnr") {
    Tensor a({2, 2}, {0.1, 0.2, 0.3, 0.4});
    CHECK(std::isinf(psnr(a, a)));
    CHECK(psnr_from_mse(0.01) == doctest::Approx(20.0).epsilon(1e-12));
    CHECK(psnr_from_mse(1.0) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("psnr strictly decreases with growing noise") {
    Rng rng(5);
    Tensor img({8, 8});
    for (auto& v : img.data) v = uniform(rng, 0.2, 0.8);
    double prev = std::numeric_limits<double>::infinity();
    for (double sigma : {0.01, 0.05, 0.2}) {
        Tensor noisy = img;
        Rng noise(7);
        for (auto& v : noisy.data) v += sigma * gauss(noise);
        const double p = psnr(img, noisy);
        CHECK(p < prev);
        prev = p;
    }
}

TEST_CASE("accuracy") {
    CHECK(accuracy({1, 0, 1, 1}, {1, 0, 0, 1}) == doctest::Approx(0.75));
    CHECK_THROWS(accuracy({}, {}));
    CHECK_THROWS(accuracy({1}, {1, 2}));
}

TEST_CASE("iou") {
    Tensor a({2, 3}, {1, 1, 0, 0, 0, 0});
    CHECK(iou(a, a) == 1.0);

    Tensor b({2, 3}, {0, 0, 1, 1, 0, 0});
    CHECK(iou(a, b) == 0.0);

    // 2 px overlap, 6 px union
    Tensor c({2, 4}, {1, 1, 1, 1, 0, 0, 0, 0});
    Tensor d({2, 4}, {0, 0, 1, 1, 1, 1, 0, 0});
    CHECK(iou(c, d) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

    CHECK(iou(c, d) == iou(d, c));

    Tensor empty({2, 2});
    CHECK(iou(empty, empty) == 1.0);

    // threshold at 0.5 applies before counting
    Tensor soft({1, 2}, {0.6, 0.4});
    Tensor hard({1, 2}, {1.0, 0.0});
    CHECK(iou(soft, hard) == 1.0);
}

TEST_CASE("batch_indices is deterministic, epoch-varying, and a permutation") {
    const auto a = batch_indices(10, 4, 1, 0);
    const auto b = batch_indices(10, 4, 1, 0);
    CHECK(a == b);
    const auto c = batch_indices(10, 4, 1, 1);
    CHECK(a != c);
    REQUIRE(a.size() == 3);
    CHECK(a[0].size() == 4);
    CHECK(a[2].size() == 2);
    std::vector<bool> seen(10, false);
    for (const auto& batch : a)
        for (std::size_t i : batch) {
            CHECK_FALSE(seen[i]);
            seen[i] = true;
        }
}

TEST_CASE("stack_batch layouts") {
    std::vector<Tensor> imgs{Tensor({2, 2}, {1, 2, 3, 4}), Tensor({2, 2}, {5, 6, 7, 8})};
    const Tensor flat = stack_batch(imgs, {1, 0});
    CHECK(flat.shape == Shape{2, 4});
    CHECK(flat.data == std::vector<double>{5, 6, 7, 8, 1, 2, 3, 4});
    const Tensor chw = stack_batch(imgs, {0}, false);
    CHECK(chw.shape == Shape{1, 1, 2, 2});
}
