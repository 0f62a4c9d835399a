#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "drmea/data.hpp"

using namespace drmea;

namespace {

GeneratorParams base_params() {
    GeneratorParams p;
    p.classes = 3;
    p.dim = 6;
    p.n_per_class_source = 400;
    p.n_per_class_target = 400;
    p.rotation_degrees = 0.0;
    p.shift = {0.0};
    p.noise_sigma = 0.5;
    p.seed = 42;
    return p;
}

std::vector<double> class_mean(const Matrix& features, const std::vector<int>& labels, int cls) {
    std::vector<double> mean(features.rows(), 0.0);
    std::size_t count = 0;
    for (std::size_t j = 0; j < features.cols(); ++j) {
        if (labels[j] != cls) continue;
        ++count;
        for (std::size_t i = 0; i < features.rows(); ++i) mean[i] += features(i, j);
    }
    for (double& v : mean) v /= static_cast<double>(count);
    return mean;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("zero rotation and shift give matching per-class means") {
    GeneratedPair pair = gen_rotated_gaussians(base_params());
    const double tol = 4.0 * 0.5 / std::sqrt(400.0);
    for (int cls = 0; cls < 3; ++cls) {
        auto src = class_mean(pair.source.features, *pair.source.labels, cls);
        auto tgt = class_mean(pair.target.features, pair.target_labels, cls);
        for (std::size_t i = 0; i < src.size(); ++i)
            CHECK(std::fabs(src[i] - tgt[i]) <= 2.0 * tol);
    }
}

TEST_CASE("180-degree rotation swaps two antipodal class means") {
    GeneratorParams p = base_params();
    p.classes = 2;
    p.rotation_degrees = 180.0;
    GeneratedPair pair = gen_rotated_gaussians(p);
    const double tol = 4.0 * 0.5 / std::sqrt(400.0);
    auto src0 = class_mean(pair.source.features, *pair.source.labels, 0);
    auto tgt1 = class_mean(pair.target.features, pair.target_labels, 1);
    // Class 0 sits at angle 0, class 1 at angle pi; a half turn maps 0 onto 1.
    for (std::size_t i = 0; i < src0.size(); ++i)
        CHECK(std::fabs(src0[i] - tgt1[i]) <= 2.0 * tol);
}

TEST_CASE("45-degree rotation moves class means by the analytic rotation") {
    GeneratorParams p = base_params();
    p.rotation_degrees = 45.0;
    p.shift = {0.25, -0.5};
    GeneratedPair pair = gen_rotated_gaussians(p);
    const double tol = 4.0 * 0.5 / std::sqrt(400.0);
    const double c = std::cos(M_PI / 4.0), s = std::sin(M_PI / 4.0);
    for (int cls = 0; cls < 3; ++cls) {
        auto src = class_mean(pair.source.features, *pair.source.labels, cls);
        auto tgt = class_mean(pair.target.features, pair.target_labels, cls);
        const double angle = 2.0 * M_PI * cls / 3.0;
        const double mx = 3.0 * std::cos(angle), my = 3.0 * std::sin(angle);
        CHECK(std::fabs(tgt[0] - (c * mx - s * my + 0.25)) <= 2.0 * tol);
        CHECK(std::fabs(tgt[1] - (s * mx + c * my - 0.5)) <= 2.0 * tol);
        CHECK(std::fabs(src[0] - mx) <= 2.0 * tol);
    }
}

TEST_CASE("generated datasets are finite with exact label histograms") {
    GeneratorParams p = base_params();
    p.n_per_class_source = 57;
    p.n_per_class_target = 31;
    GeneratedPair pair = gen_rotated_gaussians(p);
    pair.source.features.check_finite("source");
    pair.target.features.check_finite("target");
    std::vector<int> hist_s(3, 0), hist_t(3, 0);
    for (int lab : *pair.source.labels) ++hist_s[static_cast<std::size_t>(lab)];
    for (int lab : pair.target_labels) ++hist_t[static_cast<std::size_t>(lab)];
    for (int cls = 0; cls < 3; ++cls) {
        CHECK(hist_s[static_cast<std::size_t>(cls)] == 57);
        CHECK(hist_t[static_cast<std::size_t>(cls)] == 31);
    }
}

TEST_CASE("generation is deterministic per seed") {
    GeneratedPair a = gen_rotated_gaussians(base_params());
    GeneratedPair b = gen_rotated_gaussians(base_params());
    CHECK(a.source.features.data() == b.source.features.data());
    CHECK(a.target.features.data() == b.target.features.data());
}

TEST_CASE("generator validates parameters") {
    GeneratorParams p = base_params();
    p.classes = 1;
    CHECK_THROWS_AS(gen_rotated_gaussians(p), ConfigError);
    p = base_params();
    p.dim = 1;
    CHECK_THROWS_AS(gen_rotated_gaussians(p), ConfigError);
    p = base_params();
    p.shift = std::vector<double>(10, 1.0);  // longer than dim 6
    CHECK_THROWS_AS(gen_rotated_gaussians(p), ConfigError);
}

TEST_CASE("csv round trip: labeled 3-line file") {
    Dataset ds;
    ds.features = Matrix{{1.5, -2.25, 0.0}, {1.0 / 3.0, 4.0, -5.5}};
    ds.labels = std::vector<int>{0, 1, 1};
    ds.class_count = 2;
    const std::string path = "data_test_tmp.csv";
    save_csv(ds, path, true);
    Dataset back = load_csv(path, true);
    CHECK(back.size() == 3);
    CHECK(back.dim() == 2);
    CHECK(back.features.data() == ds.features.data());
    CHECK(*back.labels == *ds.labels);
    std::remove(path.c_str());
}

TEST_CASE("csv files round-trip bit-exactly through save/load/save") {
    GeneratorParams p = base_params();
    p.n_per_class_source = 20;
    p.n_per_class_target = 10;
    GeneratedPair pair = gen_rotated_gaussians(p);
    const std::string path1 = "data_test_rt1.csv", path2 = "data_test_rt2.csv";
    save_csv(pair.source, path1, true);
    Dataset loaded = load_csv(path1, true);
    save_csv(loaded, path2, true);
    CHECK(read_file(path1) == read_file(path2));
    std::remove(path1.c_str());
    std::remove(path2.c_str());
}

TEST_CASE("a 10k-row unlabeled file loads with n = 10000") {
    const std::string path = "data_test_10k.csv";
    {
        std::ofstream out(path);
        for (int i = 0; i < 10000; ++i) out << i * 0.5 << "," << -i * 0.25 << "\n";
    }
    Dataset ds = load_csv(path, false);
    CHECK(ds.size() == 10000);
    CHECK(ds.dim() == 2);
    CHECK(!ds.labels.has_value());
    std::remove(path.c_str());
}

TEST_CASE("csv loader reports parse errors with line numbers") {
    const std::string path = "data_test_bad.csv";
    {
        std::ofstream out(path);
        out << "1.0,2.0,0\n1.0,oops,1\n";
    }
    try {
        load_csv(path, true);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line == 2);
    }
    {
        std::ofstream out(path);
        out << "1.0,2.0,0\n1.0,1\n";
    }
    CHECK_THROWS_AS(load_csv(path, true), ParseError);
    {
        std::ofstream out(path);
        out << "1.0,2.0,0.5\n";
    }
    CHECK_THROWS_AS(load_csv(path, true), ParseError);
    std::remove(path.c_str());
}

TEST_CASE("batch plan: c=3, b=6 balanced gives exactly 2 per class per batch") {
    GeneratorParams p = base_params();
    p.n_per_class_source = 12;
    p.n_per_class_target = 12;
    GeneratedPair pair = gen_rotated_gaussians(p);
    BatchPlan plan = make_batch_plan(pair.source, pair.target, 6, 2, 5);
    REQUIRE(plan.source_batches.size() == 2);
    for (const auto& epoch : plan.source_batches) {
        CHECK(epoch.size() == 6);  // 36 / 6
        for (const auto& batch : epoch) {
            REQUIRE(batch.size() == 6);
            std::vector<int> count(3, 0);
            for (int idx : batch) ++count[static_cast<std::size_t>((*pair.source.labels)[idx])];
            CHECK(count[0] == 2);
            CHECK(count[1] == 2);
            CHECK(count[2] == 2);
        }
    }
}

TEST_CASE("identical seeds give identical plans") {
    GeneratorParams p = base_params();
    p.n_per_class_source = 10;
    p.n_per_class_target = 8;
    GeneratedPair pair = gen_rotated_gaussians(p);
    BatchPlan a = make_batch_plan(pair.source, pair.target, 6, 3, 11);
    BatchPlan b = make_batch_plan(pair.source, pair.target, 6, 3, 11);
    CHECK(a.source_batches == b.source_batches);
    CHECK(a.target_batches == b.target_batches);
}

TEST_CASE("one epoch covers every source index exactly once in the balanced case") {
    GeneratorParams p = base_params();
    p.n_per_class_source = 8;
    p.n_per_class_target = 8;
    GeneratedPair pair = gen_rotated_gaussians(p);
    BatchPlan plan = make_batch_plan(pair.source, pair.target, 6, 3, 13);
    for (const auto& epoch : plan.source_batches) {
        std::set<int> seen;
        std::size_t total = 0;
        for (const auto& batch : epoch)
            for (int idx : batch) {
                seen.insert(idx);
                ++total;
            }
        CHECK(total == 24);
        CHECK(seen.size() == 24);  // no repeats within the epoch
    }
    // Same for target (equal sizes here).
    for (const auto& epoch : plan.target_batches) {
        std::set<int> seen;
        for (const auto& batch : epoch)
            for (int idx : batch) seen.insert(idx);
        CHECK(seen.size() == 24);
    }
}

TEST_CASE("batch plans never violate the every-class-present precondition") {
    GeneratorParams p = base_params();
    p.classes = 4;
    p.n_per_class_source = 9;  // deliberately not divisible by anything nice
    p.n_per_class_target = 5;
    p.seed = 3;
    GeneratedPair pair = gen_rotated_gaussians(p);
    BatchPlan plan = make_batch_plan(pair.source, pair.target, 7, 4, 17);
    for (const auto& epoch : plan.source_batches)
        for (const auto& batch : epoch) {
            std::set<int> classes;
            for (int idx : batch) classes.insert((*pair.source.labels)[idx]);
            CHECK(classes.size() == 4);
        }
}

TEST_CASE("batch plan validates batch size") {
    GeneratorParams p = base_params();
    GeneratedPair pair = gen_rotated_gaussians(p);
    CHECK_THROWS_AS(make_batch_plan(pair.source, pair.target, 2, 1, 0), ConfigError);
    GeneratorParams p5 = base_params();
    p5.classes = 5;
    GeneratedPair pair5 = gen_rotated_gaussians(p5);
    CHECK_THROWS_AS(make_batch_plan(pair5.source, pair5.target, 4, 1, 0), ConfigError);
}

TEST_CASE("labels csv round trip") {
    std::vector<int> labels{0, 2, 1, 1, 0, 2};
    const std::string path = "labels_test_tmp.csv";
    save_labels_csv(labels, path);
    CHECK(load_labels_csv(path) == labels);
    std::remove(path.c_str());
}
