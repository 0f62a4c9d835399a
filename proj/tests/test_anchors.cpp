#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "drmea/anchors.hpp"
#include "drmea/losses.hpp"
#include "drmea/rng.hpp"
#include "drmea/trainer.hpp"

using namespace drmea;

namespace {

std::vector<ActivationSpec> default_acts() {
    return {{Activation::kLeakyRelu, 0.2}, {Activation::kTanh, 0.0}};
}

Dataset tiny_source(Rng& rng, std::size_t d, std::size_t n, int c) {
    Dataset ds;
    ds.features = Matrix(d, n);
    for (double& v : ds.features.data()) v = rng.gaussian();
    std::vector<int> labels(n);
    for (std::size_t j = 0; j < n; ++j) labels[j] = static_cast<int>(j % static_cast<std::size_t>(c));
    ds.labels = std::move(labels);
    ds.class_count = c;
    ds.domain_tag = DomainTag::kSource;
    return ds;
}

}  // namespace

TEST_CASE("zero network maps every class mean to the constant activation") {
    ManifoldNetwork net = init_network({3, 4, 2, 2}, default_acts(), 1);
    for (Matrix* p : parameter_ptrs(net)) *p = Matrix(p->rows(), p->cols());
    Rng rng(2);
    Dataset source = tiny_source(rng, 3, 8, 2);
    AnchorStore store = compute_anchors(net, source, 4);
    // Zero weights and biases: activations are exactly zero everywhere.
    for (const LayerAnchors& layer : store.layers) {
        CHECK(max_abs(layer.class_means) == 0.0);
        CHECK(max_abs(layer.total_mean) == 0.0);
    }
    CHECK(store.epoch_tag == 0);
}

TEST_CASE("anchors match a hand computation on a 2-class set") {
    ManifoldNetwork net = init_network({2, 3, 2, 2}, default_acts(), 3);
    Dataset source;
    source.features = Matrix{{1.0, 2.0, -1.0, 0.0}, {0.5, -0.5, 1.0, 2.0}};
    source.labels = std::vector<int>{0, 0, 1, 1};
    source.class_count = 2;

    AnchorStore store = compute_anchors(net, source, 4);
    ForwardPass pass = forward(net, source.features);
    for (std::size_t l = 0; l < 2; ++l) {
        const Matrix& h = pass.h[l];
        for (std::size_t i = 0; i < h.rows(); ++i) {
            CHECK(store.layers[l].class_means(i, 0) ==
                  doctest::Approx(0.5 * (h(i, 0) + h(i, 1))).epsilon(1e-15));
            CHECK(store.layers[l].class_means(i, 1) ==
                  doctest::Approx(0.5 * (h(i, 2) + h(i, 3))).epsilon(1e-15));
            CHECK(store.layers[l].total_mean(i, 0) ==
                  doctest::Approx(0.25 * (h(i, 0) + h(i, 1) + h(i, 2) + h(i, 3))).epsilon(1e-15));
        }
    }
}

TEST_CASE("total mean is the sample-weighted mean of class means") {
    ManifoldNetwork net = init_network({2, 3, 2, 2}, default_acts(), 5);
    Dataset source;
    source.features = Matrix(2, 6);
    Rng rng(7);
    for (double& v : source.features.data()) v = rng.gaussian();
    source.labels = std::vector<int>{0, 0, 0, 0, 1, 1};  // unbalanced 4 vs 2
    source.class_count = 2;

    AnchorStore store = compute_anchors(net, source, 3);
    for (const LayerAnchors& layer : store.layers) {
        for (std::size_t i = 0; i < layer.total_mean.rows(); ++i) {
            const double weighted =
                (4.0 * layer.class_means(i, 0) + 2.0 * layer.class_means(i, 1)) / 6.0;
            CHECK(layer.total_mean(i, 0) == doctest::Approx(weighted).epsilon(1e-10));
        }
    }
}

TEST_CASE("anchor pass is invariant to the chunk size") {
    ManifoldNetwork net = init_network({3, 5, 4, 3}, default_acts(), 9);
    Rng rng(11);
    Dataset source = tiny_source(rng, 3, 10, 3);
    AnchorStore a = compute_anchors(net, source, 10);
    AnchorStore b = compute_anchors(net, source, 3);
    for (std::size_t l = 0; l < a.layers.size(); ++l) {
        CHECK(a.layers[l].class_means.data() == b.layers[l].class_means.data());
        CHECK(a.layers[l].total_mean.data() == b.layers[l].total_mean.data());
    }
}

TEST_CASE("refresh with an unchanged network reproduces identical anchors") {
    ManifoldNetwork net = init_network({3, 4, 3, 2}, default_acts(), 13);
    Rng rng(17);
    Dataset source = tiny_source(rng, 3, 8, 2);
    AnchorStore store = compute_anchors(net, source, 4);
    AnchorStore next = refresh(store, net, source, 4, 1);
    CHECK(next.epoch_tag == 1);
    for (std::size_t l = 0; l < store.layers.size(); ++l)
        CHECK(next.layers[l].class_means.data() == store.layers[l].class_means.data());
}

TEST_CASE("refresh after an optimizer step changes the anchors") {
    ManifoldNetwork net = init_network({3, 4, 3, 2}, default_acts(), 19);
    Rng rng(23);
    Dataset source = tiny_source(rng, 3, 8, 2);
    AnchorStore before = compute_anchors(net, source, 4);

    net.layers[0].weight(0, 0) += 0.25;  // any parameter change
    AnchorStore after = refresh(before, net, source, 4, 1);
    double diff = 0.0;
    for (std::size_t l = 0; l < before.layers.size(); ++l)
        diff += max_abs(after.layers[l].class_means - before.layers[l].class_means);
    CHECK(diff > 0.0);
}

TEST_CASE("epoch tags must strictly increase across refreshes") {
    ManifoldNetwork net = init_network({2, 3, 2}, {{Activation::kTanh, 0.0}}, 29);
    Rng rng(31);
    Dataset source = tiny_source(rng, 2, 6, 2);
    AnchorStore store = compute_anchors(net, source, 3);
    store = refresh(store, net, source, 3, 1);
    store = refresh(store, net, source, 3, 2);
    CHECK(store.epoch_tag == 2);
    CHECK_THROWS_AS(refresh(store, net, source, 3, 2), UsageError);
}

TEST_CASE("anchor computation rejects an empty class") {
    ManifoldNetwork net = init_network({2, 3, 2}, {{Activation::kTanh, 0.0}}, 37);
    Dataset source;
    source.features = Matrix(2, 4, 1.0);
    source.labels = std::vector<int>{0, 0, 0, 0};
    source.class_count = 2;
    CHECK_THROWS_AS(compute_anchors(net, source, 2), DataError);
}

TEST_CASE("anchor_max_samples caps the pass deterministically") {
    ManifoldNetwork net = init_network({2, 3, 2}, {{Activation::kTanh, 0.0}}, 41);
    Rng rng(43);
    Dataset source = tiny_source(rng, 2, 12, 2);
    AnchorStore capped = compute_anchors(net, source, 4, 6);

    Dataset prefix;
    prefix.features = Matrix(2, 6);
    for (std::size_t j = 0; j < 6; ++j)
        for (std::size_t i = 0; i < 2; ++i) prefix.features(i, j) = source.features(i, j);
    prefix.labels = std::vector<int>((*source.labels).begin(), (*source.labels).begin() + 6);
    prefix.class_count = 2;
    AnchorStore direct = compute_anchors(net, prefix, 4);
    CHECK(capped.layers[0].class_means.data() == direct.layers[0].class_means.data());
}

TEST_CASE("losses keep anchors off the tape") {
    ManifoldNetwork net = init_network({3, 4, 3, 3}, default_acts(), 47);
    Rng rng(53);
    Dataset source = tiny_source(rng, 3, 9, 3);
    AnchorStore store = compute_anchors(net, source, 9);

    Tape tape;
    NodeId x = tape.input(source.features.col_copy(0));
    ForwardNodes fwd = forward_nodes(tape, net, x);
    const std::size_t before = tape.size();
    // Anchor matrices are baked into op aux data, never pushed as nodes, so
    // the only new nodes are the loss expression itself.
    Matrix p = tape.value(fwd.probs);
    NodeId intra = intra_class_loss_node(tape, fwd.h[1], p, store.layers[1].class_means, 1, 1e-12);
    auto grads = tape.backward(intra);
    CHECK(tape.size() > before);
    for (const auto& [id, g] : grads) CHECK(id < static_cast<NodeId>(tape.size()));
    // Changing the anchors afterwards leaves tape values untouched.
    Matrix probe = tape.value(intra);
    store.layers[1].class_means(0, 0) += 100.0;
    CHECK(tape.value(intra).data() == probe.data());
}

TEST_CASE("anchors CSV lists every layer, class and dimension") {
    ManifoldNetwork net = init_network({2, 3, 2, 2}, default_acts(), 59);
    Rng rng(61);
    Dataset source = tiny_source(rng, 2, 6, 2);
    AnchorStore store = compute_anchors(net, source, 6);

    const std::string path = "anchors_test_tmp.csv";
    save_anchors_csv(store, path);
    std::ifstream in(path);
    REQUIRE(in.good());
    std::string header;
    std::getline(in, header);
    CHECK(header == "layer,class,dim,value");
    std::size_t rows = 0;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    // layer0: 3 dims x (2 classes + total) = 9; layer1: 2 x 3 = 6.
    CHECK(rows == 15);
    in.close();
    std::remove(path.c_str());
}
