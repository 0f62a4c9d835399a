#include "drmea/anchors.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

namespace drmea {

AnchorStore compute_anchors(const ManifoldNetwork& net, const Dataset& source,
                            std::size_t batch_size, std::size_t max_samples) {
    if (!source.labels) throw DataError("anchor computation needs labeled source data");
    if (batch_size < 1) throw ConfigError("anchor pass batch_size must be positive");
    const std::vector<int>& labels = *source.labels;
    const int c = source.class_count;
    std::size_t n = source.size();
    if (max_samples > 0 && max_samples < n) n = max_samples;

    const std::size_t n_layers = net.layers.size();
    AnchorStore store;
    store.epoch_tag = 0;

    std::vector<Matrix> class_sums;
    std::vector<Matrix> total_sums;
    for (std::size_t l = 0; l < n_layers; ++l) {
        const std::size_t d_l = static_cast<std::size_t>(net.dims[l + 1]);
        class_sums.emplace_back(d_l, static_cast<std::size_t>(c));
        total_sums.emplace_back(d_l, 1);
    }
    std::vector<std::size_t> class_counts(static_cast<std::size_t>(c), 0);

    for (std::size_t start = 0; start < n; start += batch_size) {
        const std::size_t stop = std::min(start + batch_size, n);
        Matrix chunk(source.dim(), stop - start);
        for (std::size_t j = start; j < stop; ++j)
            for (std::size_t i = 0; i < source.dim(); ++i) chunk(i, j - start) = source.features(i, j);
        ForwardPass pass = forward(net, chunk);
        for (std::size_t j = start; j < stop; ++j) {
            const int lab = labels[j];
            if (lab < 0 || lab >= c)
                throw DataError("anchor pass: label " + std::to_string(lab) + " out of range");
            ++class_counts[static_cast<std::size_t>(lab)];
            for (std::size_t l = 0; l < n_layers; ++l) {
                const Matrix& h = pass.h[l];
                for (std::size_t i = 0; i < h.rows(); ++i) {
                    class_sums[l](i, static_cast<std::size_t>(lab)) += h(i, j - start);
                    total_sums[l](i, 0) += h(i, j - start);
                }
            }
        }
    }

    for (int cls = 0; cls < c; ++cls) {
        if (class_counts[static_cast<std::size_t>(cls)] == 0)
            throw DataError("anchor pass: class " + std::to_string(cls) + " has no source samples");
    }

    for (std::size_t l = 0; l < n_layers; ++l) {
        LayerAnchors anchors;
        anchors.class_means = class_sums[l];
        for (int cls = 0; cls < c; ++cls) {
            const double inv = 1.0 / static_cast<double>(class_counts[static_cast<std::size_t>(cls)]);
            for (std::size_t i = 0; i < anchors.class_means.rows(); ++i)
                anchors.class_means(i, static_cast<std::size_t>(cls)) *= inv;
        }
        anchors.total_mean = total_sums[l] * (1.0 / static_cast<double>(n));
        store.layers.push_back(std::move(anchors));
    }
    return store;
}

AnchorStore refresh(const AnchorStore& store, const ManifoldNetwork& net, const Dataset& source,
                    std::size_t batch_size, int epoch, std::size_t max_samples) {
    if (epoch <= store.epoch_tag)
        throw UsageError("anchor refresh: epoch tag must increase (have " +
                         std::to_string(store.epoch_tag) + ", got " + std::to_string(epoch) + ")");
    AnchorStore next = compute_anchors(net, source, batch_size, max_samples);
    next.epoch_tag = epoch;
    return next;
}

void save_anchors_csv(const AnchorStore& store, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open anchors CSV for writing: " + path);
    out << "layer,class,dim,value\n";
    char buf[40];
    for (std::size_t l = 0; l < store.layers.size(); ++l) {
        const LayerAnchors& anchors = store.layers[l];
        for (std::size_t cls = 0; cls < anchors.class_means.cols(); ++cls)
            for (std::size_t i = 0; i < anchors.class_means.rows(); ++i) {
                std::snprintf(buf, sizeof(buf), "%.17g", anchors.class_means(i, cls));
                out << l << ',' << cls << ',' << i << ',' << buf << '\n';
            }
        for (std::size_t i = 0; i < anchors.total_mean.rows(); ++i) {
            std::snprintf(buf, sizeof(buf), "%.17g", anchors.total_mean(i, 0));
            out << l << ",-1," << i << ',' << buf << '\n';
        }
    }
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace drmea
