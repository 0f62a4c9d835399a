#pragma once

#include <string>
#include <vector>

#include "drmea/data.hpp"
#include "drmea/matrix.hpp"
#include "drmea/model.hpp"

namespace drmea {

// Epoch-frozen source statistics per embedding layer. These enter batch
// losses as plain constants: nothing here ever lands on a tape.
struct LayerAnchors {
    Matrix class_means;  // d_l x c
    Matrix total_mean;   // d_l x 1, sample-weighted over all source samples
};

struct AnchorStore {
    std::vector<LayerAnchors> layers;
    int epoch_tag = 0;
};

// Full forward pass over the source set (chunked by batch_size, accumulated
// in dataset order), class-wise and total means per layer. max_samples = 0
// means the whole set.
AnchorStore compute_anchors(const ManifoldNetwork& net, const Dataset& source,
                            std::size_t batch_size, std::size_t max_samples = 0);

// New store recomputed from the current network, tagged with `epoch`.
AnchorStore refresh(const AnchorStore& store, const ManifoldNetwork& net, const Dataset& source,
                    std::size_t batch_size, int epoch, std::size_t max_samples = 0);

// CSV rows `layer,class,dim,value`; the total mean is written as class -1.
void save_anchors_csv(const AnchorStore& store, const std::string& path);

}  // namespace drmea
