#pragma once

#include <optional>
#include <string>
#include <vector>

#include "drmea/matrix.hpp"

namespace drmea {

enum class DomainTag { kSource, kTarget };

struct Dataset {
    Matrix features;                          // d x n, column = sample
    std::optional<std::vector<int>> labels;   // absent for the target domain in training
    int class_count = 0;
    DomainTag domain_tag = DomainTag::kSource;

    std::size_t dim() const { return features.rows(); }
    std::size_t size() const { return features.cols(); }
};

struct GeneratorParams {
    int classes = 3;
    int dim = 16;
    int n_per_class_source = 200;
    int n_per_class_target = 200;
    double rotation_degrees = 45.0;
    std::vector<double> shift = {0.0};  // padded with zeros to dim
    double noise_sigma = 1.0;
    std::uint64_t seed = 0;
};

struct GeneratedPair {
    Dataset source;
    Dataset target;                  // labels stripped
    std::vector<int> target_labels;  // held out for evaluation only
};

// Source class means equally spaced on a radius-3 circle in the first two
// coordinates; target is the source distribution rotated by rotation_degrees
// in that plane, then translated by shift. Deterministic per seed.
GeneratedPair gen_rotated_gaussians(const GeneratorParams& params);

// One sample per row, comma-separated decimal text, optional trailing integer
// label column, no header.
Dataset load_csv(const std::string& path, bool has_labels);
void save_csv(const Dataset& dataset, const std::string& path, bool with_labels);
void save_labels_csv(const std::vector<int>& labels, const std::string& path);
std::vector<int> load_labels_csv(const std::string& path);

// Deterministic epoch schedule. Source batches are class-balanced (per-class
// queues, round-robin fill); an epoch covers a full shuffled pass of the
// smaller domain while the larger one cycles with reshuffles.
struct BatchPlan {
    std::uint64_t seed = 0;
    std::size_t batch_size = 0;
    // [epoch][batch] -> column indices into the respective dataset.
    std::vector<std::vector<std::vector<int>>> source_batches;
    std::vector<std::vector<std::vector<int>>> target_batches;
};

BatchPlan make_batch_plan(const Dataset& source, const Dataset& target, std::size_t batch_size,
                          int epochs, std::uint64_t seed);

}  // namespace drmea
