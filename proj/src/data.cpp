#include "drmea/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "drmea/rng.hpp"

namespace drmea {

GeneratedPair gen_rotated_gaussians(const GeneratorParams& params) {
    if (params.classes < 2) throw ConfigError("gen: need at least 2 classes");
    if (params.dim < 2) throw ConfigError("gen: need dim >= 2");
    if (params.n_per_class_source < 1 || params.n_per_class_target < 1)
        throw ConfigError("gen: per-class sample counts must be positive");
    if (!(params.noise_sigma >= 0.0)) throw ConfigError("gen: noise sigma must be non-negative");
    if (params.shift.size() > static_cast<std::size_t>(params.dim))
        throw ConfigError("gen: shift vector longer than dim");

    const int c = params.classes;
    const std::size_t d = static_cast<std::size_t>(params.dim);
    const double theta = params.rotation_degrees * M_PI / 180.0;
    const double ct = std::cos(theta), st = std::sin(theta);
    constexpr double kRadius = 3.0;

    std::vector<double> shift(d, 0.0);
    for (std::size_t i = 0; i < params.shift.size(); ++i) shift[i] = params.shift[i];

    Rng rng(params.seed);

    auto class_mean = [c](int cls) {
        const double angle = 2.0 * M_PI * static_cast<double>(cls) / static_cast<double>(c);
        return std::pair<double, double>(kRadius * std::cos(angle), kRadius * std::sin(angle));
    };

    const std::size_t n_s = static_cast<std::size_t>(params.n_per_class_source) * c;
    const std::size_t n_t = static_cast<std::size_t>(params.n_per_class_target) * c;

    GeneratedPair out;
    out.source.features = Matrix(d, n_s);
    out.source.labels = std::vector<int>(n_s);
    out.source.class_count = c;
    out.source.domain_tag = DomainTag::kSource;

    std::size_t col = 0;
    for (int cls = 0; cls < c; ++cls) {
        auto [mx, my] = class_mean(cls);
        for (int s = 0; s < params.n_per_class_source; ++s, ++col) {
            out.source.features(0, col) = mx + params.noise_sigma * rng.gaussian();
            out.source.features(1, col) = my + params.noise_sigma * rng.gaussian();
            for (std::size_t i = 2; i < d; ++i)
                out.source.features(i, col) = params.noise_sigma * rng.gaussian();
            (*out.source.labels)[col] = cls;
        }
    }

    out.target.features = Matrix(d, n_t);
    out.target.class_count = c;
    out.target.domain_tag = DomainTag::kTarget;
    out.target_labels.resize(n_t);

    col = 0;
    for (int cls = 0; cls < c; ++cls) {
        auto [mx, my] = class_mean(cls);
        const double rx = ct * mx - st * my;
        const double ry = st * mx + ct * my;
        for (int s = 0; s < params.n_per_class_target; ++s, ++col) {
            out.target.features(0, col) = rx + shift[0] + params.noise_sigma * rng.gaussian();
            out.target.features(1, col) = ry + shift[1] + params.noise_sigma * rng.gaussian();
            for (std::size_t i = 2; i < d; ++i)
                out.target.features(i, col) = shift[i] + params.noise_sigma * rng.gaussian();
            out.target_labels[col] = cls;
        }
    }
    return out;
}

namespace {

double parse_number(const std::string& field, long line) {
    std::size_t consumed = 0;
    double v = 0.0;
    try {
        v = std::stod(field, &consumed);
    } catch (const std::exception&) {
        throw ParseError("non-numeric field '" + field + "'", line);
    }
    if (consumed != field.size()) throw ParseError("trailing junk in field '" + field + "'", line);
    return v;
}

int parse_label(const std::string& field, long line) {
    std::size_t consumed = 0;
    long v = 0;
    try {
        v = std::stol(field, &consumed);
    } catch (const std::exception&) {
        throw ParseError("bad label '" + field + "'", line);
    }
    if (consumed != field.size()) throw ParseError("bad label '" + field + "'", line);
    if (v < 0) throw ParseError("negative label '" + field + "'", line);
    return static_cast<int>(v);
}

std::vector<std::string> split_csv_line(const std::string& text) {
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : text) {
        if (ch == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    fields.push_back(cur);
    return fields;
}

}  // namespace

Dataset load_csv(const std::string& path, bool has_labels) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open CSV: " + path);

    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    std::string text;
    long line = 0;
    std::size_t width = 0;
    while (std::getline(in, text)) {
        ++line;
        if (text.empty()) continue;
        std::vector<std::string> fields = split_csv_line(text);
        if (has_labels && fields.size() < 2) throw ParseError("labeled row needs >= 2 fields", line);
        if (width == 0) width = fields.size();
        if (fields.size() != width) throw ParseError("ragged row", line);

        const std::size_t n_features = has_labels ? width - 1 : width;
        std::vector<double> row(n_features);
        for (std::size_t i = 0; i < n_features; ++i) row[i] = parse_number(fields[i], line);
        rows.push_back(std::move(row));
        if (has_labels) labels.push_back(parse_label(fields.back(), line));
    }
    if (rows.empty()) throw ParseError("empty CSV", std::max(line, 1L));

    Dataset out;
    out.features = Matrix(rows[0].size(), rows.size());
    for (std::size_t j = 0; j < rows.size(); ++j)
        for (std::size_t i = 0; i < rows[j].size(); ++i) out.features(i, j) = rows[j][i];
    if (has_labels) {
        int c = 0;
        for (int lab : labels) c = std::max(c, lab + 1);
        out.labels = std::move(labels);
        out.class_count = std::max(c, 2);
        out.domain_tag = DomainTag::kSource;
    } else {
        out.domain_tag = DomainTag::kTarget;
    }
    return out;
}

void save_csv(const Dataset& dataset, const std::string& path, bool with_labels) {
    if (with_labels && !dataset.labels) throw UsageError("save_csv: dataset has no labels");
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open CSV for writing: " + path);
    char buf[40];
    for (std::size_t j = 0; j < dataset.size(); ++j) {
        for (std::size_t i = 0; i < dataset.dim(); ++i) {
            std::snprintf(buf, sizeof(buf), "%.17g", dataset.features(i, j));
            out << (i ? "," : "") << buf;
        }
        if (with_labels) out << ',' << (*dataset.labels)[j];
        out << '\n';
    }
    if (!out) throw IoError("write failed: " + path);
}

void save_labels_csv(const std::vector<int>& labels, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open labels CSV for writing: " + path);
    for (int lab : labels) out << lab << '\n';
    if (!out) throw IoError("write failed: " + path);
}

std::vector<int> load_labels_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open labels CSV: " + path);
    std::vector<int> labels;
    std::string text;
    long line = 0;
    while (std::getline(in, text)) {
        ++line;
        if (text.empty()) continue;
        labels.push_back(parse_label(split_csv_line(text)[0], line));
    }
    if (labels.empty()) throw ParseError("empty labels CSV", 1);
    return labels;
}

BatchPlan make_batch_plan(const Dataset& source, const Dataset& target, std::size_t batch_size,
                          int epochs, std::uint64_t seed) {
    if (!source.labels) throw DataError("batch plan needs labeled source data");
    const int c = source.class_count;
    if (batch_size < static_cast<std::size_t>(c))
        throw ConfigError("batch_size " + std::to_string(batch_size) + " smaller than class count " +
                          std::to_string(c));
    if (batch_size < 3) throw ConfigError("batch_size must be at least 3");
    if (epochs < 1) throw ConfigError("epochs must be positive");
    if (source.size() < batch_size || target.size() < batch_size)
        throw DataError("domains must each hold at least one full batch");

    BatchPlan plan;
    plan.seed = seed;
    plan.batch_size = batch_size;
    Rng rng(seed);

    // Per-class index queues for the source.
    std::vector<std::vector<int>> class_pool(static_cast<std::size_t>(c));
    for (std::size_t j = 0; j < source.size(); ++j) {
        const int lab = (*source.labels)[j];
        if (lab < 0 || lab >= c) throw DataError("batch plan: label out of range");
        class_pool[static_cast<std::size_t>(lab)].push_back(static_cast<int>(j));
    }
    for (int cls = 0; cls < c; ++cls)
        if (class_pool[static_cast<std::size_t>(cls)].empty())
            throw DataError("batch plan: class " + std::to_string(cls) + " has no source samples");

    const std::size_t pass_size = std::min(source.size(), target.size());
    const std::size_t batches_per_epoch = (pass_size + batch_size - 1) / batch_size;

    std::vector<std::vector<int>> queues(static_cast<std::size_t>(c));
    std::vector<std::size_t> q_pos(static_cast<std::size_t>(c), 0);
    auto next_of_class = [&](int cls) {
        auto& q = queues[static_cast<std::size_t>(cls)];
        auto& pos = q_pos[static_cast<std::size_t>(cls)];
        if (pos >= q.size()) {
            q = class_pool[static_cast<std::size_t>(cls)];
            rng.shuffle(q);
            pos = 0;
        }
        return q[pos++];
    };

    std::vector<int> target_queue;
    std::size_t t_pos = 0;
    auto next_target = [&]() {
        if (t_pos >= target_queue.size()) {
            target_queue.resize(target.size());
            for (std::size_t j = 0; j < target.size(); ++j) target_queue[j] = static_cast<int>(j);
            rng.shuffle(target_queue);
            t_pos = 0;
        }
        return target_queue[t_pos++];
    };

    for (int e = 0; e < epochs; ++e) {
        std::vector<std::vector<int>> src_epoch, tgt_epoch;
        for (std::size_t b = 0; b < batches_per_epoch; ++b) {
            std::vector<int> src_batch(batch_size), tgt_batch(batch_size);
            // Round-robin over classes guarantees every class appears
            // (batch_size >= c), which the inter-class loss requires.
            for (std::size_t slot = 0; slot < batch_size; ++slot)
                src_batch[slot] = next_of_class(static_cast<int>(slot % static_cast<std::size_t>(c)));
            for (std::size_t slot = 0; slot < batch_size; ++slot) tgt_batch[slot] = next_target();
            src_epoch.push_back(std::move(src_batch));
            tgt_epoch.push_back(std::move(tgt_batch));
        }
        plan.source_batches.push_back(std::move(src_epoch));
        plan.target_batches.push_back(std::move(tgt_epoch));
    }
    return plan;
}

}  // namespace drmea
