#include "drmea/model.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "drmea/rng.hpp"

namespace drmea {

ActivationSpec parse_activation(const std::string& token) {
    if (token == "tanh") return {Activation::kTanh, 0.0};
    const std::string prefix = "leaky_relu:";
    if (token.rfind(prefix, 0) == 0) {
        ActivationSpec spec;
        spec.kind = Activation::kLeakyRelu;
        try {
            spec.alpha = std::stod(token.substr(prefix.size()));
        } catch (const std::exception&) {
            throw ConfigError("bad activation alpha in '" + token + "'");
        }
        return spec;
    }
    throw ConfigError("unknown activation '" + token + "' (expected leaky_relu:<alpha> or tanh)");
}

std::string format_activation(const ActivationSpec& spec) {
    if (spec.kind == Activation::kTanh) return "tanh";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "leaky_relu:%.17g", spec.alpha);
    return buf;
}

ManifoldNetwork init_network(const std::vector<int>& dims,
                             const std::vector<ActivationSpec>& activations,
                             std::uint64_t seed) {
    if (dims.size() < 2) throw ConfigError("network needs at least [d_in, c] dims");
    for (int d : dims)
        if (d <= 0) throw ConfigError("network dims must be positive");
    const std::size_t n_hidden = dims.size() - 2;
    if (activations.size() != n_hidden)
        throw ConfigError("need one activation per embedding layer (" + std::to_string(n_hidden) +
                          "), got " + std::to_string(activations.size()));

    Rng rng(seed);
    ManifoldNetwork net;
    net.dims = dims;
    for (std::size_t l = 0; l + 2 < dims.size(); ++l) {
        const int d_in = dims[l], d_out = dims[l + 1];
        EmbeddingLayer layer;
        layer.weight = Matrix(d_out, d_in);
        const double bound = std::sqrt(6.0 / static_cast<double>(d_in + d_out));
        for (double& v : layer.weight.data()) v = rng.uniform(-bound, bound);
        layer.bias = Matrix(d_out, 1);
        layer.activation = activations[l];
        net.layers.push_back(std::move(layer));
    }
    const int d_last = dims[dims.size() - 2], c = dims.back();
    net.classifier_weight = Matrix(c, d_last);
    const double bound = std::sqrt(6.0 / static_cast<double>(d_last + c));
    for (double& v : net.classifier_weight.data()) v = rng.uniform(-bound, bound);
    net.classifier_bias = Matrix(c, 1);
    return net;
}

NetworkNodes network_inputs(Tape& tape, const ManifoldNetwork& net) {
    NetworkNodes nodes;
    nodes.net = &net;
    for (const EmbeddingLayer& layer : net.layers) {
        nodes.params.push_back(tape.input(layer.weight));
        nodes.params.push_back(tape.input(layer.bias));
    }
    nodes.params.push_back(tape.input(net.classifier_weight));
    nodes.params.push_back(tape.input(net.classifier_bias));
    return nodes;
}

ForwardNodes forward_nodes(Tape& tape, const ManifoldNetwork& net, const NetworkNodes& params,
                           NodeId x) {
    if (params.net != &net)
        throw UsageError("forward_nodes: parameter nodes from a different network");
    if (tape.value(x).rows() != static_cast<std::size_t>(net.dims.front()))
        throw UsageError("forward_nodes: input rows " + std::to_string(tape.value(x).rows()) +
                         " do not match network d_in " + std::to_string(net.dims.front()));
    ForwardNodes out;
    NodeId cur = x;
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        NodeId pre = tape.add_bias(tape.matmul(params.params[2 * l], cur), params.params[2 * l + 1]);
        const ActivationSpec& act = net.layers[l].activation;
        cur = (act.kind == Activation::kTanh) ? tape.tanh_op(pre)
                                              : tape.leaky_relu(pre, act.alpha);
        out.h.push_back(cur);
    }
    const std::size_t base = 2 * net.layers.size();
    out.logits = tape.add_bias(tape.matmul(params.params[base], cur), params.params[base + 1]);
    out.probs = tape.softmax_columns(out.logits);
    return out;
}

ForwardNodes forward_nodes(Tape& tape, const ManifoldNetwork& net, NodeId x) {
    NetworkNodes params = network_inputs(tape, net);
    return forward_nodes(tape, net, params, x);
}

ForwardPass forward(const ManifoldNetwork& net, const Matrix& x) {
    Tape tape;
    ForwardNodes nodes = forward_nodes(tape, net, tape.input(x));
    ForwardPass pass;
    for (NodeId h : nodes.h) pass.h.push_back(tape.value(h));
    pass.logits = tape.value(nodes.logits);
    pass.probs = tape.value(nodes.probs);
    return pass;
}

std::vector<Matrix*> parameter_ptrs(ManifoldNetwork& net) {
    std::vector<Matrix*> ptrs;
    for (EmbeddingLayer& layer : net.layers) {
        ptrs.push_back(&layer.weight);
        ptrs.push_back(&layer.bias);
    }
    ptrs.push_back(&net.classifier_weight);
    ptrs.push_back(&net.classifier_bias);
    return ptrs;
}

std::vector<std::string> parameter_names(const ManifoldNetwork& net) {
    std::vector<std::string> names;
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        names.push_back("layer" + std::to_string(l) + ".weight");
        names.push_back("layer" + std::to_string(l) + ".bias");
    }
    names.push_back("classifier.weight");
    names.push_back("classifier.bias");
    return names;
}

namespace {

void write_tensor(std::ostream& out, const std::string& name, const Matrix& m) {
    out << name << ' ' << m.rows() << ' ' << m.cols();
    char buf[40];
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", m(i, j));
            out << ' ' << buf;
        }
    out << '\n';
}

Matrix read_tensor(std::istream& in, const std::string& expected_name, long line) {
    std::string line_text;
    if (!std::getline(in, line_text)) throw ParseError("model file truncated", line);
    std::istringstream ss(line_text);
    std::string name;
    std::size_t rows = 0, cols = 0;
    if (!(ss >> name >> rows >> cols)) throw ParseError("bad tensor header", line);
    if (name != expected_name)
        throw ParseError("expected tensor '" + expected_name + "', got '" + name + "'", line);
    if (rows == 0 || cols == 0) throw ParseError("empty tensor " + name, line);
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j)
            if (!(ss >> m(i, j))) throw ParseError("short tensor data for " + name, line);
    double extra;
    if (ss >> extra) throw ParseError("trailing data after tensor " + name, line);
    m.check_finite("model tensor");
    return m;
}

}  // namespace

void save_model(const ManifoldNetwork& net, std::ostream& out) {
    out << "DRMEA-MODEL v1\n";
    for (std::size_t i = 0; i < net.dims.size(); ++i) out << (i ? " " : "") << net.dims[i];
    out << '\n';
    for (std::size_t l = 0; l < net.layers.size(); ++l)
        out << (l ? " " : "") << format_activation(net.layers[l].activation);
    out << '\n';
    std::vector<std::string> names = parameter_names(net);
    std::vector<const Matrix*> tensors;
    for (const EmbeddingLayer& layer : net.layers) {
        tensors.push_back(&layer.weight);
        tensors.push_back(&layer.bias);
    }
    tensors.push_back(&net.classifier_weight);
    tensors.push_back(&net.classifier_bias);
    for (std::size_t i = 0; i < tensors.size(); ++i) write_tensor(out, names[i], *tensors[i]);
}

void save_model_file(const ManifoldNetwork& net, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open model file for writing: " + path);
    save_model(net, out);
    if (!out) throw IoError("write failed: " + path);
}

ManifoldNetwork load_model(std::istream& in) {
    std::string header;
    if (!std::getline(in, header) || header != "DRMEA-MODEL v1")
        throw ParseError("bad model header (expected 'DRMEA-MODEL v1')", 1);

    std::string dims_line;
    if (!std::getline(in, dims_line)) throw ParseError("missing dims line", 2);
    std::istringstream dims_ss(dims_line);
    std::vector<int> dims;
    int d;
    while (dims_ss >> d) dims.push_back(d);
    if (dims.size() < 2) throw ParseError("need at least two dims", 2);

    std::string act_line;
    if (!std::getline(in, act_line)) throw ParseError("missing activation line", 3);
    std::istringstream act_ss(act_line);
    std::vector<ActivationSpec> acts;
    std::string token;
    while (act_ss >> token) acts.push_back(parse_activation(token));

    ManifoldNetwork net = init_network(dims, acts, 0);
    std::vector<Matrix*> tensors = parameter_ptrs(net);
    std::vector<std::string> names = parameter_names(net);
    long line = 4;
    for (std::size_t i = 0; i < tensors.size(); ++i, ++line) {
        Matrix loaded = read_tensor(in, names[i], line);
        if (!loaded.same_shape(*tensors[i]))
            throw ParseError("tensor " + names[i] + " shape mismatch with dims", line);
        *tensors[i] = std::move(loaded);
    }
    return net;
}

ManifoldNetwork load_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open model file: " + path);
    return load_model(in);
}

}  // namespace drmea
