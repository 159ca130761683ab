#include "drowsy/checkpoint.hpp"

#include <istream>
#include <ostream>
#include <sstream>

namespace drowsy {

namespace {

constexpr const char* kNetMagic = "drowsy-checkpoint v1";
constexpr const char* kForestMagic = "drowsy-forest v1";

void write_values(std::ostream& out, const std::vector<double>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) {
        out << format_double(values[i]);
        out << (((i + 1) % 16 == 0 || i + 1 == values.size()) ? '\n' : ' ');
    }
}

std::string next_line(std::istream& in, const char* what) {
    std::string line;
    require(bool(std::getline(in, line)), "checkpoint: unexpected end of file reading ", what);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
}

// Token-wise double reader; values may be wrapped at any column.
class ValueReader {
public:
    explicit ValueReader(std::istream& in) : in_(in) {}
    double next() {
        std::string tok;
        require(bool(in_ >> tok), "checkpoint: unexpected end of tensor values");
        double v = 0;
        require(parse_double(tok, v), "checkpoint: bad numeric token '", tok, "'");
        return v;
    }

private:
    std::istream& in_;
};

} // namespace

void save_network_checkpoint(std::ostream& out, const std::string& model_name, Network& net,
                             std::uint64_t seed, const ChannelNormalizer* normalizer,
                             const std::string& config_echo) {
    out << kNetMagic << '\n';
    out << "model " << model_name << '\n';
    out << "seed " << seed << '\n';
    out << "normalizer " << (normalizer ? 1 : 0) << '\n';
    if (normalizer) {
        for (std::size_t c = 0; c < kNumChannels; ++c)
            out << format_double(normalizer->mean[c]) << (c + 1 == kNumChannels ? '\n' : ' ');
        for (std::size_t c = 0; c < kNumChannels; ++c)
            out << format_double(normalizer->stddev[c]) << (c + 1 == kNumChannels ? '\n' : ' ');
    }
    out << "config " << config_echo << '\n';
    out << "layers " << net.layers.size() << '\n';
    for (const auto& layer : net.layers) {
        const LayerSpec spec = layer->spec();
        out << "layer " << spec.kind;
        for (const auto& [k, v] : spec.attrs) out << ' ' << k << '=' << format_double(v);
        out << '\n';
    }
    for (const auto& p : net.params()) {
        out << "tensor " << p.name << ' ' << p.value->ndim();
        for (auto d : p.value->shape) out << ' ' << d;
        out << '\n';
        write_values(out, p.value->data);
    }
    out << "end\n";
}

NetworkCheckpoint load_network_checkpoint(std::istream& in) {
    require(next_line(in, "magic") == kNetMagic, "checkpoint: bad magic line");

    NetworkCheckpoint ckpt;
    std::istringstream ls;

    auto expect_key = [&](const std::string& line, const char* key) {
        require(line.rfind(key, 0) == 0, "checkpoint: expected '", key, "' line, got '", line, "'");
        return line.substr(std::string(key).size() + 1);
    };

    ckpt.model = expect_key(next_line(in, "model"), "model");
    {
        long long s = 0;
        require(parse_long(expect_key(next_line(in, "seed"), "seed"), s), "checkpoint: bad seed");
        ckpt.seed = std::uint64_t(s);
    }
    {
        const std::string flag = expect_key(next_line(in, "normalizer"), "normalizer");
        if (flag == "1") {
            ChannelNormalizer n;
            std::istringstream means(next_line(in, "normalizer means"));
            std::istringstream stds(next_line(in, "normalizer stds"));
            std::string tok;
            for (std::size_t c = 0; c < kNumChannels; ++c) {
                require(bool(means >> tok) && parse_double(tok, n.mean[c]), "checkpoint: bad normalizer mean");
            }
            for (std::size_t c = 0; c < kNumChannels; ++c) {
                require(bool(stds >> tok) && parse_double(tok, n.stddev[c]), "checkpoint: bad normalizer std");
            }
            ckpt.normalizer = n;
        } else {
            require(flag == "0", "checkpoint: bad normalizer flag '", flag, "'");
        }
    }
    ckpt.config_echo = expect_key(next_line(in, "config"), "config");

    long long n_layers = 0;
    require(parse_long(expect_key(next_line(in, "layers"), "layers"), n_layers) && n_layers >= 0,
            "checkpoint: bad layer count");
    for (long long i = 0; i < n_layers; ++i) {
        std::istringstream lls(next_line(in, "layer"));
        std::string word, kind;
        require(bool(lls >> word) && word == "layer" && bool(lls >> kind),
                "checkpoint: malformed layer line");
        LayerSpec spec{kind, {}};
        while (lls >> word) {
            const auto eq = word.find('=');
            require(eq != std::string::npos, "checkpoint: malformed layer attribute '", word, "'");
            double v = 0;
            require(parse_double(word.substr(eq + 1), v), "checkpoint: bad layer attribute value");
            spec.attrs.emplace_back(word.substr(0, eq), v);
        }
        ckpt.net.layers.push_back(make_layer(spec));
    }

    auto params = ckpt.net.params();
    for (auto& p : params) {
        std::istringstream tls(next_line(in, "tensor header"));
        std::string word, name;
        long long ndim = 0;
        require(bool(tls >> word) && word == "tensor" && bool(tls >> name) && bool(tls >> ndim),
                "checkpoint: malformed tensor header");
        require(name == p.name, "checkpoint: tensor '", name, "' out of order, expected '", p.name, "'");
        std::vector<std::size_t> shape;
        for (long long d = 0; d < ndim; ++d) {
            long long dim = 0;
            require(bool(tls >> dim) && dim > 0, "checkpoint: bad tensor dimension");
            shape.push_back(std::size_t(dim));
        }
        require(shape == p.value->shape, "checkpoint: tensor '", name, "' shape mismatch");
        ValueReader reader(in);
        for (auto& v : p.value->data) v = reader.next();
        in >> std::ws;
    }
    require(next_line(in, "end") == "end", "checkpoint: missing end marker");
    return ckpt;
}

void save_forest_checkpoint(std::ostream& out, const RandomForest& forest,
                            const std::string& config_echo) {
    require(forest.fitted(), "save_forest_checkpoint: forest is not fitted");
    const auto& c = forest.config;
    out << kForestMagic << '\n';
    out << "config n_trees=" << c.n_trees << " max_depth=" << c.max_depth
        << " features_per_split=" << c.features_per_split
        << " min_samples_split=" << c.min_samples_split << " bootstrap=" << (c.bootstrap ? 1 : 0)
        << " seed=" << c.seed << '\n';
    out << "provenance " << config_echo << '\n';
    out << "trees " << forest.trees.size() << '\n';
    for (std::size_t t = 0; t < forest.trees.size(); ++t) {
        const auto& tree = forest.trees[t];
        out << "tree " << t << " nodes " << tree.nodes.size() << '\n';
        for (const auto& nd : tree.nodes) {
            if (nd.feature >= 0) {
                out << "split " << nd.feature << ' ' << format_double(nd.threshold) << ' '
                    << nd.left << ' ' << nd.right << ' ' << nd.n_samples << ' '
                    << format_double(nd.impurity_decrease) << '\n';
            } else {
                out << "leaf " << nd.n_samples << ' ' << nd.class_counts[0] << ' '
                    << nd.class_counts[1] << ' ' << nd.class_counts[2] << '\n';
            }
        }
    }
    out << "end\n";
}

ForestCheckpoint load_forest_checkpoint(std::istream& in) {
    require(next_line(in, "magic") == kForestMagic, "forest checkpoint: bad magic line");

    ForestCheckpoint ckpt;
    {
        std::istringstream ls(next_line(in, "config"));
        std::string word;
        require(bool(ls >> word) && word == "config", "forest checkpoint: missing config line");
        while (ls >> word) {
            const auto eq = word.find('=');
            require(eq != std::string::npos, "forest checkpoint: malformed config entry");
            const std::string key = word.substr(0, eq);
            long long v = 0;
            require(parse_long(word.substr(eq + 1), v), "forest checkpoint: bad config value");
            auto& c = ckpt.forest.config;
            if (key == "n_trees") c.n_trees = std::size_t(v);
            else if (key == "max_depth") c.max_depth = std::size_t(v);
            else if (key == "features_per_split") c.features_per_split = std::size_t(v);
            else if (key == "min_samples_split") c.min_samples_split = std::size_t(v);
            else if (key == "bootstrap") c.bootstrap = v != 0;
            else if (key == "seed") c.seed = std::uint64_t(v);
            else fail("forest checkpoint: unknown config key '", key, "'");
        }
    }
    {
        const std::string line = next_line(in, "provenance");
        require(line.rfind("provenance", 0) == 0, "forest checkpoint: missing provenance line");
        ckpt.config_echo = line.size() > 11 ? line.substr(11) : "";
    }
    long long n_trees = 0;
    {
        std::istringstream ls(next_line(in, "trees"));
        std::string word;
        require(bool(ls >> word) && word == "trees" && bool(ls >> n_trees) && n_trees >= 1,
                "forest checkpoint: bad tree count");
    }
    for (long long t = 0; t < n_trees; ++t) {
        std::istringstream hs(next_line(in, "tree header"));
        std::string word;
        long long index = 0, n_nodes = 0;
        require(bool(hs >> word) && word == "tree" && bool(hs >> index) && bool(hs >> word) &&
                    word == "nodes" && bool(hs >> n_nodes) && index == t && n_nodes >= 1,
                "forest checkpoint: malformed tree header");
        DecisionTree tree;
        for (long long i = 0; i < n_nodes; ++i) {
            std::istringstream ns(next_line(in, "node"));
            require(bool(ns >> word), "forest checkpoint: empty node line");
            TreeNode nd;
            if (word == "split") {
                std::string thresh, decrease;
                long long feature = 0, left = 0, right = 0, n_samples = 0;
                require(bool(ns >> feature >> thresh >> left >> right >> n_samples >> decrease),
                        "forest checkpoint: malformed split node");
                nd.feature = int(feature);
                require(parse_double(thresh, nd.threshold) &&
                            parse_double(decrease, nd.impurity_decrease),
                        "forest checkpoint: bad split numerics");
                nd.left = int(left);
                nd.right = int(right);
                nd.n_samples = std::size_t(n_samples);
            } else if (word == "leaf") {
                long long n_samples = 0, c0 = 0, c1 = 0, c2 = 0;
                require(bool(ns >> n_samples >> c0 >> c1 >> c2),
                        "forest checkpoint: malformed leaf node");
                nd.n_samples = std::size_t(n_samples);
                nd.class_counts = {std::size_t(c0), std::size_t(c1), std::size_t(c2)};
            } else {
                fail("forest checkpoint: unknown node kind '", word, "'");
            }
            tree.nodes.push_back(nd);
        }
        ckpt.forest.trees.push_back(std::move(tree));
    }
    require(next_line(in, "end") == "end", "forest checkpoint: missing end marker");
    return ckpt;
}

} // namespace drowsy
