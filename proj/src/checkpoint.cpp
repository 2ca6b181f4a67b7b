#include "hmog/checkpoint.hpp"

#include <map>
#include <sstream>
#include <stdexcept>

#include "hmog/io.hpp"

namespace hmog {

namespace {
constexpr const char* kMagic = "hmog-checkpoint 1";
}

std::string checkpoint_text(const std::vector<Parameter*>& params) {
    std::string out = std::string(kMagic) + '\n';
    for (const Parameter* p : params) {
        if (p->name.empty() || p->name.find_first_of(" \t\n") != std::string::npos) {
            throw std::invalid_argument("checkpoint: invalid parameter name '" + p->name + "'");
        }
        const Shape& s = p->value.shape();
        out += p->name + ' ' + std::to_string(s.size());
        for (std::size_t d : s) out += ' ' + std::to_string(d);
        for (double v : p->value.data()) out += ' ' + format_double(v);
        out += '\n';
    }
    return out;
}

void save_checkpoint(const std::filesystem::path& path, const std::vector<Parameter*>& params) {
    write_text_file(path, checkpoint_text(params));
}

void restore_checkpoint_text(const std::string& text, const std::vector<Parameter*>& params) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kMagic) throw std::runtime_error("checkpoint: bad header");
    std::map<std::string, Tensor> stored;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream fields(line);
        std::string name, tok;
        std::size_t rank = 0;
        if (!(fields >> name >> rank) || rank > 2) {
            throw std::runtime_error("checkpoint line " + std::to_string(lineno) + ": malformed entry");
        }
        Shape shape(rank);
        for (auto& d : shape)
            if (!(fields >> d)) throw std::runtime_error("checkpoint line " + std::to_string(lineno) + ": missing dims");
        std::vector<double> values;
        while (fields >> tok) values.push_back(parse_double(tok));
        if (values.size() != shape_size(shape)) {
            throw std::runtime_error("checkpoint line " + std::to_string(lineno) + ": expected " +
                                     std::to_string(shape_size(shape)) + " values for " + name);
        }
        if (!stored.emplace(name, Tensor(shape, std::move(values))).second) {
            throw std::runtime_error("checkpoint: duplicate entry " + name);
        }
    }
    for (Parameter* p : params) {
        auto it = stored.find(p->name);
        if (it == stored.end()) throw std::runtime_error("checkpoint: missing parameter " + p->name);
        if (it->second.shape() != p->value.shape()) {
            throw std::runtime_error("checkpoint: shape mismatch for " + p->name + ": " + shape_str(it->second.shape()) +
                                     " vs " + shape_str(p->value.shape()));
        }
    }
    if (stored.size() != params.size()) throw std::runtime_error("checkpoint: unexpected extra parameters");
    for (Parameter* p : params) p->value = stored.at(p->name);
}

void load_checkpoint(const std::filesystem::path& path, const std::vector<Parameter*>& params) {
    restore_checkpoint_text(read_text_file(path), params);
}

}  // namespace hmog
