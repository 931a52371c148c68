#include "empath/checkpoint.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "empath/error.hpp"
#include "empath/labels.hpp"

namespace empath {

long CheckpointHeader::get_long(const std::string& key) const {
    return std::stol(get(key));
}

double CheckpointHeader::get_double(const std::string& key) const {
    return std::stod(get(key));
}

std::string CheckpointHeader::get(const std::string& key) const {
    auto it = fields.find(key);
    if (it == fields.end()) throw InputError("checkpoint: missing config key '" + key + "'");
    return it->second;
}

void write_checkpoint(std::ostream& out, const std::string& model_tag,
                      const std::map<std::string, std::string>& fields,
                      std::span<nn::Param* const> params) {
    out << "empath-ckpt v1\n";
    out << "model " << model_tag << "\n";
    for (const auto& [k, v] : fields) out << "config " << k << " " << v << "\n";
    char buf[40];
    for (const nn::Param* p : params) {
        out << "tensor " << p->name << " " << p->w.rows() << " " << p->w.cols() << "\n";
        for (Eigen::Index i = 0; i < p->w.rows(); ++i) {
            for (Eigen::Index j = 0; j < p->w.cols(); ++j) {
                std::snprintf(buf, sizeof(buf), "%.17g", p->w(i, j));
                if (j) out << ' ';
                out << buf;
            }
            out << "\n";
        }
    }
    out << "end\n";
}

CheckpointHeader read_checkpoint_header(std::istream& in, const std::string& origin) {
    std::string line;
    if (!std::getline(in, line) || line != "empath-ckpt v1")
        throw InputError(origin + ": not a checkpoint file (bad header)");
    CheckpointHeader header;
    while (in.peek() != EOF) {
        const auto pos = in.tellg();
        if (!std::getline(in, line)) break;
        std::istringstream ss(line);
        std::string tag;
        ss >> tag;
        if (tag == "model") {
            ss >> header.model;
        } else if (tag == "config") {
            std::string key, value;
            ss >> key;
            std::getline(ss, value);
            header.fields[key] = trim(value);
        } else {
            in.seekg(pos);
            break;
        }
    }
    if (header.model.empty()) throw InputError(origin + ": checkpoint has no model tag");
    return header;
}

CheckpointHeader read_checkpoint_header_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open checkpoint file: " + path);
    return read_checkpoint_header(in, path);
}

void read_checkpoint_tensors(std::istream& in, const std::string& origin,
                             std::span<nn::Param* const> params) {
    std::map<std::string, nn::Param*> by_name;
    for (nn::Param* p : params) by_name[p->name] = p;
    std::set<std::string> filled;

    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        if (line == "end") break;
        std::istringstream ss(line);
        std::string tag, name;
        Eigen::Index rows = 0, cols = 0;
        ss >> tag >> name >> rows >> cols;
        if (tag != "tensor" || name.empty())
            throw InputError(origin + ": expected tensor block, got '" + line + "'");
        auto it = by_name.find(name);
        if (it == by_name.end()) throw InputError(origin + ": unknown tensor '" + name + "'");
        if (!filled.insert(name).second)
            throw InputError(origin + ": duplicate tensor '" + name + "'");
        nn::Param& p = *it->second;
        if (p.w.rows() != rows || p.w.cols() != cols)
            throw InputError(origin + ": tensor '" + name + "' has shape " +
                             std::to_string(rows) + "x" + std::to_string(cols) + ", expected " +
                             std::to_string(p.w.rows()) + "x" + std::to_string(p.w.cols()));
        for (Eigen::Index i = 0; i < rows; ++i) {
            if (!std::getline(in, line))
                throw InputError(origin + ": truncated tensor '" + name + "'");
            std::istringstream row(line);
            for (Eigen::Index j = 0; j < cols; ++j) {
                if (!(row >> p.w(i, j)))
                    throw InputError(origin + ": bad value in tensor '" + name + "' row " +
                                     std::to_string(i));
            }
        }
    }
    if (filled.size() != by_name.size()) {
        for (const auto& [name, p] : by_name)
            if (!filled.count(name)) throw InputError(origin + ": missing tensor '" + name + "'");
    }
}

}  // namespace empath
