#pragma once

#include <iosfwd>
#include <map>
#include <span>
#include <string>

#include "empath/nn.hpp"

namespace empath {

// Structured-text checkpoint: a "empath-ckpt v1" header, a model tag,
// key/value config lines, then one "tensor <name> <rows> <cols>" block per
// parameter with %.17g values (doubles round-trip exactly at 17 digits).
struct CheckpointHeader {
    std::string model;                         // "predictor" | "generator"
    std::map<std::string, std::string> fields;  // config key -> value

    long get_long(const std::string& key) const;
    double get_double(const std::string& key) const;
    std::string get(const std::string& key) const;
    bool has(const std::string& key) const { return fields.count(key) > 0; }
};

void write_checkpoint(std::ostream& out, const std::string& model_tag,
                      const std::map<std::string, std::string>& fields,
                      std::span<nn::Param* const> params);

// Reads the header and stops before the first tensor block.
CheckpointHeader read_checkpoint_header(std::istream& in, const std::string& origin);
// Peeks only the header of a checkpoint file (for model-tag dispatch).
CheckpointHeader read_checkpoint_header_file(const std::string& path);

// Fills every param (matched by name, dims verified); throws on missing,
// duplicate or unknown tensors.
void read_checkpoint_tensors(std::istream& in, const std::string& origin,
                             std::span<nn::Param* const> params);

}  // namespace empath
