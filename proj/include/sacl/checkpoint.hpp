#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "sacl/common.hpp"
#include "sacl/tensor.hpp"

// Checkpoint container: one JSON header line (name -> shape/dtype/offset
// plus named scalars), then raw float32 little-endian blobs in header
// order. Values are stored as f32 regardless of compute precision.

namespace sacl::checkpoint {

template <class T>
struct NamedTensorRef {
    std::string name;
    const Tensor<T>* tensor;
};

struct LoadedCheckpoint {
    std::map<std::string, double> scalars;
    std::map<std::string, std::vector<std::int64_t>> shapes;
    std::map<std::string, std::vector<float>> tensors;

    bool has(const std::string& name) const { return tensors.count(name) > 0; }

    template <class T>
    void fill(const std::string& name, Tensor<T>& dst) const {
        auto it = tensors.find(name);
        require(it != tensors.end(), "checkpoint: missing tensor '" + name + "'");
        const auto& shp = shapes.at(name);
        require(shp == dst.shape, "checkpoint: tensor '" + name + "' shape mismatch (file " +
                                      std::to_string(it->second.size()) + " values, model " +
                                      dst.shape_str() + ")");
        for (std::size_t i = 0; i < it->second.size(); ++i) dst.v[i] = static_cast<T>(it->second[i]);
    }
};

template <class T>
void save(const std::string& path, const std::vector<NamedTensorRef<T>>& tensors,
          const std::map<std::string, double>& scalars) {
    nlohmann::json header;
    header["format"] = "sacl.checkpoint.v1";
    header["scalars"] = scalars;
    nlohmann::json tmeta = nlohmann::json::object();
    std::int64_t offset = 0;
    for (const auto& nt : tensors) {
        nlohmann::json m;
        m["shape"] = nt.tensor->shape;
        m["dtype"] = "f32";
        m["offset"] = offset;
        tmeta[nt.name] = m;
        offset += nt.tensor->numel() * 4;
    }
    header["tensors"] = tmeta;

    std::ofstream out(path, std::ios::binary);
    require(out.good(), "checkpoint: cannot write " + path);
    out << header.dump() << "\n";
    for (const auto& nt : tensors) {
        std::vector<float> buf(static_cast<std::size_t>(nt.tensor->numel()));
        for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = static_cast<float>(nt.tensor->v[i]);
        out.write(reinterpret_cast<const char*>(buf.data()),
                  static_cast<std::streamsize>(buf.size() * sizeof(float)));
    }
    require(out.good(), "checkpoint: write failed for " + path);
}

inline LoadedCheckpoint load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    require(in.good(), "checkpoint: cannot open " + path);
    std::string header_line;
    std::getline(in, header_line);
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(header_line);
    } catch (const std::exception& e) {
        throw Error(std::string("checkpoint: bad header: ") + e.what());
    }
    require(header.value("format", "") == "sacl.checkpoint.v1", "checkpoint: unknown format");

    LoadedCheckpoint ck;
    for (auto& [k, v] : header.at("scalars").items()) ck.scalars[k] = v.get<double>();
    const std::streampos blob_start = in.tellg();
    for (auto& [name, meta] : header.at("tensors").items()) {
        const auto shape = meta.at("shape").get<std::vector<std::int64_t>>();
        require(meta.value("dtype", "") == "f32", "checkpoint: tensor '" + name + "' has unsupported dtype");
        std::int64_t n = 1;
        for (auto d : shape) n *= d;
        std::vector<float> buf(static_cast<std::size_t>(n));
        in.seekg(blob_start + static_cast<std::streamoff>(meta.at("offset").get<std::int64_t>()));
        in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(float)));
        require(in.good(), "checkpoint: short read on tensor '" + name + "'");
        ck.shapes[name] = shape;
        ck.tensors[name] = std::move(buf);
    }
    return ck;
}

} // namespace sacl::checkpoint
