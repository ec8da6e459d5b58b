// Copyright (C) 2026 The steerguard Authors
// SPDX-License-Identifier: Apache-2.0

#include "steerguard/mlp_io.hpp"

#include <cmath>

#include "steerguard/binary_io.hpp"
#include "steerguard/digest.hpp"
#include "steerguard/error.hpp"

namespace steerguard {

std::string encode_mlp(const MlpParams& params) {
    ByteWriter out;
    out.bytes(kMlpMagic);
    out.u32(static_cast<std::uint32_t>(params.layers().size()));
    for (const auto& layer : params.layers()) {
        out.u32(static_cast<std::uint32_t>(layer.out));
        out.u32(static_cast<std::uint32_t>(layer.in));
        for (const auto w : layer.weights) {
            out.f32(static_cast<float>(w));
        }
        for (const auto b : layer.bias) {
            out.f32(static_cast<float>(b));
        }
    }
    return std::move(out).take();
}

MlpParams decode_mlp(std::string_view bytes, const nlohmann::json* sidecar) {
    ByteReader in(bytes, "STMW1");
    in.expect_magic(kMlpMagic);
    const auto n_layers = in.u32();
    if (n_layers == 0) {
        throw Error(ErrorKind::kFormat, "STMW1: zero layers");
    }
    const nlohmann::json* layer_meta = nullptr;
    if (sidecar) {
        layer_meta = &sidecar->at("layers");
        if (!layer_meta->is_array() || layer_meta->size() != n_layers) {
            throw Error(ErrorKind::kFormat, "STMW1 sidecar layer list does not match the weights file");
        }
    }
    std::vector<DenseLayer> layers;
    for (std::uint32_t l = 0; l < n_layers; ++l) {
        DenseLayer layer;
        layer.out = in.u32();
        layer.in = in.u32();
        if (layer.out == 0 || layer.in == 0) {
            throw Error(ErrorKind::kFormat, "STMW1: layer " + std::to_string(l) + " has a zero dimension");
        }
        const auto count = static_cast<std::size_t>(layer.out) * layer.in;
        if (count > in.remaining() / 4) {
            throw Error(ErrorKind::kTruncated, "STMW1: layer " + std::to_string(l) + " weights exceed the file");
        }
        layer.weights.resize(count);
        for (auto& w : layer.weights) {
            w = in.f32();
        }
        layer.bias.resize(layer.out);
        for (auto& b : layer.bias) {
            b = in.f32();
        }
        if (layer_meta) {
            const auto& meta = (*layer_meta)[l];
            if (meta.at("in").get<std::size_t>() != layer.in || meta.at("out").get<std::size_t>() != layer.out) {
                throw Error(ErrorKind::kFormat, "STMW1 sidecar shape mismatch at layer " + std::to_string(l));
            }
            layer.activation = parse_activation(meta.at("activation").get<std::string>());
        } else {
            layer.activation = l + 1 == n_layers ? Activation::kIdentity : Activation::kRelu;
        }
        layers.push_back(std::move(layer));
    }
    in.expect_end();
    try {
        return MlpParams(std::move(layers));
    } catch (const Error& e) {
        throw Error(ErrorKind::kFormat, "STMW1: " + e.detail());
    }
}

nlohmann::json mlp_sidecar(const MlpParams& params, const MlpSidecar& meta, std::string_view encoded) {
    nlohmann::json layers = nlohmann::json::array();
    for (const auto& layer : params.layers()) {
        layers.push_back({{"in", layer.in}, {"out", layer.out}, {"activation", to_string(layer.activation)}});
    }
    return {
        {"format", "STMW1"},
        {"input_dim", params.input_dim()},
        {"layers", layers},
        {"output", "logistic"},
        {"seed", meta.seed},
        {"train_config_hash", meta.train_config_hash},
        {"weights_sha256", sha256_hex(encoded)},
    };
}

void save_mlp(const MlpParams& params, const MlpSidecar& meta, const std::filesystem::path& path) {
    const auto encoded = encode_mlp(params);
    write_file(path, encoded);
    auto sidecar_path = path;
    sidecar_path += ".json";
    write_file(sidecar_path, mlp_sidecar(params, meta, encoded).dump(2) + "\n");
}

MlpParams load_mlp(const std::filesystem::path& path, nlohmann::json* sidecar_out) {
    const auto bytes = read_file(path);
    auto sidecar_path = path;
    sidecar_path += ".json";
    if (!std::filesystem::exists(sidecar_path)) {
        return decode_mlp(bytes);
    }
    const auto sidecar = nlohmann::json::parse(read_file(sidecar_path), nullptr, false);
    if (sidecar.is_discarded()) {
        throw Error(ErrorKind::kFormat, sidecar_path.string() + " is not valid JSON");
    }
    if (sidecar.value("weights_sha256", std::string()) != sha256_hex(bytes)) {
        throw Error(ErrorKind::kIntegrity, path.string() + " does not match the hash in its sidecar");
    }
    if (sidecar_out) {
        *sidecar_out = sidecar;
    }
    try {
        return decode_mlp(bytes, &sidecar);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::kFormat, sidecar_path.string() + ": " + e.what());
    }
}

}  // namespace steerguard
