// Copyright (C) 2026 The steerguard Authors
// SPDX-License-Identifier: Apache-2.0

#include "steerguard/bundle.hpp"

#include "steerguard/binary_io.hpp"
#include "steerguard/digest.hpp"
#include "steerguard/error.hpp"
#include "steerguard/mlp_io.hpp"

namespace steerguard {
namespace {

std::string floats_base64(const EmbeddingVector& v) {
    ByteWriter out;
    for (const float x : v.to_floats()) {
        out.f32(x);
    }
    return base64_encode(out.data());
}

EmbeddingVector floats_from_base64(const std::string& text, std::size_t dimension) {
    const auto bytes = base64_decode(text);
    if (bytes.size() != 4 * dimension) {
        throw Error(ErrorKind::kFormat, "centroid payload has the wrong length");
    }
    ByteReader in(bytes, "centroid");
    std::vector<double> values(dimension);
    for (auto& v : values) {
        v = in.f32();
    }
    return EmbeddingVector(std::move(values));
}

}  // namespace

std::string encode_bundle(ModelBundle& bundle) {
    if (bundle.identifier.layers().empty()) {
        throw Error(ErrorKind::kInvalidArgument, "bundle has no identifier");
    }
    if (bundle.identifier.input_dim() != bundle.steer.dimension()) {
        throw Error(ErrorKind::kDimensionMismatch, "identifier dimension " +
                                                       std::to_string(bundle.identifier.input_dim()) +
                                                       " does not match steer dimension " +
                                                       std::to_string(bundle.steer.dimension()));
    }
    bundle.policy.validate();
    const auto stmw = encode_mlp(bundle.identifier);
    const auto stsw = encode_steer(bundle.steer);
    bundle.identifier_sha256 = sha256_hex(stmw);
    bundle.steer_sha256 = sha256_hex(stsw);

    MlpSidecar mlp_meta;
    mlp_meta.seed = bundle.identifier_meta.value("seed", std::uint64_t{0});
    mlp_meta.train_config_hash = bundle.identifier_meta.value("train_config_hash", std::string());

    nlohmann::json centroids = nlohmann::json::object();
    for (std::size_t c = 0; c < bundle.centroids.names.size(); ++c) {
        if (bundle.centroids.centroids[c].dimension() != bundle.dimension()) {
            throw Error(ErrorKind::kDimensionMismatch, "concept centroid dimension does not match the bundle");
        }
        centroids[bundle.centroids.names[c]] = floats_base64(bundle.centroids.centroids[c]);
    }
    const nlohmann::json manifest = {
        {"version", bundle.version},
        {"dimension", bundle.dimension()},
        {"identifier", mlp_sidecar(bundle.identifier, mlp_meta, stmw)},
        {"steer", steer_sidecar(bundle.steer, bundle.policy.epsilon, stsw)},
        {"policy", bundle.policy.to_json()},
        {"blacklist", bundle.blacklist.concepts()},
        {"concept_centroids", centroids},
    };
    const auto manifest_text = manifest.dump();

    ByteWriter out;
    out.bytes(kBundleMagic);
    out.u32(static_cast<std::uint32_t>(manifest_text.size()));
    out.bytes(manifest_text);
    out.u64(stmw.size());
    out.bytes(stmw);
    out.u64(stsw.size());
    out.bytes(stsw);
    const auto digest = sha256(out.data());
    bundle.bundle_sha256 = to_hex(digest);
    out.bytes(std::string_view(reinterpret_cast<const char*>(digest.data()), digest.size()));
    return std::move(out).take();
}

ModelBundle decode_bundle(std::string_view bytes) {
    if (bytes.size() < kBundleMagic.size() + 32) {
        throw Error(ErrorKind::kTruncated, "bundle is too short");
    }
    ByteReader probe(bytes, "STBD1");
    probe.expect_magic(kBundleMagic);
    const auto body = bytes.substr(0, bytes.size() - 32);
    const auto stored = bytes.substr(bytes.size() - 32);
    const auto digest = sha256(body);
    if (stored != std::string_view(reinterpret_cast<const char*>(digest.data()), digest.size())) {
        throw Error(ErrorKind::kIntegrity, "bundle checksum mismatch");
    }

    ByteReader in(body, "STBD1");
    in.expect_magic(kBundleMagic);
    const auto manifest_len = in.u32();
    const auto manifest = nlohmann::json::parse(in.bytes(manifest_len), nullptr, false);
    if (manifest.is_discarded() || !manifest.is_object()) {
        throw Error(ErrorKind::kFormat, "bundle manifest is not a JSON object");
    }
    const auto stmw = in.bytes(in.u64());
    const auto stsw = in.bytes(in.u64());
    in.expect_end();

    ModelBundle bundle;
    try {
        const auto& identifier_meta = manifest.at("identifier");
        const auto& steer_meta = manifest.at("steer");
        if (identifier_meta.at("weights_sha256").get<std::string>() != sha256_hex(stmw)) {
            throw Error(ErrorKind::kIntegrity, "identifier weights do not match their manifest hash");
        }
        if (steer_meta.at("weights_sha256").get<std::string>() != sha256_hex(stsw)) {
            throw Error(ErrorKind::kIntegrity, "steer weights do not match their manifest hash");
        }
        bundle.identifier = decode_mlp(stmw, &identifier_meta);
        bundle.identifier_meta = identifier_meta;
        bundle.steer = decode_steer(stsw, &steer_meta);
        bundle.version = manifest.at("version").get<std::string>();
        bundle.policy.apply_json(manifest.at("policy"));
        bundle.blacklist = build_blacklist(manifest.at("blacklist").get<std::vector<std::string>>());
        for (const auto& [name, payload] : manifest.at("concept_centroids").items()) {
            bundle.centroids.names.push_back(name);
            bundle.centroids.centroids.push_back(
                floats_from_base64(payload.get<std::string>(), bundle.steer.dimension()));
        }
        if (manifest.at("dimension").get<std::size_t>() != bundle.steer.dimension() ||
            bundle.identifier.input_dim() != bundle.steer.dimension()) {
            throw Error(ErrorKind::kFormat, "bundle models disagree on the embedding dimension");
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::kFormat, std::string("bundle manifest: ") + e.what());
    }
    bundle.identifier_sha256 = sha256_hex(stmw);
    bundle.steer_sha256 = sha256_hex(stsw);
    bundle.bundle_sha256 = to_hex(digest);
    return bundle;
}

void save_bundle(ModelBundle& bundle, const std::filesystem::path& path) {
    write_file(path, encode_bundle(bundle));
}

ModelBundle load_bundle(const std::filesystem::path& path) {
    return decode_bundle(read_file(path));
}

}  // namespace steerguard
