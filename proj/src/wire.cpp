// Copyright (C) 2026 The steerguard Authors
// SPDX-License-Identifier: Apache-2.0

#include "steerguard/wire.hpp"

#include "steerguard/binary_io.hpp"
#include "steerguard/digest.hpp"
#include "steerguard/error.hpp"

namespace steerguard {

EmbeddingSequence sequence_from_json(const nlohmann::json& j, std::size_t expected_dimension) {
    if (!j.is_object()) {
        throw Error(ErrorKind::kInvalidArgument, "request body must be a JSON object");
    }
    std::size_t dimension = 0;
    std::vector<std::string> tokens;
    std::string payload;
    std::vector<bool> special;
    try {
        dimension = j.at("dimension").get<std::size_t>();
        tokens = j.at("tokens").get<std::vector<std::string>>();
        payload = base64_decode(j.at("embeddings").get<std::string>());
        if (j.contains("special_tokens")) {
            special.assign(tokens.size(), false);
            for (const auto& idx : j.at("special_tokens")) {
                const auto i = idx.get<std::size_t>();
                if (i >= tokens.size()) {
                    throw Error(ErrorKind::kInvalidArgument, "special token index " + std::to_string(i) +
                                                                 " is out of range");
                }
                special[i] = true;
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::kInvalidArgument, std::string("malformed sequence: ") + e.what());
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::kFormat) {
            throw Error(ErrorKind::kInvalidArgument, "embeddings: " + e.detail());
        }
        throw;
    }
    if (expected_dimension != 0 && dimension != expected_dimension) {
        throw Error(ErrorKind::kDimensionMismatch, "expected embedding dimension " +
                                                       std::to_string(expected_dimension) + ", got " +
                                                       std::to_string(dimension));
    }
    if (dimension == 0 || tokens.empty()) {
        throw Error(ErrorKind::kInvalidArgument, "sequence needs dimension >= 1 and at least one token");
    }
    if (payload.size() != tokens.size() * dimension * 4) {
        throw Error(ErrorKind::kDimensionMismatch, "embeddings hold " + std::to_string(payload.size()) +
                                                       " bytes; " + std::to_string(tokens.size()) + " tokens x " +
                                                       std::to_string(dimension) + " dims needs " +
                                                       std::to_string(tokens.size() * dimension * 4));
    }
    ByteReader in(payload, "embeddings");
    std::vector<EmbeddingVector> vectors;
    vectors.reserve(tokens.size());
    for (std::size_t t = 0; t < tokens.size(); ++t) {
        std::vector<double> values(dimension);
        for (auto& v : values) {
            v = in.f32();
        }
        vectors.emplace_back(std::move(values));
    }
    return EmbeddingSequence(std::move(tokens), std::move(vectors), std::move(special));
}

std::string encode_float32_base64(const EmbeddingSequence& seq) {
    ByteWriter out;
    for (const auto& v : seq.vectors()) {
        for (const float x : v.to_floats()) {
            out.f32(x);
        }
    }
    return base64_encode(out.data());
}

nlohmann::json sequence_to_json(const EmbeddingSequence& seq) {
    nlohmann::json special = nlohmann::json::array();
    for (std::size_t t = 0; t < seq.size(); ++t) {
        if (seq.is_special(t)) {
            special.push_back(t);
        }
    }
    return {
        {"dimension", seq.dimension()},
        {"tokens", seq.tokens()},
        {"embeddings", encode_float32_base64(seq)},
        {"special_tokens", special},
    };
}

}  // namespace steerguard
