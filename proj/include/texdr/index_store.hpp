// Copyright 2026 The texdr Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "texdr/embedding.hpp"
#include "texdr/representations.hpp"

namespace texdr {

struct IndexManifest {
    std::size_t chunk_size = 0;
    std::size_t overlap = 0;
    std::optional<std::uint64_t> max_pixels;
    int precision = 4;
    std::string corpus_fingerprint;

    bool operator==(const IndexManifest&) const = default;
};

struct DocGroup {
    std::string doc_id;
    std::size_t first = 0;  // entry range [first, first + count)
    std::size_t count = 0;
    bool empty() const noexcept { return count == 0; }

    bool operator==(const DocGroup&) const = default;
};

/// Immutable after build. Entries are grouped contiguously by document in the
/// order documents were supplied.
class Index {
public:
    Index() = default;
    Index(RepresentationKind representation, ProviderDescriptor provider, IndexManifest manifest,
          std::vector<DocGroup> groups, std::vector<UnitEmbedding> entries);

    RepresentationKind representation() const noexcept { return representation_; }
    const ProviderDescriptor& provider() const noexcept { return provider_; }
    const IndexManifest& manifest() const noexcept { return manifest_; }
    const std::vector<DocGroup>& groups() const noexcept { return groups_; }
    const std::vector<UnitEmbedding>& entries() const noexcept { return entries_; }
    // L2 norm of each row of each entry, flattened in entry order.
    const std::vector<double>& row_norms(std::size_t entry) const { return norms_.at(entry); }

    std::vector<std::string> doc_ids() const;
    std::vector<std::string> empty_docs() const;

    bool operator==(const Index& o) const {
        return representation_ == o.representation_ && provider_ == o.provider_ && manifest_ == o.manifest_ &&
               groups_ == o.groups_ && entries_ == o.entries_;
    }

private:
    RepresentationKind representation_ = RepresentationKind::kTextOnly;
    ProviderDescriptor provider_;
    IndexManifest manifest_;
    std::vector<DocGroup> groups_;
    std::vector<UnitEmbedding> entries_;
    std::vector<std::vector<double>> norms_;
};

/// Groups embeddings under `doc_ids` (every id gets a group, possibly empty).
/// With precision 2 the vectors are rounded through f16 so that a saved and
/// reloaded index scores identically.
Index build_index(RepresentationKind representation, const ProviderDescriptor& provider,
                  const std::vector<std::string>& doc_ids, std::vector<UnitEmbedding> embeddings,
                  IndexManifest manifest);

/// Σ rows × dimension × precision over entries.
std::uint64_t index_size_bytes(const Index& index);

// Binary format:
//   "TXRI" u16 major u16 minor
//   u32 manifest_len, manifest JSON
//   u32 strings_len, string table
//   u32 entry_count, entries {u32 unit_off, u32 unit_len, u32 doc_off, u32 doc_len, u32 rows,
//                             u32 flags, u64 payload_off}
//   u64 payload_len, payload (f32 or f16, little-endian)
//   u32 CRC32(payload)
inline constexpr std::uint16_t kIndexMajor = 1;
inline constexpr std::uint16_t kIndexMinor = 0;

std::vector<std::uint8_t> serialize_index(const Index& index);
Index deserialize_index(std::span<const std::uint8_t> bytes);

void save_index(const Index& index, const std::filesystem::path& path);
Index load_index(const std::filesystem::path& path);

/// Offset and length of the vector payload inside a serialized index.
struct PayloadSection {
    std::uint64_t offset = 0;
    std::uint64_t length = 0;
};
PayloadSection locate_payload(std::span<const std::uint8_t> bytes);

}  // namespace texdr
