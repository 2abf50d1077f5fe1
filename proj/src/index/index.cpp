// Copyright 2026 The texdr Authors
// SPDX-License-Identifier: Apache-2.0

#include "texdr/index_store.hpp"

#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <unordered_map>

#include <json.hpp>
#include <zlib.h>

#include "texdr/error.hpp"
#include "texdr/kernels.hpp"

namespace texdr {

using nlohmann::json;

Index::Index(RepresentationKind representation, ProviderDescriptor provider, IndexManifest manifest,
             std::vector<DocGroup> groups, std::vector<UnitEmbedding> entries)
    : representation_(representation),
      provider_(std::move(provider)),
      manifest_(std::move(manifest)),
      groups_(std::move(groups)),
      entries_(std::move(entries)) {
    norms_.reserve(entries_.size());
    const auto& k = kernels::active();
    for (const auto& e : entries_) {
        std::vector<double> n(e.vectors.rows);
        for (std::size_t r = 0; r < e.vectors.rows; ++r) {
            const float* row = e.vectors.row(r).data();
            n[r] = std::sqrt(k.dot(row, row, e.vectors.cols));
        }
        norms_.push_back(std::move(n));
    }
}

std::vector<std::string> Index::doc_ids() const {
    std::vector<std::string> out;
    out.reserve(groups_.size());
    for (const auto& g : groups_) out.push_back(g.doc_id);
    return out;
}

std::vector<std::string> Index::empty_docs() const {
    std::vector<std::string> out;
    for (const auto& g : groups_)
        if (g.empty()) out.push_back(g.doc_id);
    return out;
}

Index build_index(RepresentationKind representation, const ProviderDescriptor& provider,
                  const std::vector<std::string>& doc_ids, std::vector<UnitEmbedding> embeddings,
                  IndexManifest manifest) {
    if (manifest.precision != 4 && manifest.precision != 2)
        throw Error(ErrorCode::kInvalidArgument, "precision must be 4 or 2");
    std::unordered_map<std::string, std::size_t> slot;
    for (std::size_t i = 0; i < doc_ids.size(); ++i)
        if (!slot.emplace(doc_ids[i], i).second) throw Error(ErrorCode::kInvalidArgument, "duplicate doc_id " + doc_ids[i]);

    std::vector<std::vector<UnitEmbedding>> buckets(doc_ids.size());
    const auto& k = kernels::active();
    for (auto& e : embeddings) {
        auto it = slot.find(e.doc_id);
        if (it == slot.end()) throw Error(ErrorCode::kInvalidArgument, e.unit_id + " belongs to unknown doc " + e.doc_id);
        if (e.vectors.cols != provider.dimension)
            throw Error(ErrorCode::kDimensionMismatch, e.unit_id + " has dimension " + std::to_string(e.vectors.cols));
        e.precision = manifest.precision;
        if (manifest.precision == 2 && !e.vectors.data.empty()) {
            std::vector<std::uint16_t> half(e.vectors.data.size());
            k.f32_to_f16(e.vectors.data.data(), half.data(), half.size());
            k.f16_to_f32(half.data(), e.vectors.data.data(), half.size());
        }
        buckets[it->second].push_back(std::move(e));
    }

    std::vector<DocGroup> groups;
    std::vector<UnitEmbedding> entries;
    for (std::size_t i = 0; i < doc_ids.size(); ++i) {
        groups.push_back({doc_ids[i], entries.size(), buckets[i].size()});
        for (auto& e : buckets[i]) entries.push_back(std::move(e));
    }
    return Index(representation, provider, std::move(manifest), std::move(groups), std::move(entries));
}

std::uint64_t index_size_bytes(const Index& index) {
    std::uint64_t total = 0;
    for (const auto& e : index.entries())
        total += std::uint64_t{e.vectors.rows} * e.vectors.cols * static_cast<std::uint64_t>(e.precision);
    return total;
}

// ---------------------------------------------------------------------------
// serialization

namespace {

constexpr char kMagic[4] = {'T', 'X', 'R', 'I'};
constexpr std::uint32_t kFlagNormalized = 1;

class Writer {
public:
    template <class T>
    void put(T v) {
        for (std::size_t i = 0; i < sizeof(T); ++i) buf.push_back(static_cast<std::uint8_t>(std::uint64_t{v} >> (8 * i)));
    }
    void bytes(const void* p, std::size_t n) {
        auto* b = static_cast<const std::uint8_t*>(p);
        buf.insert(buf.end(), b, b + n);
    }
    std::vector<std::uint8_t> buf;
};

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> b) : b_(b) {}

    template <class T>
    T get() {
        need(sizeof(T));
        std::uint64_t v = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i) v |= std::uint64_t{b_[pos_ + i]} << (8 * i);
        pos_ += sizeof(T);
        return static_cast<T>(v);
    }
    std::span<const std::uint8_t> take(std::uint64_t n) {
        need(n);
        auto s = b_.subspan(pos_, n);
        pos_ += n;
        return s;
    }
    std::size_t pos() const { return pos_; }
    std::size_t remaining() const { return b_.size() - pos_; }

private:
    void need(std::uint64_t n) const {
        if (n > b_.size() - pos_) throw Error(ErrorCode::kChecksumMismatch, "index file truncated");
    }
    std::span<const std::uint8_t> b_;
    std::size_t pos_ = 0;
};

json descriptor_json(const ProviderDescriptor& d) {
    json j{{"name", d.name},
           {"modality", to_string(d.modality)},
           {"vector_mode", to_string(d.vector_mode)},
           {"dimension", d.dimension},
           {"normalizes", d.normalizes}};
    j["max_pixels"] = d.max_pixels ? json(*d.max_pixels) : json(nullptr);
    j["patch_size"] = d.patch_size ? json(*d.patch_size) : json(nullptr);
    return j;
}

ProviderDescriptor descriptor_from(const json& j) {
    ProviderDescriptor d;
    d.name = j.at("name").get<std::string>();
    auto m = parse_modality(j.at("modality").get<std::string>());
    auto v = parse_vector_mode(j.at("vector_mode").get<std::string>());
    if (!m || !v) throw Error(ErrorCode::kMalformedIndex, "bad provider descriptor");
    d.modality = *m;
    d.vector_mode = *v;
    d.dimension = j.at("dimension").get<std::size_t>();
    d.normalizes = j.at("normalizes").get<bool>();
    if (!j.at("max_pixels").is_null()) d.max_pixels = j["max_pixels"].get<std::uint64_t>();
    if (!j.at("patch_size").is_null()) d.patch_size = j["patch_size"].get<std::uint32_t>();
    return d;
}

std::uint32_t crc32_of(std::span<const std::uint8_t> data) {
    uLong crc = crc32(0L, Z_NULL, 0);
    // zlib takes uInt lengths; feed large payloads in pieces.
    for (std::size_t off = 0; off < data.size();) {
        const std::size_t n = std::min<std::size_t>(data.size() - off, 1u << 30);
        crc = crc32(crc, data.data() + off, static_cast<uInt>(n));
        off += n;
    }
    return static_cast<std::uint32_t>(crc);
}

}  // namespace

std::vector<std::uint8_t> serialize_index(const Index& index) {
    const auto& m = index.manifest();
    json manifest{{"representation", to_string(index.representation())},
                  {"provider", descriptor_json(index.provider())},
                  {"chunk_size", m.chunk_size},
                  {"overlap", m.overlap},
                  {"max_pixels", m.max_pixels ? json(*m.max_pixels) : json(nullptr)},
                  {"precision", m.precision},
                  {"corpus_fingerprint", m.corpus_fingerprint},
                  {"doc_ids", index.doc_ids()},
                  {"empty_docs", index.empty_docs()}};
    const std::string manifest_text = manifest.dump();

    std::string strings;
    Writer entries;
    Writer payload;
    const auto& k = kernels::active();
    for (const auto& e : index.entries()) {
        entries.put<std::uint32_t>(static_cast<std::uint32_t>(strings.size()));
        entries.put<std::uint32_t>(static_cast<std::uint32_t>(e.unit_id.size()));
        strings += e.unit_id;
        entries.put<std::uint32_t>(static_cast<std::uint32_t>(strings.size()));
        entries.put<std::uint32_t>(static_cast<std::uint32_t>(e.doc_id.size()));
        strings += e.doc_id;
        entries.put<std::uint32_t>(static_cast<std::uint32_t>(e.vectors.rows));
        entries.put<std::uint32_t>(e.normalized ? kFlagNormalized : 0u);
        entries.put<std::uint64_t>(payload.buf.size());
        if (m.precision == 2) {
            std::vector<std::uint16_t> half(e.vectors.data.size());
            if (!half.empty()) k.f32_to_f16(e.vectors.data.data(), half.data(), half.size());
            for (auto h : half) payload.put<std::uint16_t>(h);
        } else {
            for (float f : e.vectors.data) {
                std::uint32_t bits;
                std::memcpy(&bits, &f, 4);
                payload.put<std::uint32_t>(bits);
            }
        }
    }

    Writer out;
    out.bytes(kMagic, 4);
    out.put<std::uint16_t>(kIndexMajor);
    out.put<std::uint16_t>(kIndexMinor);
    out.put<std::uint32_t>(static_cast<std::uint32_t>(manifest_text.size()));
    out.bytes(manifest_text.data(), manifest_text.size());
    out.put<std::uint32_t>(static_cast<std::uint32_t>(strings.size()));
    out.bytes(strings.data(), strings.size());
    out.put<std::uint32_t>(static_cast<std::uint32_t>(index.entries().size()));
    out.bytes(entries.buf.data(), entries.buf.size());
    out.put<std::uint64_t>(payload.buf.size());
    out.bytes(payload.buf.data(), payload.buf.size());
    out.put<std::uint32_t>(crc32_of(payload.buf));
    return std::move(out.buf);
}

namespace {

struct Header {
    json manifest;
    std::span<const std::uint8_t> strings;
    std::vector<std::array<std::uint64_t, 7>> entries;
    std::uint64_t payload_offset = 0;
    std::span<const std::uint8_t> payload;
    std::uint32_t crc = 0;
};

Header read_header(std::span<const std::uint8_t> bytes) {
    Reader r(bytes);
    auto magic = r.take(4);
    if (std::memcmp(magic.data(), kMagic, 4) != 0) throw Error(ErrorCode::kMalformedIndex, "not a texdr index (bad magic)");
    const auto major = r.get<std::uint16_t>();
    const auto minor = r.get<std::uint16_t>();
    if (major != kIndexMajor)
        throw Error(ErrorCode::kFormatVersionMismatch, "index format " + std::to_string(major) + "." + std::to_string(minor) +
                                                           ", reader supports " + std::to_string(kIndexMajor) + ".x");
    Header h;
    auto manifest = r.take(r.get<std::uint32_t>());
    try {
        h.manifest = json::parse(manifest.begin(), manifest.end());
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::kMalformedIndex, std::string("manifest: ") + e.what());
    }
    h.strings = r.take(r.get<std::uint32_t>());
    const auto n = r.get<std::uint32_t>();
    h.entries.reserve(std::min<std::size_t>(n, r.remaining() / 32));
    for (std::uint32_t i = 0; i < n; ++i) {
        std::array<std::uint64_t, 7> e{};
        for (int f = 0; f < 6; ++f) e[f] = r.get<std::uint32_t>();
        e[6] = r.get<std::uint64_t>();
        h.entries.push_back(e);
    }
    const auto payload_len = r.get<std::uint64_t>();
    h.payload_offset = r.pos();
    h.payload = r.take(payload_len);
    h.crc = r.get<std::uint32_t>();
    if (r.remaining() != 0) throw Error(ErrorCode::kChecksumMismatch, "trailing bytes after checksum");
    return h;
}

}  // namespace

PayloadSection locate_payload(std::span<const std::uint8_t> bytes) {
    auto h = read_header(bytes);
    return {h.payload_offset, h.payload.size()};
}

Index deserialize_index(std::span<const std::uint8_t> bytes) {
    auto h = read_header(bytes);
    if (crc32_of(h.payload) != h.crc) throw Error(ErrorCode::kChecksumMismatch, "payload CRC32 mismatch");

    try {
        const auto& mj = h.manifest;
        auto rep = parse_representation(mj.at("representation").get<std::string>());
        if (!rep) throw Error(ErrorCode::kMalformedIndex, "unknown representation");
        ProviderDescriptor provider = descriptor_from(mj.at("provider"));
        IndexManifest manifest;
        manifest.chunk_size = mj.at("chunk_size").get<std::size_t>();
        manifest.overlap = mj.at("overlap").get<std::size_t>();
        if (!mj.at("max_pixels").is_null()) manifest.max_pixels = mj["max_pixels"].get<std::uint64_t>();
        manifest.precision = mj.at("precision").get<int>();
        manifest.corpus_fingerprint = mj.at("corpus_fingerprint").get<std::string>();
        if (manifest.precision != 2 && manifest.precision != 4) throw Error(ErrorCode::kMalformedIndex, "bad precision");
        auto doc_ids = mj.at("doc_ids").get<std::vector<std::string>>();

        auto str = [&](std::uint64_t off, std::uint64_t len) {
            if (off > h.strings.size() || len > h.strings.size() - off)
                throw Error(ErrorCode::kMalformedIndex, "string reference out of range");
            return std::string(reinterpret_cast<const char*>(h.strings.data()) + off, len);
        };
        const std::size_t dim = provider.dimension;
        const std::uint64_t width = dim * static_cast<std::uint64_t>(manifest.precision);
        const auto& k = kernels::active();
        std::vector<UnitEmbedding> entries;
        entries.reserve(h.entries.size());
        for (const auto& rec : h.entries) {
            UnitEmbedding e;
            e.unit_id = str(rec[0], rec[1]);
            e.doc_id = str(rec[2], rec[3]);
            e.normalized = (rec[5] & kFlagNormalized) != 0;
            e.precision = manifest.precision;
            const std::uint64_t rows = rec[4], off = rec[6];
            if (off > h.payload.size() || (width && rows > (h.payload.size() - off) / width))
                throw Error(ErrorCode::kMalformedIndex, e.unit_id + ": payload reference out of range");
            e.vectors = Matrix(rows, dim);
            const std::uint8_t* p = h.payload.data() + off;
            const std::size_t n = e.vectors.data.size();
            if (manifest.precision == 2) {
                std::vector<std::uint16_t> half(n);
                for (std::size_t i = 0; i < n; ++i) half[i] = static_cast<std::uint16_t>(p[2 * i] | (p[2 * i + 1] << 8));
                if (n) k.f16_to_f32(half.data(), e.vectors.data.data(), n);
            } else {
                for (std::size_t i = 0; i < n; ++i) {
                    std::uint32_t bits = std::uint32_t{p[4 * i]} | std::uint32_t{p[4 * i + 1]} << 8 |
                                         std::uint32_t{p[4 * i + 2]} << 16 | std::uint32_t{p[4 * i + 3]} << 24;
                    std::memcpy(&e.vectors.data[i], &bits, 4);
                }
            }
            entries.push_back(std::move(e));
        }

        std::vector<DocGroup> groups;
        std::size_t pos = 0;
        for (const auto& id : doc_ids) {
            DocGroup g{id, pos, 0};
            while (pos < entries.size() && entries[pos].doc_id == id) ++pos, ++g.count;
            groups.push_back(g);
        }
        if (pos != entries.size()) throw Error(ErrorCode::kMalformedIndex, "entries not grouped by manifest doc order");
        return Index(*rep, std::move(provider), std::move(manifest), std::move(groups), std::move(entries));
    } catch (const json::exception& e) {
        throw Error(ErrorCode::kMalformedIndex, std::string("manifest: ") + e.what());
    }
}

void save_index(const Index& index, const std::filesystem::path& path) {
    auto bytes = serialize_index(index);
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::kIo, "short write to " + path.string());
}

Index load_index(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), {});
    return deserialize_index(bytes);
}

}  // namespace texdr
