// Copyright 2026 The texdr Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace texdr {

// Non-fatal findings collected while processing one document or run.
struct Diagnostic {
    std::string kind;
    std::string message;

    bool operator==(const Diagnostic&) const = default;
};

class Diagnostics {
public:
    void add(std::string kind, std::string message) {
        ++tally_[kind];
        items_.push_back({std::move(kind), std::move(message)});
    }

    void merge(const Diagnostics& other) {
        for (const auto& d : other.items_) add(d.kind, d.message);
    }

    std::size_t count(const std::string& kind) const {
        auto it = tally_.find(kind);
        return it == tally_.end() ? 0 : it->second;
    }

    std::size_t size() const noexcept { return items_.size(); }
    bool empty() const noexcept { return items_.empty(); }
    const std::vector<Diagnostic>& items() const noexcept { return items_; }
    const std::map<std::string, std::size_t>& tally() const noexcept { return tally_; }

private:
    std::vector<Diagnostic> items_;
    std::map<std::string, std::size_t> tally_;
};

}  // namespace texdr
