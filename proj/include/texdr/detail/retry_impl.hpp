// Copyright 2026 The texdr Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <thread>

#include "texdr/error.hpp"

namespace texdr {

template <class Fn>
auto with_retry(const RetryPolicy& policy, Fn&& fn) -> decltype(fn()) {
    for (std::size_t attempt = 0;; ++attempt) {
        try {
            return fn();
        } catch (const Error& e) {
            const bool retriable = e.code() == ErrorCode::kProviderError || e.code() == ErrorCode::kServiceError;
            if (!retriable || attempt >= policy.backoff.size()) throw;
            if (policy.sleep) {
                policy.sleep(policy.backoff[attempt]);
            } else {
                std::this_thread::sleep_for(policy.backoff[attempt]);
            }
        }
    }
}

}  // namespace texdr
