// Copyright 2026 The texdr Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "texdr/kernels.hpp"

namespace texdr::kernels::detail {

extern const KernelTable kScalarTable;

#if defined(TEXDR_HAVE_AVX2)
extern const KernelTable kAvx2Table;
#endif

}  // namespace texdr::kernels::detail
