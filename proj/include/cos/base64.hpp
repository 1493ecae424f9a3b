// Copyright 2026 The CoS Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>

namespace chainshot {

std::string base64_encode(std::string_view bytes);
std::string base64_decode(std::string_view text); // throws ParseError on bad input

} // namespace chainshot
