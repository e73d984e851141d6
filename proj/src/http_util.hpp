// Copyright (C) 2026 The DICL Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

namespace dicl::detail {

/// "https://host:8443/v1/" -> {"https://host:8443", "/v1"}.
struct SplitUrl {
    std::string origin;
    std::string path_prefix;
};

inline SplitUrl split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    const auto host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
    const auto slash = url.find('/', host_start);
    SplitUrl out;
    if (slash == std::string::npos) {
        out.origin = url;
    } else {
        out.origin = url.substr(0, slash);
        out.path_prefix = url.substr(slash);
        while (!out.path_prefix.empty() && out.path_prefix.back() == '/') out.path_prefix.pop_back();
    }
    return out;
}

/// 408, 425, 429 and 5xx are worth retrying.
inline bool is_transient_status(int status) {
    return status == 408 || status == 425 || status == 429 || status >= 500;
}

}  // namespace dicl::detail
