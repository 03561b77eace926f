#pragma once

#include <string>

#include "entsac/errors.hpp"

namespace entsac {

// The two soft Bellman backups under comparison: kCorrected carries the
// -alpha * H0 term inside the next-step expectation, kMissingTarget omits it.
enum class BackupVariant { kCorrected, kMissingTarget };

inline const char* to_string(BackupVariant v) {
    return v == BackupVariant::kCorrected ? "corrected" : "missing_target";
}

inline BackupVariant parse_backup_variant(const std::string& name) {
    if (name == "corrected") return BackupVariant::kCorrected;
    if (name == "missing_target") return BackupVariant::kMissingTarget;
    throw ConfigError("unknown backup variant '" + name +
                      "' (expected 'corrected' or 'missing_target')");
}

}  // namespace entsac
