#pragma once

namespace sadiv {

inline constexpr const char* kVersion = "0.1.0";
// Schema of the JSON reports and manifests emitted by the CLI.
inline constexpr int kManifestSchemaVersion = 1;

}  // namespace sadiv
