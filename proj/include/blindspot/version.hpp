#pragma once

namespace blindspot {

inline constexpr const char* kLibraryVersion = "1.0.0";
inline constexpr int kReportSchemaVersion = 1;

}  // namespace blindspot
