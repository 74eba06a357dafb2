#pragma once

#include <Eigen/Dense>

#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace cappen {

using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

inline constexpr double PI = 3.14159265358979323846264338327950288;

// ----- error taxonomy -----
// Every throwing path uses one of these so callers (and the CLI exit-code
// mapping) can tell geometry defects from numerical failures apart.

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Mesh quality below the configured floor, or an unusable seed resolution.
struct DegeneracyError : Error { using Error::Error; };
// Orientation, boundary, or Euler-characteristic defect in a mesh.
struct TopologyError : Error { using Error::Error; };
// A closed-point query or projection left the surface's usable domain.
struct ProjectionError : Error { using Error::Error; };
// Surface meets the support tangentially where an angle is required.
struct TangencyError : Error { using Error::Error; };
// A lateral region whose loops are unusable (crossing, wrong nesting).
struct RegionError : Error { using Error::Error; };
// Input outside an operation's stated domain (bad t, bad radius, ...).
struct DomainError : Error { using Error::Error; };
// Eigenvalue iteration failed to lock onto a mode.
struct EigenSolveError : Error { using Error::Error; };
// Config file rejected (syntax, unknown key, failed validation).
struct ConfigError : Error { using Error::Error; };

// ----- printf-style string helper -----

inline std::string strf(const char* fmt, ...) {
  va_list ap;
  va_start(ap, fmt);
  char buf[1024];
  std::vsnprintf(buf, sizeof(buf), fmt, ap);
  va_end(ap);
  return std::string(buf);
}

// ----- logging -----
// CAPPEN_LOG selects verbosity: error < warn (default) < info < debug.

enum class LogLevel : int { Error = 0, Warn = 1, Info = 2, Debug = 3 };

inline LogLevel log_level() {
  static const LogLevel lvl = [] {
    const char* e = std::getenv("CAPPEN_LOG");
    if (!e) return LogLevel::Warn;
    std::string s(e);
    if (s == "error") return LogLevel::Error;
    if (s == "warn") return LogLevel::Warn;
    if (s == "info") return LogLevel::Info;
    if (s == "debug") return LogLevel::Debug;
    return LogLevel::Warn;
  }();
  return lvl;
}

inline void log_msg(LogLevel lvl, const std::string& msg) {
  if (static_cast<int>(lvl) > static_cast<int>(log_level())) return;
  static const char* names[] = {"error", "warn", "info", "debug"};
  std::fprintf(stderr, "[cappen:%s] %s\n", names[static_cast<int>(lvl)], msg.c_str());
}

inline void log_error(const std::string& m) { log_msg(LogLevel::Error, m); }
inline void log_warn(const std::string& m) { log_msg(LogLevel::Warn, m); }
inline void log_info(const std::string& m) { log_msg(LogLevel::Info, m); }
inline void log_debug(const std::string& m) { log_msg(LogLevel::Debug, m); }

// Fixed-format float print used by every serialized artifact, so repeated
// runs produce byte-identical files.
inline std::string fmt_g(double x, int prec = 17) {
  if (x == 0.0) x = 0.0;  // normalize -0
  return strf("%.*g", prec, x);
}

}  // namespace cappen
