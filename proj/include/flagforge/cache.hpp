#pragma once

#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>

namespace flagforge {

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(std::string_view data, std::uint64_t h = 0xcbf29ce484222325ull) {
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) out[i] = digits[v & 15];
  return out;
}

/// Content-addressed text blobs on disk. The file name is the hash of the key; the key is
/// stored on the first line and checked on read, so a hash collision reads as a miss.
class DiskCache {
 public:
  static DiskCache& instance() {
    static DiskCache cache;
    return cache;
  }

  void set_enabled(bool on) { enabled_ = on; }
  bool enabled() const { return enabled_; }

  std::filesystem::path directory() const {
    if (const char* env = std::getenv("FLAGFORGE_CACHE_DIR"); env && *env) return env;
    if (const char* home = std::getenv("HOME"); home && *home)
      return std::filesystem::path(home) / ".cache" / "flagforge";
    return std::filesystem::temp_directory_path() / "flagforge-cache";
  }

  std::optional<std::string> get(std::string_view key) const {
    if (!enabled_) return std::nullopt;
    std::ifstream in(path_for(key));
    if (!in) return std::nullopt;
    std::string stored;
    if (!std::getline(in, stored) || stored != key) return std::nullopt;
    std::ostringstream body;
    body << in.rdbuf();
    return body.str();
  }

  // Failures to write are ignored: the cache is an accelerator only.
  void put(std::string_view key, std::string_view value) const {
    if (!enabled_) return;
    std::error_code ec;
    std::filesystem::create_directories(directory(), ec);
    if (ec) return;
    auto final_path = path_for(key);
    auto tmp = final_path;
    tmp += ".tmp" + std::to_string(reinterpret_cast<std::uintptr_t>(&value));
    {
      std::ofstream out(tmp, std::ios::trunc);
      if (!out) return;
      out << key << '\n' << value;
      if (!out) return;
    }
    std::filesystem::rename(tmp, final_path, ec);
    if (ec) std::filesystem::remove(tmp, ec);
  }

 private:
  DiskCache() {
    if (const char* off = std::getenv("FLAGFORGE_NO_CACHE"); off && *off) enabled_ = false;
  }
  std::filesystem::path path_for(std::string_view key) const { return directory() / (hex64(fnv1a(key)) + ".txt"); }

  std::atomic<bool> enabled_{true};
};

}  // namespace flagforge
