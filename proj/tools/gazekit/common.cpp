#include "common.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include "gazekit/session_io.hpp"

namespace gazekit::cli {

namespace fs = std::filesystem;

fs::path resolve_out(const std::string& flag, const std::string& sub) {
  if (!flag.empty()) return flag;
  const char* env = std::getenv("GAZEKIT_OUT");
  if (env == nullptr || *env == '\0') throw UsageError("--out not given and GAZEKIT_OUT is unset");
  return sub.empty() ? fs::path(env) : fs::path(env) / sub;
}

std::vector<fs::path> find_sessions(const std::vector<std::string>& paths) {
  std::vector<fs::path> out;
  for (const std::string& p : paths) {
    const fs::path root(p);
    if (!fs::exists(root)) throw MissingFileError(root);
    if (fs::is_regular_file(root / kManifestFile)) {
      out.push_back(root);
      continue;
    }
    for (auto it = fs::recursive_directory_iterator(root); it != fs::recursive_directory_iterator(); ++it) {
      if (it->is_regular_file() && it->path().filename() == kManifestFile) out.push_back(it->path().parent_path());
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(n, std::max(1u, std::thread::hardware_concurrency()));
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        {
          std::lock_guard lock(mu);
          if (error) return;
        }
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(mu);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace gazekit::cli
