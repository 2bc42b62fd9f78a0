#pragma once

#include <chrono>
#include <string>
#include <vector>

namespace ceihorn {

struct ProcessResult {
    int exit_code = -1;
    std::string out;
    std::string err;
    bool timed_out = false;
    /// The executable could not be started.
    bool exec_failed = false;
    std::chrono::milliseconds elapsed{0};
};

/// Runs argv[0] (searched on PATH) and collects its output. The child is killed
/// once `timeout` elapses.
ProcessResult run_process(const std::vector<std::string>& argv, std::chrono::milliseconds timeout);

/// A file under the system temp directory, removed on destruction.
class TempFile {
  public:
    TempFile(const std::string& stem, const std::string& contents);
    ~TempFile();
    TempFile(const TempFile&) = delete;
    TempFile& operator=(const TempFile&) = delete;
    const std::string& path() const { return path_; }

  private:
    std::string path_;
};

}  // namespace ceihorn
