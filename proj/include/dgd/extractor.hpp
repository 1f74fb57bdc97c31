#pragma once

#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <string>
#include <thread>
#include <vector>

#include "dgd/common.hpp"
#include "dgd/dataio.hpp"

namespace dgd {

// External embedding extractor invoked per image. The command template names
// the input image and the output file; the extractor must write a one-record
// emb-v1 file of the expected dimension.
struct ExtractorSpec {
  std::string command_template;  // must contain {input} and {output} exactly once each
  std::size_t expected_dim = 512;
  double timeout_sec = 60.0;

  void validate() const {
    auto count = [&](std::string_view needle) {
      std::size_t n = 0, pos = 0;
      while ((pos = command_template.find(needle, pos)) != std::string::npos) {
        ++n;
        pos += needle.size();
      }
      return n;
    };
    if (count("{input}") != 1 || count("{output}") != 1)
      throw Error::usage("extractor template must contain {input} and {output} exactly once");
    if (expected_dim == 0) throw Error::usage("extractor expected_dim must be positive");
    if (timeout_sec <= 0) throw Error::usage("extractor timeout must be positive");
  }
};

namespace detail {

inline std::string substitute(std::string tmpl, std::string_view key, std::string_view value) {
  auto pos = tmpl.find(key);
  tmpl.replace(pos, key.size(), value);
  return tmpl;
}

inline std::string read_capped(const std::string& path, std::size_t cap) {
  std::ifstream in(path, std::ios::binary);
  std::string s(cap, '\0');
  in.read(s.data(), static_cast<std::streamsize>(cap));
  s.resize(static_cast<std::size_t>(in.gcount()));
  return s;
}

struct TempFile {
  std::string path;
  explicit TempFile(const char* tag) {
    static std::atomic<unsigned> counter{0};
    auto dir = std::filesystem::temp_directory_path();
    path = (dir / ("dgd-" + std::string(tag) + "-" + std::to_string(::getpid()) + "-" +
                   std::to_string(counter.fetch_add(1)))).string();
  }
  ~TempFile() {
    std::error_code ec;
    std::filesystem::remove(path, ec);
  }
};

// Runs a shell command with stderr captured to a file; kills the child's
// whole process group on timeout. Returns the exit status, or -1 for a
// timeout.
inline int run_with_timeout(const std::string& command, const std::string& stderr_path,
                            double timeout_sec) {
  pid_t pid = ::fork();
  if (pid < 0) throw Error::data("cannot fork extractor process");
  if (pid == 0) {
    ::setpgid(0, 0);
    int fd = ::open(stderr_path.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0600);
    if (fd >= 0) {
      ::dup2(fd, 2);
      ::close(fd);
    }
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  auto deadline = std::chrono::steady_clock::now() +
                  std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                      std::chrono::duration<double>(timeout_sec));
  int status = 0;
  for (;;) {
    pid_t r = ::waitpid(pid, &status, WNOHANG);
    if (r == pid) break;
    if (r < 0) throw Error::data("waitpid failed for extractor process");
    if (std::chrono::steady_clock::now() >= deadline) {
      // group kill: the shell's children must not outlive the timeout, or
      // they hold inherited descriptors (and keep running) indefinitely
      ::kill(-pid, SIGKILL);
      ::kill(pid, SIGKILL);
      ::waitpid(pid, &status, 0);
      return -1;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  if (WIFEXITED(status)) return WEXITSTATUS(status);
  return 128;
}

}  // namespace detail

inline Embedding extract_via_process(const ExtractorSpec& spec, const std::string& image_path) {
  spec.validate();
  if (!std::filesystem::exists(image_path))
    throw Error::data("image file '" + image_path + "' not found");

  detail::TempFile out_file("emb");
  detail::TempFile err_file("err");
  std::string cmd = detail::substitute(spec.command_template, "{input}", image_path);
  cmd = detail::substitute(cmd, "{output}", out_file.path);

  int status = detail::run_with_timeout(cmd, err_file.path, spec.timeout_sec);
  if (status == -1)
    throw Error::data("extractor timed out after " + format_double(spec.timeout_sec) +
                      "s on '" + image_path + "'");
  if (status != 0) {
    std::string diag = detail::read_capped(err_file.path, 8 * 1024);
    throw Error::data("extractor exited with status " + std::to_string(status) + " on '" +
                      image_path + "'" + (diag.empty() ? "" : ": " + diag));
  }

  auto records = load_embeddings(out_file.path, spec.expected_dim);
  if (records.size() != 1)
    throw Error::data("extractor wrote " + std::to_string(records.size()) +
                      " records, expected 1");
  return std::move(records.front());
}

// Independent extractions run concurrently up to pool_limit processes.
// Output order matches input order.
inline std::vector<Embedding> extract_batch(const ExtractorSpec& spec,
                                            const std::vector<std::string>& images,
                                            unsigned pool_limit) {
  std::vector<Embedding> out(images.size());
  parallel_for(images.size(), resolve_threads(static_cast<long>(pool_limit)),
               [&](std::size_t i) { out[i] = extract_via_process(spec, images[i]); });
  return out;
}

}  // namespace dgd
