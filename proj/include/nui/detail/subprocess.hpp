#pragma once

#include <fcntl.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <string_view>

#include "nui/error.hpp"

extern char** environ;

namespace nui::detail {

// POSIX-shell single-quoting.
inline std::string shell_quote(std::string_view text) {
  std::string out = "'";
  for (char c : text) {
    if (c == '\'')
      out += "'\\''";
    else
      out.push_back(c);
  }
  out.push_back('\'');
  return out;
}

struct ShellResult {
  int exit_status = -1;  // -1 when terminated by a signal
  std::string output;    // combined stdout/stderr, truncated to the last 8 KiB
};

// Runs `command` via /bin/sh -c with stdout and stderr redirected to `log_path`.
// posix_spawn keeps this safe to call from several threads at once.
inline ShellResult run_shell(const std::string& command, const std::filesystem::path& log_path) {
  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  const std::string log = log_path.string();
  posix_spawn_file_actions_addopen(&actions, STDOUT_FILENO, log.c_str(),
                                   O_WRONLY | O_CREAT | O_TRUNC, 0644);
  posix_spawn_file_actions_adddup2(&actions, STDOUT_FILENO, STDERR_FILENO);
  posix_spawn_file_actions_addopen(&actions, STDIN_FILENO, "/dev/null", O_RDONLY, 0);

  std::string sh = "/bin/sh", flag = "-c", cmd = command;
  char* argv[] = {sh.data(), flag.data(), cmd.data(), nullptr};
  pid_t pid = 0;
  const int rc = posix_spawn(&pid, "/bin/sh", &actions, nullptr, argv, environ);
  posix_spawn_file_actions_destroy(&actions);
  if (rc != 0) throw EvaluationError("cannot spawn /bin/sh: " + std::string(std::strerror(rc)));

  int status = 0;
  while (waitpid(pid, &status, 0) < 0) {
    if (errno != EINTR) throw EvaluationError("waitpid failed: " + std::string(std::strerror(errno)));
  }

  ShellResult result;
  result.exit_status = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(log_path, std::ios::binary);
  result.output.assign(std::istreambuf_iterator<char>(in), {});
  constexpr std::size_t kKeep = 8192;
  if (result.output.size() > kKeep) result.output.erase(0, result.output.size() - kKeep);
  return result;
}

}  // namespace nui::detail
