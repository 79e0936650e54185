#pragma once

#include <fcntl.h>
#include <poll.h>
#include <sched.h>
#include <signal.h>
#include <sys/resource.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <filesystem>
#include <mutex>
#include <sstream>
#include <string>
#include <vector>

#include "codeclean/util.hpp"

namespace codeclean {

struct ResourceLimits {
    double wall_time_s = 10.0;
    uint64_t memory_bytes = 512ull * 1024 * 1024;
    uint64_t max_output_bytes = 16ull * 1024 * 1024;

    void validate() const {
        if (wall_time_s <= 0 || memory_bytes == 0 || max_output_bytes == 0)
            throw std::invalid_argument("ResourceLimits: all limits must be strictly positive");
    }
};

enum class Verdict {
    pass,
    wrong_output,
    runtime_error,
    timeout,
    memory_exceeded,
    output_truncated,
    sandbox_error,
};

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::pass: return "pass";
        case Verdict::wrong_output: return "wrong_output";
        case Verdict::runtime_error: return "runtime_error";
        case Verdict::timeout: return "timeout";
        case Verdict::memory_exceeded: return "memory_exceeded";
        case Verdict::output_truncated: return "output_truncated";
        case Verdict::sandbox_error: return "sandbox_error";
    }
    return "sandbox_error";
}

struct ExecutionResult {
    Verdict verdict = Verdict::sandbox_error;
    std::string stdout_text;
    std::string stderr_text;
    double wall_time_s = 0.0;
    int exit_code = -1;  // negative signal number when killed
};

namespace detail {

struct ScratchDir {
    std::filesystem::path path;

    explicit ScratchDir(const std::filesystem::path& root) {
        std::filesystem::create_directories(root);
        std::string tmpl = (root / "run.XXXXXX").string();
        std::vector<char> buf(tmpl.begin(), tmpl.end());
        buf.push_back('\0');
        if (!mkdtemp(buf.data())) throw std::runtime_error("mkdtemp failed");
        path = buf.data();
    }
    ~ScratchDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    ScratchDir(const ScratchDir&) = delete;
    ScratchDir& operator=(const ScratchDir&) = delete;
};

inline void ignore_sigpipe_once() {
    static std::once_flag flag;
    std::call_once(flag, [] { ::signal(SIGPIPE, SIG_IGN); });
}

inline std::vector<std::string> split_command(const std::string& cmd) {
    std::vector<std::string> parts;
    std::istringstream in(cmd);
    std::string word;
    while (in >> word) parts.push_back(word);
    return parts;
}

}  // namespace detail

inline std::filesystem::path default_scratch_root() {
    return std::filesystem::temp_directory_path() / "codeclean-sandbox";
}

// Runs one program in a fresh temp cwd with stdin fed, streams captured, a
// wall-clock deadline enforced on the whole process group, an address-space
// cap, and a minimized environment. Network access is dropped when the
// kernel allows an unprivileged net namespace; this is best-effort isolation
// against accidental misbehavior, not an adversarial sandbox.
inline ExecutionResult run_program(const std::string& source, const std::string& stdin_text,
                                   const ResourceLimits& limits,
                                   const std::string& interpreter_cmd = "python3",
                                   const std::filesystem::path& scratch_root = default_scratch_root()) {
    limits.validate();
    detail::ignore_sigpipe_once();

    ExecutionResult result;
    auto argv_parts = detail::split_command(interpreter_cmd);
    if (argv_parts.empty()) {
        result.stderr_text = "empty interpreter command";
        return result;
    }

    try {
        detail::ScratchDir scratch(scratch_root);
        std::filesystem::path program = scratch.path / "prog.py";
        atomic_write_file(program, source);

        int in_pipe[2], out_pipe[2], err_pipe[2];
        if (pipe2(in_pipe, O_CLOEXEC) || pipe2(out_pipe, O_CLOEXEC) || pipe2(err_pipe, O_CLOEXEC)) {
            result.stderr_text = "pipe2 failed";
            return result;
        }

        auto start = std::chrono::steady_clock::now();
        pid_t pid = fork();
        if (pid < 0) {
            result.stderr_text = "fork failed";
            for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1], err_pipe[0], err_pipe[1]})
                close(fd);
            return result;
        }

        if (pid == 0) {
            setsid();
            dup2(in_pipe[0], STDIN_FILENO);
            dup2(out_pipe[1], STDOUT_FILENO);
            dup2(err_pipe[1], STDERR_FILENO);
            if (chdir(scratch.path.c_str()) != 0) _exit(127);

            rlimit mem{limits.memory_bytes, limits.memory_bytes};
            setrlimit(RLIMIT_AS, &mem);
            rlim_t cpu_s = static_cast<rlim_t>(limits.wall_time_s) + 2;
            rlimit cpu{cpu_s, cpu_s + 1};
            setrlimit(RLIMIT_CPU, &cpu);
            rlimit core{0, 0};
            setrlimit(RLIMIT_CORE, &core);

            unshare(CLONE_NEWUSER | CLONE_NEWNET);  // best-effort, ignored on EPERM

            std::string home = "HOME=" + scratch.path.string();
            std::vector<std::string> env_store = {
                "PATH=/usr/local/bin:/usr/bin:/bin", home,        "LC_ALL=C.UTF-8",
                "PYTHONIOENCODING=utf-8",            "PYTHONHASHSEED=0", "PYTHONDONTWRITEBYTECODE=1",
            };
            std::vector<char*> envp;
            for (auto& e : env_store) envp.push_back(e.data());
            envp.push_back(nullptr);

            std::vector<std::string> argv_store = argv_parts;
            argv_store.push_back(program.string());
            std::vector<char*> argv;
            for (auto& a : argv_store) argv.push_back(a.data());
            argv.push_back(nullptr);

            execvpe(argv[0], argv.data(), envp.data());
            const char* msg = "codeclean-exec: cannot run interpreter\n";
            ssize_t ignored = write(STDERR_FILENO, msg, strlen(msg));
            (void)ignored;
            _exit(127);
        }

        close(in_pipe[0]);
        close(out_pipe[1]);
        close(err_pipe[1]);
        fcntl(in_pipe[1], F_SETFL, O_NONBLOCK);

        auto deadline = start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                    std::chrono::duration<double>(limits.wall_time_s));
        size_t stdin_sent = 0;
        bool stdin_open = true, stdout_open = true, stderr_open = true;
        bool killed_timeout = false, killed_output = false;
        if (stdin_text.empty()) {
            close(in_pipe[1]);
            stdin_open = false;
        }

        auto kill_group = [&] { kill(-pid, SIGKILL); };

        char buf[65536];
        while (stdout_open || stderr_open) {
            auto now = std::chrono::steady_clock::now();
            if (!killed_timeout && !killed_output && now >= deadline) {
                killed_timeout = true;
                kill_group();
            }
            int timeout_ms = 50;
            if (!killed_timeout && !killed_output) {
                auto remain =
                    std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count();
                timeout_ms = static_cast<int>(std::max<long long>(1, std::min<long long>(remain, 50)));
            }

            pollfd fds[3];
            nfds_t nfds = 0;
            int out_idx = -1, err_idx = -1, in_idx = -1;
            if (stdout_open) { fds[nfds] = {out_pipe[0], POLLIN, 0}; out_idx = nfds++; }
            if (stderr_open) { fds[nfds] = {err_pipe[0], POLLIN, 0}; err_idx = nfds++; }
            if (stdin_open) { fds[nfds] = {in_pipe[1], POLLOUT, 0}; in_idx = nfds++; }

            int rc = poll(fds, nfds, timeout_ms);
            if (rc < 0) {
                if (errno == EINTR) continue;
                break;
            }

            if (out_idx >= 0 && (fds[out_idx].revents & (POLLIN | POLLHUP))) {
                ssize_t n = read(out_pipe[0], buf, sizeof(buf));
                if (n <= 0) stdout_open = false;
                else {
                    size_t room = limits.max_output_bytes > result.stdout_text.size()
                                      ? limits.max_output_bytes - result.stdout_text.size()
                                      : 0;
                    result.stdout_text.append(buf, std::min<size_t>(n, room));
                    if (static_cast<size_t>(n) > room && !killed_output && !killed_timeout) {
                        killed_output = true;
                        kill_group();
                    }
                }
            }
            if (err_idx >= 0 && (fds[err_idx].revents & (POLLIN | POLLHUP))) {
                ssize_t n = read(err_pipe[0], buf, sizeof(buf));
                if (n <= 0) stderr_open = false;
                else {
                    size_t room = limits.max_output_bytes > result.stderr_text.size()
                                      ? limits.max_output_bytes - result.stderr_text.size()
                                      : 0;
                    result.stderr_text.append(buf, std::min<size_t>(n, room));
                }
            }
            if (in_idx >= 0 && (fds[in_idx].revents & (POLLOUT | POLLERR | POLLHUP))) {
                if (fds[in_idx].revents & (POLLERR | POLLHUP)) {
                    close(in_pipe[1]);
                    stdin_open = false;
                } else {
                    ssize_t n = write(in_pipe[1], stdin_text.data() + stdin_sent,
                                      stdin_text.size() - stdin_sent);
                    if (n > 0) stdin_sent += static_cast<size_t>(n);
                    else if (n < 0 && errno != EAGAIN && errno != EINTR) {
                        close(in_pipe[1]);
                        stdin_open = false;
                    }
                    if (stdin_open && stdin_sent == stdin_text.size()) {
                        close(in_pipe[1]);
                        stdin_open = false;
                    }
                }
            }
        }
        if (stdin_open) close(in_pipe[1]);
        close(out_pipe[0]);
        close(err_pipe[0]);

        int status = 0;
        waitpid(pid, &status, 0);
        result.wall_time_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

        if (killed_timeout) {
            result.verdict = Verdict::timeout;
            result.exit_code = -SIGKILL;
        } else if (killed_output) {
            result.verdict = Verdict::output_truncated;
            result.exit_code = -SIGKILL;
        } else if (WIFSIGNALED(status)) {
            int sig = WTERMSIG(status);
            result.exit_code = -sig;
            result.verdict = (sig == SIGXCPU) ? Verdict::timeout : Verdict::runtime_error;
        } else {
            result.exit_code = WEXITSTATUS(status);
            if (result.exit_code == 0) {
                result.verdict = Verdict::pass;
            } else if (result.exit_code == 127 &&
                       result.stderr_text.find("codeclean-exec:") != std::string::npos) {
                result.verdict = Verdict::sandbox_error;
            } else if (result.stderr_text.find("MemoryError") != std::string::npos) {
                result.verdict = Verdict::memory_exceeded;
            } else {
                result.verdict = Verdict::runtime_error;
            }
        }
        return result;
    } catch (const std::exception& e) {
        result.verdict = Verdict::sandbox_error;
        result.stderr_text = e.what();
        return result;
    }
}

}  // namespace codeclean
