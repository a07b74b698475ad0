#include "edckit/subprocess.hpp"

#include "edckit/error.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <filesystem>

namespace edckit {

std::vector<std::string> split_command(const std::string& command_template,
                                       const std::string& in, const std::string& out) {
    std::vector<std::string> argv;
    std::string cur;
    bool in_quotes = false;
    bool have_token = false;
    auto flush = [&]() {
        if (!have_token) return;
        if (cur == "{in}") cur = in;
        else if (cur == "{out}") cur = out;
        argv.push_back(cur);
        cur.clear();
        have_token = false;
    };
    for (char c : command_template) {
        if (c == '"') {
            in_quotes = !in_quotes;
            have_token = true;
        } else if (!in_quotes && (c == ' ' || c == '\t' || c == '\n')) {
            flush();
        } else {
            cur.push_back(c);
            have_token = true;
        }
    }
    flush();
    if (in_quotes) throw Error("unterminated quote in command: " + command_template);
    return argv;
}

namespace {

void set_nonblocking(int fd) {
    int flags = fcntl(fd, F_GETFL, 0);
    fcntl(fd, F_SETFL, flags | O_NONBLOCK);
}

struct Pipe {
    int fds[2] = {-1, -1};
    Pipe() {
        if (pipe(fds) != 0) throw Error("pipe() failed: " + std::string(strerror(errno)));
    }
    ~Pipe() {
        close_read();
        close_write();
    }
    int read_end() const { return fds[0]; }
    int write_end() const { return fds[1]; }
    void close_read() {
        if (fds[0] >= 0) {
            close(fds[0]);
            fds[0] = -1;
        }
    }
    void close_write() {
        if (fds[1] >= 0) {
            close(fds[1]);
            fds[1] = -1;
        }
    }
};

} // namespace

RunResult run_process(const std::vector<std::string>& argv, const std::string& stdin_data,
                      std::chrono::milliseconds timeout, const std::string& working_dir) {
    if (argv.empty()) throw Error("run_process: empty command");

    Pipe to_child, from_child_out, from_child_err;

    std::vector<char*> cargv;
    cargv.reserve(argv.size() + 1);
    for (const auto& a : argv) cargv.push_back(const_cast<char*>(a.c_str()));
    cargv.push_back(nullptr);

    const auto start = std::chrono::steady_clock::now();
    pid_t pid = fork();
    if (pid < 0) throw Error("fork() failed: " + std::string(strerror(errno)));
    if (pid == 0) {
        dup2(to_child.read_end(), STDIN_FILENO);
        dup2(from_child_out.write_end(), STDOUT_FILENO);
        dup2(from_child_err.write_end(), STDERR_FILENO);
        to_child.close_read();
        to_child.close_write();
        from_child_out.close_read();
        from_child_out.close_write();
        from_child_err.close_read();
        from_child_err.close_write();
        if (!working_dir.empty() && chdir(working_dir.c_str()) != 0) _exit(127);
        execvp(cargv[0], cargv.data());
        _exit(127);
    }

    to_child.close_read();
    from_child_out.close_write();
    from_child_err.close_write();

    set_nonblocking(to_child.write_end());
    set_nonblocking(from_child_out.read_end());
    set_nonblocking(from_child_err.read_end());

    // Ignore SIGPIPE for the write; detect child exit via EPIPE instead.
    signal(SIGPIPE, SIG_IGN);

    RunResult result;
    std::size_t written = 0;
    bool stdin_open = true;
    if (stdin_data.empty()) {
        to_child.close_write();
        stdin_open = false;
    }
    bool out_open = true, err_open = true;
    char buf[65536];
    const auto deadline = start + timeout;

    while (out_open || err_open || stdin_open) {
        auto now = std::chrono::steady_clock::now();
        if (now >= deadline) {
            result.timed_out = true;
            kill(pid, SIGKILL);
            break;
        }
        int wait_ms = static_cast<int>(
            std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count());
        if (wait_ms < 1) wait_ms = 1;
        if (wait_ms > 200) wait_ms = 200;

        struct pollfd pfds[3];
        nfds_t n = 0;
        int idx_in = -1, idx_out = -1, idx_err = -1;
        if (stdin_open) {
            idx_in = static_cast<int>(n);
            pfds[n++] = {to_child.write_end(), POLLOUT, 0};
        }
        if (out_open) {
            idx_out = static_cast<int>(n);
            pfds[n++] = {from_child_out.read_end(), POLLIN, 0};
        }
        if (err_open) {
            idx_err = static_cast<int>(n);
            pfds[n++] = {from_child_err.read_end(), POLLIN, 0};
        }
        int rc = poll(pfds, n, wait_ms);
        if (rc < 0) {
            if (errno == EINTR) continue;
            kill(pid, SIGKILL);
            break;
        }
        if (rc == 0) continue;

        if (idx_in >= 0 && (pfds[idx_in].revents & (POLLOUT | POLLERR | POLLHUP))) {
            ssize_t w = write(to_child.write_end(), stdin_data.data() + written,
                              stdin_data.size() - written);
            if (w > 0) {
                written += static_cast<std::size_t>(w);
                if (written == stdin_data.size()) {
                    to_child.close_write();
                    stdin_open = false;
                }
            } else if (w < 0 && errno != EAGAIN && errno != EWOULDBLOCK) {
                to_child.close_write();
                stdin_open = false;
            }
        }
        if (idx_out >= 0 && (pfds[idx_out].revents & (POLLIN | POLLHUP | POLLERR))) {
            ssize_t r = read(from_child_out.read_end(), buf, sizeof buf);
            if (r > 0) result.out.append(buf, static_cast<std::size_t>(r));
            else if (r == 0 || (r < 0 && errno != EAGAIN && errno != EWOULDBLOCK)) out_open = false;
        }
        if (idx_err >= 0 && (pfds[idx_err].revents & (POLLIN | POLLHUP | POLLERR))) {
            ssize_t r = read(from_child_err.read_end(), buf, sizeof buf);
            if (r > 0) result.err.append(buf, static_cast<std::size_t>(r));
            else if (r == 0 || (r < 0 && errno != EAGAIN && errno != EWOULDBLOCK)) err_open = false;
        }
    }

    int status = 0;
    if (waitpid(pid, &status, 0) < 0) throw Error("waitpid failed");
    if (WIFEXITED(status)) {
        result.exit_code = WEXITSTATUS(status);
    } else if (WIFSIGNALED(status)) {
        result.signaled = true;
        result.exit_code = 128 + WTERMSIG(status);
    }
    result.duration =
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start);
    return result;
}

bool executable_exists(const std::string& name) {
    if (name.empty()) return false;
    if (name.find('/') != std::string::npos)
        return access(name.c_str(), X_OK) == 0;
    const char* path = getenv("PATH");
    if (!path) return false;
    std::string paths(path);
    std::size_t pos = 0;
    while (pos <= paths.size()) {
        std::size_t colon = paths.find(':', pos);
        std::string dir = paths.substr(pos, colon == std::string::npos ? std::string::npos
                                                                       : colon - pos);
        if (!dir.empty()) {
            std::string full = dir + "/" + name;
            if (access(full.c_str(), X_OK) == 0) return true;
        }
        if (colon == std::string::npos) break;
        pos = colon + 1;
    }
    return false;
}

} // namespace edckit
