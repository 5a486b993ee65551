#include "trifuse/captioner.hpp"

#include <cerrno>
#include <chrono>
#include <csignal>
#include <cstring>

#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

#include <json.hpp>

namespace trifuse {

namespace {

using Clock = std::chrono::steady_clock;

struct Pipe {
    int fds[2] = {-1, -1};
    Pipe() {
        if (::pipe(fds) != 0) throw AdapterError(std::string("pipe: ") + std::strerror(errno));
    }
    ~Pipe() {
        close_read();
        close_write();
    }
    void close_read() {
        if (fds[0] >= 0) ::close(fds[0]);
        fds[0] = -1;
    }
    void close_write() {
        if (fds[1] >= 0) ::close(fds[1]);
        fds[1] = -1;
    }
};

void write_all_best_effort(int fd, const std::string& data) {
    // the child is free to exit without reading; EPIPE is not an error here
    std::size_t off = 0;
    while (off < data.size()) {
        const ssize_t n = ::write(fd, data.data() + off, data.size() - off);
        if (n < 0) {
            if (errno == EINTR) continue;
            return;
        }
        off += static_cast<std::size_t>(n);
    }
}

[[noreturn]] void kill_and_throw(pid_t pid, const std::string& msg) {
    ::kill(pid, SIGKILL);
    int status = 0;
    ::waitpid(pid, &status, 0);
    throw AdapterError(msg);
}

}  // namespace

SubprocessCaptioner::SubprocessCaptioner(std::string command, double timeout_s)
    : command_(std::move(command)), timeout_s_(timeout_s) {
    if (command_.empty()) throw UsageError("captioner command must not be empty");
    if (!(timeout_s_ > 0)) throw UsageError("captioner timeout must be positive");
    ::signal(SIGPIPE, SIG_IGN);
}

std::string SubprocessCaptioner::do_caption(const CaptionRequest& req) {
    nlohmann::json j;
    j["segment_id"] = req.segment_id;
    j["chunk_index"] = req.chunk_index;
    j["start_s"] = req.start_s;
    j["end_s"] = req.end_s;
    if (req.frames_ref)
        j["frames_ref"] = *req.frames_ref;
    else
        j["frames_ref"] = nullptr;
    const std::string request = j.dump() + "\n";

    Pipe to_child, from_child;
    const pid_t pid = ::fork();
    if (pid < 0) throw AdapterError(std::string("fork: ") + std::strerror(errno));
    if (pid == 0) {
        ::dup2(to_child.fds[0], STDIN_FILENO);
        ::dup2(from_child.fds[1], STDOUT_FILENO);
        to_child.close_read();
        to_child.close_write();
        from_child.close_read();
        from_child.close_write();
        ::execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
        ::_exit(127);
    }
    to_child.close_read();
    from_child.close_write();

    write_all_best_effort(to_child.fds[1], request);
    to_child.close_write();

    const auto deadline = Clock::now() + std::chrono::duration_cast<Clock::duration>(
                                             std::chrono::duration<double>(timeout_s_));
    std::string output;
    char buf[4096];
    for (;;) {
        const auto remaining =
            std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now()).count();
        if (remaining <= 0)
            kill_and_throw(pid, "captioner timed out after " + std::to_string(timeout_s_) +
                                    " s on chunk " + std::to_string(req.chunk_index) + " of " +
                                    req.segment_id);
        struct pollfd pfd{from_child.fds[0], POLLIN, 0};
        const int pr = ::poll(&pfd, 1, static_cast<int>(remaining));
        if (pr < 0) {
            if (errno == EINTR) continue;
            kill_and_throw(pid, std::string("poll: ") + std::strerror(errno));
        }
        if (pr == 0) continue;  // re-check the deadline
        const ssize_t n = ::read(from_child.fds[0], buf, sizeof(buf));
        if (n < 0) {
            if (errno == EINTR) continue;
            kill_and_throw(pid, std::string("read: ") + std::strerror(errno));
        }
        if (n == 0) break;  // EOF
        output.append(buf, static_cast<std::size_t>(n));
        if (output.size() > (1u << 20))
            kill_and_throw(pid, "captioner emitted over 1 MiB without a newline on chunk " +
                                    std::to_string(req.chunk_index) + " of " + req.segment_id);
        if (output.find('\n') != std::string::npos) break;
    }
    from_child.close_read();

    // reap within the same deadline; a captioner that lingers after its
    // line counts as hung
    int status = 0;
    for (;;) {
        const pid_t w = ::waitpid(pid, &status, WNOHANG);
        if (w == pid) break;
        if (w < 0) throw AdapterError(std::string("waitpid: ") + std::strerror(errno));
        if (Clock::now() >= deadline)
            kill_and_throw(pid, "captioner did not exit after its caption on chunk " +
                                    std::to_string(req.chunk_index) + " of " + req.segment_id);
        ::usleep(1000);
    }
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
        const std::string detail = WIFEXITED(status)
                                       ? "exit status " + std::to_string(WEXITSTATUS(status))
                                       : "terminated by signal " + std::to_string(WTERMSIG(status));
        throw AdapterError("captioner failed (" + detail + ") on chunk " +
                           std::to_string(req.chunk_index) + " of " + req.segment_id);
    }

    const std::size_t eol = output.find('\n');
    std::string line = eol == std::string::npos ? output : output.substr(0, eol);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty())
        throw AdapterError("captioner produced no caption for chunk " + std::to_string(req.chunk_index) +
                           " of " + req.segment_id);
    return line;
}

}  // namespace trifuse
