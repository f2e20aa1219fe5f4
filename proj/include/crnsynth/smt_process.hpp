#ifndef CRNSYNTH_SMT_PROCESS_HPP
#define CRNSYNTH_SMT_PROCESS_HPP

// Child-process SMT solver speaking SMT-LIB 2 over stdin/stdout.

#include <poll.h>
#include <signal.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "crnsynth/error.hpp"

namespace crnsynth::smt {

using Clock = std::chrono::steady_clock;

/// Minimal s-expression: an atom or a list.
struct SExpr {
    std::string atom;
    std::vector<SExpr> list;
    bool isList = false;
};

/// Parses one s-expression from `text` starting at `pos`; advances `pos`.
inline SExpr parseSExpr(const std::string& text, std::size_t& pos) {
    auto skip = [&] {
        while (pos < text.size()) {
            if (std::isspace(static_cast<unsigned char>(text[pos]))) {
                ++pos;
            } else if (text[pos] == ';') {
                while (pos < text.size() && text[pos] != '\n') ++pos;
            } else {
                break;
            }
        }
    };
    skip();
    if (pos >= text.size()) throw BackendError("unexpected end of solver output", text);
    SExpr e;
    if (text[pos] == '(') {
        e.isList = true;
        ++pos;
        for (;;) {
            skip();
            if (pos >= text.size()) throw BackendError("unbalanced parentheses in solver output", text);
            if (text[pos] == ')') {
                ++pos;
                return e;
            }
            e.list.push_back(parseSExpr(text, pos));
        }
    }
    if (text[pos] == ')') throw BackendError("unexpected ')' in solver output", text);
    if (text[pos] == '"') {
        std::size_t start = pos++;
        while (pos < text.size()) {
            if (text[pos] == '"') {
                if (pos + 1 < text.size() && text[pos + 1] == '"') {
                    pos += 2;
                    continue;
                }
                break;
            }
            ++pos;
        }
        if (pos >= text.size()) throw BackendError("unterminated string in solver output", text);
        ++pos;
        e.atom = text.substr(start, pos - start);
        return e;
    }
    std::size_t start = pos;
    while (pos < text.size() && !std::isspace(static_cast<unsigned char>(text[pos])) && text[pos] != '(' &&
           text[pos] != ')') {
        ++pos;
    }
    e.atom = text.substr(start, pos - start);
    return e;
}

/// Integer value of a model term: `5` or `(- 5)`.
inline std::int64_t sexprToInt(const SExpr& e, const std::string& context) {
    try {
        if (!e.isList) return std::stoll(e.atom);
        if (e.list.size() == 2 && !e.list[0].isList && e.list[0].atom == "-") return -sexprToInt(e.list[1], context);
    } catch (const std::logic_error&) {
    }
    throw BackendError("model value is not an integer", context);
}

/// Parses a get-value response `((name value) ...)`.
inline std::map<std::string, std::int64_t> parseModel(const std::string& response) {
    std::size_t pos = 0;
    SExpr e = parseSExpr(response, pos);
    if (!e.isList) throw BackendError("get-value response is not a list", response);
    if (!e.list.empty() && !e.list[0].isList && e.list[0].atom == "error") {
        throw BackendError("solver reported an error", response);
    }
    std::map<std::string, std::int64_t> values;
    for (const auto& pair : e.list) {
        if (!pair.isList || pair.list.size() != 2 || pair.list[0].isList) {
            throw BackendError("malformed get-value entry", response);
        }
        values[pair.list[0].atom] = sexprToInt(pair.list[1], response);
    }
    return values;
}

/// A running solver process. Every byte exchanged is kept in a transcript
/// for error reports.
class SmtProcess {
public:
    SmtProcess(const std::string& executable, const std::vector<std::string>& args) {
        ::signal(SIGPIPE, SIG_IGN); // broken pipes surface as EPIPE from write()
        int toChild[2], fromChild[2];
        if (::pipe(toChild) != 0 || ::pipe(fromChild) != 0) throw BackendError("pipe() failed");
        pid_ = ::fork();
        if (pid_ < 0) throw BackendError("fork() failed");
        if (pid_ == 0) {
            ::dup2(toChild[0], STDIN_FILENO);
            ::dup2(fromChild[1], STDOUT_FILENO);
            ::dup2(fromChild[1], STDERR_FILENO);
            ::close(toChild[0]);
            ::close(toChild[1]);
            ::close(fromChild[0]);
            ::close(fromChild[1]);
            std::vector<char*> argv;
            argv.push_back(const_cast<char*>(executable.c_str()));
            for (const auto& a : args) argv.push_back(const_cast<char*>(a.c_str()));
            argv.push_back(nullptr);
            ::execvp(executable.c_str(), argv.data());
            std::string msg = "(error \"cannot execute " + executable + ": " + std::strerror(errno) + "\")\n";
            (void)!::write(STDOUT_FILENO, msg.data(), msg.size());
            ::_exit(127);
        }
        ::close(toChild[0]);
        ::close(fromChild[1]);
        in_ = toChild[1];
        out_ = fromChild[0];
    }

    SmtProcess(const SmtProcess&) = delete;
    SmtProcess& operator=(const SmtProcess&) = delete;

    ~SmtProcess() { terminate(); }

    void send(const std::string& text) {
        transcript_ += text;
        std::size_t done = 0;
        while (done < text.size()) {
            ssize_t n = ::write(in_, text.data() + done, text.size() - done);
            if (n < 0) {
                if (errno == EINTR) continue;
                throw BackendError("solver process closed its input", transcript_);
            }
            done += static_cast<std::size_t>(n);
        }
    }

    /// Reads one complete s-expression (or atom) from the solver.
    std::string readResponse(Clock::time_point deadline) {
        for (;;) {
            if (auto r = takeComplete()) {
                transcript_ += *r + "\n";
                if (r->rfind("(error", 0) == 0) throw BackendError("solver reported " + *r, transcript_);
                return *r;
            }
            auto now = Clock::now();
            if (now >= deadline) {
                terminate();
                throw TimeoutError("solver did not answer before the deadline");
            }
            const auto wait = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count();
            pollfd pfd{out_, POLLIN, 0};
            int rc = ::poll(&pfd, 1, static_cast<int>(std::min<long long>(wait + 1, 1000)));
            if (rc < 0) {
                if (errno == EINTR) continue;
                throw BackendError("poll() failed", transcript_);
            }
            if (rc == 0) continue;
            char buf[65536];
            ssize_t n = ::read(out_, buf, sizeof buf);
            if (n < 0) {
                if (errno == EINTR) continue;
                throw BackendError("reading from solver failed", transcript_);
            }
            if (n == 0) {
                buffer_ += "";
                throw BackendError("solver process exited unexpectedly" +
                                       (buffer_.empty() ? std::string() : ": " + buffer_),
                                   transcript_ + buffer_);
            }
            buffer_.append(buf, static_cast<std::size_t>(n));
        }
    }

    const std::string& transcript() const noexcept { return transcript_; }

    void terminate() {
        if (in_ >= 0) ::close(in_);
        if (out_ >= 0) ::close(out_);
        in_ = out_ = -1;
        if (pid_ > 0) {
            ::kill(pid_, SIGKILL);
            int status = 0;
            ::waitpid(pid_, &status, 0);
            pid_ = -1;
        }
    }

private:
    /// Extracts the first complete s-expression from the buffer, if any.
    std::optional<std::string> takeComplete() {
        std::size_t i = 0;
        while (i < buffer_.size() && std::isspace(static_cast<unsigned char>(buffer_[i]))) ++i;
        if (i == buffer_.size()) return std::nullopt;
        if (buffer_[i] != '(') {
            std::size_t end = buffer_.find('\n', i);
            if (end == std::string::npos) return std::nullopt;
            std::string atom = buffer_.substr(i, end - i);
            while (!atom.empty() && std::isspace(static_cast<unsigned char>(atom.back()))) atom.pop_back();
            buffer_.erase(0, end + 1);
            return atom;
        }
        int depth = 0;
        bool inString = false;
        for (std::size_t k = i; k < buffer_.size(); ++k) {
            const char c = buffer_[k];
            if (inString) {
                if (c == '"') inString = false;
                continue;
            }
            if (c == '"') {
                inString = true;
            } else if (c == '(') {
                ++depth;
            } else if (c == ')' && --depth == 0) {
                std::string expr = buffer_.substr(i, k + 1 - i);
                buffer_.erase(0, k + 1);
                return expr;
            }
        }
        return std::nullopt;
    }

    pid_t pid_ = -1;
    int in_ = -1;
    int out_ = -1;
    std::string buffer_;
    std::string transcript_;
};

} // namespace crnsynth::smt

#endif
