#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

#include "specprint/common.hpp"
#include "specprint/denoise.hpp"
#include "specprint/pnm.hpp"

namespace specprint {

namespace detail {

// Run `argv` with `input` on stdin, capture stdout. Plain fork/exec with
// two pipes; the parent writes and reads in a poll-free interleave that is
// safe because the child cannot emit more than it has consumed plus its
// pipe buffer -- we fork a writer to avoid the classic deadlock.
inline std::vector<std::uint8_t> run_filter_process(const std::vector<std::string>& argv,
                                                    const std::vector<std::uint8_t>& input) {
    if (argv.empty()) throw contract_error("external denoiser command is empty");
    int in_pipe[2];  // parent -> child
    int out_pipe[2]; // child -> parent
    if (pipe(in_pipe) != 0 || pipe(out_pipe) != 0) throw io_error("pipe() failed");

    const pid_t child = fork();
    if (child < 0) throw io_error("fork() failed");
    if (child == 0) {
        dup2(in_pipe[0], STDIN_FILENO);
        dup2(out_pipe[1], STDOUT_FILENO);
        close(in_pipe[0]);
        close(in_pipe[1]);
        close(out_pipe[0]);
        close(out_pipe[1]);
        std::vector<char*> args;
        args.reserve(argv.size() + 1);
        for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
        args.push_back(nullptr);
        execvp(args[0], args.data());
        _exit(127);
    }
    close(in_pipe[0]);
    close(out_pipe[1]);

    // writer child feeds stdin so the parent can drain stdout concurrently
    const pid_t writer = fork();
    if (writer < 0) {
        close(in_pipe[1]);
        close(out_pipe[0]);
        throw io_error("fork() failed");
    }
    if (writer == 0) {
        close(out_pipe[0]);
        std::size_t off = 0;
        while (off < input.size()) {
            const ssize_t n = write(in_pipe[1], input.data() + off, input.size() - off);
            if (n <= 0) _exit(1);
            off += static_cast<std::size_t>(n);
        }
        close(in_pipe[1]);
        _exit(0);
    }
    close(in_pipe[1]);

    std::vector<std::uint8_t> output;
    std::uint8_t buf[65536];
    for (;;) {
        const ssize_t n = read(out_pipe[0], buf, sizeof(buf));
        if (n < 0) {
            close(out_pipe[0]);
            throw io_error("read from external denoiser failed");
        }
        if (n == 0) break;
        output.insert(output.end(), buf, buf + n);
    }
    close(out_pipe[0]);

    int status = 0;
    waitpid(writer, &status, 0);
    waitpid(child, &status, 0);
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0)
        throw io_error("external denoiser exited with status " +
                       std::to_string(WIFEXITED(status) ? WEXITSTATUS(status) : -1));
    return output;
}

} // namespace detail

// Denoise through an external process. Protocol: the child receives a
// P5 PGM (maxval 65535) on standard input and must emit a same-geometry
// P5 PGM on standard output. This is the hook for plugging learned
// denoisers without linking them in.
inline ImageF external_denoise(const ImageF& img, const std::vector<std::string>& command) {
    const std::vector<std::uint8_t> request = write_pnm(img, 65535);
    const std::vector<std::uint8_t> reply = detail::run_filter_process(command, request);
    ParsedImage parsed = parse_pnm(reply);
    if (!std::holds_alternative<ImageF>(parsed))
        throw format_error("external denoiser must reply with a grayscale PGM", 0);
    ImageF out = std::get<ImageF>(std::move(parsed));
    if (out.width != img.width || out.height != img.height)
        throw geometry_error("external denoiser changed image geometry");
    return out;
}

inline ResidualResult extract_residual_external(const ImageF& img,
                                                const std::vector<std::string>& command) {
    ImageF den = external_denoise(img, command);
    ResidualResult out{ImageF(img.width, img.height), 0.0};
    for (std::size_t i = 0; i < img.size(); ++i)
        out.residual.samples[i] = img.samples[i] - den.samples[i];
    out.mean = image_mean(out.residual);
    return out;
}

} // namespace specprint
