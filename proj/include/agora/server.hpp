#pragma once

// WebSocket transport: `GET /ws` upgrades to the JSON frame protocol, every
// other request gets 404.

#include "agora/pipeline.hpp"

#include <cstddef>
#include <deque>
#include <memory>
#include <stdexcept>
#include <string>

namespace agora::net {

inline constexpr std::size_t max_outbound_frames = 1024;

// Pending outbound frames of one connection. A push beyond capacity is
// refused and the connection is expected to close.
class OutboundQueue {
public:
    explicit OutboundQueue(std::size_t capacity = max_outbound_frames) : capacity_(capacity) {}

    bool push(std::string frame);
    const std::string& front() const { return frames_.front(); }
    void pop() { frames_.pop_front(); }
    bool empty() const noexcept { return frames_.empty(); }
    std::size_t size() const noexcept { return frames_.size(); }
    std::size_t capacity() const noexcept { return capacity_; }

private:
    std::size_t capacity_;
    std::deque<std::string> frames_;
};

class BindError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ServerOptions {
    std::string address = "0.0.0.0";
    unsigned short port = 8080;
    std::size_t io_threads = 2;
    std::size_t llm_threads = 4;
    bool handle_signals = true;
};

class Server {
public:
    // Binds immediately; throws BindError.
    Server(PipelineServices services, ServerOptions options);
    ~Server();

    Server(const Server&) = delete;
    Server& operator=(const Server&) = delete;

    unsigned short port() const noexcept;

    // Blocks until stop() or SIGINT/SIGTERM.
    void run();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace agora::net
