#include "agora/server.hpp"

#include "agora/gateway.hpp"

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <spdlog/spdlog.h>

#include <mutex>
#include <thread>

namespace agora::net {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

bool OutboundQueue::push(std::string frame)
{
    if (frames_.size() >= capacity_) {
        return false;
    }
    frames_.push_back(std::move(frame));
    return true;
}

namespace {

class StrandExecutor final : public Executor {
public:
    explicit StrandExecutor(asio::io_context& ioc) : strand_(asio::make_strand(ioc)) {}
    void post(std::function<void()> work) override { asio::post(strand_, std::move(work)); }

private:
    asio::strand<asio::io_context::executor_type> strand_;
};

// Blocking backend calls run on a separate pool; completions hop back to the
// room's executor.
class PoolRunner final : public AsyncRunner {
public:
    PoolRunner(asio::thread_pool& pool, Executor& room) : pool_(pool), room_(room) {}

    void run(std::function<Completion()> work, std::function<void(Completion)> done) override
    {
        asio::post(pool_, [work = std::move(work), done = std::move(done), &room = room_]() mutable {
            auto c = work();
            room.post([done = std::move(done), c = std::move(c)] { done(c); });
        });
    }

private:
    asio::thread_pool& pool_;
    Executor& room_;
};

class WsSession final : public Connection, public std::enable_shared_from_this<WsSession> {
public:
    WsSession(tcp::socket&& socket, Gateway& gateway) : ws_(std::move(socket)), gateway_(gateway) {}

    void start(http::request<http::string_body> req)
    {
        ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
        ws_.async_accept(req, beast::bind_front_handler(&WsSession::on_accept, shared_from_this()));
    }

    void send(std::string frame) override
    {
        asio::post(ws_.get_executor(), [self = shared_from_this(), frame = std::move(frame)]() mutable {
            if (self->closed_) {
                return;
            }
            if (!self->queue_.push(std::move(frame))) {
                spdlog::warn("outbound queue full ({} frames); closing connection", self->queue_.capacity());
                self->do_close();
                return;
            }
            if (!self->writing_) {
                self->do_write();
            }
        });
    }

    void close() override
    {
        asio::post(ws_.get_executor(), [self = shared_from_this()] { self->do_close(); });
    }

private:
    void on_accept(beast::error_code ec)
    {
        if (ec) {
            spdlog::debug("websocket accept failed: {}", ec.message());
            return;
        }
        ws_.text(true);
        do_read();
    }

    void do_read()
    {
        ws_.async_read(buffer_, beast::bind_front_handler(&WsSession::on_read, shared_from_this()));
    }

    void on_read(beast::error_code ec, std::size_t)
    {
        if (ec) {
            closed_ = true;
            gateway_.on_disconnect(shared_from_this());
            return;
        }
        std::string text = beast::buffers_to_string(buffer_.data());
        buffer_.consume(buffer_.size());
        gateway_.on_frame(shared_from_this(), text);
        do_read();
    }

    void do_write()
    {
        writing_ = true;
        ws_.async_write(asio::buffer(queue_.front()),
                        beast::bind_front_handler(&WsSession::on_write, shared_from_this()));
    }

    void on_write(beast::error_code ec, std::size_t)
    {
        writing_ = false;
        if (ec) {
            closed_ = true;
            return;
        }
        queue_.pop();
        if (!queue_.empty() && !closed_) {
            do_write();
        }
    }

    void do_close()
    {
        if (closed_) {
            return;
        }
        closed_ = true;
        ws_.async_close(websocket::close_code::policy_error, [self = shared_from_this()](beast::error_code) {});
    }

    websocket::stream<beast::tcp_stream> ws_;
    Gateway& gateway_;
    beast::flat_buffer buffer_;
    OutboundQueue queue_;
    bool writing_ = false;
    bool closed_ = false;
};

class HttpSession : public std::enable_shared_from_this<HttpSession> {
public:
    HttpSession(tcp::socket&& socket, Gateway& gateway) : stream_(std::move(socket)), gateway_(gateway) {}

    void start()
    {
        stream_.expires_after(std::chrono::seconds(30));
        http::async_read(stream_, buffer_, req_, beast::bind_front_handler(&HttpSession::on_read, shared_from_this()));
    }

private:
    void on_read(beast::error_code ec, std::size_t)
    {
        if (ec) {
            return;
        }
        if (websocket::is_upgrade(req_) && req_.target() == "/ws") {
            stream_.expires_never();
            std::make_shared<WsSession>(stream_.release_socket(), gateway_)->start(std::move(req_));
            return;
        }
        auto res = std::make_shared<http::response<http::string_body>>(http::status::not_found, req_.version());
        res->set(http::field::content_type, "text/plain");
        res->body() = "not found\n";
        res->keep_alive(false);
        res->prepare_payload();
        http::async_write(stream_, *res, [self = shared_from_this(), res](beast::error_code, std::size_t) {
            beast::error_code ignored;
            self->stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
        });
    }

    beast::tcp_stream stream_;
    Gateway& gateway_;
    beast::flat_buffer buffer_;
    http::request<http::string_body> req_;
};

} // namespace

struct Server::Impl {
    Impl(PipelineServices services, ServerOptions opts)
        : options(std::move(opts)),
          ioc(static_cast<int>(std::max<std::size_t>(1, options.io_threads))),
          pool(std::max<std::size_t>(1, options.llm_threads)),
          gateway(
              services, [this](const SessionId&) { return std::make_unique<StrandExecutor>(ioc); },
              [this](Executor& room) { return std::make_unique<PoolRunner>(pool, room); }),
          acceptor(ioc),
          ticker(ioc),
          signals(ioc),
          tick_interval(std::max<Millis>(1, services.server.coordinator.tick_interval_ms))
    {
        beast::error_code ec;
        tcp::endpoint endpoint(asio::ip::make_address(options.address, ec), options.port);
        if (ec) {
            throw BindError("bad address " + options.address + ": " + ec.message());
        }
        acceptor.open(endpoint.protocol(), ec);
        if (!ec) {
            acceptor.set_option(asio::socket_base::reuse_address(true), ec);
        }
        if (!ec) {
            acceptor.bind(endpoint, ec);
        }
        if (!ec) {
            acceptor.listen(asio::socket_base::max_listen_connections, ec);
        }
        if (ec) {
            throw BindError("cannot listen on " + options.address + ":" + std::to_string(options.port) + ": " +
                            ec.message());
        }
    }

    void accept()
    {
        acceptor.async_accept(asio::make_strand(ioc), [this](beast::error_code ec, tcp::socket socket) {
            if (ec) {
                if (ec != asio::error::operation_aborted) {
                    spdlog::warn("accept failed: {}", ec.message());
                    accept();
                }
                return;
            }
            std::make_shared<HttpSession>(std::move(socket), gateway)->start();
            accept();
        });
    }

    void tick()
    {
        ticker.expires_after(std::chrono::milliseconds(tick_interval));
        ticker.async_wait([this](beast::error_code ec) {
            if (ec) {
                return;
            }
            gateway.tick_all();
            tick();
        });
    }

    void shutdown()
    {
        asio::post(ioc, [this] {
            beast::error_code ignored;
            acceptor.close(ignored);
            ticker.cancel();
            signals.cancel();
            ioc.stop();
        });
    }

    ServerOptions options;
    asio::io_context ioc;
    asio::thread_pool pool;
    Gateway gateway;
    tcp::acceptor acceptor;
    asio::steady_timer ticker;
    asio::signal_set signals;
    Millis tick_interval;
};

Server::Server(PipelineServices services, ServerOptions options)
    : impl_(std::make_unique<Impl>(services, std::move(options)))
{
}

Server::~Server()
{
    if (impl_) {
        impl_->ioc.stop();
        impl_->pool.stop();
        impl_->pool.join();
    }
}

unsigned short Server::port() const noexcept
{
    beast::error_code ec;
    auto ep = impl_->acceptor.local_endpoint(ec);
    return ec ? 0 : ep.port();
}

void Server::run()
{
    auto& im = *impl_;
    if (im.options.handle_signals) {
        im.signals.add(SIGINT);
        im.signals.add(SIGTERM);
        im.signals.async_wait([this](beast::error_code ec, int sig) {
            if (!ec) {
                spdlog::info("signal {} received, shutting down", sig);
                stop();
            }
        });
    }
    im.accept();
    im.tick();

    const std::size_t n = std::max<std::size_t>(1, im.options.io_threads);
    std::vector<std::thread> threads;
    for (std::size_t i = 1; i < n; ++i) {
        threads.emplace_back([&im] { im.ioc.run(); });
    }
    im.ioc.run();
    for (auto& t : threads) {
        t.join();
    }
}

void Server::stop()
{
    impl_->shutdown();
}

} // namespace agora::net
