#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <string>
#include <utility>

namespace semcom {

/// Reliable ordered byte stream shared by the in-process and TCP transports.
class ByteStream {
public:
    virtual ~ByteStream() = default;
    virtual void write_all(const std::uint8_t* data, std::size_t len) = 0;
    virtual void read_exact(std::uint8_t* data, std::size_t len) = 0;
};

/// Pair of connected in-process streams (duplex queues).
std::pair<std::unique_ptr<ByteStream>, std::unique_ptr<ByteStream>> make_inproc_pair();

class TcpStream : public ByteStream {
public:
    explicit TcpStream(int fd) : fd_(fd) {}
    ~TcpStream() override;
    TcpStream(const TcpStream&) = delete;
    TcpStream& operator=(const TcpStream&) = delete;

    void write_all(const std::uint8_t* data, std::size_t len) override;
    void read_exact(std::uint8_t* data, std::size_t len) override;

private:
    int fd_;
};

class TcpListener {
public:
    /// Binds localhost; port 0 picks a free port (see port()).
    explicit TcpListener(std::uint16_t port);
    ~TcpListener();

    std::uint16_t port() const { return port_; }
    std::unique_ptr<ByteStream> accept();

private:
    int fd_;
    std::uint16_t port_;
};

std::unique_ptr<ByteStream> tcp_connect(const std::string& host, std::uint16_t port);

}  // namespace semcom
