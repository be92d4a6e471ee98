#include "semcom/transport.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstring>
#include <stdexcept>

namespace semcom {

namespace {

struct Pipe {
    std::mutex m;
    std::condition_variable cv;
    std::deque<std::uint8_t> buf;
    bool closed = false;
};

class InprocStream : public ByteStream {
public:
    InprocStream(std::shared_ptr<Pipe> rx, std::shared_ptr<Pipe> tx)
        : rx_(std::move(rx)), tx_(std::move(tx)) {}

    ~InprocStream() override {
        std::lock_guard lk(tx_->m);
        tx_->closed = true;
        tx_->cv.notify_all();
    }

    void write_all(const std::uint8_t* data, std::size_t len) override {
        std::lock_guard lk(tx_->m);
        if (tx_->closed) throw std::runtime_error("inproc: peer closed");
        tx_->buf.insert(tx_->buf.end(), data, data + len);
        tx_->cv.notify_all();
    }

    void read_exact(std::uint8_t* data, std::size_t len) override {
        std::unique_lock lk(rx_->m);
        rx_->cv.wait(lk, [&] { return rx_->buf.size() >= len || rx_->closed; });
        if (rx_->buf.size() < len) throw std::runtime_error("inproc: stream closed mid-read");
        for (std::size_t i = 0; i < len; ++i) {
            data[i] = rx_->buf.front();
            rx_->buf.pop_front();
        }
    }

private:
    std::shared_ptr<Pipe> rx_, tx_;
};

}  // namespace

std::pair<std::unique_ptr<ByteStream>, std::unique_ptr<ByteStream>> make_inproc_pair() {
    auto a = std::make_shared<Pipe>();
    auto b = std::make_shared<Pipe>();
    return {std::make_unique<InprocStream>(a, b), std::make_unique<InprocStream>(b, a)};
}

TcpStream::~TcpStream() {
    if (fd_ >= 0) ::close(fd_);
}

void TcpStream::write_all(const std::uint8_t* data, std::size_t len) {
    std::size_t sent = 0;
    while (sent < len) {
        const ssize_t n = ::send(fd_, data + sent, len - sent, 0);
        if (n <= 0) throw std::runtime_error("tcp: send failed");
        sent += static_cast<std::size_t>(n);
    }
}

void TcpStream::read_exact(std::uint8_t* data, std::size_t len) {
    std::size_t got = 0;
    while (got < len) {
        const ssize_t n = ::recv(fd_, data + got, len - got, 0);
        if (n <= 0) throw std::runtime_error("tcp: connection closed mid-read");
        got += static_cast<std::size_t>(n);
    }
}

TcpListener::TcpListener(std::uint16_t port) : fd_(-1), port_(port) {
    fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd_ < 0) throw std::runtime_error("tcp: socket() failed");
    int one = 1;
    ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = htons(port);
    if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
        ::close(fd_);
        throw std::runtime_error("tcp: bind failed on port " + std::to_string(port));
    }
    if (::listen(fd_, 1) != 0) {
        ::close(fd_);
        throw std::runtime_error("tcp: listen failed");
    }
    socklen_t alen = sizeof(addr);
    ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &alen);
    port_ = ntohs(addr.sin_port);
}

TcpListener::~TcpListener() {
    if (fd_ >= 0) ::close(fd_);
}

std::unique_ptr<ByteStream> TcpListener::accept() {
    const int cfd = ::accept(fd_, nullptr, nullptr);
    if (cfd < 0) throw std::runtime_error("tcp: accept failed");
    int one = 1;
    ::setsockopt(cfd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    return std::make_unique<TcpStream>(cfd);
}

std::unique_ptr<ByteStream> tcp_connect(const std::string& host, std::uint16_t port) {
    const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) throw std::runtime_error("tcp: socket() failed");
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
        ::close(fd);
        throw std::runtime_error("tcp: bad host " + host);
    }
    if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
        ::close(fd);
        throw std::runtime_error("tcp: connect to " + host + ":" + std::to_string(port) +
                                 " failed");
    }
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    return std::make_unique<TcpStream>(fd);
}

}  // namespace semcom
