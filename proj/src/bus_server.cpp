#include "artts/bus_server.hpp"

#include "artts/fsio.hpp"
#include "artts/station.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <openssl/evp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <chrono>
#include <cstring>
#include <deque>
#include <fstream>
#include <map>
#include <sstream>

namespace artts {

namespace {

using SteadyClock = std::chrono::steady_clock;

constexpr std::size_t kMaxPendingBytes = 64 * 1024;  // unterminated input per connection
constexpr std::size_t kMaxWsMessage = 64 * 1024;
constexpr std::size_t kMaxHttpHeader = 16 * 1024;
constexpr int kMaxCatchUpScans = 50;

std::string errno_text(const char* what) { return std::string(what) + ": " + std::strerror(errno); }

void set_nonblocking(int fd) { ::fcntl(fd, F_SETFL, ::fcntl(fd, F_GETFL, 0) | O_NONBLOCK); }

int listen_on(const std::string& host, std::uint16_t port, std::uint16_t& bound) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  hints.ai_flags = AI_PASSIVE;
  addrinfo* res = nullptr;
  const std::string port_text = std::to_string(port);
  if (int rc = ::getaddrinfo(host.empty() ? nullptr : host.c_str(), port_text.c_str(), &hints, &res);
      rc != 0)
    throw BusServerError("cannot resolve " + host + ": " + ::gai_strerror(rc));
  int fd = ::socket(res->ai_family, res->ai_socktype, 0);
  if (fd < 0) {
    ::freeaddrinfo(res);
    throw BusServerError(errno_text("socket"));
  }
  int one = 1;
  ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  if (::bind(fd, res->ai_addr, res->ai_addrlen) != 0 || ::listen(fd, 64) != 0) {
    std::string msg = errno_text(("cannot bind " + host + ":" + port_text).c_str());
    ::freeaddrinfo(res);
    ::close(fd);
    throw BusServerError(msg);
  }
  ::freeaddrinfo(res);
  sockaddr_in addr{};
  socklen_t len = sizeof addr;
  ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
  bound = ntohs(addr.sin_port);
  set_nonblocking(fd);
  return fd;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return std::string(s);
}

std::string websocket_accept(const std::string& key) {
  const std::string input = key + "258EAFA5-E914-47DA-95CA-C5AB0DC85B11";
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(input.data(), input.size(), digest, &len, EVP_sha1(), nullptr);
  unsigned char b64[64];
  int n = EVP_EncodeBlock(b64, digest, static_cast<int>(len));
  return std::string(reinterpret_cast<char*>(b64), static_cast<std::size_t>(n));
}

std::string ws_frame(std::uint8_t opcode, std::string_view payload) {
  std::string f;
  f += static_cast<char>(0x80 | opcode);
  if (payload.size() < 126) {
    f += static_cast<char>(payload.size());
  } else if (payload.size() <= 0xFFFF) {
    f += static_cast<char>(126);
    f += static_cast<char>((payload.size() >> 8) & 0xFF);
    f += static_cast<char>(payload.size() & 0xFF);
  } else {
    f += static_cast<char>(127);
    for (int i = 7; i >= 0; --i) f += static_cast<char>((payload.size() >> (8 * i)) & 0xFF);
  }
  f += payload;
  return f;
}

std::string_view mime_type(const std::filesystem::path& p) {
  static const std::map<std::string, std::string_view> kTypes = {
      {".html", "text/html; charset=utf-8"},
      {".htm", "text/html; charset=utf-8"},
      {".js", "text/javascript; charset=utf-8"},
      {".mjs", "text/javascript; charset=utf-8"},
      {".css", "text/css; charset=utf-8"},
      {".json", "application/json"},
      {".map", "application/json"},
      {".svg", "image/svg+xml"},
      {".png", "image/png"},
      {".ico", "image/x-icon"},
      {".txt", "text/plain; charset=utf-8"},
  };
  auto it = kTypes.find(lower(p.extension().string()));
  return it == kTypes.end() ? "application/octet-stream" : it->second;
}

std::string http_response(int status, std::string_view reason, std::string_view type,
                          std::string_view body) {
  std::ostringstream os;
  os << "HTTP/1.1 " << status << ' ' << reason << "\r\n"
     << "Content-Type: " << type << "\r\n"
     << "Content-Length: " << body.size() << "\r\n"
     << "Connection: close\r\n\r\n"
     << body;
  return os.str();
}

std::optional<std::string> url_decode(std::string_view s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '%') {
      out += s[i];
      continue;
    }
    if (i + 2 >= s.size()) return std::nullopt;
    int v = 0;
    auto [p, ec] = std::from_chars(s.data() + i + 1, s.data() + i + 3, v, 16);
    if (ec != std::errc{} || p != s.data() + i + 3) return std::nullopt;
    out += static_cast<char>(v);
    i += 2;
  }
  return out;
}

}  // namespace

std::pair<std::string, std::uint16_t> parse_endpoint(std::string_view text) {
  std::string host = "127.0.0.1";
  std::string_view port = text;
  if (auto colon = text.rfind(':'); colon != std::string_view::npos) {
    if (colon > 0) host = std::string(text.substr(0, colon));
    port = text.substr(colon + 1);
  }
  unsigned v = 0;
  auto [p, ec] = std::from_chars(port.data(), port.data() + port.size(), v);
  if (port.empty() || ec != std::errc{} || p != port.data() + port.size() || v > 65535)
    throw BusServerError("invalid endpoint '" + std::string(text) + "' (expected host:port)");
  return {host, static_cast<std::uint16_t>(v)};
}

struct BusServer::Impl {
  enum class Kind { Tcp, HttpPending, WebSocket };

  struct Conn {
    int fd = -1;
    Kind kind = Kind::Tcp;
    BusCore::ClientId client = 0;  // 0 until attached to the core
    std::string in;
    std::string out;
    std::deque<std::string> lines;  // complete, not yet applied
    bool discarding = false;        // inside an over-long line
    bool closing = false;           // flush `out`, then close
    std::string ws_message;         // fragmented message in progress
  };

  BusCore core;
  ServeOptions options;
  int tcp_fd = -1;
  int bridge_fd = -1;
  int wake[2] = {-1, -1};
  std::uint16_t tcp_port = 0;
  std::uint16_t bridge_port = 0;
  std::map<int, Conn> conns;  // by fd
  std::map<BusCore::ClientId, int> fd_of;

  Impl(Engine engine, ServeOptions opts) : core(std::move(engine), opts.mode), options(std::move(opts)) {
    core.enable_log(options.log_commands);
  }

  ~Impl() {
    for (auto& [fd, c] : conns) ::close(fd);
    for (int fd : {tcp_fd, bridge_fd, wake[0], wake[1]})
      if (fd >= 0) ::close(fd);
  }

  void attach(Conn& c) {
    c.client = core.connect();
    fd_of[c.client] = c.fd;
  }

  void deliver(const std::vector<BusCore::Output>& outputs) {
    for (const auto& o : outputs) {
      auto it = fd_of.find(o.client);
      if (it == fd_of.end()) continue;
      Conn& c = conns.at(it->second);
      if (c.closing) continue;
      const std::string line = o.line + '\n';
      const std::string bytes = c.kind == Kind::WebSocket ? ws_frame(0x1, line) : line;
      if (c.out.size() + bytes.size() > options.max_output_bytes) {
        overflow(c);
        continue;
      }
      c.out += bytes;
    }
  }

  // Slow consumer: one final ERR, then the connection goes away.
  void overflow(Conn& c) {
    const std::string line = bus_error("cap", "output buffer overflow") + '\n';
    c.out += c.kind == Kind::WebSocket ? ws_frame(0x1, line) : line;
    detach(c);
    c.closing = true;
  }

  void detach(Conn& c) {
    if (c.client == 0) return;
    core.disconnect(c.client);
    fd_of.erase(c.client);
    c.client = 0;
    c.lines.clear();
  }

  void close_conn(int fd) {
    auto it = conns.find(fd);
    if (it == conns.end()) return;
    detach(it->second);
    ::close(fd);
    conns.erase(it);
  }

  void accept_from(int listen_fd, Kind kind) {
    while (true) {
      int fd = ::accept(listen_fd, nullptr, nullptr);
      if (fd < 0) return;
      set_nonblocking(fd);
      int one = 1;
      ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
      Conn& c = conns[fd];
      c.fd = fd;
      c.kind = kind;
      if (kind == Kind::Tcp) attach(c);
    }
  }

  void queue_line(Conn& c, std::string line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    c.lines.push_back(std::move(line));
  }

  void split_tcp(Conn& c) {
    std::size_t start = 0;
    while (true) {
      auto lf = c.in.find('\n', start);
      if (lf == std::string::npos) break;
      if (c.discarding) {
        c.discarding = false;
      } else {
        queue_line(c, c.in.substr(start, lf - start));
      }
      start = lf + 1;
    }
    c.in.erase(0, start);
    if (c.in.size() > kMaxPendingBytes) {
      // Too long to ever be valid; answer now and drop the rest of the line.
      if (!c.discarding) c.lines.push_back(std::string(kMaxLineBytes + 1, ' '));
      c.discarding = true;
      c.in.clear();
    }
  }

  void handle_http(Conn& c) {
    auto end = c.in.find("\r\n\r\n");
    if (end == std::string::npos) {
      if (c.in.size() > kMaxHttpHeader) {
        c.out += http_response(431, "Request Header Fields Too Large", "text/plain", "header too large\n");
        c.closing = true;
      }
      return;
    }
    std::istringstream head(c.in.substr(0, end));
    c.in.erase(0, end + 4);
    std::string request_line;
    std::getline(head, request_line);
    std::map<std::string, std::string> headers;
    for (std::string h; std::getline(head, h);) {
      auto colon = h.find(':');
      if (colon == std::string::npos) continue;
      headers[lower(trim(h.substr(0, colon)))] = trim(h.substr(colon + 1));
    }
    std::istringstream rl(request_line);
    std::string method, target, version;
    rl >> method >> target >> version;

    const bool upgrade = lower(headers["upgrade"]) == "websocket";
    if (upgrade) {
      const std::string key = headers["sec-websocket-key"];
      if (method != "GET" || key.empty() || headers["sec-websocket-version"] != "13") {
        c.out += http_response(400, "Bad Request", "text/plain", "invalid websocket upgrade\n");
        c.closing = true;
        return;
      }
      c.out +=
          "HTTP/1.1 101 Switching Protocols\r\n"
          "Upgrade: websocket\r\n"
          "Connection: Upgrade\r\n"
          "Sec-WebSocket-Accept: " +
          websocket_accept(key) + "\r\n\r\n";
      c.kind = Kind::WebSocket;
      attach(c);
      if (!c.in.empty()) handle_ws(c);
      return;
    }
    if (method != "GET" && method != "HEAD") {
      c.out += http_response(405, "Method Not Allowed", "text/plain", "method not allowed\n");
    } else {
      c.out += serve_static(target);
      if (method == "HEAD") c.out.erase(c.out.find("\r\n\r\n") + 4);
    }
    c.closing = true;
  }

  std::string serve_static(const std::string& target) {
    auto not_found = [] { return http_response(404, "Not Found", "text/plain", "not found\n"); };
    auto path = url_decode(target.substr(0, target.find('?')));
    if (!path || path->empty() || path->front() != '/')
      return http_response(400, "Bad Request", "text/plain", "bad request\n");
    std::filesystem::path rel = std::filesystem::path(path->substr(1)).lexically_normal();
    for (const auto& part : rel)
      if (part == "..") return not_found();
    if (rel.empty() || rel == ".") rel = "index.html";

    if (options.hmi_dir) {
      std::filesystem::path file = *options.hmi_dir / rel;
      std::error_code ec;
      if (std::filesystem::is_directory(file, ec)) file /= "index.html";
      if (std::filesystem::is_regular_file(file, ec)) {
        try {
          return http_response(200, "OK", mime_type(file), read_text(file));
        } catch (const IoError&) {
          return not_found();
        }
      }
    }
    if (rel == "station.json")
      return http_response(200, "OK", "application/json", station_json(core.engine().station()));
    return not_found();
  }

  void ws_fail(Conn& c, std::uint16_t code) {
    std::string payload;
    payload += static_cast<char>(code >> 8);
    payload += static_cast<char>(code & 0xFF);
    c.out += ws_frame(0x8, payload);
    detach(c);
    c.closing = true;
  }

  void handle_ws(Conn& c) {
    while (!c.closing) {
      const auto* b = reinterpret_cast<const unsigned char*>(c.in.data());
      if (c.in.size() < 2) return;
      const bool fin = b[0] & 0x80;
      const std::uint8_t opcode = b[0] & 0x0F;
      const bool masked = b[1] & 0x80;
      std::uint64_t len = b[1] & 0x7F;
      std::size_t pos = 2;
      if (len == 126) {
        if (c.in.size() < 4) return;
        len = (std::uint64_t{b[2]} << 8) | b[3];
        pos = 4;
      } else if (len == 127) {
        if (c.in.size() < 10) return;
        len = 0;
        for (int i = 0; i < 8; ++i) len = (len << 8) | b[2 + i];
        pos = 10;
      }
      if (!masked) return ws_fail(c, 1002);
      if (len > kMaxWsMessage) return ws_fail(c, 1009);
      if (c.in.size() < pos + 4 + len) return;
      const unsigned char* key = b + pos;
      std::string payload(c.in.data() + pos + 4, static_cast<std::size_t>(len));
      for (std::size_t i = 0; i < payload.size(); ++i) payload[i] = static_cast<char>(payload[i] ^ key[i % 4]);
      c.in.erase(0, pos + 4 + static_cast<std::size_t>(len));

      switch (opcode) {
        case 0x0:
        case 0x1:
        case 0x2:
          if (opcode != 0x0) c.ws_message.clear();
          c.ws_message += payload;
          if (c.ws_message.size() > kMaxWsMessage) return ws_fail(c, 1009);
          if (fin) {
            std::string_view msg = c.ws_message;
            while (!msg.empty()) {
              auto lf = msg.find('\n');
              std::string_view line = msg.substr(0, lf);
              if (!line.empty() && line != "\r") queue_line(c, std::string(line));
              if (lf == std::string_view::npos) break;
              msg.remove_prefix(lf + 1);
            }
            c.ws_message.clear();
          }
          break;
        case 0x8:
          c.out += ws_frame(0x8, payload.substr(0, std::min<std::size_t>(payload.size(), 2)));
          detach(c);
          c.closing = true;
          return;
        case 0x9:
          c.out += ws_frame(0xA, payload);
          break;
        case 0xA:
          break;
        default:
          return ws_fail(c, 1002);
      }
    }
  }

  void on_readable(Conn& c) {
    char buf[8192];
    while (true) {
      ssize_t n = ::recv(c.fd, buf, sizeof buf, 0);
      if (n > 0) {
        if (!c.closing) c.in.append(buf, static_cast<std::size_t>(n));
        continue;
      }
      if (n == 0 || (errno != EAGAIN && errno != EWOULDBLOCK && errno != EINTR)) {
        close_conn(c.fd);
        return;
      }
      if (errno == EINTR) continue;
      break;
    }
    if (c.closing) {
      c.in.clear();
      return;
    }
    switch (c.kind) {
      case Kind::Tcp: split_tcp(c); break;
      case Kind::HttpPending: handle_http(c); break;
      case Kind::WebSocket: handle_ws(c); break;
    }
  }

  // One queued line per connection per round, until every queue is empty.
  void apply_queued() {
    bool any = true;
    while (any) {
      any = false;
      for (auto& [fd, c] : conns) {
        if (c.lines.empty() || c.client == 0 || c.closing) continue;
        std::string line = std::move(c.lines.front());
        c.lines.pop_front();
        deliver(core.handle(c.client, line));
        any = true;
      }
    }
  }

  // False when the connection should be closed now.
  bool flush(Conn& c) {
    while (!c.out.empty()) {
      ssize_t n = ::send(c.fd, c.out.data(), c.out.size(), MSG_NOSIGNAL);
      if (n > 0) {
        c.out.erase(0, static_cast<std::size_t>(n));
        continue;
      }
      if (n < 0 && errno == EINTR) continue;
      if (n < 0 && (errno == EAGAIN || errno == EWOULDBLOCK)) return true;
      return false;
    }
    return !c.closing;
  }

  void run() {
    const auto period = std::chrono::milliseconds(core.engine().scan_period_ms());
    auto next_tick = SteadyClock::now() + period;
    bool was_realtime = core.mode() == BusMode::Realtime;
    std::vector<pollfd> fds;
    while (true) {
      const bool realtime = core.mode() == BusMode::Realtime;
      if (realtime && !was_realtime) next_tick = SteadyClock::now() + period;
      was_realtime = realtime;

      int timeout = -1;
      if (realtime) {
        auto wait = std::chrono::ceil<std::chrono::milliseconds>(next_tick - SteadyClock::now());
        timeout = static_cast<int>(std::max<std::int64_t>(0, wait.count()));
      }
      fds.clear();
      fds.push_back({wake[0], POLLIN, 0});
      fds.push_back({tcp_fd, POLLIN, 0});
      if (bridge_fd >= 0) fds.push_back({bridge_fd, POLLIN, 0});
      for (auto& [fd, c] : conns) {
        short ev = POLLIN;
        if (!c.out.empty()) ev |= POLLOUT;
        fds.push_back({fd, ev, 0});
      }
      int rc = ::poll(fds.data(), fds.size(), timeout);
      if (rc < 0 && errno != EINTR) throw BusServerError(errno_text("poll"));

      if (rc > 0) {
        if (fds[0].revents & POLLIN) return;
        if (fds[1].revents & POLLIN) accept_from(tcp_fd, Kind::Tcp);
        if (bridge_fd >= 0 && (fds[2].revents & POLLIN)) accept_from(bridge_fd, Kind::HttpPending);
        for (const auto& p : fds) {
          if (p.fd == wake[0] || p.fd == tcp_fd || p.fd == bridge_fd) continue;
          auto it = conns.find(p.fd);
          if (it == conns.end()) continue;
          if (p.revents & (POLLIN | POLLHUP | POLLERR)) on_readable(it->second);
        }
        apply_queued();
      }

      if (core.mode() == BusMode::Realtime) {
        const auto now = SteadyClock::now();
        int scans = 0;
        while (next_tick <= now && scans < kMaxCatchUpScans) {
          deliver(core.tick());
          next_tick += period;
          ++scans;
        }
        if (next_tick <= now) next_tick = now + period;  // fell too far behind; drop the backlog
      }

      std::vector<int> dead;
      for (auto& [fd, c] : conns)
        if (!flush(c)) dead.push_back(fd);
      for (int fd : dead) close_conn(fd);
    }
  }
};

BusServer::BusServer(Engine engine, ServeOptions options)
    : impl_(std::make_unique<Impl>(std::move(engine), std::move(options))) {
  if (::pipe(impl_->wake) != 0) throw BusServerError(errno_text("pipe"));
  set_nonblocking(impl_->wake[0]);
  set_nonblocking(impl_->wake[1]);
}

BusServer::~BusServer() = default;

void BusServer::start() {
  auto [host, port] = parse_endpoint(impl_->options.listen);
  impl_->tcp_fd = listen_on(host, port, impl_->tcp_port);
  if (impl_->options.bridge) {
    auto [bhost, bport] = parse_endpoint(*impl_->options.bridge);
    impl_->bridge_fd = listen_on(bhost, bport, impl_->bridge_port);
  }
}

void BusServer::run() {
  if (impl_->tcp_fd < 0) throw BusServerError("server not started");
  impl_->run();
}

void BusServer::stop() {
  char b = 1;
  [[maybe_unused]] auto n = ::write(impl_->wake[1], &b, 1);
}

std::uint16_t BusServer::tcp_port() const { return impl_->tcp_port; }
std::uint16_t BusServer::bridge_port() const { return impl_->bridge_port; }
BusCore& BusServer::core() { return impl_->core; }

BusClient::BusClient(const std::string& host, std::uint16_t port) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (::getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &res) != 0)
    throw BusServerError("cannot resolve " + host);
  fd_ = ::socket(res->ai_family, res->ai_socktype, 0);
  if (fd_ < 0 || ::connect(fd_, res->ai_addr, res->ai_addrlen) != 0) {
    std::string msg = errno_text(("cannot connect to " + host + ":" + std::to_string(port)).c_str());
    ::freeaddrinfo(res);
    close();
    throw BusServerError(msg);
  }
  ::freeaddrinfo(res);
  int one = 1;
  ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
}

BusClient::~BusClient() { close(); }

BusClient::BusClient(BusClient&& other) noexcept
    : fd_(std::exchange(other.fd_, -1)), buf_(std::move(other.buf_)) {}

void BusClient::close() {
  if (fd_ >= 0) ::close(fd_);
  fd_ = -1;
}

void BusClient::send_raw(std::string_view bytes) {
  while (!bytes.empty()) {
    ssize_t n = ::send(fd_, bytes.data(), bytes.size(), MSG_NOSIGNAL);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) throw BusServerError(errno_text("send"));
    bytes.remove_prefix(static_cast<std::size_t>(n));
  }
}

void BusClient::send_line(std::string_view line) {
  std::string bytes(line);
  bytes += '\n';
  send_raw(bytes);
}

std::optional<std::string> BusClient::read_line(int timeout_ms) {
  const auto deadline = SteadyClock::now() + std::chrono::milliseconds(timeout_ms);
  while (true) {
    if (auto lf = buf_.find('\n'); lf != std::string::npos) {
      std::string line = buf_.substr(0, lf);
      buf_.erase(0, lf + 1);
      return line;
    }
    if (fd_ < 0) return std::nullopt;
    auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - SteadyClock::now());
    if (left.count() <= 0) return std::nullopt;
    pollfd p{fd_, POLLIN, 0};
    int rc = ::poll(&p, 1, static_cast<int>(left.count()));
    if (rc < 0 && errno == EINTR) continue;
    if (rc <= 0) return std::nullopt;
    char buf[8192];
    ssize_t n = ::recv(fd_, buf, sizeof buf, 0);
    if (n <= 0) return std::nullopt;
    buf_.append(buf, static_cast<std::size_t>(n));
  }
}

std::vector<std::string> BusClient::command(std::string_view line, int timeout_ms) {
  send_line(line);
  std::vector<std::string> out;
  const bool snapshot = line == "SNAPSHOT";
  bool in_snapshot = false;
  while (auto l = read_line(timeout_ms)) {
    out.push_back(*l);
    if (in_snapshot) {
      if (*l == ".") break;
      continue;
    }
    if (l->rfind("EVT ", 0) == 0) continue;
    if (snapshot && l->rfind("OK", 0) == 0) {
      in_snapshot = true;
      continue;
    }
    break;
  }
  return out;
}

}  // namespace artts
