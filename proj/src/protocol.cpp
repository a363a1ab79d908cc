#include "lpirsi/protocol.hpp"

#include "lpirsi/schemes.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstring>
#include <fstream>
#include <future>
#include <mutex>
#include <sstream>

namespace lpirsi {

namespace {

constexpr std::uint8_t kTypeQuery = 'Q';
constexpr std::uint8_t kTypeAnswer = 'A';

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(std::uint8_t(v >> 8));
    out.push_back(std::uint8_t(v));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int shift = 24; shift >= 0; shift -= 8) out.push_back(std::uint8_t(v >> shift));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int shift = 56; shift >= 0; shift -= 8) out.push_back(std::uint8_t(v >> shift));
}

struct Reader {
    const std::uint8_t* data;
    std::size_t size;
    std::size_t pos = 0;

    void need(std::size_t n) const {
        if (pos + n > size) throw WireError("truncated frame");
    }
    std::uint8_t u8() {
        need(1);
        return data[pos++];
    }
    std::uint16_t u16() {
        need(2);
        std::uint16_t v = std::uint16_t(data[pos] << 8 | data[pos + 1]);
        pos += 2;
        return v;
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v = v << 8 | data[pos + std::size_t(i)];
        pos += 4;
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v = v << 8 | data[pos + std::size_t(i)];
        pos += 8;
        return v;
    }
};

std::vector<std::uint8_t> finish_frame(std::vector<std::uint8_t> payload) {
    if (payload.size() > kMaxPayload) throw WireError("payload exceeds 1 MiB");
    std::vector<std::uint8_t> frame;
    frame.reserve(payload.size() + 4);
    put_u32(frame, std::uint32_t(payload.size()));
    frame.insert(frame.end(), payload.begin(), payload.end());
    return frame;
}

}  // namespace

std::vector<std::uint8_t> encode_frame(const QueryMessage& msg) {
    std::vector<std::uint8_t> p;
    p.push_back(kTypeQuery);
    put_u64(p, msg.session_id);
    put_u16(p, msg.servers);
    put_u16(p, msg.messages);
    put_u64(p, msg.modulus);
    if (msg.indices.size() != msg.messages) throw WireError("query must carry K indices");
    for (std::uint16_t idx : msg.indices) put_u16(p, idx);
    return finish_frame(std::move(p));
}

std::vector<std::uint8_t> encode_frame(const AnswerMessage& msg) {
    std::vector<std::uint8_t> p;
    p.push_back(kTypeAnswer);
    put_u64(p, msg.session_id);
    p.push_back(std::uint8_t(msg.kind));
    switch (msg.kind) {
        case AnswerKind::Empty: break;
        case AnswerKind::Symbol: put_u64(p, msg.value); break;
        case AnswerKind::Error: put_u32(p, msg.error_code); break;
        default: throw WireError("unknown answer kind");
    }
    return finish_frame(std::move(p));
}

WireMessage decode_frame(const std::vector<std::uint8_t>& frame) {
    Reader r{frame.data(), frame.size()};
    std::uint32_t length = r.u32();
    if (length > kMaxPayload) throw WireError("declared payload exceeds 1 MiB");
    if (std::size_t(length) + 4 != frame.size()) throw WireError("declared length does not match buffer");
    std::uint8_t type = r.u8();
    if (type == kTypeQuery) {
        QueryMessage msg;
        msg.session_id = r.u64();
        msg.servers = r.u16();
        msg.messages = r.u16();
        msg.modulus = r.u64();
        msg.indices.resize(msg.messages);
        for (auto& idx : msg.indices) idx = r.u16();
        if (r.pos != frame.size()) throw WireError("trailing bytes in query frame");
        return msg;
    }
    if (type == kTypeAnswer) {
        AnswerMessage msg;
        msg.session_id = r.u64();
        std::uint8_t kind = r.u8();
        if (kind > 2) throw WireError("unknown answer kind");
        msg.kind = AnswerKind(kind);
        if (msg.kind == AnswerKind::Symbol) msg.value = r.u64();
        if (msg.kind == AnswerKind::Error) msg.error_code = r.u32();
        if (r.pos != frame.size()) throw WireError("trailing bytes in answer frame");
        return msg;
    }
    throw WireError("unknown message type");
}

AnswerMessage server_handle(const QueryMessage& query, const Database& db, Symbol modulus) {
    AnswerMessage out;
    out.session_id = query.session_id;
    const int k = db.count();
    const int n = k > 0 ? db.message(1).length() + 1 : 0;
    if (query.messages != k || query.servers != n || query.modulus != modulus) {
        out.kind = AnswerKind::Error;
        out.error_code = kErrParamMismatch;
        return out;
    }
    Query q;
    q.indices.reserve(query.indices.size());
    for (std::uint16_t idx : query.indices) {
        if (idx >= n) {
            out.kind = AnswerKind::Error;
            out.error_code = kErrBadQuery;
            return out;
        }
        q.indices.push_back(idx);
    }
    Answer a = compute_answer(q, db, modulus);
    if (a) {
        out.kind = AnswerKind::Symbol;
        out.value = *a;
    } else {
        out.kind = AnswerKind::Empty;
    }
    return out;
}

void write_database(const std::string& path, const Database& db, Symbol modulus) {
    std::ofstream out(path);
    if (!out) throw DomainError("cannot open database file for writing: " + path);
    const int k = db.count();
    const int l = k > 0 ? db.message(1).length() : 0;
    out << "LPIRSI1\n" << k << "\n" << l << "\n" << modulus << "\n";
    for (const auto& m : db.messages) {
        for (int i = 0; i < l; ++i) out << m.subpackets[std::size_t(i)] << (i + 1 == l ? "" : " ");
        out << "\n";
    }
    if (!out) throw DomainError("failed writing database file: " + path);
}

StoredDatabase read_database(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open database file: " + path);
    std::string magic;
    std::getline(in, magic);
    if (magic != "LPIRSI1") throw DomainError("bad database file header: " + path);
    long long k = 0, l = 0;
    StoredDatabase stored;
    in >> k >> l >> stored.modulus;
    if (!in || k < 1 || l < 1 || stored.modulus < 2)
        throw DomainError("malformed database file: " + path);
    stored.db.messages.resize(std::size_t(k));
    for (auto& m : stored.db.messages) {
        m.subpackets.resize(std::size_t(l));
        for (auto& s : m.subpackets) {
            in >> s;
            if (!in || s >= stored.modulus) throw DomainError("malformed database symbols: " + path);
        }
    }
    return stored;
}

ServerConfig parse_server_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open server config: " + path);
    ServerConfig cfg;
    bool have_port = false, have_q = false, have_k = false, have_l = false, have_db = false;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw DomainError("bad config line: " + line);
        std::string key = line.substr(0, eq);
        std::string value = line.substr(eq + 1);
        if (key == "port") {
            cfg.port = std::uint16_t(std::stoul(value));
            have_port = true;
        } else if (key == "q") {
            cfg.modulus = std::stoull(value);
            have_q = true;
        } else if (key == "K") {
            cfg.messages = std::stoi(value);
            have_k = true;
        } else if (key == "L") {
            cfg.subpackets = std::stoi(value);
            have_l = true;
        } else if (key == "database") {
            cfg.database_path = value;
            have_db = true;
        } else {
            throw DomainError("unknown config key: " + key);
        }
    }
    if (!(have_port && have_q && have_k && have_l && have_db))
        throw DomainError("config must set port, q, K, L, database");
    return cfg;
}

// --- sockets ---------------------------------------------------------------

namespace {

void write_all(int fd, const std::uint8_t* data, std::size_t size) {
    while (size > 0) {
        ssize_t n = ::send(fd, data, size, MSG_NOSIGNAL);
        if (n <= 0) throw TransportError("socket write failed");
        data += n;
        size -= std::size_t(n);
    }
}

// Returns false on clean EOF before the first byte.
bool read_all(int fd, std::uint8_t* data, std::size_t size) {
    std::size_t got = 0;
    while (got < size) {
        ssize_t n = ::recv(fd, data + got, size - got, 0);
        if (n == 0) {
            if (got == 0) return false;
            throw TransportError("connection closed mid-frame");
        }
        if (n < 0) throw TransportError("socket read failed");
        got += std::size_t(n);
    }
    return true;
}

bool read_frame(int fd, std::vector<std::uint8_t>& frame) {
    std::uint8_t header[4];
    if (!read_all(fd, header, 4)) return false;
    std::uint32_t length = 0;
    for (int i = 0; i < 4; ++i) length = length << 8 | header[i];
    if (length > kMaxPayload) throw WireError("declared payload exceeds 1 MiB");
    frame.assign(header, header + 4);
    frame.resize(4 + length);
    if (length > 0 && !read_all(fd, frame.data() + 4, length))
        throw TransportError("connection closed mid-frame");
    return true;
}

struct FdGuard {
    int fd;
    ~FdGuard() {
        if (fd >= 0) ::close(fd);
    }
};

int connect_to(const Endpoint& ep) {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    if (::getaddrinfo(ep.host.c_str(), std::to_string(ep.port).c_str(), &hints, &res) != 0)
        throw TransportError("cannot resolve " + ep.host);
    int fd = -1;
    for (addrinfo* ai = res; ai; ai = ai->ai_next) {
        fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
        if (fd < 0) continue;
        if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
        ::close(fd);
        fd = -1;
    }
    ::freeaddrinfo(res);
    if (fd < 0)
        throw TransportError("cannot connect to " + ep.host + ":" + std::to_string(ep.port));
    return fd;
}

}  // namespace

AnswerMessage TcpTransport::exchange(int server, const QueryMessage& query) {
    if (server < 1 || server > server_count()) throw DomainError("server index out of range");
    FdGuard sock{connect_to(endpoints_[std::size_t(server - 1)])};
    auto frame = encode_frame(query);
    write_all(sock.fd, frame.data(), frame.size());
    std::vector<std::uint8_t> reply;
    if (!read_frame(sock.fd, reply)) throw TransportError("server closed without answering");
    auto msg = decode_frame(reply);
    auto* answer = std::get_if<AnswerMessage>(&msg);
    if (!answer) throw ProtocolViolation("expected an answer frame");
    return *answer;
}

RetrievalResult run_retrieval(const SchemeParams& params, const RetrievalRequest& req,
                              const std::map<int, Message>& side_info, Transport& transport,
                              std::mt19937_64& rng, const Database* self_check) {
    params.validate();
    req.validate(params);
    if (transport.server_count() != params.servers)
        throw DomainError("transport endpoint count must equal N");
    for (int s : req.side_info)
        if (!side_info.count(s)) throw DomainError("missing side information message");

    const std::uint64_t session = rng();
    RandomPattern pattern = sample_pattern(params, req, rng);
    RetrievalResult result;
    result.queries = build_queries(pattern, req, params);

    std::vector<QueryMessage> messages(std::size_t(params.servers));
    for (int n = 1; n <= params.servers; ++n) {
        QueryMessage& m = messages[std::size_t(n - 1)];
        m.session_id = session;
        m.servers = std::uint16_t(params.servers);
        m.messages = std::uint16_t(params.messages);
        m.modulus = params.modulus;
        for (int idx : result.queries[std::size_t(n - 1)].indices)
            m.indices.push_back(std::uint16_t(idx));
    }

    // all N exchanges in flight at once, joined in server order
    std::vector<std::future<AnswerMessage>> pending;
    pending.reserve(std::size_t(params.servers));
    for (int n = 1; n <= params.servers; ++n)
        pending.push_back(std::async(std::launch::async, [&, n] {
            return transport.exchange(n, messages[std::size_t(n - 1)]);
        }));

    const int n_star = pattern.inference_server();
    for (int n = 1; n <= params.servers; ++n) {
        AnswerMessage reply = pending[std::size_t(n - 1)].get();
        if (reply.kind == AnswerKind::Error)
            throw ProtocolViolation("server " + std::to_string(n) + " rejected the query, code " +
                                    std::to_string(reply.error_code));
        if (reply.session_id != session)
            throw ProtocolViolation("session id mismatch in answer");
        if (reply.kind == AnswerKind::Empty && n != n_star)
            throw ProtocolViolation("empty answer from non-inference server");
        result.answers.push_back(reply.kind == AnswerKind::Symbol ? Answer(reply.value)
                                                                  : std::nullopt);
        auto qf = encode_frame(messages[std::size_t(n - 1)]);
        auto af = encode_frame(reply);
        result.transcript.insert(result.transcript.end(), qf.begin(), qf.end());
        result.transcript.insert(result.transcript.end(), af.begin(), af.end());
    }

    result.downloaded = downloaded_symbols(result.answers);
    result.message = decode(result.answers, result.queries, pattern, side_info, req, params);
    if (self_check && result.message != self_check->message(req.demand))
        throw ProtocolViolation("decode self-check failed");
    return result;
}

// --- server ------------------------------------------------------------------

TcpServer::TcpServer(Database db, Symbol modulus, std::uint16_t port)
    : db_(std::move(db)), modulus_(modulus), port_(port) {
    listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listen_fd_ < 0) throw TransportError("cannot create listening socket");
    int one = 1;
    ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_ANY);
    addr.sin_port = htons(port_);
    if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
        ::close(listen_fd_);
        throw TransportError("cannot bind port " + std::to_string(port_));
    }
    if (::listen(listen_fd_, 16) != 0) {
        ::close(listen_fd_);
        throw TransportError("listen failed");
    }
    socklen_t len = sizeof(addr);
    ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
}

TcpServer::~TcpServer() { stop(); }

void TcpServer::accept_loop() {
    std::vector<std::thread> workers;
    std::mutex workers_mutex;
    while (running_) {
        int client = ::accept(listen_fd_, nullptr, nullptr);
        if (client < 0) break;  // listener closed
        std::lock_guard lock(workers_mutex);
        workers.emplace_back([this, client] {
            FdGuard sock{client};
            try {
                std::vector<std::uint8_t> frame;
                while (read_frame(sock.fd, frame)) {
                    auto msg = decode_frame(frame);
                    auto* query = std::get_if<QueryMessage>(&msg);
                    if (!query) break;
                    auto reply = encode_frame(server_handle(*query, db_, modulus_));
                    write_all(sock.fd, reply.data(), reply.size());
                }
            } catch (const std::exception&) {
                // malformed frame or dead peer: drop the connection
            }
        });
    }
    std::lock_guard lock(workers_mutex);
    for (auto& w : workers) w.join();
}

void TcpServer::start() {
    running_ = true;
    accept_thread_ = std::thread([this] { accept_loop(); });
}

void TcpServer::run() {
    running_ = true;
    accept_loop();
}

void TcpServer::stop() {
    if (!running_.exchange(false)) {
        if (listen_fd_ >= 0) {
            ::close(listen_fd_);
            listen_fd_ = -1;
        }
        return;
    }
    ::shutdown(listen_fd_, SHUT_RDWR);
    ::close(listen_fd_);
    listen_fd_ = -1;
    if (accept_thread_.joinable()) accept_thread_.join();
}

}  // namespace lpirsi
