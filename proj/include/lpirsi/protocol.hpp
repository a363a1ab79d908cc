#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "lpirsi/core.hpp"

namespace lpirsi {

// Wire format: 4-byte big-endian payload length, then the payload. All
// integers big-endian. Payloads:
//   query : 'Q' u8 | session u64 | N u16 | K u16 | q u64 | K x index u16
//   answer: 'A' u8 | session u64 | kind u8 | value u64 (kind 1) / code u32 (kind 2)
constexpr std::size_t kMaxPayload = 1 << 20;

constexpr std::uint32_t kErrParamMismatch = 1;
constexpr std::uint32_t kErrBadQuery = 2;

struct QueryMessage {
    std::uint64_t session_id = 0;
    std::uint16_t servers = 0;   // N, echoed for validation
    std::uint16_t messages = 0;  // K
    std::uint64_t modulus = 0;   // q
    std::vector<std::uint16_t> indices;  // K entries, each < N

    bool operator==(const QueryMessage&) const = default;
};

enum class AnswerKind : std::uint8_t { Empty = 0, Symbol = 1, Error = 2 };

struct AnswerMessage {
    std::uint64_t session_id = 0;
    AnswerKind kind = AnswerKind::Empty;
    std::uint64_t value = 0;      // present iff kind == Symbol
    std::uint32_t error_code = 0;  // present iff kind == Error

    bool operator==(const AnswerMessage&) const = default;
};

using WireMessage = std::variant<QueryMessage, AnswerMessage>;

std::vector<std::uint8_t> encode_frame(const QueryMessage& msg);
std::vector<std::uint8_t> encode_frame(const AnswerMessage& msg);

/// Parse one complete frame (length prefix included). Throws WireError on
/// truncation, oversize or unknown type/kind bytes.
WireMessage decode_frame(const std::vector<std::uint8_t>& frame);

/// Stateless per-request handler: validates the parameter echo and wraps
/// compute_answer. Mismatches yield an error answer, never an exception.
AnswerMessage server_handle(const QueryMessage& query, const Database& db, Symbol modulus);

// --- flat database file ---------------------------------------------------
// "LPIRSI1\n", then K, L, q as decimal lines, then K x L decimal symbols
// row-major.

struct StoredDatabase {
    Database db;
    Symbol modulus = 0;
};

void write_database(const std::string& path, const Database& db, Symbol modulus);
StoredDatabase read_database(const std::string& path);

/// key=value lines: port, q, K, L, database.
struct ServerConfig {
    std::uint16_t port = 0;
    Symbol modulus = 0;
    int messages = 0;
    int subpackets = 0;
    std::string database_path;
};

ServerConfig parse_server_config(const std::string& path);

// --- transports -------------------------------------------------------------

class Transport {
public:
    virtual ~Transport() = default;
    virtual int server_count() const = 0;
    /// One query/answer round trip with server n (1-based). Thread-safe.
    virtual AnswerMessage exchange(int server, const QueryMessage& query) = 0;
};

class InProcessTransport : public Transport {
public:
    InProcessTransport(Database db, Symbol modulus, int servers)
        : db_(std::move(db)), modulus_(modulus), servers_(servers) {}
    int server_count() const override { return servers_; }
    AnswerMessage exchange(int, const QueryMessage& query) override {
        return server_handle(query, db_, modulus_);
    }
    const Database& database() const { return db_; }

private:
    Database db_;
    Symbol modulus_;
    int servers_;
};

struct Endpoint {
    std::string host;
    std::uint16_t port = 0;
};

/// One TCP connection per exchange; a retrieval is a single round trip.
class TcpTransport : public Transport {
public:
    explicit TcpTransport(std::vector<Endpoint> endpoints) : endpoints_(std::move(endpoints)) {}
    int server_count() const override { return static_cast<int>(endpoints_.size()); }
    AnswerMessage exchange(int server, const QueryMessage& query) override;

private:
    std::vector<Endpoint> endpoints_;
};

// --- retrieval runner -------------------------------------------------------

struct RetrievalResult {
    Message message;
    int downloaded = 0;
    std::vector<Query> queries;
    std::vector<Answer> answers;
    /// Encoded query+answer frames in server order; identical across
    /// transports for the same seed.
    std::vector<std::uint8_t> transcript;
};

/// Samples one pattern, queries all N servers concurrently, decodes. When
/// `self_check` is given the reconstructed message is compared against it.
RetrievalResult run_retrieval(const SchemeParams& params, const RetrievalRequest& req,
                              const std::map<int, Message>& side_info, Transport& transport,
                              std::mt19937_64& rng, const Database* self_check = nullptr);

/// Minimal concurrent TCP server: one accept loop, one thread per connection,
/// frames on a connection handled sequentially. No cross-request state.
class TcpServer {
public:
    TcpServer(Database db, Symbol modulus, std::uint16_t port);  // port 0 = ephemeral
    ~TcpServer();

    std::uint16_t port() const { return port_; }
    void start();  // background accept loop
    void stop();
    void run();  // blocking accept loop (CLI serve mode)

private:
    void accept_loop();

    Database db_;
    Symbol modulus_;
    std::uint16_t port_;
    int listen_fd_ = -1;
    std::atomic<bool> running_{false};
    std::thread accept_thread_;
};

}  // namespace lpirsi
