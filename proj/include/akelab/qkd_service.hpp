#pragma once

#include <map>
#include <string>
#include <unistd.h>
#include "json.hpp"

#include "akelab/bytes.hpp"
#include "akelab/qkd_oracle.hpp"
#include "akelab/rng.hpp"

namespace akelab {

/// Line-oriented JSON front end for the key-delivery oracle, mirroring the
/// two standard delivery methods plus the adversarial ones. Keys travel
/// hex-encoded, key ids as decimal integers. Sessions are registered with
/// their (owner, peer) so the delivery check works without a game attached.
class QkdService {
public:
    explicit QkdService(uint64_t seed) : rng_(seed) {}

    QkdOracle& oracle() { return oracle_; }

    void register_session(SessionId sid, PartyId owner, PartyId peer) {
        directory_[sid] = PartyPair{owner, peer};
    }

    std::string handle_line(const std::string& line) {
        nlohmann::json reply = handle(line);
        return reply.dump();
    }

private:
    nlohmann::json handle(const std::string& line) {
        nlohmann::json request = nlohmann::json::parse(line, nullptr, false);
        if (request.is_discarded() || !request.is_object())
            return {{"error", "malformed request"}};
        if (!request.contains("method") || !request["method"].is_string())
            return {{"error", "missing method"}};
        std::string method = request["method"];
        try {
            if (method == "register_session") return do_register(request);
            if (method == "get_key") return do_get_key(request);
            if (method == "get_key_with_id") return do_get_key_with_id(request);
            if (method == "leak") return do_leak(request);
            if (method == "override") return do_override(request);
            if (method == "key_holders") return do_key_holders(request);
        } catch (const std::exception& e) {
            return {{"error", e.what()}};
        }
        return {{"error", "unknown method: " + method}};
    }

    static uint64_t require_u64(const nlohmann::json& request, const char* field) {
        if (!request.contains(field) || !request[field].is_number_unsigned())
            throw std::invalid_argument(std::string("missing or invalid field: ") + field);
        return request[field].get<uint64_t>();
    }

    nlohmann::json do_register(const nlohmann::json& request) {
        SessionId sid = require_u64(request, "sid");
        PartyId owner = PartyId(require_u64(request, "owner"));
        PartyId peer = PartyId(require_u64(request, "peer"));
        register_session(sid, owner, peer);
        return {{"ok", true}};
    }

    nlohmann::json do_get_key(const nlohmann::json& request) {
        SessionId sid = require_u64(request, "sid");
        uint64_t len = require_u64(request, "len");
        auto [kid, key] = oracle_.get_key(sid, size_t(len), rng_);
        return {{"kid", kid}, {"key", to_hex(key)}};
    }

    nlohmann::json do_get_key_with_id(const nlohmann::json& request) {
        SessionId sid = require_u64(request, "sid");
        KeyId kid = require_u64(request, "kid");
        auto key = oracle_.get_key_with_id(sid, kid, directory());
        if (!key) return {{"key", nullptr}};
        return {{"key", to_hex(*key)}};
    }

    nlohmann::json do_leak(const nlohmann::json& request) {
        KeyId kid = require_u64(request, "kid");
        auto key = oracle_.leak(kid);
        nlohmann::json reply;
        reply["key"] = key ? nlohmann::json(to_hex(*key)) : nlohmann::json(nullptr);
        reply["flag"] = flag_name(oracle_.flag(kid));
        return reply;
    }

    nlohmann::json do_override(const nlohmann::json& request) {
        KeyId kid = require_u64(request, "kid");
        if (!request.contains("key") || !request["key"].is_string())
            throw std::invalid_argument("missing or invalid field: key");
        auto key = from_hex(request["key"].get<std::string>());
        if (!key) throw std::invalid_argument("key is not valid hex");
        oracle_.override_key(kid, *key);
        return {{"ok", true}};
    }

    nlohmann::json do_key_holders(const nlohmann::json& request) {
        KeyId kid = require_u64(request, "kid");
        auto [sent, recv] = oracle_.key_holders(kid);
        nlohmann::json reply;
        reply["sent_sid"] = sent ? nlohmann::json(*sent) : nlohmann::json(nullptr);
        reply["recv_sids"] = recv;
        return reply;
    }

    static std::string flag_name(std::optional<QkdKeyFlag> flag) {
        if (!flag) return "unknown";
        switch (*flag) {
        case QkdKeyFlag::Honest: return "honest";
        case QkdKeyFlag::Leaked: return "leaked";
        case QkdKeyFlag::Corrupt: return "corrupt";
        }
        return "unknown";
    }

    SessionDirectory directory() const {
        return [this](SessionId sid) -> std::optional<PartyPair> {
            auto it = directory_.find(sid);
            if (it == directory_.end()) return std::nullopt;
            return it->second;
        };
    }

    QkdOracle oracle_;
    Rng rng_;
    std::map<SessionId, PartyPair> directory_;
};

/// Serves newline-delimited requests on a connected stream descriptor until
/// the peer closes. Malformed requests produce an error reply and keep the
/// stream open.
inline void serve_stream(QkdService& service, int fd) {
    std::string buffer;
    char chunk[4096];
    for (;;) {
        ssize_t n = ::read(fd, chunk, sizeof(chunk));
        if (n <= 0) return;
        buffer.append(chunk, size_t(n));
        size_t pos;
        while ((pos = buffer.find('\n')) != std::string::npos) {
            std::string line = buffer.substr(0, pos);
            buffer.erase(0, pos + 1);
            if (line.empty()) continue;
            std::string reply = service.handle_line(line) + "\n";
            size_t off = 0;
            while (off < reply.size()) {
                ssize_t w = ::write(fd, reply.data() + off, reply.size() - off);
                if (w <= 0) return;
                off += size_t(w);
            }
        }
    }
}

} // namespace akelab
