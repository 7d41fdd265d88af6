#include "expertprompt/hash.hpp"

#include <openssl/evp.h>

#include <array>
#include <fstream>
#include <sstream>

#include "expertprompt/errors.hpp"

namespace expertprompt {

namespace {

std::array<unsigned char, 32> sha256_raw(std::string_view bytes) {
    std::array<unsigned char, 32> md{};
    unsigned int len = 0;
    EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr);
    return md;
}

std::string to_hex(const unsigned char* data, size_t n) {
    static const char* digits = "0123456789abcdef";
    std::string out(n * 2, '0');
    for (size_t i = 0; i < n; ++i) {
        out[2 * i] = digits[data[i] >> 4];
        out[2 * i + 1] = digits[data[i] & 0xf];
    }
    return out;
}

}  // namespace

std::string content_hash(std::string_view bytes) {
    auto md = sha256_raw(bytes);
    return to_hex(md.data(), md.size());
}

uint64_t content_hash_u64(std::string_view bytes) {
    auto md = sha256_raw(bytes);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
        v = (v << 8) | md[static_cast<size_t>(i)];
    }
    return v;
}

std::string file_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open file for hashing: " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) {
        throw IoError("read failure while hashing: " + path);
    }
    return content_hash(buf.str());
}

}  // namespace expertprompt
