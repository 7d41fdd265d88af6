#include "expertprompt/text.hpp"

namespace expertprompt {

uint32_t next_codepoint(std::string_view text, size_t& pos) {
    const auto byte = [&](size_t i) { return static_cast<unsigned char>(text[i]); };
    unsigned char b0 = byte(pos);
    if (b0 < 0x80) {
        pos += 1;
        return b0;
    }
    auto is_cont = [&](size_t i) {
        return i < text.size() && (byte(i) & 0xc0) == 0x80;
    };
    if ((b0 & 0xe0) == 0xc0 && is_cont(pos + 1)) {
        uint32_t cp = (uint32_t(b0 & 0x1f) << 6) | (byte(pos + 1) & 0x3f);
        pos += 2;
        return cp >= 0x80 ? cp : 0xfffd;
    }
    if ((b0 & 0xf0) == 0xe0 && is_cont(pos + 1) && is_cont(pos + 2)) {
        uint32_t cp = (uint32_t(b0 & 0x0f) << 12) | (uint32_t(byte(pos + 1) & 0x3f) << 6) |
                      (byte(pos + 2) & 0x3f);
        pos += 3;
        return cp >= 0x800 ? cp : 0xfffd;
    }
    if ((b0 & 0xf8) == 0xf0 && is_cont(pos + 1) && is_cont(pos + 2) && is_cont(pos + 3)) {
        uint32_t cp = (uint32_t(b0 & 0x07) << 18) | (uint32_t(byte(pos + 1) & 0x3f) << 12) |
                      (uint32_t(byte(pos + 2) & 0x3f) << 6) | (byte(pos + 3) & 0x3f);
        pos += 4;
        return (cp >= 0x10000 && cp <= 0x10ffff) ? cp : 0xfffd;
    }
    pos += 1;
    return 0xfffd;
}

bool is_unicode_space(uint32_t cp) {
    switch (cp) {
        case 0x09:
        case 0x0a:
        case 0x0b:
        case 0x0c:
        case 0x0d:
        case 0x20:
        case 0x85:
        case 0xa0:
        case 0x1680:
        case 0x2028:
        case 0x2029:
        case 0x202f:
        case 0x205f:
        case 0x3000:
            return true;
        default:
            return cp >= 0x2000 && cp <= 0x200a;
    }
}

}  // namespace expertprompt
