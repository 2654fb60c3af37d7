#include "voxrefine/binio.hpp"

#include <fstream>
#include <iterator>

namespace voxrefine::binio {

void Writer::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out.write(reinterpret_cast<const char*>(bytes_.data()), static_cast<std::streamsize>(bytes_.size()));
    if (!out) throw IoError("short write: " + path.string());
}

Reader Reader::open(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return Reader(std::move(bytes), path.string());
}

void Reader::expect_magic(std::string_view m) {
    if (remaining() < m.size()) fail("truncated before magic \"" + std::string(m) + "\"");
    if (std::string_view(reinterpret_cast<const char*>(bytes_.data() + pos_), m.size()) != m)
        fail("bad magic, expected \"" + std::string(m) + "\"");
    pos_ += m.size();
}

void Reader::expect_end() const {
    if (!at_end()) fail(std::to_string(remaining()) + " unexpected trailing bytes");
}

}  // namespace voxrefine::binio
