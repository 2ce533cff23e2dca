#ifndef FPVOLSEG_TEXT_IO_HPP
#define FPVOLSEG_TEXT_IO_HPP

#include <filesystem>
#include <string>

namespace fpvolseg {

// Writes via a sibling temp file and rename, so readers never observe a
// partial file.
void write_text_atomic(const std::filesystem::path& path, const std::string& text);

std::string read_text(const std::filesystem::path& path);

} // namespace fpvolseg

#endif
