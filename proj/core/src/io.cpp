#include "xlel/io.hpp"

#include <zlib.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

#include "xlel/errors.hpp"

namespace xlel {

namespace fs = std::filesystem;

// gzread passes uncompressed files through unchanged, so one code path
// serves plain and .gz inputs.
struct InputFile::Impl {
  gzFile file = nullptr;
  ~Impl() {
    if (file != nullptr) gzclose(file);
  }
};

InputFile::InputFile(const fs::path& path) : impl_(std::make_unique<Impl>()), path_(path) {
  impl_->file = gzopen(path.c_str(), "rb");
  if (impl_->file == nullptr) {
    throw_data("cannot open " + path.string() + ": " + std::strerror(errno));
  }
  gzbuffer(impl_->file, 1 << 17);
}

InputFile::~InputFile() = default;
InputFile::InputFile(InputFile&&) noexcept = default;
InputFile& InputFile::operator=(InputFile&&) noexcept = default;

std::size_t InputFile::read(char* buffer, std::size_t size) {
  const int n = gzread(impl_->file, buffer, static_cast<unsigned>(size));
  if (n < 0) {
    int err = 0;
    const char* msg = gzerror(impl_->file, &err);
    throw_data("read error in " + path_.string() + ": " + (msg ? msg : "unknown"));
  }
  return static_cast<std::size_t>(n);
}

LineReader::LineReader(const fs::path& path) : input_(path), buffer_(1 << 17) {}

bool LineReader::fill() {
  if (eof_) return false;
  if (pos_ > 0) {
    std::memmove(buffer_.data(), buffer_.data() + pos_, end_ - pos_);
    end_ -= pos_;
    pos_ = 0;
  }
  if (end_ == buffer_.size()) buffer_.resize(buffer_.size() * 2);
  const std::size_t n = input_.read(buffer_.data() + end_, buffer_.size() - end_);
  if (n == 0) {
    eof_ = true;
    return false;
  }
  end_ += n;
  return true;
}

bool LineReader::next(std::string& line) {
  std::size_t searched = pos_;
  for (;;) {
    const char* begin = buffer_.data() + searched;
    const void* nl = std::memchr(begin, '\n', end_ - searched);
    if (nl != nullptr) {
      const auto stop = static_cast<std::size_t>(static_cast<const char*>(nl) - buffer_.data());
      line.assign(buffer_.data() + pos_, stop - pos_);
      pos_ = stop + 1;
      break;
    }
    const std::size_t consumed = end_ - pos_;
    if (!fill()) {
      if (pos_ == end_) return false;
      line.assign(buffer_.data() + pos_, end_ - pos_);
      pos_ = end_;
      break;
    }
    searched = pos_ + consumed;
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  ++line_number_;
  return true;
}

std::string read_file(const fs::path& path) {
  InputFile in(path);
  std::string out;
  std::vector<char> buf(1 << 16);
  while (const std::size_t n = in.read(buf.data(), buf.size())) out.append(buf.data(), n);
  return out;
}

std::vector<std::string> read_lines(const fs::path& path) {
  LineReader reader(path);
  std::vector<std::string> lines;
  std::string line;
  while (reader.next(line)) lines.push_back(line);
  return lines;
}

void write_file_atomic(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw_data("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw_data("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

void require_file(const fs::path& path, std::string_view what) {
  if (!fs::is_regular_file(path)) {
    throw_data(std::string(what) + " not found: " + path.string());
  }
}

void require_directory(const fs::path& path, std::string_view what) {
  if (!fs::is_directory(path)) {
    throw_data(std::string(what) + " not found: " + path.string());
  }
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t p = text.find(sep, start);
    if (p == std::string_view::npos) {
      out.push_back(text.substr(start));
      return out;
    }
    out.push_back(text.substr(start, p - start));
    start = p + 1;
  }
}

std::string_view trim(std::string_view text) {
  const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; };
  while (!text.empty() && is_space(text.front())) text.remove_prefix(1);
  while (!text.empty() && is_space(text.back())) text.remove_suffix(1);
  return text;
}

}  // namespace xlel
