#pragma once

#include <charconv>
#include <fstream>
#include <stdexcept>
#include <string>
#include <system_error>

namespace patchdyn {

/// Shortest round-trip decimal representation; byte-stable across platforms.
inline std::string fmt_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    if (res.ec != std::errc{}) throw std::runtime_error("number formatting failed");
    return std::string(buf, res.ptr);
}

class CsvWriter {
  public:
    CsvWriter(const std::string& path, const std::string& header) : out_(path) {
        if (!out_) throw std::runtime_error("cannot open " + path + " for writing");
        out_ << header << '\n';
    }

    template <typename... Ts>
    void row(const Ts&... fields) {
        bool first = true;
        ((out_ << (first ? "" : ","), first = false, write(fields)), ...);
        out_ << '\n';
    }

  private:
    void write(double v) { out_ << fmt_double(v); }
    void write(int v) { out_ << v; }
    void write(long long v) { out_ << v; }
    void write(const std::string& s) { out_ << s; }
    void write(const char* s) { out_ << s; }

    std::ofstream out_;
};

}  // namespace patchdyn
