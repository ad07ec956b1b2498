#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <openssl/evp.h>
#include <sstream>

#include "wscav/error.hpp"
#include "wscav/io.hpp"

namespace wscav {

std::string sha256_hex(const std::string& bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256: digest failed");
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
    return os.str();
}

std::string sha256_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return sha256_hex(ss.str());
}

CsvWriter::CsvWriter(std::vector<std::string> header) : columns_(header.size()) {
    if (header.empty()) throw std::invalid_argument("CsvWriter: empty header");
    line(header);
}

std::string CsvWriter::format(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    if (x == 0.0) x = 0.0;  // drop the sign of negative zero
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.11e", x);
    return buf;
}

std::string CsvWriter::quote(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

void CsvWriter::line(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) text_ += ',';
        text_ += quote(fields[i]);
    }
    text_ += "\r\n";
}

void CsvWriter::row(const std::vector<Cell>& cells) {
    if (cells.size() != columns_) throw std::invalid_argument("CsvWriter: row width does not match header");
    std::vector<std::string> f;
    f.reserve(cells.size());
    for (const auto& c : cells) {
        if (const double* d = std::get_if<double>(&c)) f.push_back(format(*d));
        else if (const long long* i = std::get_if<long long>(&c)) f.push_back(std::to_string(*i));
        else f.push_back(std::get<std::string>(c));
    }
    line(f);
    ++rows_;
}

}  // namespace wscav
