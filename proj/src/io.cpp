#include "hetnet/io.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <openssl/evp.h>
#include <zlib.h>

#include "hetnet/errors.hpp"

namespace hetnet {

std::string sha256_hex(const std::string& bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw Error(ErrorKind::Precondition, "SHA-256 digest failed");
    std::ostringstream os;
    for (unsigned i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
    return os.str();
}

namespace {

void put16(std::string& s, unsigned v) {
    s.push_back(char(v & 0xff));
    s.push_back(char((v >> 8) & 0xff));
}

void put32(std::string& s, unsigned long v) {
    put16(s, unsigned(v & 0xffff));
    put16(s, unsigned((v >> 16) & 0xffff));
}

std::string utc_timestamp() {
    auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

} // namespace

std::string zip_store(const std::vector<std::pair<std::string, std::string>>& files) {
    std::string out, central;
    // fixed DOS date 1980-01-01 00:00 keeps archives byte-identical across runs
    const unsigned dos_time = 0, dos_date = (1 << 5) | 1;
    for (const auto& [name, data] : files) {
        if (data.size() > 0xffffffffUL || out.size() > 0xffffffffUL)
            throw Error(ErrorKind::Precondition, "zip_store: member too large");
        unsigned long crc = crc32(0L, reinterpret_cast<const Bytef*>(data.data()), uInt(data.size()));
        unsigned long offset = out.size();
        put32(out, 0x04034b50UL);
        put16(out, 10);
        put16(out, 0);
        put16(out, 0);
        put16(out, dos_time);
        put16(out, dos_date);
        put32(out, crc);
        put32(out, data.size());
        put32(out, data.size());
        put16(out, unsigned(name.size()));
        put16(out, 0);
        out += name;
        out += data;

        put32(central, 0x02014b50UL);
        put16(central, 20);
        put16(central, 10);
        put16(central, 0);
        put16(central, 0);
        put16(central, dos_time);
        put16(central, dos_date);
        put32(central, crc);
        put32(central, data.size());
        put32(central, data.size());
        put16(central, unsigned(name.size()));
        put16(central, 0);
        put16(central, 0);
        put16(central, 0);
        put16(central, 0);
        put32(central, 0);
        put32(central, offset);
        central += name;
    }
    unsigned long cd_offset = out.size();
    out += central;
    put32(out, 0x06054b50UL);
    put16(out, 0);
    put16(out, 0);
    put16(out, unsigned(files.size()));
    put16(out, unsigned(files.size()));
    put32(out, central.size());
    put32(out, cd_offset);
    put16(out, 0);
    return out;
}

ArtifactWriter::ArtifactWriter(std::filesystem::path dir, std::string command, nlohmann::json config)
    : dir_(std::move(dir)), command_(std::move(command)), config_(std::move(config)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw Error(ErrorKind::Config, "cannot create output directory " + dir_.string() + ": " + ec.message());
}

void ArtifactWriter::write(const std::string& name, const std::string& content, const std::string& kind) {
    std::ofstream f(dir_ / name, std::ios::binary);
    if (!f) throw Error(ErrorKind::Config, "cannot write " + (dir_ / name).string());
    f << content;
    if (!f) throw Error(ErrorKind::Config, "write failed for " + (dir_ / name).string());
    artifacts_.push_back({name, kind, sha256_hex(content), content.size()});
    if (kind == "csv") csv_.emplace_back(name, content);
}

void ArtifactWriter::write_json(const std::string& name, const nlohmann::json& j) {
    write(name, j.dump(2) + "\n", "json");
}

void ArtifactWriter::write_plot_bundle(const std::string& name) {
    nlohmann::json members = nlohmann::json::array();
    for (const auto& [n, data] : csv_) members.push_back({{"name", n}, {"sha256", sha256_hex(data)}, {"bytes", data.size()}});
    auto files = csv_;
    files.emplace_back("bundle_index.json", nlohmann::json{{"command", command_}, {"members", members}}.dump(2) + "\n");
    write(name, zip_store(files), "zip");
}

void ArtifactWriter::finish(const nlohmann::json& summary, bool pass) {
    nlohmann::json arts = nlohmann::json::array();
    for (const auto& a : artifacts_) arts.push_back({{"name", a.name}, {"kind", a.kind}, {"sha256", a.sha256}, {"bytes", a.bytes}});
    nlohmann::json idx = {{"command", command_}, {"config", config_},   {"artifacts", arts},
                          {"summary", summary},  {"pass", pass},        {"timestamp", utc_timestamp()}};
    std::ofstream f(dir_ / "index.json");
    if (!f) throw Error(ErrorKind::Config, "cannot write index.json");
    f << idx.dump(2) << "\n";
}

} // namespace hetnet
