#include "fasteit/result_io.hpp"

#include "fasteit/errors.hpp"

#include <bit>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <ctime>
#include <fstream>
#include <sstream>

#ifndef FASTEIT_VERSION
#define FASTEIT_VERSION "0.0.0"
#endif

namespace fasteit {

using nlohmann::json;

namespace {

static_assert(std::endian::native == std::endian::little, "result blobs are written little-endian");

std::uint64_t fnv1a(const std::string& bytes)
{
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string hex64(std::uint64_t v)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::filesystem::path blob_path(const std::filesystem::path& manifest)
{
    std::filesystem::path p = manifest;
    p += ".bin";
    return p;
}

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw IoError("error reading '" + path.string() + "'");
    return buf.str();
}

}  // namespace

const char* code_version() { return FASTEIT_VERSION; }

Provenance current_provenance()
{
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm utc{};
    gmtime_r(&now, &utc);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &utc);
    return {FASTEIT_VERSION, buf};
}

void save_result(const std::filesystem::path& manifest, const RunResult& r)
{
    const std::vector<std::pair<std::string, const std::vector<double>*>> arrays{
        {"time_axis", &r.time_axis}, {"intensity", &r.intensity}, {"filtered_intensity", &r.filtered_intensity}};

    std::string blob;
    json layout = json::array();
    for (const auto& [name, data] : arrays) {
        layout.push_back({{"name", name}, {"offset", blob.size()}, {"length", data->size()}});
        blob.append(reinterpret_cast<const char*>(data->data()), data->size() * sizeof(double));
    }

    json metrics = json::object();
    for (const auto& [k, v] : r.metrics) {
        // JSON has no NaN; keep the bit pattern instead.
        char buf[32];
        std::snprintf(buf, sizeof buf, "%a", v);
        metrics[k] = buf;
    }

    const std::filesystem::path bin = blob_path(manifest);
    json j = {
        {"format", "fasteit-result"},
        {"version", kResultFormatVersion},
        {"config", config_to_json(r.config)},
        {"metrics", metrics},
        {"provenance", {{"code_version", r.provenance.code_version}, {"timestamp", r.provenance.timestamp}}},
        {"blob", bin.filename().string()},
        {"blob_bytes", blob.size()},
        {"checksum", hex64(fnv1a(blob))},
        {"arrays", layout},
    };

    {
        std::ofstream out(bin, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write '" + bin.string() + "'");
        out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
        if (!out) throw IoError("error writing '" + bin.string() + "'");
    }
    std::ofstream out(manifest, std::ios::trunc);
    if (!out) throw IoError("cannot write '" + manifest.string() + "'");
    out << j.dump(2) << '\n';
    if (!out) throw IoError("error writing '" + manifest.string() + "'");
}

RunResult load_result(const std::filesystem::path& manifest)
{
    const std::string text = read_file(manifest);
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw FormatError(manifest.string() + ": manifest is not valid JSON (" + e.what() + ")");
    }

    RunResult r;
    try {
        if (j.at("format") != "fasteit-result") throw FormatError(manifest.string() + ": not a result manifest");
        const int version = j.at("version").get<int>();
        if (version != kResultFormatVersion)
            throw FormatError(manifest.string() + ": result format version " + std::to_string(version) +
                              " is incompatible with this build (expects " + std::to_string(kResultFormatVersion) + ")");

        const std::filesystem::path bin = manifest.parent_path() / j.at("blob").get<std::string>();
        const std::string blob = read_file(bin);
        if (blob.size() != j.at("blob_bytes").get<std::size_t>())
            throw FormatError(bin.string() + ": blob holds " + std::to_string(blob.size()) + " bytes, manifest expects " +
                              std::to_string(j.at("blob_bytes").get<std::size_t>()));
        if (hex64(fnv1a(blob)) != j.at("checksum").get<std::string>())
            throw FormatError(bin.string() + ": checksum mismatch");

        for (const json& a : j.at("arrays")) {
            const std::string name = a.at("name");
            const std::size_t offset = a.at("offset");
            const std::size_t length = a.at("length");
            if (offset > blob.size() || length > (blob.size() - offset) / sizeof(double))
                throw FormatError(manifest.string() + ": array '" + name + "' lies outside the blob");
            std::vector<double> v(length);
            std::memcpy(v.data(), blob.data() + offset, length * sizeof(double));
            if (name == "time_axis")
                r.time_axis = std::move(v);
            else if (name == "intensity")
                r.intensity = std::move(v);
            else if (name == "filtered_intensity")
                r.filtered_intensity = std::move(v);
            else
                throw FormatError(manifest.string() + ": unknown array '" + name + "'");
        }

        for (const auto& [k, v] : j.at("metrics").items()) {
            const std::string s = v.get<std::string>();
            char* end = nullptr;
            const double x = std::strtod(s.c_str(), &end);
            if (end == s.c_str() || *end != '\0') throw FormatError(manifest.string() + ": bad metric '" + k + "'");
            r.metrics[k] = x;
        }
        r.provenance.code_version = j.at("provenance").at("code_version");
        r.provenance.timestamp = j.at("provenance").at("timestamp");
        r.config = config_from_json(j.at("config"));
    } catch (const json::exception& e) {
        throw FormatError(manifest.string() + ": malformed manifest (" + e.what() + ")");
    } catch (const ConfigError& e) {
        throw FormatError(manifest.string() + ": embedded config is invalid (" + e.what() + ")");
    }
    return r;
}

}  // namespace fasteit
