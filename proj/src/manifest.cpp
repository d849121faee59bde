#include "phom/manifest.hpp"

#include "phom/errors.hpp"

#include <openssl/evp.h>

#include <iomanip>
#include <memory>
#include <sstream>

namespace phom {

std::string sha256_hex(const std::string& bytes)
{
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
        EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1)
        throw Error("sha256: digest failed");
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i)
        os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
    return os.str();
}

std::map<std::string, std::string> module_versions()
{
    std::map<std::string, std::string> v;
    for (const char* m : {"coeffs", "ineq", "oned", "cell", "defect", "homog", "cli"})
        v[m] = kVersion;
    return v;
}

StageTimer::StageTimer(std::vector<StageTime>& sink, std::string name)
    : sink_(sink), name_(std::move(name)), start_(std::chrono::steady_clock::now())
{
}

StageTimer::~StageTimer()
{
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start_;
    sink_.push_back({name_, dt.count()});
}

nlohmann::json RunManifest::to_json() const
{
    nlohmann::json j;
    j["command"] = command;
    j["config_path"] = config_path;
    j["config_hash"] = config_hash;
    j["payload_hash"] = payload_hash;
    j["output_path"] = output_path;
    j["module_versions"] = module_versions();
    j["seed"] = seed;
    j["threads"] = threads;
    j["exit_code"] = exit_code;
    auto& st = j["stages"] = nlohmann::json::array();
    for (const auto& s : stages)
        st.push_back({{"name", s.name}, {"seconds", s.seconds}});
    j["warnings"] = warnings;
    return j;
}

}  // namespace phom
