#include "mkvcyl/path_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace mkvcyl {

namespace {

constexpr char kMagic[8] = {'M', 'K', 'V', 'C', 'Y', 'L', 'P', '\0'};
constexpr std::uint32_t kVersion = 2;

template <class T>
T to_le(T v)
{
    if constexpr (std::endian::native == std::endian::big) {
        unsigned char b[sizeof(T)];
        std::memcpy(b, &v, sizeof(T));
        for (std::size_t i = 0; i < sizeof(T) / 2; ++i)
            std::swap(b[i], b[sizeof(T) - 1 - i]);
        std::memcpy(&v, b, sizeof(T));
    }
    return v;
}

template <class T>
void put(std::ostream& os, T v)
{
    v = to_le(v);
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is)
{
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is)
        throw DomainError("read_paths: truncated file");
    return to_le(v);
}

} // namespace

void write_paths(const CylindricalPathSet& ps, const std::string& file)
{
    std::ofstream os(file, std::ios::binary);
    if (!os)
        throw DomainError("write_paths: cannot open " + file);
    os.write(kMagic, sizeof kMagic);
    put<std::uint32_t>(os, kVersion);
    put<std::uint64_t>(os, ps.modes());
    put<std::uint64_t>(os, ps.particles);
    put<std::uint64_t>(os, ps.steps());
    put<double>(os, ps.lattice.horizon);
    put<std::uint64_t>(os, ps.seed);
    put<std::uint32_t>(os, static_cast<std::uint32_t>(ps.generator));
    for (double H : ps.spectrum.hurst)
        put<double>(os, H);
    for (double l : ps.spectrum.weights)
        put<double>(os, l);
    for (double v : ps.fbm)
        put<double>(os, v);
    for (double v : ps.increments)
        put<double>(os, v);
    if (!os)
        throw DomainError("write_paths: write failed for " + file);
}

CylindricalPathSet read_paths(const std::string& file)
{
    std::ifstream is(file, std::ios::binary);
    if (!is)
        throw DomainError("read_paths: cannot open " + file);
    char magic[8];
    is.read(magic, sizeof magic);
    if (!is || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
        throw DomainError("read_paths: bad magic");
    if (get<std::uint32_t>(is) != kVersion)
        throw DomainError("read_paths: unsupported version");
    const auto K = get<std::uint64_t>(is);
    const auto M = get<std::uint64_t>(is);
    const auto N = get<std::uint64_t>(is);
    const double T = get<double>(is);
    CylindricalPathSet ps;
    ps.lattice = TimeLattice(T, N);
    ps.particles = M;
    ps.seed = get<std::uint64_t>(is);
    const auto gen = get<std::uint32_t>(is);
    if (gen > 1)
        throw DomainError("read_paths: unknown generator");
    ps.generator = static_cast<Generator>(gen);
    ps.spectrum.horizon = T;
    ps.spectrum.hurst.resize(K);
    ps.spectrum.weights.resize(K);
    for (auto& H : ps.spectrum.hurst)
        H = get<double>(is);
    for (auto& l : ps.spectrum.weights)
        l = get<double>(is);
    ps.fbm.resize(M * K * (N + 1));
    ps.increments.resize(M * K * N);
    for (auto& v : ps.fbm)
        v = get<double>(is);
    for (auto& v : ps.increments)
        v = get<double>(is);
    return ps;
}

} // namespace mkvcyl
