#include "rlhedge/nn/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "rlhedge/errors.hpp"

namespace rlhedge::nn {

namespace {

constexpr std::array<char, 8> kMagic = {'R', 'L', 'H', 'E', 'D', 'G', 'E', '1'};

template <typename U>
void put_le(std::ostream& out, U value) {
    std::array<char, sizeof(U)> bytes{};
    for (std::size_t i = 0; i < sizeof(U); ++i) bytes[i] = static_cast<char>((value >> (8 * i)) & 0xff);
    out.write(bytes.data(), bytes.size());
}

template <typename U>
U get_le(std::istream& in) {
    std::array<unsigned char, sizeof(U)> bytes{};
    in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
    if (!in) throw ValidationError("checkpoint is truncated");
    U value = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) value |= static_cast<U>(bytes[i]) << (8 * i);
    return value;
}

}  // namespace

template <typename Real>
void write_mlp(std::ostream& out, const Mlp<Real>& net) {
    out.write(kMagic.data(), kMagic.size());
    put_le<std::uint32_t>(out, kCheckpointVersion);
    put_le<std::uint32_t>(out, net.output_activation() == OutputActivation::logistic ? 1u : 0u);
    put_le<std::uint64_t>(out, net.layer_sizes().size());
    for (auto s : net.layer_sizes()) put_le<std::uint64_t>(out, s);
    put_le<std::uint64_t>(out, net.parameter_count());
    for (Real p : net.parameters()) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(static_cast<double>(p)));
}

template <typename Real>
Mlp<Real> read_mlp(std::istream& in) {
    std::array<char, 8> magic{};
    in.read(magic.data(), magic.size());
    if (!in || magic != kMagic) throw ValidationError("not a network checkpoint (bad magic)");
    const auto version = get_le<std::uint32_t>(in);
    if (version != kCheckpointVersion) throw ValidationError("unsupported checkpoint version " + std::to_string(version));
    const auto activation = get_le<std::uint32_t>(in);
    if (activation > 1) throw ValidationError("checkpoint has an unknown output activation");
    const auto n_sizes = get_le<std::uint64_t>(in);
    if (n_sizes < 2 || n_sizes > 64) throw ValidationError("checkpoint has an implausible layer count");
    std::vector<std::size_t> sizes(n_sizes);
    for (auto& s : sizes) s = static_cast<std::size_t>(get_le<std::uint64_t>(in));

    Mlp<Real> net(sizes, activation == 1 ? OutputActivation::logistic : OutputActivation::identity);
    const auto n_params = get_le<std::uint64_t>(in);
    if (n_params != net.parameter_count()) throw ValidationError("checkpoint parameter count does not match layers");
    for (auto& p : net.parameters()) p = static_cast<Real>(std::bit_cast<double>(get_le<std::uint64_t>(in)));
    return net;
}

template <typename Real>
void save_mlp(const std::string& path, const Mlp<Real>& net) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot open checkpoint for writing: " + path);
    write_mlp(out, net);
}

template <typename Real>
Mlp<Real> load_mlp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open checkpoint: " + path);
    return read_mlp<Real>(in);
}

template void write_mlp<float>(std::ostream&, const Mlp<float>&);
template void write_mlp<double>(std::ostream&, const Mlp<double>&);
template Mlp<float> read_mlp<float>(std::istream&);
template Mlp<double> read_mlp<double>(std::istream&);
template void save_mlp<float>(const std::string&, const Mlp<float>&);
template void save_mlp<double>(const std::string&, const Mlp<double>&);
template Mlp<float> load_mlp<float>(const std::string&);
template Mlp<double> load_mlp<double>(const std::string&);

}  // namespace rlhedge::nn
