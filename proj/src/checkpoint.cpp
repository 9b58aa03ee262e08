#include "metarl/checkpoint.hpp"

#include <fstream>
#include <stdexcept>

namespace metarl {

namespace {

constexpr std::uint32_t kMagic = 0x4c524d31u;  // "1MRL"

template <typename T>
void write_raw(std::ostream& out, const T& value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_raw(std::istream& in) {
    T value{};
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in) throw std::runtime_error("checkpoint: truncated stream");
    return value;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const MetaSystem& sys) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("checkpoint: cannot open " + path.string());

    write_raw(out, kMagic);
    write_raw<std::uint8_t>(out, static_cast<std::uint8_t>(sys.variant));
    write_raw<std::uint8_t>(out, static_cast<std::uint8_t>(sys.state_variant));
    write_raw<std::uint8_t>(out, static_cast<std::uint8_t>(sys.encoder.mode));

    write_raw(out, sys.agent.state_dim);
    write_raw(out, sys.agent.latent_dim);
    write_raw(out, sys.agent.gamma);
    write_raw(out, sys.agent.target_blend);
    write_raw(out, sys.agent.action_limit);
    write_raw(out, sys.agent.explore_std);

    write_raw(out, sys.env.dt);
    write_raw(out, sys.env.noise_std);
    write_raw(out, sys.env.u_max);
    write_raw(out, sys.env.setpoints_per_episode);
    write_raw(out, sys.env.steps_per_setpoint);
    write_raw(out, sys.env.setpoint_low);
    write_raw(out, sys.env.setpoint_high);
    write_raw(out, sys.env.initial_output);

    nn::save(out, sys.agent.actor);
    nn::save(out, sys.agent.critic);
    nn::save(out, sys.agent.actor_target);
    nn::save(out, sys.agent.critic_target);
    nn::save(out, sys.encoder.tuple_net);
    nn::save(out, sys.encoder.head);
    if (!out) throw std::runtime_error("checkpoint: write failed for " + path.string());
}

MetaSystem load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("checkpoint: cannot open " + path.string());
    if (read_raw<std::uint32_t>(in) != kMagic)
        throw std::runtime_error("checkpoint: bad magic in " + path.string());

    MetaSystem sys;
    sys.variant = static_cast<ControllerVariant>(read_raw<std::uint8_t>(in));
    sys.state_variant = static_cast<StateVariant>(read_raw<std::uint8_t>(in));
    sys.encoder.mode = static_cast<EmbedMode>(read_raw<std::uint8_t>(in));

    sys.agent.state_dim = read_raw<int>(in);
    sys.agent.latent_dim = read_raw<int>(in);
    sys.agent.gamma = read_raw<double>(in);
    sys.agent.target_blend = read_raw<double>(in);
    sys.agent.action_limit = read_raw<double>(in);
    sys.agent.explore_std = read_raw<double>(in);

    sys.env.dt = read_raw<double>(in);
    sys.env.noise_std = read_raw<double>(in);
    sys.env.u_max = read_raw<double>(in);
    sys.env.setpoints_per_episode = read_raw<int>(in);
    sys.env.steps_per_setpoint = read_raw<int>(in);
    sys.env.setpoint_low = read_raw<double>(in);
    sys.env.setpoint_high = read_raw<double>(in);
    sys.env.initial_output = read_raw<double>(in);

    sys.agent.actor = nn::load(in);
    sys.agent.critic = nn::load(in);
    sys.agent.actor_target = nn::load(in);
    sys.agent.critic_target = nn::load(in);
    sys.encoder.tuple_net = nn::load(in);
    sys.encoder.head = nn::load(in);
    return sys;
}

}  // namespace metarl
