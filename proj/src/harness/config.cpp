#include "hijacksim/harness/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace hijacksim::harness {

using nlohmann::json;

namespace {

// Wraps a JSON object and rejects keys nobody asked for.
class Obj {
public:
    Obj(const json& j, std::string where) : j_(j), where_(std::move(where)) {
        if (!j_.is_object()) throw ConfigError(where_ + ": expected an object");
    }
    ~Obj() noexcept(false) {
        if (std::uncaught_exceptions() > 0) return;
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            if (!seen_.count(it.key())) throw ConfigError(where_ + ": unknown key '" + it.key() + "'");
        }
    }

    const json* get(const std::string& key) {
        seen_.insert(key);
        auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }
    std::string path(const std::string& key) const { return where_.empty() ? key : where_ + "." + key; }

    template <class T>
    void num(const std::string& key, T& out) {
        const json* v = get(key);
        if (!v) return;
        if (!v->is_number()) throw ConfigError(path(key) + ": expected a number");
        if constexpr (std::is_integral_v<T>) {
            if (v->is_number_float()) {
                const double d = v->get<double>();
                if (d != std::floor(d)) throw ConfigError(path(key) + ": expected an integer");
            }
            if (v->is_number_integer() && !v->is_number_unsigned() && v->get<std::int64_t>() < 0 &&
                std::is_unsigned_v<T>) {
                throw ConfigError(path(key) + ": must be non-negative");
            }
            const double d = v->get<double>();
            if (d < static_cast<double>(std::numeric_limits<T>::lowest()) ||
                d > static_cast<double>(std::numeric_limits<T>::max())) {
                throw ConfigError(path(key) + ": out of range");
            }
            out = v->is_number_float() ? static_cast<T>(d) : v->get<T>();
        } else {
            out = v->get<T>();
        }
    }
    template <class T>
    void opt_num(const std::string& key, std::optional<T>& out) {
        const json* v = get(key);
        if (!v) return;
        if (v->is_null()) {
            out.reset();
            return;
        }
        seen_.erase(key);
        T tmp{};
        num(key, tmp);
        out = tmp;
    }
    void boolean(const std::string& key, bool& out) {
        const json* v = get(key);
        if (!v) return;
        if (!v->is_boolean()) throw ConfigError(path(key) + ": expected true or false");
        out = v->get<bool>();
    }
    void str(const std::string& key, std::string& out) {
        const json* v = get(key);
        if (!v) return;
        if (!v->is_string()) throw ConfigError(path(key) + ": expected a string");
        out = v->get<std::string>();
    }
    void mac(const std::string& key, MacAddress& out) {
        std::string s;
        if (!get(key)) return;
        seen_.erase(key);
        str(key, s);
        out = MacAddress::parse(s);
    }
    void ip(const std::string& key, Ipv4Address& out) {
        std::string s;
        if (!get(key)) return;
        seen_.erase(key);
        str(key, s);
        out = Ipv4Address::parse(s);
    }

private:
    const json& j_;
    std::string where_;
    std::set<std::string> seen_;
};

HostConfig read_host(const json& j, const std::string& where, HostConfig h) {
    Obj o(j, where);
    o.mac("mac", h.mac);
    o.ip("ip", h.ip);
    return h;
}

json host_json(const HostConfig& h) { return {{"mac", h.mac.to_string()}, {"ip", h.ip.to_string()}}; }

double ms(VirtualTime t) { return static_cast<double>(t.count()) / 1000.0; }

defense::PaddingPolicy read_padding(const json& j) {
    Obj o(j, "defenses.padding");
    std::string mode = "none";
    o.str("mode", mode);
    if (mode == "none") return defense::NoPadding{};
    if (mode == "fixed") {
        defense::FixedPadding p;
        o.num("target", p.target);
        return p;
    }
    if (mode == "bucket") {
        defense::BucketPadding p;
        if (const json* b = o.get("buckets")) {
            if (!b->is_array()) throw ConfigError("defenses.padding.buckets: expected an array");
            p.buckets.clear();
            for (const auto& x : *b) {
                if (!x.is_number_unsigned()) throw ConfigError("defenses.padding.buckets: expected sizes");
                p.buckets.push_back(x.get<std::uint32_t>());
            }
        }
        return p;
    }
    if (mode == "random") {
        defense::RandomPadding p;
        o.num("max_extra", p.max_extra);
        o.num("seed", p.seed);
        return p;
    }
    throw ConfigError("defenses.padding.mode: unknown mode '" + mode + "'");
}

json padding_json(const defense::PaddingPolicy& p) {
    if (std::holds_alternative<defense::FixedPadding>(p)) {
        return {{"mode", "fixed"}, {"target", std::get<defense::FixedPadding>(p).target}};
    }
    if (std::holds_alternative<defense::BucketPadding>(p)) {
        return {{"mode", "bucket"}, {"buckets", std::get<defense::BucketPadding>(p).buckets}};
    }
    if (std::holds_alternative<defense::RandomPadding>(p)) {
        const auto& r = std::get<defense::RandomPadding>(p);
        return {{"mode", "random"}, {"max_extra", r.max_extra}, {"seed", r.seed}};
    }
    return {{"mode", "none"}};
}

template <class T>
json opt(const std::optional<T>& v) {
    return v ? json(*v) : json(nullptr);
}

void read_background(const json& j, wifi::BackgroundSpec& b) {
    Obj o(j, "channel.background");
    std::string mode = b.mode == wifi::BackgroundMode::Rate ? "rate" : "interval";
    o.str("mode", mode);
    if (mode == "rate") {
        b.mode = wifi::BackgroundMode::Rate;
    } else if (mode == "interval") {
        b.mode = wifi::BackgroundMode::Interval;
    } else {
        throw ConfigError("channel.background.mode: expected rate or interval");
    }
    o.num("rate_pps", b.rate_pps);
    o.num("interval_s", b.interval_s);
    o.num("packet_ip_len", b.packet_ip_len);
    o.num("tid", b.tid);
}

void read_channel(const json& j, ScenarioConfig& c) {
    Obj o(j, "channel");
    auto& ch = c.channel;
    o.num("loss_prob", ch.loss_prob);
    if (const json* d = o.get("contention_delay_ms")) {
        if (!d->is_array() || d->size() != 2 || !(*d)[0].is_number() || !(*d)[1].is_number()) {
            throw ConfigError("channel.contention_delay_ms: expected [lo, hi]");
        }
        ch.contention_lo = from_millis((*d)[0].get<double>());
        ch.contention_hi = from_millis((*d)[1].get<double>());
    }
    if (const json* cs = o.get("channels")) {
        if (!cs->is_array()) throw ConfigError("channel.channels: expected an array");
        ch.channels.clear();
        for (const auto& x : *cs) {
            if (!x.is_number_integer()) throw ConfigError("channel.channels: expected integers");
            ch.channels.push_back(x.get<int>());
        }
    }
    o.opt_num("victim_channel", c.victim_channel);
    double rtt = ms(ch.rtt);
    o.num("rtt_ms", rtt);
    ch.rtt = from_millis(rtt);
    if (const json* b = o.get("background")) {
        if (b->is_null()) {
            ch.background.reset();
        } else {
            wifi::BackgroundSpec spec;
            read_background(*b, spec);
            ch.background = spec;
        }
    }
    o.boolean("amsdu_enabled", ch.amsdu_enabled);
    if (const json* a = o.get("amsdu")) {
        Obj ao(*a, "channel.amsdu");
        ao.num("max_size", ch.amsdu.max_size);
        std::int64_t us = ch.amsdu.max_delay.count();
        ao.num("max_delay_us", us);
        ch.amsdu.max_delay = VirtualTime{us};
    }
    o.boolean("ap_isolation", ch.ap_isolation);
    if (const json* e = o.get("eviction")) {
        Obj eo(*e, "channel.eviction");
        eo.boolean("enabled", ch.eviction.enabled);
        eo.num("factor", ch.eviction.factor);
        double gap = to_seconds(ch.eviction.gap);
        eo.num("gap_s", gap);
        ch.eviction.gap = from_seconds(gap);
    }
}

void read_inference(const json& j, ScenarioConfig& c) {
    Obj o(j, "inference");
    auto& in = c.inference;
    o.num("k_verify", in.k_verify);
    if (const json* t = o.get("observe_timeout_ms")) {
        if (t->is_null()) {
            c.observe_timeout_auto = true;
        } else {
            if (!t->is_number()) throw ConfigError("inference.observe_timeout_ms: expected a number");
            c.observe_timeout_auto = false;
            in.observe_timeout = from_millis(t->get<double>());
        }
    }
    if (const json* r = o.get("port_range")) {
        if (!r->is_array() || r->size() != 2 || !(*r)[0].is_number_unsigned() || !(*r)[1].is_number_unsigned()) {
            throw ConfigError("inference.port_range: expected [lo, hi]");
        }
        in.port_lo = (*r)[0].get<std::uint32_t>();
        in.port_hi = (*r)[1].get<std::uint32_t>();
    }
    o.num("port_start_offset", in.port_start_offset);
    o.num("probe_pacing", in.probe_pacing);
    o.num("sniffer_count", in.sniffer_count);
    std::string method(attack::to_string(in.port_method));
    o.str("port_method", method);
    if (method == "auto") {
        in.port_method = attack::PortMethod::Auto;
    } else if (method == "synack") {
        in.port_method = attack::PortMethod::SynAck;
    } else if (method == "sack") {
        in.port_method = attack::PortMethod::Sack;
    } else {
        throw ConfigError("inference.port_method: expected auto, synack or sack");
    }
    o.num("flood_listen_s", in.flood_listen_s);
    o.num("flood_threshold_pps", in.flood_threshold_pps);
    o.num("alphabet_check_probes", in.alphabet_check_probes);
    o.boolean("calibrate_alphabet", in.calibrate_alphabet);
    o.num("ack_probe_seq_offset", in.ack_probe_seq_offset);
    o.num("max_reinference", in.max_reinference);
    o.num("noisy_error_rate", in.noisy_error_rate);
    o.num("assumed_loss", in.assumed_loss);
    o.num("noisy_round_cap", in.noisy_round_cap);
}

void read_server(const json& j, ServerInit& s) {
    Obj o(j, "server");
    o.ip("ip", s.ip);
    o.num("port", s.port);
    o.opt_num("rcv_nxt", s.rcv_nxt);
    o.opt_num("rcv_wnd", s.rcv_wnd);
    o.opt_num("snd_una", s.snd_una);
    o.num("inflight", s.inflight);
    o.opt_num("snd_wnd", s.snd_wnd);
    if (const json* op = o.get("options")) {
        Obj oo(*op, "server.options");
        oo.boolean("timestamps", s.options.timestamps_enabled);
        oo.boolean("sack", s.options.sack_enabled);
    }
}

}  // namespace

attack::InferenceConfig ScenarioConfig::resolved_inference() const {
    attack::InferenceConfig in = inference;
    if (observe_timeout_auto) in.observe_timeout = channel.rtt * 2 + channel.contention_hi;
    return in;
}

void ScenarioConfig::validate() const {
    if (!(duration_limit_s > 0.0)) throw ConfigError("duration_limit_s must be > 0");
    if (seq_bits < 8 || seq_bits > 32) throw ConfigError("seq_bits must be in [8, 32]");
    channel.validate();
    const int vc = effective_victim_channel();
    if (std::find(channel.channels.begin(), channel.channels.end(), vc) == channel.channels.end()) {
        throw ConfigError("channel.victim_channel is not one of channel.channels");
    }
    if (channel.eviction.enabled && channel.channels.size() < 2) {
        throw ConfigError("eviction unavailable: the network has a single channel");
    }
    resolved_inference().validate();
    if (server.port == 0) throw ConfigError("server.port must be non-zero");
    if (true_client_port && *true_client_port == 0) throw ConfigError("true_client_port must be non-zero");
    const auto sp = space();
    auto check_seq = [&](const std::optional<std::uint32_t>& v, const char* name) {
        if (v && !sp.contains(*v)) throw ConfigError(std::string(name) + " exceeds the sequence space");
    };
    check_seq(server.rcv_nxt, "server.rcv_nxt");
    check_seq(server.snd_una, "server.snd_una");
    if (server.rcv_wnd && (*server.rcv_wnd == 0 || *server.rcv_wnd >= sp.quarter())) {
        throw ConfigError("server.rcv_wnd must be in [1, 2^(seq_bits-2))");
    }
    // The attack needs an acceptable ACK region; a zero send window leaves none.
    if (server.snd_wnd && (*server.snd_wnd == 0 || *server.snd_wnd >= sp.quarter())) {
        throw ConfigError("server.snd_wnd must be in [1, 2^(seq_bits-2))");
    }
    if (server.inflight > sp.half() - 1) throw ConfigError("server.inflight must be below half the space");
    if (llc_snap_overhead + crypto_mic_overhead + 20 < 16) throw ConfigError("encapsulation overheads too small");

    const std::uint32_t overhead = llc_snap_overhead + crypto_mic_overhead;
    const std::uint32_t largest = 64 + overhead;
    defense::validate(padding, largest);
    if (const auto* b = std::get_if<defense::BucketPadding>(&padding)) {
        const std::uint32_t top = b->buckets.back();
        auto fits = [&](std::uint32_t ip_len, const char* what) {
            if (ip_len + overhead > top) {
                throw ConfigError(std::string("bucket padding overflows for ") + what + " frames");
            }
        };
        if (channel.background) fits(channel.background->packet_ip_len, "background");
        if (live_traffic) fits(40 + 12 + live_traffic->segment_bytes, "live traffic");
        if (action.kind == attack::ActionKind::Inject) {
            fits(40 + static_cast<std::uint32_t>(action.payload.size()), "injected");
        }
        if (uniform_response.enabled) fits(uniform_response.canonical_ip_len, "uniform response");
    }
    if (uniform_response.enabled && uniform_response.canonical_ip_len < 40) {
        throw ConfigError("defenses.uniform_response.canonical_ip_len must be >= 40");
    }
    if (live_traffic) {
        if (!(live_traffic->bytes_per_s > 0.0)) throw ConfigError("live_traffic.bytes_per_s must be > 0");
        if (live_traffic->segment_bytes == 0 || live_traffic->segment_bytes > 1460) {
            throw ConfigError("live_traffic.segment_bytes must be in [1, 1460]");
        }
    }
    if (action.payload.size() > 1460) throw ConfigError("action.payload longer than one segment");
}

Materialized materialize(const ScenarioConfig& cfg) {
    const auto sp = cfg.space();
    Rng rng(derive_seed(cfg.seed, 1));
    // Draw every value unconditionally so fixing one does not shift the others.
    const std::uint32_t r_rcv = sp.wrap(rng.next());
    const std::uint32_t r_una = sp.wrap(rng.next());
    const auto in = cfg.resolved_inference();
    const auto r_port = static_cast<std::uint16_t>(rng.uniform_int(in.port_lo, in.port_hi));

    Materialized m;
    const std::uint32_t default_wnd = std::min<std::uint32_t>(65535, sp.quarter() / 4);
    auto& s = m.state;
    s.space = sp;
    m.true_port = cfg.true_client_port.value_or(r_port);
    s.tuple = {cfg.victim.ip, m.true_port, cfg.server.ip, cfg.server.port};
    s.rcv_nxt = cfg.server.rcv_nxt.value_or(r_rcv);
    s.rcv_wnd = cfg.server.rcv_wnd.value_or(default_wnd);
    s.snd_una = cfg.server.snd_una.value_or(r_una);
    s.snd_nxt = sp.add(s.snd_una, cfg.server.inflight);
    s.snd_wnd = cfg.server.snd_wnd.value_or(default_wnd);
    s.options = cfg.server.options;
    s.open = true;
    s.stream_origin = s.rcv_nxt;
    try {
        s.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("server state: ") + e.what());
    }
    return m;
}

ScenarioConfig from_json(const json& j) {
    ScenarioConfig c;
    Obj o(j, "");
    o.num("seed", c.seed);
    o.num("seq_bits", c.seq_bits);
    o.str("id", c.id);
    if (const json* v = o.get("victim")) c.victim = read_host(*v, "victim", c.victim);
    if (const json* v = o.get("attacker")) c.attacker = read_host(*v, "attacker", c.attacker);
    o.mac("bssid", c.bssid);
    if (const json* v = o.get("other_supplicants")) {
        if (!v->is_array()) throw ConfigError("other_supplicants: expected an array");
        for (std::size_t i = 0; i < v->size(); ++i) {
            c.other_supplicants.push_back(read_host((*v)[i], "other_supplicants[" + std::to_string(i) + "]", {}));
        }
    }
    o.boolean("victim_ip_known", c.victim_ip_known);
    if (const json* v = o.get("server")) read_server(*v, c.server);
    o.opt_num("true_client_port", c.true_client_port);
    if (const json* v = o.get("channel")) read_channel(*v, c);
    if (const json* v = o.get("encaps")) {
        Obj eo(*v, "encaps");
        eo.num("llc_snap_overhead", c.llc_snap_overhead);
        eo.num("crypto_mic_overhead", c.crypto_mic_overhead);
    }
    if (const json* v = o.get("inference")) read_inference(*v, c);
    if (const json* v = o.get("defenses")) {
        Obj d(*v, "defenses");
        if (const json* p = d.get("padding")) c.padding = read_padding(*p);
        if (const json* u = d.get("uniform_response")) {
            Obj uo(*u, "defenses.uniform_response");
            uo.boolean("enabled", c.uniform_response.enabled);
            uo.num("canonical_ip_len", c.uniform_response.canonical_ip_len);
            uo.boolean("equalize_presence", c.uniform_response.equalize_presence);
        }
    }
    if (const json* v = o.get("action")) {
        Obj a(*v, "action");
        std::string kind = "reset";
        a.str("kind", kind);
        if (kind == "reset") {
            c.action.kind = attack::ActionKind::Reset;
        } else if (kind == "inject") {
            c.action.kind = attack::ActionKind::Inject;
        } else {
            throw ConfigError("action.kind: expected reset or inject");
        }
        std::string payload;
        a.str("payload", payload);
        c.action.payload.assign(payload.begin(), payload.end());
    }
    if (const json* v = o.get("live_traffic")) {
        if (!v->is_null()) {
            Obj lo(*v, "live_traffic");
            LiveTraffic lt;
            lo.num("bytes_per_s", lt.bytes_per_s);
            lo.num("segment_bytes", lt.segment_bytes);
            c.live_traffic = lt;
        }
    }
    o.num("duration_limit_s", c.duration_limit_s);
    c.validate();
    return c;
}

json to_json(const ScenarioConfig& c) {
    json j;
    j["seed"] = c.seed;
    j["seq_bits"] = c.seq_bits;
    j["id"] = c.id;
    j["victim"] = host_json(c.victim);
    j["attacker"] = host_json(c.attacker);
    j["bssid"] = c.bssid.to_string();
    j["other_supplicants"] = json::array();
    for (const auto& h : c.other_supplicants) j["other_supplicants"].push_back(host_json(h));
    j["victim_ip_known"] = c.victim_ip_known;
    j["server"] = {{"ip", c.server.ip.to_string()},
                   {"port", c.server.port},
                   {"rcv_nxt", opt(c.server.rcv_nxt)},
                   {"rcv_wnd", opt(c.server.rcv_wnd)},
                   {"snd_una", opt(c.server.snd_una)},
                   {"inflight", c.server.inflight},
                   {"snd_wnd", opt(c.server.snd_wnd)},
                   {"options", {{"timestamps", c.server.options.timestamps_enabled},
                                {"sack", c.server.options.sack_enabled}}}};
    j["true_client_port"] = opt(c.true_client_port);
    const auto& ch = c.channel;
    json bg = nullptr;
    if (ch.background) {
        bg = {{"mode", ch.background->mode == wifi::BackgroundMode::Rate ? "rate" : "interval"},
              {"rate_pps", ch.background->rate_pps},
              {"interval_s", ch.background->interval_s},
              {"packet_ip_len", ch.background->packet_ip_len},
              {"tid", ch.background->tid}};
    }
    j["channel"] = {{"loss_prob", ch.loss_prob},
                    {"contention_delay_ms", {ms(ch.contention_lo), ms(ch.contention_hi)}},
                    {"channels", ch.channels},
                    {"victim_channel", opt(c.victim_channel)},
                    {"rtt_ms", ms(ch.rtt)},
                    {"background", bg},
                    {"amsdu_enabled", ch.amsdu_enabled},
                    {"amsdu", {{"max_size", ch.amsdu.max_size}, {"max_delay_us", ch.amsdu.max_delay.count()}}},
                    {"ap_isolation", ch.ap_isolation},
                    {"eviction", {{"enabled", ch.eviction.enabled},
                                  {"factor", ch.eviction.factor},
                                  {"gap_s", to_seconds(ch.eviction.gap)}}}};
    j["encaps"] = {{"llc_snap_overhead", c.llc_snap_overhead}, {"crypto_mic_overhead", c.crypto_mic_overhead}};
    const auto& in = c.inference;
    j["inference"] = {{"k_verify", in.k_verify},
                      {"observe_timeout_ms", c.observe_timeout_auto ? json(nullptr) : json(ms(in.observe_timeout))},
                      {"port_range", {in.port_lo, in.port_hi}},
                      {"port_start_offset", in.port_start_offset},
                      {"probe_pacing", in.probe_pacing},
                      {"sniffer_count", in.sniffer_count},
                      {"port_method", std::string(attack::to_string(in.port_method))},
                      {"flood_listen_s", in.flood_listen_s},
                      {"flood_threshold_pps", in.flood_threshold_pps},
                      {"alphabet_check_probes", in.alphabet_check_probes},
                      {"calibrate_alphabet", in.calibrate_alphabet},
                      {"ack_probe_seq_offset", in.ack_probe_seq_offset},
                      {"max_reinference", in.max_reinference},
                      {"noisy_error_rate", in.noisy_error_rate},
                      {"assumed_loss", in.assumed_loss},
                      {"noisy_round_cap", in.noisy_round_cap}};
    j["defenses"] = {{"padding", padding_json(c.padding)},
                     {"uniform_response", {{"enabled", c.uniform_response.enabled},
                                           {"canonical_ip_len", c.uniform_response.canonical_ip_len},
                                           {"equalize_presence", c.uniform_response.equalize_presence}}}};
    j["action"] = {{"kind", c.action.kind == attack::ActionKind::Reset ? "reset" : "inject"},
                   {"payload", std::string(c.action.payload.begin(), c.action.payload.end())}};
    j["live_traffic"] = c.live_traffic ? json{{"bytes_per_s", c.live_traffic->bytes_per_s},
                                              {"segment_bytes", c.live_traffic->segment_bytes}}
                                       : json(nullptr);
    j["duration_limit_s"] = c.duration_limit_s;
    return j;
}

ScenarioConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
    return from_json(j);
}

ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

ScenarioConfig with_override(const ScenarioConfig& cfg, const std::string& path, const json& value) {
    if (path.empty()) throw ConfigError("empty parameter path");
    json j = to_json(cfg);
    // Shape of every optional section, for paths that go through a null one.
    ScenarioConfig full;
    full.channel.background = wifi::BackgroundSpec{};
    full.live_traffic = LiveTraffic{};
    const json shape = to_json(full);

    json* node = &j;
    const json* model = &shape;
    std::size_t pos = 0;
    while (true) {
        const auto dot = path.find('.', pos);
        const std::string key = path.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
        if (node->is_null() && model && model->is_object()) *node = *model;
        if (!node->is_object() || !node->contains(key)) throw ConfigError("unknown parameter path '" + path + "'");
        node = &(*node)[key];
        model = (model && model->is_object() && model->contains(key)) ? &(*model)[key] : nullptr;
        if (dot == std::string::npos) break;
        pos = dot + 1;
    }
    *node = value;
    return from_json(j);
}

json parse_scalar(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error&) {
        return json(text);
    }
}

}  // namespace hijacksim::harness
