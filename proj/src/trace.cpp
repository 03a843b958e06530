#include "trace.hpp"

#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "rng.hpp"

namespace tprefsim {

namespace {

constexpr char kMagic[4] = {'T', 'P', 'F', '1'};
constexpr size_t kBinRecordBytes = 17;

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error(msg); }

uint64_t parse_hex(const std::string& tok, size_t line_no) {
    size_t pos = 0;
    uint64_t v = 0;
    try {
        v = std::stoull(tok, &pos, 16);
    } catch (const std::exception&) {
        fail("trace line " + std::to_string(line_no) + ": bad hex field '" + tok + "'");
    }
    if (pos != tok.size())
        fail("trace line " + std::to_string(line_no) + ": bad hex field '" + tok + "'");
    return v;
}

void put_le64(std::string& out, uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

uint64_t get_le64(const unsigned char* p) {
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(p[i]) << (8 * i);
    return v;
}

}  // namespace

std::vector<TraceRecord> parse_trace_text(const std::string& text) {
    std::vector<TraceRecord> recs;
    std::istringstream in(text);
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        std::istringstream ls(line);
        std::string pc_tok, addr_tok, kind_tok, extra;
        if (!(ls >> pc_tok)) continue;  // blank or comment-only line
        if (!(ls >> addr_tok >> kind_tok))
            fail("trace line " + std::to_string(line_no) + ": expected '<pc> <addr> <L|S>'");
        if (ls >> extra)
            fail("trace line " + std::to_string(line_no) + ": trailing field '" + extra + "'");
        TraceRecord r;
        r.pc = parse_hex(pc_tok, line_no);
        r.addr = parse_hex(addr_tok, line_no);
        if (kind_tok == "L")
            r.kind = AccessKind::load;
        else if (kind_tok == "S")
            r.kind = AccessKind::store;
        else
            fail("trace line " + std::to_string(line_no) + ": access kind must be L or S, got '" +
                 kind_tok + "'");
        recs.push_back(r);
    }
    return recs;
}

std::vector<TraceRecord> read_trace(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("cannot open trace file: " + path);
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (data.size() >= 4 && std::memcmp(data.data(), kMagic, 4) == 0) {
        size_t payload = data.size() - 4;
        if (payload % kBinRecordBytes != 0)
            fail("trace " + path + ": truncated binary record at byte " +
                 std::to_string(data.size()));
        std::vector<TraceRecord> recs(payload / kBinRecordBytes);
        const auto* p = reinterpret_cast<const unsigned char*>(data.data()) + 4;
        for (size_t i = 0; i < recs.size(); ++i, p += kBinRecordBytes) {
            recs[i].pc = get_le64(p);
            recs[i].addr = get_le64(p + 8);
            if (p[16] > 1)
                fail("trace " + path + ": record " + std::to_string(i) + ": bad kind byte " +
                     std::to_string(p[16]));
            recs[i].kind = static_cast<AccessKind>(p[16]);
        }
        return recs;
    }
    try {
        return parse_trace_text(data);
    } catch (const std::runtime_error& e) {
        fail(path + ": " + e.what());
    }
}

void write_trace_text(const std::string& path, const std::vector<TraceRecord>& recs) {
    std::ofstream out(path);
    if (!out) fail("cannot open for writing: " + path);
    std::ostringstream buf;
    buf << std::hex;
    for (const auto& r : recs)
        buf << r.pc << ' ' << r.addr << ' ' << (r.kind == AccessKind::load ? 'L' : 'S') << '\n';
    out << buf.str();
    if (!out) fail("write failed: " + path);
}

void write_trace_binary(const std::string& path, const std::vector<TraceRecord>& recs) {
    std::string buf;
    buf.reserve(4 + recs.size() * kBinRecordBytes);
    buf.append(kMagic, 4);
    for (const auto& r : recs) {
        put_le64(buf, r.pc);
        put_le64(buf, r.addr);
        buf.push_back(static_cast<char>(r.kind));
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) fail("cannot open for writing: " + path);
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) fail("write failed: " + path);
}

SyntheticSpec parse_synthetic(const std::string& text) {
    auto colon = text.find(':');
    std::string name = text.substr(0, colon);
    SyntheticSpec spec;
    if (name == "cyclic")
        spec.kind = SyntheticKind::cyclic;
    else if (name == "pointer_chase")
        spec.kind = SyntheticKind::pointer_chase;
    else if (name == "random_uniform")
        spec.kind = SyntheticKind::random_uniform;
    else if (name == "fragmented_cyclic")
        spec.kind = SyntheticKind::fragmented_cyclic;
    else if (name == "bernoulli_match")
        spec.kind = SyntheticKind::bernoulli_match;
    else
        throw std::invalid_argument("unknown synthetic kind: '" + name + "'");

    bool has_p = false;
    if (colon != std::string::npos) {
        std::istringstream params(text.substr(colon + 1));
        std::string kv;
        while (std::getline(params, kv, ',')) {
            auto eq = kv.find('=');
            if (eq == std::string::npos)
                throw std::invalid_argument("synthetic param needs key=value: '" + kv + "'");
            std::string key = kv.substr(0, eq), val = kv.substr(eq + 1);
            try {
                if (key == "K" || key == "k")
                    spec.k = std::stoull(val, nullptr, 0);
                else if (key == "R" || key == "r")
                    spec.r = std::stoull(val, nullptr, 0);
                else if (key == "N" || key == "n")
                    spec.n = std::stoull(val, nullptr, 0);
                else if (key == "lines")
                    spec.lines = std::stoull(val, nullptr, 0);
                else if (key == "base")
                    spec.base = std::stoull(val, nullptr, 0);
                else if (key == "pc")
                    spec.pc = std::stoull(val, nullptr, 0);
                else if (key == "pcs")
                    spec.pcs = std::stoull(val, nullptr, 0);
                else if (key == "p") {
                    spec.p = std::stod(val);
                    has_p = true;
                } else if (key == "seed") {
                    spec.seed = std::stoull(val, nullptr, 0);
                    spec.has_seed = true;
                } else {
                    throw std::invalid_argument("unknown synthetic param: '" + key + "'");
                }
            } catch (const std::invalid_argument&) {
                throw;
            } catch (const std::exception&) {
                throw std::invalid_argument("bad synthetic value: '" + kv + "'");
            }
        }
    }

    switch (spec.kind) {
        case SyntheticKind::cyclic:
        case SyntheticKind::pointer_chase:
        case SyntheticKind::fragmented_cyclic:
            if (spec.k == 0 || spec.r == 0)
                throw std::invalid_argument("synthetic needs K>0 and R>0");
            break;
        case SyntheticKind::random_uniform:
            if (spec.n == 0) throw std::invalid_argument("random_uniform needs N>0");
            if (spec.lines == 0) throw std::invalid_argument("random_uniform needs lines>0");
            if (spec.pcs == 0) throw std::invalid_argument("random_uniform needs pcs>0");
            break;
        case SyntheticKind::bernoulli_match:
            if (!has_p || spec.p < 0.0 || spec.p > 1.0)
                throw std::invalid_argument("bernoulli_match needs p in [0,1]");
            if (spec.k == 0 || spec.n == 0)
                throw std::invalid_argument("bernoulli_match needs K>0 and N>0");
            break;
    }
    return spec;
}

std::vector<TraceRecord> generate_trace(const SyntheticSpec& spec, uint64_t default_seed) {
    const uint64_t seed = spec.has_seed ? spec.seed : default_seed;
    const uint64_t base_line = line_of(spec.base);
    std::vector<TraceRecord> recs;

    auto emit = [&](uint64_t pc, uint64_t line) {
        recs.push_back({pc, addr_of(line), AccessKind::load});
    };

    switch (spec.kind) {
        case SyntheticKind::cyclic: {
            recs.reserve(spec.k * spec.r);
            for (uint64_t r = 0; r < spec.r; ++r)
                for (uint64_t i = 0; i < spec.k; ++i) emit(spec.pc, base_line + i);
            break;
        }
        case SyntheticKind::pointer_chase: {
            std::vector<uint64_t> order(spec.k);
            for (uint64_t i = 0; i < spec.k; ++i) order[i] = i;
            Lcg64 rng(seed ^ 0x70b1c4a5ULL);
            for (uint64_t i = spec.k - 1; i > 0; --i)
                std::swap(order[i], order[rng.next_below(i + 1)]);
            recs.reserve(spec.k * spec.r);
            for (uint64_t r = 0; r < spec.r; ++r)
                for (uint64_t i = 0; i < spec.k; ++i) emit(spec.pc, base_line + order[i]);
            break;
        }
        case SyntheticKind::random_uniform: {
            Lcg64 rng(seed ^ 0x5eedULL);
            recs.reserve(spec.n);
            for (uint64_t i = 0; i < spec.n; ++i) {
                uint64_t line = base_line + rng.next_below(spec.lines);
                uint64_t pc = spec.pc + 8 * rng.next_below(spec.pcs);
                emit(pc, line);
            }
            break;
        }
        case SyntheticKind::fragmented_cyclic: {
            // Stride of one 128 KiB frame plus one line: frame tags are all
            // distinct, and for K <= 2048 the low line bits are distinct too,
            // so a mis-decoded frame never lands on another trace line.
            const uint64_t stride_lines = (1ULL << 17 >> kLineBits) + 1;
            recs.reserve(spec.k * spec.r);
            for (uint64_t r = 0; r < spec.r; ++r)
                for (uint64_t i = 0; i < spec.k; ++i) emit(spec.pc, base_line + i * stride_lines);
            break;
        }
        case SyntheticKind::bernoulli_match: {
            // Index lines x_i always recur in order; the successor of x_i is
            // redrawn to a fresh never-reused line with probability 1-p per
            // traversal. A stored (x_i -> successor) pair therefore matches on
            // the next traversal with probability exactly p, independently.
            Lcg64 rng(seed ^ 0xbe12ULL);
            std::vector<uint64_t> successor(spec.k);
            const uint64_t succ_base = base_line + (1ULL << 22);
            uint64_t fresh = base_line + (1ULL << 23);
            for (uint64_t i = 0; i < spec.k; ++i) successor[i] = succ_base + i;
            recs.reserve(spec.n);
            uint64_t i = 0;
            while (recs.size() < spec.n) {
                if (rng.next_unit() < 1.0 - spec.p) successor[i] = fresh++;
                emit(spec.pc, base_line + i);
                if (recs.size() < spec.n) emit(spec.pc, successor[i]);
                i = (i + 1) % spec.k;
            }
            break;
        }
    }
    return recs;
}

}  // namespace tprefsim
