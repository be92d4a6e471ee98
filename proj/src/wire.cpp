#include "semcom/wire.hpp"

#include <zlib.h>

#include <cstring>

namespace semcom {

namespace {

constexpr char kMagic[4] = {'S', 'L', 'P', 'C'};
constexpr std::uint16_t kVersion = 1;
constexpr std::size_t kHeaderLen = 4 + 2 + 1 + 1 + 4;

void put_u16(std::vector<std::uint8_t>& b, std::uint16_t v) {
    b.push_back(v & 0xff);
    b.push_back((v >> 8) & 0xff);
}

void put_u32(std::vector<std::uint8_t>& b, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) b.push_back((v >> (8 * i)) & 0xff);
}

void put_f64(std::vector<std::uint8_t>& b, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    for (int i = 0; i < 8; ++i) b.push_back((bits >> (8 * i)) & 0xff);
}

std::uint16_t get_u16(const std::vector<std::uint8_t>& b, std::size_t& pos) {
    if (pos + 2 > b.size()) throw ProtocolError("frame truncated (u16)");
    std::uint16_t v = static_cast<std::uint16_t>(b[pos] | (b[pos + 1] << 8));
    pos += 2;
    return v;
}

std::uint32_t get_u32(const std::vector<std::uint8_t>& b, std::size_t& pos) {
    if (pos + 4 > b.size()) throw ProtocolError("frame truncated (u32)");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[pos + i]) << (8 * i);
    pos += 4;
    return v;
}

double get_f64(const std::vector<std::uint8_t>& b, std::size_t& pos) {
    if (pos + 8 > b.size()) throw ProtocolError("frame truncated (f64)");
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[pos + i]) << (8 * i);
    pos += 8;
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

std::uint32_t payload_crc(const std::vector<std::uint8_t>& payload) {
    return static_cast<std::uint32_t>(
        ::crc32(0L, payload.empty() ? Z_NULL : payload.data(),
                static_cast<uInt>(payload.size())));
}

void expect_kind(const Frame& f, MsgKind k, const char* what) {
    if (f.kind != k) throw ProtocolError(std::string("expected ") + what + " frame");
}

}  // namespace

std::vector<std::uint8_t> encode_frame(const Frame& f) {
    std::vector<std::uint8_t> out;
    out.reserve(kHeaderLen + f.payload.size() + 4);
    out.insert(out.end(), kMagic, kMagic + 4);
    put_u16(out, kVersion);
    out.push_back(static_cast<std::uint8_t>(f.kind));
    out.push_back(f.flags);
    put_u32(out, static_cast<std::uint32_t>(f.payload.size()));
    out.insert(out.end(), f.payload.begin(), f.payload.end());
    put_u32(out, payload_crc(f.payload));
    return out;
}

Frame decode_frame(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < kHeaderLen + 4) throw ProtocolError("frame too short");
    if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw ProtocolError("bad frame magic");
    std::size_t pos = 4;
    if (get_u16(bytes, pos) != kVersion) throw ProtocolError("unsupported frame version");
    Frame f;
    f.kind = static_cast<MsgKind>(bytes[pos++]);
    f.flags = bytes[pos++];
    const std::uint32_t len = get_u32(bytes, pos);
    if (bytes.size() != kHeaderLen + len + 4) throw ProtocolError("frame length mismatch");
    f.payload.assign(bytes.begin() + static_cast<long>(pos),
                     bytes.begin() + static_cast<long>(pos + len));
    pos += len;
    const std::uint32_t crc = get_u32(bytes, pos);
    if (crc != payload_crc(f.payload)) throw ProtocolError("payload CRC mismatch");
    return f;
}

void write_frame(ByteStream& s, const Frame& f) {
    const auto bytes = encode_frame(f);
    s.write_all(bytes.data(), bytes.size());
}

Frame read_frame(ByteStream& s) {
    std::vector<std::uint8_t> head(kHeaderLen);
    s.read_exact(head.data(), head.size());
    if (std::memcmp(head.data(), kMagic, 4) != 0) throw ProtocolError("bad frame magic");
    std::size_t pos = 4;
    if (get_u16(head, pos) != kVersion) throw ProtocolError("unsupported frame version");
    Frame f;
    f.kind = static_cast<MsgKind>(head[pos++]);
    f.flags = head[pos++];
    const std::uint32_t len = get_u32(head, pos);
    f.payload.resize(len);
    if (len) s.read_exact(f.payload.data(), len);
    std::vector<std::uint8_t> crc_bytes(4);
    s.read_exact(crc_bytes.data(), 4);
    std::size_t cpos = 0;
    if (get_u32(crc_bytes, cpos) != payload_crc(f.payload))
        throw ProtocolError("payload CRC mismatch");
    return f;
}

void encode_tensor(std::vector<std::uint8_t>& out, const Tensor& t) {
    if (t.shape.size() > 255) throw ProtocolError("tensor rank exceeds wire limit");
    out.push_back(static_cast<std::uint8_t>(t.shape.size()));
    for (std::size_t d : t.shape) put_u32(out, static_cast<std::uint32_t>(d));
    for (double v : t.data) {
        const float f = static_cast<float>(v);
        std::uint32_t bits;
        std::memcpy(&bits, &f, 4);
        put_u32(out, bits);
    }
}

Tensor decode_tensor(const std::vector<std::uint8_t>& in, std::size_t& pos) {
    if (pos >= in.size()) throw ProtocolError("tensor payload truncated");
    const std::uint8_t rank = in[pos++];
    Shape s;
    for (std::uint8_t i = 0; i < rank; ++i) s.push_back(get_u32(in, pos));
    Tensor t(s);
    for (double& v : t.data) {
        const std::uint32_t bits = get_u32(in, pos);
        float f;
        std::memcpy(&f, &bits, 4);
        v = static_cast<double>(f);
    }
    t.check_finite("wire tensor");
    return t;
}

Frame pack(const DataBatchMsg& m) {
    Frame f{MsgKind::DataBatch, 0, {}};
    put_u32(f.payload, m.epoch);
    put_u32(f.payload, m.batch_id);
    encode_tensor(f.payload, m.y);
    return f;
}

Frame pack(const FeedbackMsg& m) {
    if (!m.grad_y.same_shape(m.y)) throw ProtocolError("feedback: grad_y/y shape mismatch");
    Frame f{MsgKind::Feedback, 0, {}};
    put_u32(f.payload, m.epoch);
    put_u32(f.payload, m.batch_id);
    encode_tensor(f.payload, m.grad_y);
    encode_tensor(f.payload, m.y);
    return f;
}

Frame pack(const MetricsMsg& m) {
    Frame f{MsgKind::MetricsReport, 0, {}};
    put_u32(f.payload, m.epoch);
    put_f64(f.payload, m.esd);
    put_f64(f.payload, m.accuracy);
    put_f64(f.payload, m.psnr_db);
    put_f64(f.payload, m.iou);
    f.payload.push_back(m.stop);
    return f;
}

Frame pack_encoder_params(const std::vector<std::uint8_t>& blob) {
    return Frame{MsgKind::EncoderParams, 0, blob};
}

Frame pack_control(ControlKind c) {
    return Frame{MsgKind::Control, 0, {static_cast<std::uint8_t>(c)}};
}

DataBatchMsg unpack_data_batch(const Frame& f) {
    expect_kind(f, MsgKind::DataBatch, "DataBatch");
    std::size_t pos = 0;
    DataBatchMsg m;
    m.epoch = get_u32(f.payload, pos);
    m.batch_id = get_u32(f.payload, pos);
    m.y = decode_tensor(f.payload, pos);
    if (pos != f.payload.size()) throw ProtocolError("DataBatch: trailing bytes");
    return m;
}

FeedbackMsg unpack_feedback(const Frame& f) {
    expect_kind(f, MsgKind::Feedback, "Feedback");
    std::size_t pos = 0;
    FeedbackMsg m;
    m.epoch = get_u32(f.payload, pos);
    m.batch_id = get_u32(f.payload, pos);
    m.grad_y = decode_tensor(f.payload, pos);
    m.y = decode_tensor(f.payload, pos);
    if (!m.grad_y.same_shape(m.y)) throw ProtocolError("Feedback: grad_y/y shape mismatch");
    if (pos != f.payload.size()) throw ProtocolError("Feedback: trailing bytes");
    return m;
}

MetricsMsg unpack_metrics(const Frame& f) {
    expect_kind(f, MsgKind::MetricsReport, "MetricsReport");
    std::size_t pos = 0;
    MetricsMsg m;
    m.epoch = get_u32(f.payload, pos);
    m.esd = get_f64(f.payload, pos);
    m.accuracy = get_f64(f.payload, pos);
    m.psnr_db = get_f64(f.payload, pos);
    m.iou = get_f64(f.payload, pos);
    if (pos + 1 != f.payload.size()) throw ProtocolError("MetricsReport: bad length");
    m.stop = f.payload[pos];
    return m;
}

std::vector<std::uint8_t> unpack_encoder_params(const Frame& f) {
    expect_kind(f, MsgKind::EncoderParams, "EncoderParams");
    return f.payload;
}

ControlKind unpack_control(const Frame& f) {
    expect_kind(f, MsgKind::Control, "Control");
    if (f.payload.size() != 1) throw ProtocolError("Control: bad length");
    return static_cast<ControlKind>(f.payload[0]);
}

}  // namespace semcom
