#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "semcom/tensor.hpp"
#include "semcom/transport.hpp"

namespace semcom {

struct ProtocolError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class MsgKind : std::uint8_t {
    DataBatch = 1,
    Feedback = 2,
    EncoderParams = 3,
    Control = 4,
    MetricsReport = 5,
};

enum class ControlKind : std::uint8_t {
    Start = 1,
    StopEpoch = 2,
    Shutdown = 3,
};

/// Frame layout (little-endian, bit-exact):
///   magic "SLPC" | version u16 | kind u8 | flags u8 | payload_len u32 |
///   payload | crc32(payload) u32
struct Frame {
    MsgKind kind;
    std::uint8_t flags = 0;
    std::vector<std::uint8_t> payload;
};

std::vector<std::uint8_t> encode_frame(const Frame& f);
Frame decode_frame(const std::vector<std::uint8_t>& bytes);

void write_frame(ByteStream& s, const Frame& f);
Frame read_frame(ByteStream& s);

/// Tensor payload fragment: rank u8 | dims u32 each | f32 data.
void encode_tensor(std::vector<std::uint8_t>& out, const Tensor& t);
Tensor decode_tensor(const std::vector<std::uint8_t>& in, std::size_t& pos);

// ---- typed messages ----

struct DataBatchMsg {
    std::uint32_t epoch = 0;
    std::uint32_t batch_id = 0;
    Tensor y;  // channel output, batch-stacked
};

/// Receiver -> transmitter tuple {grad_Y L, Y}; travels the noiseless reverse path.
struct FeedbackMsg {
    std::uint32_t epoch = 0;
    std::uint32_t batch_id = 0;
    Tensor grad_y;
    Tensor y;
};

struct MetricsMsg {
    std::uint32_t epoch = 0;
    double esd = 0.0;
    double accuracy = -1.0;  // -1 when not applicable
    double psnr_db = 0.0;
    double iou = -1.0;
    std::uint8_t stop = 0;
};

Frame pack(const DataBatchMsg& m);
Frame pack(const FeedbackMsg& m);
Frame pack(const MetricsMsg& m);
Frame pack_encoder_params(const std::vector<std::uint8_t>& blob);
Frame pack_control(ControlKind c);

DataBatchMsg unpack_data_batch(const Frame& f);
FeedbackMsg unpack_feedback(const Frame& f);
MetricsMsg unpack_metrics(const Frame& f);
std::vector<std::uint8_t> unpack_encoder_params(const Frame& f);
ControlKind unpack_control(const Frame& f);

}  // namespace semcom
