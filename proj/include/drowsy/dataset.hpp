#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "drowsy/common.hpp"

namespace drowsy {

inline constexpr std::size_t kNumChannels = 18;
inline constexpr std::size_t kSampleSteps = 100;

// Channel order is fixed; checkpoints, feature names and CSV columns all
// index into this list.
inline constexpr std::array<const char*, kNumChannels> kChannelNames = {
    "yaw",        "pitch",       "roll",        "blink",   "brow_furrow", "brow_raise",
    "cheek_raise", "eye_closure", "mouth_open",  "nose_wrinkle", "smile", "upper_lip_raise",
    "yawn",       "valence",     "anger",       "disgust", "joy",     "surprise",
};

inline constexpr std::size_t kChYaw = 0, kChPitch = 1, kChRoll = 2, kChBlink = 3,
    kChBrowFurrow = 4, kChBrowRaise = 5, kChCheekRaise = 6, kChEyeClosure = 7,
    kChMouthOpen = 8, kChNoseWrinkle = 9, kChSmile = 10, kChUpperLipRaise = 11,
    kChYawn = 12, kChValence = 13, kChAnger = 14, kChDisgust = 15, kChJoy = 16,
    kChSurprise = 17;

// Inclusive value range of a channel.
inline std::pair<double, double> channel_range(std::size_t ch) {
    if (ch <= kChRoll) return {-90.0, 90.0};
    if (ch == kChValence) return {-100.0, 100.0};
    return {0.0, 100.0};
}

enum class RawLabel : int { Alert = 0, SlightlyDrowsy = 1, ModeratelyDrowsy = 2, ExtremelyDrowsy = 3 };

enum class MergedLabel : int { Alert = 0, Slight = 1, ModExt = 2 };

inline constexpr int kNumClasses = 3;

MergedLabel merge_label(RawLabel raw);

const char* merged_label_name(MergedLabel l);

// One video frame: the 18-channel descriptor plus identity and label
// metadata straight out of the frame CSV.
struct FrameRecord {
    std::string participant_id;
    std::string video_id;
    std::int64_t frame_index = 0;
    std::array<double, kNumChannels> channels{};
    std::optional<RawLabel> raw_label;
    bool consensus = false; // majority annotator agreement for this frame
    bool tracked = true;    // face detected this frame
};

// 18 x 100 channel-major grid; the unit of model input.
struct SampleDescriptor {
    std::vector<double> grid; // kNumChannels * kSampleSteps, channel-major
    MergedLabel label = MergedLabel::Alert;
    std::string participant_id;
    std::string video_id;
    std::int64_t start_frame = 0;
    bool synthetic = false; // SMOTE-generated

    double at(std::size_t channel, std::size_t step) const {
        return grid[channel * kSampleSteps + step];
    }
};

struct DatasetSplit {
    std::vector<SampleDescriptor> train;
    std::vector<SampleDescriptor> val;
    std::vector<SampleDescriptor> test;
};

struct ChannelNormalizer {
    std::array<double, kNumChannels> mean{};
    std::array<double, kNumChannels> stddev{}; // floored at kStdFloor
    static constexpr double kStdFloor = 1e-8;
};

// ---- frame CSV ----

// 24-column header; see frame_csv_header() for the exact text.
const std::string& frame_csv_header();

// Parses the frame-CSV format. Throws Error naming the 1-based line number
// on a malformed row, and on out-of-range channel values of tracked frames.
std::vector<FrameRecord> parse_frames(std::istream& in);

void write_frames_csv(std::ostream& out, const std::vector<FrameRecord>& frames);

// ---- windowing ----

// A single-label block of consecutive frames cut from one video.
struct Window {
    std::vector<const FrameRecord*> frames; // window_frames entries
    MergedLabel label = MergedLabel::Alert;
    std::string participant_id;
    std::string video_id;
    std::int64_t start_frame = 0;
};

struct WindowParams {
    std::size_t window_frames = 300;
    std::size_t stride_alert = 75;
    std::size_t stride_drowsy = 5;
    double max_untracked_frac = 0.2;
};

// Cuts single-label windows with class-specific strides. Frames must be
// sorted by frame_index within each video; windows never span a merged-label
// transition, a consensus gap, a frame-index gap, or > 20% untracked frames.
std::vector<Window> extract_windows(const std::vector<FrameRecord>& frames,
                                    const WindowParams& params = {});

// Forward-fill then backward-fill untracked frames; returns the window's
// frames as a T x 18 frame-major matrix. All-untracked windows cannot occur
// (extract_windows caps the untracked fraction below 1).
std::vector<std::array<double, kNumChannels>> impute_untracked(const Window& window);

// Per-channel linear interpolation of a T x 18 block onto target_len steps.
// T >= 2 required. Output is channel-major (18 x target_len).
std::vector<double> resample_window(const std::vector<std::array<double, kNumChannels>>& block,
                                    std::size_t target_len = kSampleSteps);

SampleDescriptor make_sample(const Window& window);

// ---- splits ----

struct SplitParams {
    std::size_t n_test_participants = 10;
    double val_fraction = 0.25; // of the non-test samples, the paper's 3:1
    std::uint64_t seed = 0;
};

struct SplitAssignment {
    std::vector<std::string> train_participants;
    std::vector<std::string> val_participants;
    std::vector<std::string> test_participants;
};

// Seeded participant-disjoint split: n_test participants held out, the rest
// partitioned so validation holds as close to val_fraction of the remaining
// samples as participant granularity allows.
SplitAssignment assign_participants(const std::vector<SampleDescriptor>& samples,
                                    const SplitParams& params);

DatasetSplit split_by_participant(std::vector<SampleDescriptor> samples, const SplitParams& params);

// ---- normalization ----

ChannelNormalizer fit_normalizer(const std::vector<SampleDescriptor>& train);

SampleDescriptor apply_normalizer(const ChannelNormalizer& n, const SampleDescriptor& s);

} // namespace drowsy
