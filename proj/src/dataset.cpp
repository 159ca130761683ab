#include "drowsy/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>

#include "drowsy/rng.hpp"

namespace drowsy {

MergedLabel merge_label(RawLabel raw) {
    switch (raw) {
        case RawLabel::Alert: return MergedLabel::Alert;
        case RawLabel::SlightlyDrowsy: return MergedLabel::Slight;
        case RawLabel::ModeratelyDrowsy:
        case RawLabel::ExtremelyDrowsy: return MergedLabel::ModExt;
    }
    fail("merge_label: invalid raw label ", int(raw));
}

const char* merged_label_name(MergedLabel l) {
    switch (l) {
        case MergedLabel::Alert: return "alert";
        case MergedLabel::Slight: return "slight";
        case MergedLabel::ModExt: return "modext";
    }
    return "?";
}

const std::string& frame_csv_header() {
    static const std::string header = [] {
        std::string h = "participant_id,video_id,frame_index,tracked";
        for (auto* name : kChannelNames) {
            h += ',';
            h += name;
        }
        h += ",raw_label,consensus";
        return h;
    }();
    return header;
}

namespace {

// Splits a CSV line in place; returns false on wrong field count.
bool split_fields(std::string_view line, std::string_view* out, std::size_t n) {
    std::size_t field = 0;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == ',') {
            if (field == n) return false;
            out[field++] = line.substr(start, i - start);
            start = i + 1;
        }
    }
    return field == n;
}

} // namespace

std::vector<FrameRecord> parse_frames(std::istream& in) {
    constexpr std::size_t kColumns = 4 + kNumChannels + 2;
    std::string line;
    std::size_t line_no = 0;

    require(bool(std::getline(in, line)), "frame csv: empty input");
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    require(line == frame_csv_header(), "frame csv: line 1: header does not match the ",
            kColumns, "-column schema");

    std::vector<FrameRecord> records;
    std::string_view fields[kColumns];
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        require(split_fields(line, fields, kColumns), "frame csv: line ", line_no,
                ": expected ", kColumns, " columns");

        FrameRecord rec;
        rec.participant_id = std::string(fields[0]);
        rec.video_id = std::string(fields[1]);

        long long idx = 0;
        require(parse_long(fields[2], idx) && idx >= 0, "frame csv: line ", line_no,
                ": bad frame_index '", std::string(fields[2]), "'");
        rec.frame_index = idx;

        require(fields[3] == "0" || fields[3] == "1", "frame csv: line ", line_no,
                ": bad tracked flag '", std::string(fields[3]), "'");
        rec.tracked = fields[3] == "1";

        for (std::size_t c = 0; c < kNumChannels; ++c) {
            double v = 0.0;
            require(parse_double(fields[4 + c], v), "frame csv: line ", line_no,
                    ": non-numeric ", kChannelNames[c], " value '", std::string(fields[4 + c]), "'");
            rec.channels[c] = v;
        }

        std::string_view label = fields[4 + kNumChannels];
        if (label == "NA") {
            rec.raw_label.reset();
        } else {
            long long lv = 0;
            require(parse_long(label, lv) && lv >= 0 && lv <= 3, "frame csv: line ", line_no,
                    ": bad raw_label '", std::string(label), "'");
            rec.raw_label = RawLabel(int(lv));
        }

        std::string_view cons = fields[4 + kNumChannels + 1];
        require(cons == "0" || cons == "1", "frame csv: line ", line_no,
                ": bad consensus flag '", std::string(cons), "'");
        rec.consensus = cons == "1";

        if (rec.tracked) {
            for (std::size_t c = 0; c < kNumChannels; ++c) {
                auto [lo, hi] = channel_range(c);
                require(rec.channels[c] >= lo && rec.channels[c] <= hi, "frame csv: line ",
                        line_no, ": ", kChannelNames[c], " value ", rec.channels[c],
                        " outside [", lo, ", ", hi, "]");
            }
        } else {
            rec.channels.fill(0.0);
        }
        records.push_back(std::move(rec));
    }
    return records;
}

void write_frames_csv(std::ostream& out, const std::vector<FrameRecord>& frames) {
    out << frame_csv_header() << '\n';
    for (const auto& f : frames) {
        out << f.participant_id << ',' << f.video_id << ',' << f.frame_index << ','
            << (f.tracked ? '1' : '0');
        for (double v : f.channels) out << ',' << format_double(v);
        if (f.raw_label)
            out << ',' << int(*f.raw_label);
        else
            out << ",NA";
        out << ',' << (f.consensus ? '1' : '0') << '\n';
    }
}

std::vector<Window> extract_windows(const std::vector<FrameRecord>& frames,
                                    const WindowParams& params) {
    require(params.window_frames > 0, "extract_windows: window_frames must be positive");
    std::vector<Window> windows;
    const std::size_t W = params.window_frames;

    // Maximal runs of consecutive, consensus-labeled frames from one video
    // sharing one merged label.
    std::size_t run_start = 0;
    auto run_breaks_at = [&](std::size_t i) {
        const FrameRecord& prev = frames[i - 1];
        const FrameRecord& cur = frames[i];
        if (cur.participant_id != prev.participant_id || cur.video_id != prev.video_id) return true;
        if (cur.frame_index != prev.frame_index + 1) return true;
        if (!cur.consensus || !cur.raw_label || !prev.consensus || !prev.raw_label) return true;
        return merge_label(*cur.raw_label) != merge_label(*prev.raw_label);
    };

    auto emit_run = [&](std::size_t begin, std::size_t end) {
        const FrameRecord& first = frames[begin];
        if (!first.consensus || !first.raw_label) return;
        const std::size_t len = end - begin;
        if (len < W) return;
        const MergedLabel label = merge_label(*first.raw_label);
        const std::size_t stride =
            label == MergedLabel::Alert ? params.stride_alert : params.stride_drowsy;
        require(stride > 0, "extract_windows: stride must be positive");
        for (std::size_t off = 0; off + W <= len; off += stride) {
            std::size_t untracked = 0;
            for (std::size_t i = 0; i < W; ++i)
                if (!frames[begin + off + i].tracked) ++untracked;
            if (double(untracked) > params.max_untracked_frac * double(W)) continue;
            Window w;
            w.frames.reserve(W);
            for (std::size_t i = 0; i < W; ++i) w.frames.push_back(&frames[begin + off + i]);
            w.label = label;
            w.participant_id = first.participant_id;
            w.video_id = first.video_id;
            w.start_frame = frames[begin + off].frame_index;
            windows.push_back(std::move(w));
        }
    };

    for (std::size_t i = 1; i <= frames.size(); ++i) {
        if (i == frames.size() || run_breaks_at(i)) {
            emit_run(run_start, i);
            run_start = i;
        }
    }
    return windows;
}

std::vector<std::array<double, kNumChannels>> impute_untracked(const Window& window) {
    const std::size_t T = window.frames.size();
    std::vector<std::array<double, kNumChannels>> block(T);
    for (std::size_t t = 0; t < T; ++t) block[t] = window.frames[t]->channels;

    std::size_t first_tracked = T;
    for (std::size_t t = 0; t < T; ++t) {
        if (window.frames[t]->tracked) {
            first_tracked = t;
            break;
        }
    }
    require(first_tracked < T, "impute_untracked: window has no tracked frames");

    for (std::size_t t = 0; t < first_tracked; ++t) block[t] = block[first_tracked];
    for (std::size_t t = first_tracked + 1; t < T; ++t)
        if (!window.frames[t]->tracked) block[t] = block[t - 1];
    return block;
}

std::vector<double> resample_window(const std::vector<std::array<double, kNumChannels>>& block,
                                    std::size_t target_len) {
    const std::size_t T = block.size();
    require(T >= 2, "resample_window: degenerate window of length ", T, " (need >= 2 frames)");
    require(target_len >= 2, "resample_window: target_len must be >= 2");

    std::vector<double> grid(kNumChannels * target_len);
    const double scale = double(T - 1) / double(target_len - 1);
    for (std::size_t i = 0; i < target_len; ++i) {
        const double pos = double(i) * scale;
        std::size_t lo = std::size_t(pos);
        if (lo >= T - 1) lo = T - 2;
        const double frac = pos - double(lo);
        for (std::size_t c = 0; c < kNumChannels; ++c) {
            const double a = block[lo][c];
            const double b = block[lo + 1][c];
            grid[c * target_len + i] = a + frac * (b - a);
        }
    }
    return grid;
}

SampleDescriptor make_sample(const Window& window) {
    SampleDescriptor s;
    s.grid = resample_window(impute_untracked(window));
    s.label = window.label;
    s.participant_id = window.participant_id;
    s.video_id = window.video_id;
    s.start_frame = window.start_frame;
    return s;
}

SplitAssignment assign_participants(const std::vector<SampleDescriptor>& samples,
                                    const SplitParams& params) {
    std::map<std::string, std::size_t> counts;
    for (const auto& s : samples) ++counts[s.participant_id];

    std::vector<std::string> participants;
    participants.reserve(counts.size());
    for (const auto& [id, n] : counts) participants.push_back(id);

    require(participants.size() >= params.n_test_participants + 2,
            "split: need at least ", params.n_test_participants + 2,
            " distinct participants, got ", participants.size());

    Rng rng(derive_seed(params.seed, "participant-split"));
    rng.shuffle(participants);

    SplitAssignment out;
    out.test_participants.assign(participants.begin(),
                                 participants.begin() + params.n_test_participants);

    std::vector<std::string> remaining(participants.begin() + params.n_test_participants,
                                       participants.end());
    std::size_t remaining_total = 0;
    for (const auto& id : remaining) remaining_total += counts[id];
    const double target = params.val_fraction * double(remaining_total);

    double val_count = 0;
    for (const auto& id : remaining) {
        const double n = double(counts[id]);
        if (std::abs(val_count + n - target) <= std::abs(val_count - target)) {
            out.val_participants.push_back(id);
            val_count += n;
        } else {
            out.train_participants.push_back(id);
        }
    }

    // Participant granularity must leave both sides non-empty.
    auto move_one = [&](std::vector<std::string>& from, std::vector<std::string>& to, bool smallest) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < from.size(); ++i) {
            const bool better = smallest ? counts[from[i]] < counts[from[best]]
                                         : counts[from[i]] > counts[from[best]];
            if (better) best = i;
        }
        to.push_back(from[best]);
        from.erase(from.begin() + best);
    };
    if (out.val_participants.empty()) move_one(out.train_participants, out.val_participants, true);
    if (out.train_participants.empty()) move_one(out.val_participants, out.train_participants, false);

    std::sort(out.train_participants.begin(), out.train_participants.end());
    std::sort(out.val_participants.begin(), out.val_participants.end());
    std::sort(out.test_participants.begin(), out.test_participants.end());
    return out;
}

DatasetSplit split_by_participant(std::vector<SampleDescriptor> samples, const SplitParams& params) {
    const SplitAssignment assign = assign_participants(samples, params);
    auto in = [](const std::vector<std::string>& ids, const std::string& id) {
        return std::binary_search(ids.begin(), ids.end(), id);
    };
    DatasetSplit split;
    for (auto& s : samples) {
        if (in(assign.test_participants, s.participant_id))
            split.test.push_back(std::move(s));
        else if (in(assign.val_participants, s.participant_id))
            split.val.push_back(std::move(s));
        else
            split.train.push_back(std::move(s));
    }
    return split;
}

ChannelNormalizer fit_normalizer(const std::vector<SampleDescriptor>& train) {
    require(!train.empty(), "fit_normalizer: empty training set");
    ChannelNormalizer n;
    const double count = double(train.size() * kSampleSteps);
    for (std::size_t c = 0; c < kNumChannels; ++c) {
        double sum = 0;
        for (const auto& s : train)
            for (std::size_t t = 0; t < kSampleSteps; ++t) sum += s.at(c, t);
        const double mean = sum / count;
        double ss = 0;
        for (const auto& s : train)
            for (std::size_t t = 0; t < kSampleSteps; ++t) {
                const double d = s.at(c, t) - mean;
                ss += d * d;
            }
        n.mean[c] = mean;
        n.stddev[c] = std::max(std::sqrt(ss / count), ChannelNormalizer::kStdFloor);
    }
    return n;
}

SampleDescriptor apply_normalizer(const ChannelNormalizer& n, const SampleDescriptor& s) {
    SampleDescriptor out = s;
    for (std::size_t c = 0; c < kNumChannels; ++c) {
        const double mean = n.mean[c];
        const double inv = 1.0 / std::max(n.stddev[c], ChannelNormalizer::kStdFloor);
        for (std::size_t t = 0; t < kSampleSteps; ++t)
            out.grid[c * kSampleSteps + t] = (s.at(c, t) - mean) * inv;
    }
    return out;
}

} // namespace drowsy
