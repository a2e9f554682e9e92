#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "backtrack/controller.hpp"
#include "backtrack/geometry.hpp"
#include "backtrack/synth.hpp"
#include "backtrack/tracker.hpp"

namespace backtrack {

struct SequenceSpec {
    std::string name;
    std::filesystem::path frames_dir;
    std::filesystem::path gt_path;
    BoundingBox first_box;
};

// Single-consumer stream of frames.
class FrameSource {
public:
    virtual ~FrameSource() = default;
    virtual std::optional<Frame> next() = 0;
    [[nodiscard]] virtual std::size_t size() const = 0;
};

// Frames held in memory (synthetic sequences, tests).
class VectorFrameSource final : public FrameSource {
public:
    explicit VectorFrameSource(std::span<const Frame> frames) : frames_(frames) {}
    std::optional<Frame> next() override;
    [[nodiscard]] std::size_t size() const override { return frames_.size(); }

private:
    std::span<const Frame> frames_;
    std::size_t pos_ = 0;
};

// Decodes image files lazily, one per next() call, in lexicographic filename
// order. Throws MissingFrame for an unreadable PNG/JPEG and FormatError for
// image files in any other format.
class SequenceReader final : public FrameSource {
public:
    explicit SequenceReader(std::vector<std::filesystem::path> files) : files_(std::move(files)) {}
    std::optional<Frame> next() override;
    [[nodiscard]] std::size_t size() const override { return files_.size(); }
    [[nodiscard]] const std::vector<std::filesystem::path>& files() const { return files_; }

private:
    std::vector<std::filesystem::path> files_;
    std::size_t pos_ = 0;
};

// Lists the image files of spec.frames_dir. Throws MissingFrame when it has none.
SequenceReader load_sequence(const SequenceSpec& spec);

// Recognises the common single-object layouts under `dir`: an `img/`
// subdirectory or images directly in `dir`, with `groundtruth.txt` or
// `groundtruth_rect.txt`. first_box is the first annotation.
SequenceSpec discover_sequence(const std::filesystem::path& dir);

// One x,y,w,h box per line; fields separated by commas, tabs or spaces.
// Empty lines and lines with "nan" yield a zero box, which marks the target
// as absent. Throws FormatError with the line number on anything else.
std::vector<BoundingBox> parse_groundtruth(const std::filesystem::path& path);

// Absent-target marker used by parse_groundtruth and the metrics.
inline bool is_absent(const BoundingBox& b) { return b.degenerate() || !b.finite(); }

// Writes <name>.txt (one box per line, 4 decimals) and <name>.decisions.jsonl
// into out_dir, creating it if needed. Throws IoError with the path on failure.
void write_results(const std::string& name, std::span<const BoundingBox> boxes,
                   std::span<const DecisionRecord> decisions, const std::filesystem::path& out_dir);

// Persists a synthetic sequence as <dir>/img/00000001.png ... plus
// <dir>/groundtruth.txt, so it loads like any benchmark sequence.
void write_sequence(const SynthSequence& seq, const std::filesystem::path& dir);

// Writes `text` to `path`, replacing any existing file. Throws IoError.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace backtrack
