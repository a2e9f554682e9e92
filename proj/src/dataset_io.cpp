#include "backtrack/dataset_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <opencv2/imgcodecs.hpp>

#include "backtrack/errors.hpp"
#include "backtrack/image.hpp"

namespace fs = std::filesystem;

namespace backtrack {

namespace {

std::string lower_extension(const fs::path& p) {
    std::string ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext;
}

bool is_supported_image(const fs::path& p) {
    const std::string ext = lower_extension(p);
    return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

bool is_other_image(const fs::path& p) {
    static const char* const kOther[] = {".bmp", ".gif", ".tif", ".tiff", ".webp", ".ppm", ".pgm", ".jp2"};
    const std::string ext = lower_extension(p);
    return std::any_of(std::begin(kOther), std::end(kOther), [&](const char* e) { return ext == e; });
}

bool parse_double(std::string_view tok, double& out) {
    if (!tok.empty() && tok.front() == '+') {
        tok.remove_prefix(1);
    }
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
    return ec == std::errc() && ptr == tok.data() + tok.size();
}

bool is_nan_token(std::string_view tok) {
    std::string s(tok);
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s == "nan" || s == "-nan";
}

}  // namespace

std::optional<Frame> VectorFrameSource::next() {
    if (pos_ >= frames_.size()) {
        return std::nullopt;
    }
    return frames_[pos_++];
}

std::optional<Frame> SequenceReader::next() {
    if (pos_ >= files_.size()) {
        return std::nullopt;
    }
    const fs::path& path = files_[pos_];
    if (!is_supported_image(path)) {
        throw FormatError(fmt::format("unsupported image format: {}", path.string()));
    }
    const cv::Mat raw = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
    if (raw.empty()) {
        throw MissingFrame(fmt::format("cannot read frame {}", path.string()));
    }
    Frame frame{static_cast<int>(pos_), to_gray_float(raw)};
    ++pos_;
    return frame;
}

SequenceReader load_sequence(const SequenceSpec& spec) {
    std::error_code ec;
    if (!fs::is_directory(spec.frames_dir, ec)) {
        throw MissingFrame(fmt::format("frames directory not found: {}", spec.frames_dir.string()));
    }
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(spec.frames_dir)) {
        if (entry.is_regular_file() && (is_supported_image(entry.path()) || is_other_image(entry.path()))) {
            files.push_back(entry.path());
        }
    }
    if (files.empty()) {
        throw MissingFrame(fmt::format("no image files in {}", spec.frames_dir.string()));
    }
    std::sort(files.begin(), files.end(),
              [](const fs::path& a, const fs::path& b) { return a.filename().string() < b.filename().string(); });
    return SequenceReader(std::move(files));
}

SequenceSpec discover_sequence(const fs::path& dir) {
    if (!fs::is_directory(dir)) {
        throw IoError(fmt::format("sequence directory not found: {}", dir.string()));
    }
    SequenceSpec spec;
    spec.name = fs::absolute(dir).lexically_normal().filename().string();
    if (spec.name.empty()) {
        spec.name = fs::absolute(dir).lexically_normal().parent_path().filename().string();
    }
    spec.frames_dir = fs::is_directory(dir / "img") ? dir / "img" : dir;
    for (const char* name : {"groundtruth.txt", "groundtruth_rect.txt"}) {
        if (fs::is_regular_file(dir / name)) {
            spec.gt_path = dir / name;
            break;
        }
    }
    if (spec.gt_path.empty()) {
        throw IoError(fmt::format("no groundtruth.txt or groundtruth_rect.txt in {}", dir.string()));
    }
    const auto gt = parse_groundtruth(spec.gt_path);
    if (gt.empty()) {
        throw FormatError(fmt::format("{}: no annotations", spec.gt_path.string()));
    }
    spec.first_box = gt.front();
    return spec;
}

std::vector<BoundingBox> parse_groundtruth(const fs::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError(fmt::format("cannot open ground truth file {}", path.string()));
    }
    std::vector<BoundingBox> boxes;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::vector<std::string_view> tokens;
        std::string_view rest(line);
        while (!rest.empty()) {
            const auto start = rest.find_first_not_of(", \t\r");
            if (start == std::string_view::npos) {
                break;
            }
            rest.remove_prefix(start);
            const auto end = rest.find_first_of(", \t\r");
            tokens.push_back(rest.substr(0, end));
            rest.remove_prefix(end == std::string_view::npos ? rest.size() : end);
        }
        if (tokens.empty()) {
            boxes.emplace_back();
            continue;
        }
        if (tokens.size() != 4) {
            throw FormatError(fmt::format("{}:{}: expected 4 fields x,y,w,h, found {}", path.string(), line_no,
                                          tokens.size()));
        }
        double v[4];
        bool absent = false;
        for (std::size_t i = 0; i < 4; ++i) {
            if (is_nan_token(tokens[i])) {
                absent = true;
            } else if (!parse_double(tokens[i], v[i])) {
                throw FormatError(fmt::format("{}:{}: cannot parse '{}' as a number", path.string(), line_no,
                                              tokens[i]));
            }
        }
        boxes.push_back(absent ? BoundingBox{} : BoundingBox{v[0], v[1], v[2], v[3]});
    }
    return boxes;
}

void write_text_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError(fmt::format("cannot open {} for writing", path.string()));
    }
    out << text;
    out.flush();
    if (!out) {
        throw IoError(fmt::format("failed writing {}", path.string()));
    }
}

void write_results(const std::string& name, std::span<const BoundingBox> boxes,
                   std::span<const DecisionRecord> decisions, const fs::path& out_dir) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) {
        throw IoError(fmt::format("cannot create {}: {}", out_dir.string(), ec.message()));
    }
    std::string text;
    for (const auto& b : boxes) {
        text += format_box(b);
        text += '\n';
    }
    write_text_file(out_dir / (name + ".txt"), text);

    std::string log;
    for (const auto& d : decisions) {
        log += to_json_line(d);
        log += '\n';
    }
    write_text_file(out_dir / (name + ".decisions.jsonl"), log);
}

void write_sequence(const SynthSequence& seq, const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir / "img", ec);
    if (ec) {
        throw IoError(fmt::format("cannot create {}: {}", (dir / "img").string(), ec.message()));
    }
    for (std::size_t i = 0; i < seq.frames.size(); ++i) {
        cv::Mat u8;
        seq.frames[i].image.convertTo(u8, CV_8U, 255.0);
        const fs::path p = dir / "img" / fmt::format("{:08d}.png", i + 1);
        if (!cv::imwrite(p.string(), u8)) {
            throw IoError(fmt::format("cannot write {}", p.string()));
        }
    }
    std::string gt;
    for (const auto& b : seq.gt) {
        gt += format_box(b);
        gt += '\n';
    }
    write_text_file(dir / "groundtruth.txt", gt);
}

}  // namespace backtrack
