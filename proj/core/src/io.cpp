#include "cegsr/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "cegsr/errors.hpp"

namespace cegsr {
namespace {

bool parse_double(std::string_view token, double& out) {
    const char* first = token.data();
    const char* last = token.data() + token.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
}

struct Sidecar {
    int channels = -1;
    int samples = -1;
    double rate_hz = -1.0;
    std::string record_id;
    bool present = false;
};

std::filesystem::path sidecar_path(const std::filesystem::path& path) {
    std::filesystem::path p = path;
    p += ".meta";
    return p;
}

Sidecar load_sidecar(const std::filesystem::path& path) {
    Sidecar sc;
    std::ifstream in(sidecar_path(path));
    if (!in) return sc;
    sc.present = true;
    std::string line;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string key, value;
        ls >> key;
        std::getline(ls, value);
        value = trim(value);
        if (key == "channels") {
            sc.channels = std::stoi(value);
        } else if (key == "samples") {
            sc.samples = std::stoi(value);
        } else if (key == "rate_hz") {
            if (!parse_double(value, sc.rate_hz))
                throw Error("load_record: sidecar malformed rate_hz in " +
                            sidecar_path(path).string());
        } else if (key == "record_id") {
            sc.record_id = value;
        }
        // unknown keys are ignored
    }
    return sc;
}

void save_sidecar(const SignalRecord& rec, const std::filesystem::path& path) {
    std::ofstream out(sidecar_path(path), std::ios::trunc);
    if (!out)
        throw Error("save_record: cannot write sidecar " + sidecar_path(path).string());
    out << "channels " << rec.channels << "\n";
    out << "samples " << rec.samples_per_channel << "\n";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", rec.sampling_rate_hz);
    out << "rate_hz " << buf << "\n";
    out << "record_id " << rec.record_id << "\n";
}

SignalRecord load_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw Error("load_record: file missing: " + path.string());

    std::string line;
    std::vector<std::vector<double>> rows;  // time-major while parsing
    int columns = -1;
    bool first = true;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        std::vector<std::string> tokens = split_csv_line(line);
        if (first) {
            first = false;
            bool numeric = true;
            std::vector<double> vals(tokens.size());
            for (size_t i = 0; i < tokens.size(); ++i) {
                if (!parse_double(trim(tokens[i]), vals[i])) {
                    numeric = false;
                    break;
                }
            }
            columns = static_cast<int>(tokens.size());
            if (!numeric) {
                // header row of channel names; every name must be non-empty
                for (const auto& t : tokens)
                    if (trim(t).empty())
                        throw Error("load_record: malformed header (empty channel name) in " +
                                    path.string());
                continue;
            }
            rows.push_back(std::move(vals));
            continue;
        }
        if (static_cast<int>(tokens.size()) != columns)
            throw Error("load_record: ragged rows in " + path.string() + " (line " +
                        std::to_string(line_no) + " has " + std::to_string(tokens.size()) +
                        " columns, expected " + std::to_string(columns) + ")");
        std::vector<double> vals(tokens.size());
        for (size_t i = 0; i < tokens.size(); ++i) {
            const std::string tok = trim(tokens[i]);
            if (!parse_double(tok, vals[i]))
                throw Error("load_record: malformed value '" + tok + "' in " + path.string() +
                            " (line " + std::to_string(line_no) + ")");
            if (!std::isfinite(vals[i]))
                throw Error("load_record: non-finite sample in " + path.string() + " (line " +
                            std::to_string(line_no) + ")");
        }
        rows.push_back(std::move(vals));
    }
    if (columns <= 0 || rows.empty())
        throw Error("load_record: malformed header (no data rows) in " + path.string());
    if (rows.size() < 2)
        throw Error("load_record: need >= 2 samples per channel in " + path.string());

    Sidecar sc = load_sidecar(path);
    if (sc.present) {
        if (sc.channels >= 0 && sc.channels != columns)
            throw Error("load_record: sidecar channels " + std::to_string(sc.channels) +
                        " does not match CSV columns " + std::to_string(columns));
        if (sc.samples >= 0 && sc.samples != static_cast<int>(rows.size()))
            throw Error("load_record: sidecar samples " + std::to_string(sc.samples) +
                        " does not match CSV rows " + std::to_string(rows.size()));
    }

    SignalRecord rec;
    rec.channels = columns;
    rec.samples_per_channel = static_cast<int>(rows.size());
    rec.sampling_rate_hz = (sc.present && sc.rate_hz > 0) ? sc.rate_hz : 1.0;
    rec.record_id = (sc.present && !sc.record_id.empty()) ? sc.record_id : path.stem().string();
    rec.data.resize(static_cast<size_t>(columns) * rows.size());
    for (int c = 0; c < columns; ++c)
        for (size_t i = 0; i < rows.size(); ++i)
            rec.data[static_cast<size_t>(c) * rows.size() + i] = rows[i][c];
    validate_record(rec, "load_record");
    return rec;
}

SignalRecord load_raw(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error("load_record: file missing: " + path.string());
    Sidecar sc = load_sidecar(path);
    if (!sc.present)
        throw Error("load_record: sidecar missing for raw file " + path.string() +
                    " (expected " + sidecar_path(path).string() + ")");
    if (sc.channels < 1 || sc.samples < 2 || !(sc.rate_hz > 0))
        throw Error("load_record: sidecar malformed for " + path.string());

    const size_t n = static_cast<size_t>(sc.channels) * sc.samples;
    std::vector<float> buf(n);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n * sizeof(float)));
    if (static_cast<size_t>(in.gcount()) != n * sizeof(float))
        throw Error("load_record: size mismatch (raw file shorter than sidecar dimensions) in " +
                    path.string());
    char extra;
    if (in.read(&extra, 1))
        throw Error("load_record: size mismatch (raw file longer than sidecar dimensions) in " +
                    path.string());

    SignalRecord rec;
    rec.channels = sc.channels;
    rec.samples_per_channel = sc.samples;
    rec.sampling_rate_hz = sc.rate_hz;
    rec.record_id = !sc.record_id.empty() ? sc.record_id : path.stem().string();
    rec.data.assign(buf.begin(), buf.end());
    validate_record(rec, "load_record");
    return rec;
}

FileFormat detect(const std::filesystem::path& path, FileFormat format) {
    if (format != FileFormat::auto_detect) return format;
    return path.extension() == ".csv" ? FileFormat::csv : FileFormat::raw;
}

} // namespace

SignalRecord load_record(const std::filesystem::path& path, FileFormat format) {
    switch (detect(path, format)) {
        case FileFormat::csv: return load_csv(path);
        default: return load_raw(path);
    }
}

void save_record(const SignalRecord& rec, const std::filesystem::path& path, FileFormat format) {
    validate_record(rec, "save_record");
    const FileFormat f = detect(path, format);
    if (f == FileFormat::csv) {
        std::ofstream out(path, std::ios::trunc);
        if (!out)
            throw Error("save_record: cannot write " + path.string());
        for (int c = 0; c < rec.channels; ++c)
            out << (c ? "," : "") << "ch_" << c;
        out << "\n";
        char buf[64];
        for (int i = 0; i < rec.samples_per_channel; ++i) {
            for (int c = 0; c < rec.channels; ++c) {
                std::snprintf(buf, sizeof buf, "%.17g", rec.at(c, i));
                out << (c ? "," : "") << buf;
            }
            out << "\n";
        }
    } else {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out)
            throw Error("save_record: cannot write " + path.string());
        std::vector<float> buf(rec.data.size());
        for (size_t i = 0; i < rec.data.size(); ++i) buf[i] = static_cast<float>(rec.data[i]);
        out.write(reinterpret_cast<const char*>(buf.data()),
                  static_cast<std::streamsize>(buf.size() * sizeof(float)));
    }
    save_sidecar(rec, path);
}

} // namespace cegsr
