#include "iic/core/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "iic/errors.hpp"

namespace iic::core {

namespace {

constexpr const char* kCsvHeader = "window_id,subject_id,label,sample_rate_hz,modality,idx,value";

std::vector<std::string> derive_class_names(const std::vector<MultimodalWindow>& windows) {
    int max_label = -1;
    for (const auto& w : windows) {
        if (w.label) max_label = std::max(max_label, *w.label);
    }
    std::vector<std::string> names;
    for (int c = 0; c <= max_label; ++c) names.push_back("class_" + std::to_string(c));
    return names;
}

double parse_double_field(const std::string& field, std::size_t line_no, const char* col) {
    double v = 0.0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last) {
        throw ParseError("line " + std::to_string(line_no) + ", column '" + col +
                         "': not a number: '" + field + "'");
    }
    return v;
}

long parse_long_field(const std::string& field, std::size_t line_no, const char* col) {
    long v = 0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last) {
        throw ParseError("line " + std::to_string(line_no) + ", column '" + col +
                         "': not an integer: '" + field + "'");
    }
    return v;
}

} // namespace

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) throw Error("format_double failed");
    return std::string(buf, ptr);
}

DataFormat format_from_extension(const std::filesystem::path& path) {
    const auto ext = path.extension().string();
    if (ext == ".csv") return DataFormat::Csv;
    if (ext == ".json") return DataFormat::Json;
    throw InvalidConfig("cannot infer data format from extension '" + ext + "'");
}

std::string dataset_to_csv(const Dataset& ds) {
    std::string out;
    out += kCsvHeader;
    out += '\n';
    for (const auto& w : ds.windows) {
        const std::string label = w.label ? std::to_string(*w.label) : "";
        const std::string rate = format_double(w.sample_rate_hz);
        for (const auto& [m, samples] : w.channels) {
            const std::string mod(modality_name(m));
            for (std::size_t i = 0; i < samples.size(); ++i) {
                out += w.window_id;
                out += ',';
                out += w.subject_id;
                out += ',';
                out += label;
                out += ',';
                out += rate;
                out += ',';
                out += mod;
                out += ',';
                out += std::to_string(i);
                out += ',';
                out += format_double(samples[i]);
                out += '\n';
            }
        }
    }
    return out;
}

Dataset dataset_from_csv(const std::string& text, std::vector<std::string> class_names,
                         Split split) {
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;

    if (!std::getline(in, line)) throw ParseError("line 1: empty CSV input");
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kCsvHeader) {
        throw SchemaMismatch("line 1: expected header '" + std::string(kCsvHeader) + "', got '" +
                             line + "'");
    }

    struct PendingChannel {
        Samples samples;
        std::vector<bool> seen;
    };
    struct PendingWindow {
        MultimodalWindow window;
        std::map<Modality, PendingChannel> channels;
    };
    std::vector<std::string> order;
    std::map<std::string, PendingWindow> pending;

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;

        std::vector<std::string> fields;
        std::size_t start = 0;
        for (std::size_t i = 0; i <= line.size(); ++i) {
            if (i == line.size() || line[i] == ',') {
                fields.emplace_back(line.substr(start, i - start));
                start = i + 1;
            }
        }
        if (fields.size() != 7) {
            throw ParseError("line " + std::to_string(line_no) + ": expected 7 fields, got " +
                             std::to_string(fields.size()));
        }

        const std::string& window_id = fields[0];
        const std::string& subject_id = fields[1];
        std::optional<int> label;
        if (!fields[2].empty()) label = static_cast<int>(parse_long_field(fields[2], line_no, "label"));
        const double rate = parse_double_field(fields[3], line_no, "sample_rate_hz");
        const auto m = modality_from_name(fields[4]);
        if (!m) {
            throw ParseError("line " + std::to_string(line_no) + ", column 'modality': unknown '" +
                             fields[4] + "'");
        }
        const long idx = parse_long_field(fields[5], line_no, "idx");
        if (idx < 0) {
            throw ParseError("line " + std::to_string(line_no) + ", column 'idx': negative index");
        }
        const double value = parse_double_field(fields[6], line_no, "value");

        auto it = pending.find(window_id);
        if (it == pending.end()) {
            order.push_back(window_id);
            PendingWindow pw;
            pw.window.window_id = window_id;
            pw.window.subject_id = subject_id;
            pw.window.label = label;
            pw.window.sample_rate_hz = rate;
            it = pending.emplace(window_id, std::move(pw)).first;
        } else {
            const auto& w = it->second.window;
            if (w.subject_id != subject_id || w.label != label || w.sample_rate_hz != rate) {
                throw SchemaMismatch("line " + std::to_string(line_no) + ": window '" + window_id +
                                     "' disagrees with earlier rows on metadata");
            }
        }
        auto& chan = it->second.channels[*m];
        const auto uidx = static_cast<std::size_t>(idx);
        if (uidx >= chan.samples.size()) {
            chan.samples.resize(uidx + 1, 0.0);
            chan.seen.resize(uidx + 1, false);
        }
        if (chan.seen[uidx]) {
            throw SchemaMismatch("line " + std::to_string(line_no) + ": duplicate sample idx " +
                                 std::to_string(idx) + " for window '" + window_id + "'");
        }
        chan.samples[uidx] = value;
        chan.seen[uidx] = true;
    }

    Dataset ds;
    ds.split = split;
    for (const auto& id : order) {
        auto& pw = pending.at(id);
        for (auto& [m, chan] : pw.channels) {
            for (std::size_t i = 0; i < chan.seen.size(); ++i) {
                if (!chan.seen[i]) {
                    throw SchemaMismatch("window '" + id + "' channel " +
                                         std::string(modality_name(m)) + " is missing sample idx " +
                                         std::to_string(i));
                }
            }
            pw.window.channels[m] = std::move(chan.samples);
        }
        ds.windows.push_back(std::move(pw.window));
    }
    ds.class_names = class_names.empty() ? derive_class_names(ds.windows) : std::move(class_names);
    validate_dataset(ds);
    return ds;
}

std::string dataset_to_json(const Dataset& ds) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& w : ds.windows) {
        nlohmann::ordered_json obj;
        obj["window_id"] = w.window_id;
        obj["subject_id"] = w.subject_id;
        if (w.label) {
            obj["label"] = *w.label;
        } else {
            obj["label"] = nullptr;
        }
        obj["sample_rate_hz"] = w.sample_rate_hz;
        nlohmann::ordered_json channels;
        for (const auto& [m, samples] : w.channels) {
            channels[std::string(modality_name(m))] = samples;
        }
        obj["channels"] = std::move(channels);
        arr.push_back(std::move(obj));
    }
    return arr.dump(2) + "\n";
}

Dataset dataset_from_json(const std::string& text, std::vector<std::string> class_names,
                          Split split) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("JSON parse error: ") + e.what());
    }
    if (!doc.is_array()) throw SchemaMismatch("dataset JSON must be an array of window objects");

    Dataset ds;
    ds.split = split;
    std::size_t i = 0;
    for (const auto& obj : doc) {
        const std::string where = "window #" + std::to_string(i);
        if (!obj.is_object()) throw SchemaMismatch(where + ": not an object");
        for (const char* key : {"window_id", "subject_id", "label", "sample_rate_hz", "channels"}) {
            if (!obj.contains(key)) {
                throw SchemaMismatch(where + ": missing required key '" + key + "'");
            }
        }
        MultimodalWindow w;
        if (!obj["window_id"].is_string() || !obj["subject_id"].is_string()) {
            throw SchemaMismatch(where + ": window_id/subject_id must be strings");
        }
        w.window_id = obj["window_id"].get<std::string>();
        w.subject_id = obj["subject_id"].get<std::string>();
        if (obj["label"].is_null()) {
            w.label = std::nullopt;
        } else if (obj["label"].is_number_integer()) {
            w.label = obj["label"].get<int>();
        } else {
            throw SchemaMismatch(where + ": label must be an integer or null");
        }
        if (!obj["sample_rate_hz"].is_number()) {
            throw SchemaMismatch(where + ": sample_rate_hz must be a number");
        }
        w.sample_rate_hz = obj["sample_rate_hz"].get<double>();
        if (!obj["channels"].is_object()) throw SchemaMismatch(where + ": channels must be an object");
        for (const auto& [key, arr] : obj["channels"].items()) {
            const auto m = modality_from_name(key);
            if (!m) throw SchemaMismatch(where + ": unknown modality '" + key + "'");
            if (!arr.is_array()) throw SchemaMismatch(where + ": channel '" + key + "' must be an array");
            Samples samples;
            samples.reserve(arr.size());
            for (const auto& v : arr) {
                if (!v.is_number()) {
                    throw SchemaMismatch(where + ": channel '" + key + "' has a non-numeric sample");
                }
                samples.push_back(v.get<double>());
            }
            w.channels[*m] = std::move(samples);
        }
        ds.windows.push_back(std::move(w));
        ++i;
    }
    ds.class_names = class_names.empty() ? derive_class_names(ds.windows) : std::move(class_names);
    validate_dataset(ds);
    return ds;
}

void save_dataset(const Dataset& ds, const std::filesystem::path& path, DataFormat format) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open '" + path.string() + "' for writing");
    out << (format == DataFormat::Csv ? dataset_to_csv(ds) : dataset_to_json(ds));
}

Dataset load_dataset(const std::filesystem::path& path, DataFormat format,
                     std::vector<std::string> class_names, Split split) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingInput("cannot open '" + path.string() + "' for reading");
    std::stringstream buf;
    buf << in.rdbuf();
    return format == DataFormat::Csv
               ? dataset_from_csv(buf.str(), std::move(class_names), split)
               : dataset_from_json(buf.str(), std::move(class_names), split);
}

} // namespace iic::core
