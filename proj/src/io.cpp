#include "weshap/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

namespace weshap {
namespace fs = std::filesystem;

namespace {

constexpr std::array<char, 4> kFeatureMagic{'W', 'S', 'F', 'M'};

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError(path.string() + ": cannot open file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::out) {
    std::ofstream out(path, mode);
    if (!out) throw DataError(path.string() + ": cannot open for writing");
    return out;
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        auto comma = line.find(',', start);
        auto field = line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
        while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
        while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r')) {
            field.remove_suffix(1);
        }
        fields.push_back(field);
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return fields;
}

template <typename T>
bool parse_number(std::string_view text, T& out) {
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    return ec == std::errc() && ptr == text.data() + text.size();
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string_view>> rows;
    std::vector<std::size_t> line_numbers;
};

// Parses into views over `text`; a first row that fails numeric parsing is treated as header.
template <typename T>
CsvTable parse_csv(const std::string& text, const fs::path& path) {
    CsvTable table;
    std::string_view rest(text);
    std::size_t line_no = 0;
    bool first = true;
    while (!rest.empty()) {
        auto nl = rest.find('\n');
        auto line = rest.substr(0, nl);
        rest = nl == std::string_view::npos ? std::string_view{} : rest.substr(nl + 1);
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
        auto fields = split_fields(line);
        if (first) {
            first = false;
            T probe{};
            bool numeric = std::all_of(fields.begin(), fields.end(),
                                       [&](std::string_view f) { return parse_number(f, probe); });
            if (!numeric) {
                for (auto f : fields) table.header.emplace_back(f);
                continue;
            }
        }
        if (!table.rows.empty() && fields.size() != table.rows.front().size()) {
            std::ostringstream msg;
            msg << path.string() << ": row " << table.rows.size() << " (line " << line_no << ") has "
                << fields.size() << " columns, expected " << table.rows.front().size();
            throw DataError(msg.str());
        }
        table.rows.push_back(std::move(fields));
        table.line_numbers.push_back(line_no);
    }
    if (table.rows.empty()) throw DataError(path.string() + ": no data rows");
    return table;
}

template <typename T>
T cell(const CsvTable& table, std::size_t r, std::size_t c, const fs::path& path) {
    T value{};
    if (!parse_number(table.rows[r][c], value)) {
        std::ostringstream msg;
        msg << path.string() << ": cannot parse '" << table.rows[r][c] << "' at (" << r << "," << c << ")";
        throw DataError(msg.str());
    }
    return value;
}

std::uint32_t read_u32_le(const char* p) {
    std::uint32_t v = 0;
    for (int b = 3; b >= 0; --b) v = (v << 8) | static_cast<unsigned char>(p[b]);
    return v;
}

void write_u32_le(std::ostream& out, std::uint32_t v) {
    for (int b = 0; b < 4; ++b) out.put(static_cast<char>((v >> (8 * b)) & 0xFF));
}

FeatureMatrix parse_feature_binary(const std::string& bytes, const fs::path& path) {
    constexpr std::size_t kHeader = 16;
    if (bytes.size() < kHeader) throw DataError(path.string() + ": truncated WSFM header");
    auto n = read_u32_le(bytes.data() + 4);
    auto d = read_u32_le(bytes.data() + 8);
    std::size_t expected = kHeader + std::size_t{n} * d * sizeof(double);
    if (bytes.size() != expected) {
        throw DataError(path.string() + ": WSFM payload is " + std::to_string(bytes.size()) +
                        " bytes, expected " + std::to_string(expected));
    }
    std::vector<double> values(std::size_t{n} * d);
    for (std::size_t k = 0; k < values.size(); ++k) {
        std::uint64_t raw = 0;
        const char* p = bytes.data() + kHeader + k * 8;
        for (int b = 7; b >= 0; --b) raw = (raw << 8) | static_cast<unsigned char>(p[b]);
        values[k] = std::bit_cast<double>(raw);
    }
    return FeatureMatrix(n, d, std::move(values));
}

fs::path resolve(const fs::path& base, const std::string& p) {
    fs::path path(p);
    return path.is_absolute() ? path : base / path;
}

}  // namespace

std::string format_double(double value) {
    std::array<char, 32> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    return std::string(buf.data(), ptr);
}

FeatureMatrix read_features(const fs::path& path) {
    auto text = read_file(path);
    FeatureMatrix features;
    if (text.size() >= 4 && std::memcmp(text.data(), kFeatureMagic.data(), 4) == 0) {
        features = parse_feature_binary(text, path);
    } else {
        auto table = parse_csv<double>(text, path);
        std::size_t n = table.rows.size(), d = table.rows.front().size();
        std::vector<double> values(n * d);
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t c = 0; c < d; ++c) values[r * d + c] = cell<double>(table, r, c, path);
        }
        features = FeatureMatrix(n, d, std::move(values));
    }
    features.validate(path.string());
    return features;
}

void write_features_csv(const fs::path& path, const FeatureMatrix& features) {
    auto out = open_out(path);
    for (std::size_t i = 0; i < features.rows(); ++i) {
        for (std::size_t k = 0; k < features.dims(); ++k) {
            if (k) out << ',';
            out << format_double(features(i, k));
        }
        out << '\n';
    }
}

void write_features_binary(const fs::path& path, const FeatureMatrix& features) {
    auto out = open_out(path, std::ios::out | std::ios::binary);
    out.write(kFeatureMagic.data(), 4);
    write_u32_le(out, static_cast<std::uint32_t>(features.rows()));
    write_u32_le(out, static_cast<std::uint32_t>(features.dims()));
    write_u32_le(out, 0);
    for (double v : features.values()) {
        auto raw = std::bit_cast<std::uint64_t>(v);
        for (int b = 0; b < 8; ++b) out.put(static_cast<char>((raw >> (8 * b)) & 0xFF));
    }
}

WeakLabelMatrix read_weak_labels(const fs::path& path) {
    auto text = read_file(path);
    auto table = parse_csv<int>(text, path);
    std::size_t n = table.rows.size(), m = table.rows.front().size();
    if (!table.header.empty() && table.header.size() != m) {
        throw DataError(path.string() + ": header names " + std::to_string(table.header.size()) +
                        " LFs but rows have " + std::to_string(m) + " columns");
    }
    std::vector<int> entries(n * m);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < m; ++c) entries[r * m + c] = cell<int>(table, r, c, path);
    }
    return WeakLabelMatrix(n, m, std::move(entries), table.header);
}

void write_weak_labels(const fs::path& path, const WeakLabelMatrix& weak_labels) {
    auto out = open_out(path);
    for (std::size_t j = 0; j < weak_labels.num_lfs(); ++j) {
        if (j) out << ',';
        out << weak_labels.names()[j];
    }
    out << '\n';
    for (std::size_t i = 0; i < weak_labels.rows(); ++i) {
        for (std::size_t j = 0; j < weak_labels.num_lfs(); ++j) {
            if (j) out << ',';
            out << weak_labels(i, j);
        }
        out << '\n';
    }
}

std::vector<int> read_labels(const fs::path& path) {
    auto text = read_file(path);
    auto table = parse_csv<int>(text, path);
    if (table.rows.front().size() != 1) {
        throw DataError(path.string() + ": label file must have exactly one column");
    }
    std::vector<int> labels(table.rows.size());
    for (std::size_t r = 0; r < labels.size(); ++r) labels[r] = cell<int>(table, r, 0, path);
    return labels;
}

void write_labels(const fs::path& path, std::span<const int> labels) {
    auto out = open_out(path);
    out << "label\n";
    for (int y : labels) out << y << '\n';
}

Manifest read_manifest(const fs::path& path) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw DataError(path.string() + ": invalid JSON: " + e.what());
    }
    auto base = path.parent_path();
    auto required = [&](const char* key) -> fs::path {
        if (!doc.contains(key) || !doc[key].is_string()) {
            throw DataError(path.string() + ": manifest field '" + key + "' missing or not a string");
        }
        return resolve(base, doc[key].get<std::string>());
    };
    auto optional_path = [&](const char* key) -> std::optional<fs::path> {
        if (!doc.contains(key) || doc[key].is_null()) return std::nullopt;
        return resolve(base, doc[key].get<std::string>());
    };
    Manifest m;
    m.paths.train = required("train");
    m.paths.weak_labels = required("weak_labels");
    m.paths.valid_features = required("valid_features");
    m.paths.valid_labels = required("valid_labels");
    m.paths.valid_weak_labels = optional_path("valid_weak_labels");
    m.paths.test_features = optional_path("test_features");
    m.paths.test_labels = optional_path("test_labels");
    if (m.paths.test_features.has_value() != m.paths.test_labels.has_value()) {
        throw DataError(path.string() + ": test_features and test_labels must be given together");
    }
    if (!doc.contains("num_classes") || !doc["num_classes"].is_number_integer()) {
        throw DataError(path.string() + ": manifest field 'num_classes' missing or not an integer");
    }
    m.num_classes = doc["num_classes"].get<int>();
    try {
        if (doc.contains("k")) m.config.k = doc["k"].get<std::size_t>();
        if (doc.contains("metric")) m.config.metric = parse_metric(doc["metric"].get<std::string>());
        if (doc.contains("weights")) m.config.weighting = parse_weighting(doc["weights"].get<std::string>());
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path.string() + ": bad proxy setting: " + e.what());
    } catch (const ConfigError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
    return m;
}

SplitBundle load_bundle(const BundlePaths& paths, const TaskSpec& spec) {
    SplitBundle b;
    b.spec = spec;
    b.train_features = read_features(paths.train);
    b.weak_labels = read_weak_labels(paths.weak_labels);
    b.valid.features = read_features(paths.valid_features);
    b.valid.labels = read_labels(paths.valid_labels);
    if (paths.valid_weak_labels) b.valid_weak_labels = read_weak_labels(*paths.valid_weak_labels);
    if (paths.test_features) {
        b.test = LabeledSet{read_features(*paths.test_features), read_labels(*paths.test_labels)};
    }
    b.validate();
    return b;
}

SplitBundle load_bundle(const Manifest& manifest) {
    return load_bundle(manifest.paths, TaskSpec{manifest.num_classes, kAbstain});
}

fs::path save_bundle(const SplitBundle& bundle, const fs::path& dir, const ManifestConfig& config) {
    fs::create_directories(dir);
    write_features_csv(dir / "train_features.csv", bundle.train_features);
    write_weak_labels(dir / "weak_labels.csv", bundle.weak_labels);
    write_features_csv(dir / "valid_features.csv", bundle.valid.features);
    write_labels(dir / "valid_labels.csv", bundle.valid.labels);
    nlohmann::ordered_json doc;
    doc["train"] = "train_features.csv";
    doc["weak_labels"] = "weak_labels.csv";
    doc["valid_features"] = "valid_features.csv";
    doc["valid_labels"] = "valid_labels.csv";
    if (bundle.valid_weak_labels) {
        write_weak_labels(dir / "valid_weak_labels.csv", *bundle.valid_weak_labels);
        doc["valid_weak_labels"] = "valid_weak_labels.csv";
    }
    if (bundle.test) {
        write_features_csv(dir / "test_features.csv", bundle.test->features);
        write_labels(dir / "test_labels.csv", bundle.test->labels);
        doc["test_features"] = "test_features.csv";
        doc["test_labels"] = "test_labels.csv";
    }
    doc["num_classes"] = bundle.spec.num_classes;
    if (config.k) doc["k"] = *config.k;
    if (config.metric) doc["metric"] = std::string(to_string(*config.metric));
    if (config.weighting) doc["weights"] = std::string(to_string(*config.weighting));
    auto manifest = dir / "manifest.json";
    open_out(manifest) << doc.dump(2) << '\n';
    return manifest;
}

std::string fingerprint(const Manifest& manifest) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    auto mix = [&](std::string_view bytes) {
        for (unsigned char c : bytes) {
            hash ^= c;
            hash *= 0x100000001b3ULL;
        }
    };
    auto add = [&](const std::optional<fs::path>& p) {
        mix(p ? read_file(*p) : std::string("<none>"));
        mix(std::string_view("\x1f", 1));
    };
    const auto& p = manifest.paths;
    add(p.train);
    add(p.weak_labels);
    add(p.valid_features);
    add(p.valid_labels);
    add(p.valid_weak_labels);
    add(p.test_features);
    add(p.test_labels);
    mix(std::to_string(manifest.num_classes));
    std::ostringstream hex;
    hex << std::hex << std::setw(16) << std::setfill('0') << hash;
    return hex.str();
}

}  // namespace weshap
