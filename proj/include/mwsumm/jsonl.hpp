#pragma once

#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mwsumm/errors.hpp"

namespace mwsumm {

// Inter-stage files are JSON lines. The first line is a header object
// {"schema": <name>, "version": <int>}; every following line is one record.
struct JsonlHeader {
    std::string schema;
    int version = 1;
};

class JsonlWriter {
  public:
    JsonlWriter(const std::string& path, const std::string& schema,
                int version = 1)
        : out_(path) {
        if (!out_) throw IoError("cannot open for writing: " + path);
        nlohmann::json header{{"schema", schema}, {"version", version}};
        out_ << header.dump() << '\n';
    }

    void write(const nlohmann::json& record) {
        out_ << record.dump() << '\n';
        if (!out_) throw IoError("write failed");
    }

    void flush() { out_.flush(); }

  private:
    std::ofstream out_;
};

class JsonlReader {
  public:
    explicit JsonlReader(const std::string& path) : in_(path), path_(path) {
        if (!in_) throw IoError("cannot open for reading: " + path);
        std::string first;
        if (std::getline(in_, first)) {
            ++line_no_;
            nlohmann::json j = parse_line(first);
            if (j.is_object() && j.contains("schema")) {
                header_ = JsonlHeader{j.at("schema").get<std::string>(),
                                      j.value("version", 1)};
            } else {
                pending_ = std::move(j);
            }
        }
    }

    const std::optional<JsonlHeader>& header() const { return header_; }

    // Next record, or nullopt at end of file. Blank lines are skipped.
    std::optional<nlohmann::json> next() {
        if (pending_) {
            auto j = std::move(*pending_);
            pending_.reset();
            return j;
        }
        std::string line;
        while (std::getline(in_, line)) {
            ++line_no_;
            if (line.empty()) continue;
            return parse_line(line);
        }
        return std::nullopt;
    }

    std::size_t line_number() const { return line_no_; }

    template <typename T>
    std::vector<T> read_all() {
        std::vector<T> out;
        while (auto j = next()) out.push_back(j->get<T>());
        return out;
    }

  private:
    nlohmann::json parse_line(const std::string& line) {
        try {
            return nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw IoError(path_ + ":" + std::to_string(line_no_) +
                          ": invalid JSON: " + e.what());
        }
    }

    std::ifstream in_;
    std::string path_;
    std::size_t line_no_ = 0;
    std::optional<nlohmann::json> pending_;
    std::optional<JsonlHeader> header_;
};

template <typename T>
std::vector<T> read_jsonl(const std::string& path) {
    JsonlReader reader(path);
    return reader.template read_all<T>();
}

template <typename T>
void write_jsonl(const std::string& path, const std::string& schema,
                 const std::vector<T>& records, int version = 1) {
    JsonlWriter writer(path, schema, version);
    for (const auto& r : records) writer.write(nlohmann::json(r));
}

}  // namespace mwsumm
