#pragma once

#include <cctype>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <zlib.h>

#include "mwsumm/errors.hpp"
#include "mwsumm/records.hpp"

namespace mwsumm {

namespace detail {

// Buffered reader over zlib's gzFile, which transparently handles both
// gzip-compressed and plain files.
class GzInput {
  public:
    explicit GzInput(const std::string& path) {
        file_ = gzopen(path.c_str(), "rb");
        if (file_ == nullptr) throw IoError("cannot open dump: " + path);
        gzbuffer(file_, 1 << 18);
    }

    ~GzInput() {
        if (file_ != nullptr) gzclose(file_);
    }

    GzInput(const GzInput&) = delete;
    GzInput& operator=(const GzInput&) = delete;

    // Next byte, or -1 at end of input.
    int get() {
        if (pos_ == len_ && !refill()) return -1;
        ++offset_;
        return static_cast<unsigned char>(buffer_[pos_++]);
    }

    std::uint64_t offset() const { return offset_; }

  private:
    bool refill() {
        int n = gzread(file_, buffer_, sizeof(buffer_));
        if (n < 0) {
            int errnum = 0;
            const char* msg = gzerror(file_, &errnum);
            throw IoError("dump read failed: " + std::string(msg));
        }
        pos_ = 0;
        len_ = static_cast<std::size_t>(n);
        return len_ > 0;
    }

    gzFile file_ = nullptr;
    char buffer_[1 << 16];
    std::size_t pos_ = 0;
    std::size_t len_ = 0;
    std::uint64_t offset_ = 0;
};

struct XmlEvent {
    enum class Type { start, end, text, eof };
    Type type = Type::eof;
    std::string name;
    std::map<std::string, std::string> attributes;
    std::string text;
};

// Minimal streaming XML pull scanner: elements, attributes, character data
// with entity decoding, comments, CDATA, and processing instructions. This
// covers the MediaWiki export schema; it is not a general XML parser.
class XmlScanner {
  public:
    explicit XmlScanner(const std::string& path) : in_(path) {}

    XmlEvent next() {
        if (!queued_.empty()) {
            XmlEvent e = std::move(queued_.front());
            queued_.pop_front();
            return e;
        }
        std::string text;
        while (true) {
            int c = peek();
            if (c < 0) {
                if (!text.empty()) return text_event(std::move(text));
                if (!stack_.empty())
                    fail("unexpected end of file inside <" + stack_.back() + ">");
                return XmlEvent{};
            }
            if (c != '<') {
                text += read_char_data();
                continue;
            }
            if (!text.empty()) return text_event(std::move(text));
            return read_markup();
        }
    }

    std::uint64_t offset() const { return in_.offset(); }

  private:
    XmlEvent text_event(std::string text) {
        XmlEvent e;
        e.type = XmlEvent::Type::text;
        e.text = std::move(text);
        return e;
    }

    [[noreturn]] void fail(const std::string& message) {
        throw MalformedXmlError(message, in_.offset());
    }

    int peek() {
        if (!has_peek_) {
            peek_ = in_.get();
            has_peek_ = true;
        }
        return peek_;
    }

    int get() {
        int c = peek();
        has_peek_ = false;
        return c;
    }

    void expect(char c) {
        int g = get();
        if (g != c)
            fail(std::string("expected '") + c + "'");
    }

    bool consume_if(const std::string& literal) {
        // Only called when the next bytes are known to start with '<'; the
        // scanner never needs to back up more than the single peek slot.
        for (char c : literal) {
            if (peek() != c) return false;
            get();
        }
        return true;
    }

    void skip_until(const std::string& terminator) {
        std::size_t matched = 0;
        while (matched < terminator.size()) {
            int c = get();
            if (c < 0) fail("unexpected end of file");
            if (static_cast<char>(c) == terminator[matched])
                ++matched;
            else
                matched = static_cast<char>(c) == terminator[0] ? 1 : 0;
        }
    }

    static bool is_name_char(int c) {
        return c > 0 && (std::isalnum(c) != 0 || c == '_' || c == '-' ||
                         c == ':' || c == '.');
    }

    std::string read_name() {
        std::string name;
        while (is_name_char(peek())) name.push_back(static_cast<char>(get()));
        if (name.empty()) fail("expected an XML name");
        return name;
    }

    void skip_space() {
        while (peek() == ' ' || peek() == '\t' || peek() == '\n' || peek() == '\r')
            get();
    }

    std::string read_entity() {
        std::string entity;
        while (peek() != ';') {
            int c = get();
            if (c < 0 || entity.size() > 12) fail("unterminated entity");
            entity.push_back(static_cast<char>(c));
        }
        get();  // ';'
        if (entity == "amp") return "&";
        if (entity == "lt") return "<";
        if (entity == "gt") return ">";
        if (entity == "quot") return "\"";
        if (entity == "apos") return "'";
        if (!entity.empty() && entity[0] == '#') {
            long code = 0;
            try {
                code = entity[1] == 'x' || entity[1] == 'X'
                           ? std::stol(entity.substr(2), nullptr, 16)
                           : std::stol(entity.substr(1));
            } catch (...) {
                fail("bad character reference &" + entity + ";");
            }
            return encode_utf8(code);
        }
        return "&" + entity + ";";  // unknown entity, kept literally
    }

    static std::string encode_utf8(long code) {
        std::string out;
        if (code < 0x80) {
            out.push_back(static_cast<char>(code));
        } else if (code < 0x800) {
            out.push_back(static_cast<char>(0xC0 | (code >> 6)));
            out.push_back(static_cast<char>(0x80 | (code & 0x3F)));
        } else if (code < 0x10000) {
            out.push_back(static_cast<char>(0xE0 | (code >> 12)));
            out.push_back(static_cast<char>(0x80 | ((code >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (code & 0x3F)));
        } else {
            out.push_back(static_cast<char>(0xF0 | (code >> 18)));
            out.push_back(static_cast<char>(0x80 | ((code >> 12) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | ((code >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (code & 0x3F)));
        }
        return out;
    }

    std::string read_char_data() {
        int c = get();
        if (c == '&') return read_entity();
        return std::string(1, static_cast<char>(c));
    }

    XmlEvent read_markup() {
        expect('<');
        int c = peek();
        if (c == '?') {
            skip_until("?>");
            return next();
        }
        if (c == '!') {
            get();
            if (consume_if("--")) {
                skip_until("-->");
                return next();
            }
            if (consume_if("[CDATA[")) {
                std::string text;
                while (true) {
                    int ch = get();
                    if (ch < 0) fail("unterminated CDATA section");
                    text.push_back(static_cast<char>(ch));
                    if (text.size() >= 3 && text.compare(text.size() - 3, 3, "]]>") == 0) {
                        text.resize(text.size() - 3);
                        return text_event(std::move(text));
                    }
                }
            }
            skip_until(">");  // DOCTYPE and friends
            return next();
        }
        if (c == '/') {
            get();
            std::string name = read_name();
            skip_space();
            expect('>');
            if (stack_.empty() || stack_.back() != name)
                fail("mismatched closing tag </" + name + ">");
            stack_.pop_back();
            XmlEvent e;
            e.type = XmlEvent::Type::end;
            e.name = std::move(name);
            return e;
        }

        XmlEvent e;
        e.type = XmlEvent::Type::start;
        e.name = read_name();
        while (true) {
            skip_space();
            int ch = peek();
            if (ch < 0) fail("unexpected end of file inside a tag");
            if (ch == '>') {
                get();
                stack_.push_back(e.name);
                return e;
            }
            if (ch == '/') {
                get();
                expect('>');
                XmlEvent end;
                end.type = XmlEvent::Type::end;
                end.name = e.name;
                queued_.push_back(std::move(end));
                return e;
            }
            std::string attr = read_name();
            skip_space();
            expect('=');
            skip_space();
            int quote = get();
            if (quote != '"' && quote != '\'') fail("attribute value must be quoted");
            std::string value;
            while (peek() != quote) {
                int vc = peek();
                if (vc < 0) fail("unterminated attribute value");
                value += read_char_data();
            }
            get();  // closing quote
            e.attributes.emplace(std::move(attr), std::move(value));
        }
    }

    GzInput in_;
    bool has_peek_ = false;
    int peek_ = -1;
    std::vector<std::string> stack_;
    std::deque<XmlEvent> queued_;
};

}  // namespace detail

// Streams consecutive revision pairs from a pages-meta-history export
// (plain or gzip). One revision is held in memory at a time plus the
// previous revision's text, so memory use is constant in dump size.
// Pairs touching a deleted-text revision are skipped and counted.
class DumpReader {
  public:
    explicit DumpReader(const std::string& path) : scanner_(path) {}

    std::optional<CollectedEdit> next() {
        while (true) {
            detail::XmlEvent event = scanner_.next();
            switch (event.type) {
                case detail::XmlEvent::Type::eof:
                    return std::nullopt;
                case detail::XmlEvent::Type::start:
                    path_.push_back(event.name);
                    pending_text_.clear();
                    if (event.name == "page") {
                        page_title_.clear();
                        have_previous_ = false;
                    } else if (event.name == "revision") {
                        current_ = Revision{};
                    } else if (event.name == "text" &&
                               event.attributes.count("deleted") > 0) {
                        current_.text_deleted = true;
                    } else if (event.name == "comment" &&
                               event.attributes.count("deleted") > 0) {
                        current_.comment_deleted = true;
                    }
                    break;
                case detail::XmlEvent::Type::text:
                    pending_text_ += event.text;
                    break;
                case detail::XmlEvent::Type::end: {
                    std::optional<CollectedEdit> produced = handle_end(event.name);
                    path_.pop_back();
                    pending_text_.clear();
                    if (produced) return produced;
                    break;
                }
            }
        }
    }

    std::uint64_t skipped_pairs() const { return skipped_pairs_; }

  private:
    struct Revision {
        std::int64_t id = 0;
        std::int64_t parent_id = 0;
        std::string timestamp;
        std::string comment;
        std::string text;
        std::string editor;
        bool anonymous = false;
        bool text_deleted = false;
        bool comment_deleted = false;
        std::set<std::string> tags;
    };

    bool in(const char* parent) const {
        return path_.size() >= 2 && path_[path_.size() - 2] == parent;
    }

    std::int64_t parse_id(const std::string& element) {
        try {
            return std::stoll(pending_text_);
        } catch (const std::exception&) {
            throw MalformedXmlError("non-numeric <" + element + ">",
                                    scanner_.offset());
        }
    }

    std::optional<CollectedEdit> handle_end(const std::string& name) {
        if (name == "title" && in("page")) {
            page_title_ = pending_text_;
        } else if (name == "id" && in("revision")) {
            current_.id = parse_id(name);
        } else if (name == "parentid" && in("revision")) {
            current_.parent_id = parse_id(name);
        } else if (name == "timestamp" && in("revision")) {
            current_.timestamp = pending_text_;
        } else if (name == "comment" && in("revision")) {
            if (!current_.comment_deleted) current_.comment = pending_text_;
        } else if (name == "text" && in("revision")) {
            if (!current_.text_deleted) current_.text = pending_text_;
        } else if (name == "username" && in("contributor")) {
            current_.editor = pending_text_;
            current_.anonymous = false;
        } else if (name == "ip" && in("contributor")) {
            current_.editor = pending_text_;
            current_.anonymous = true;
        } else if (name == "tag" && in("tags")) {
            current_.tags.insert(pending_text_);
        } else if (name == "revision") {
            return finish_revision();
        } else if (name == "page") {
            have_previous_ = false;
        }
        return std::nullopt;
    }

    std::optional<CollectedEdit> finish_revision() {
        std::optional<CollectedEdit> produced;
        if (have_previous_) {
            if (previous_.text_deleted || current_.text_deleted) {
                ++skipped_pairs_;
            } else {
                CollectedEdit edit;
                edit.edit.revision_id = current_.id;
                edit.edit.parent_revision_id =
                    current_.parent_id != 0 ? current_.parent_id : previous_.id;
                edit.edit.page_title = page_title_;
                edit.edit.editor_name = current_.editor;
                edit.edit.editor_is_anonymous = current_.anonymous;
                edit.edit.summary_raw = current_.comment;
                edit.edit.timestamp = current_.timestamp;
                edit.edit.tags = current_.tags;
                edit.texts.old_text = previous_.text;
                edit.texts.new_text = current_.text;
                produced = std::move(edit);
            }
        }
        previous_ = std::move(current_);
        have_previous_ = true;
        return produced;
    }

    detail::XmlScanner scanner_;
    std::vector<std::string> path_;
    std::string pending_text_;
    std::string page_title_;
    Revision current_;
    Revision previous_;
    bool have_previous_ = false;
    std::uint64_t skipped_pairs_ = 0;
};

}  // namespace mwsumm
