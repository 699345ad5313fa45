#pragma once

// Maps JSON pointers ("/cells/3/0") to the 1-based source line where the value
// starts. nlohmann/json does not keep source positions, so validation errors
// use this index to point at the offending line.

#include <cctype>
#include <map>
#include <string>
#include <string_view>

namespace polyflow {

class JsonLineIndex {
public:
    JsonLineIndex() = default;

    explicit JsonLineIndex(std::string_view text) : text_(text)
    {
        skip_ws();
        if (pos_ < text_.size()) value("");
        text_ = {};
    }

    /// Line of the value at `pointer`, falling back to the nearest ancestor.
    int line_of(std::string pointer) const
    {
        while (true) {
            if (auto it = lines_.find(pointer); it != lines_.end()) return it->second;
            if (pointer.empty()) return 1;
            pointer.erase(pointer.rfind('/'));
        }
    }

private:
    void skip_ws()
    {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) {
            if (text_[pos_] == '\n') ++line_;
            ++pos_;
        }
    }

    std::string string_token()
    {
        std::string out;
        ++pos_;
        while (pos_ < text_.size() && text_[pos_] != '"') {
            if (text_[pos_] == '\\' && pos_ + 1 < text_.size()) ++pos_;
            if (text_[pos_] == '\n') ++line_;
            out += text_[pos_++];
        }
        ++pos_;
        return out;
    }

    void value(const std::string& pointer)
    {
        skip_ws();
        if (pos_ >= text_.size()) return;
        lines_.emplace(pointer, line_);
        char c = text_[pos_];
        if (c == '{') {
            ++pos_;
            while (true) {
                skip_ws();
                if (pos_ >= text_.size() || text_[pos_] == '}') break;
                if (text_[pos_] != '"') return;
                std::size_t before = pos_;
                std::string key = string_token();
                skip_ws();
                if (pos_ < text_.size() && text_[pos_] == ':') ++pos_;
                value(pointer + "/" + key);
                skip_ws();
                if (pos_ < text_.size() && text_[pos_] == ',') ++pos_;
                if (pos_ == before) return;
            }
            ++pos_;
        } else if (c == '[') {
            ++pos_;
            for (int i = 0;; ++i) {
                skip_ws();
                if (pos_ >= text_.size() || text_[pos_] == ']') break;
                std::size_t before = pos_;
                value(pointer + "/" + std::to_string(i));
                skip_ws();
                if (pos_ < text_.size() && text_[pos_] == ',') ++pos_;
                // Malformed input: stop instead of spinning on a stray token.
                if (pos_ == before) return;
            }
            ++pos_;
        } else if (c == '"') {
            string_token();
        } else {
            while (pos_ < text_.size() && text_[pos_] != ',' && text_[pos_] != '}' && text_[pos_] != ']' &&
                   !std::isspace(static_cast<unsigned char>(text_[pos_])))
                ++pos_;
        }
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    int line_ = 1;
    std::map<std::string, int> lines_;
};

}  // namespace polyflow
