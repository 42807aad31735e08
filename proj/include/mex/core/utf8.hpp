#pragma once

#include <string>
#include <string_view>

namespace mex::utf8 {

// Decodes UTF-8 into code points. Throws mex::Error on invalid input.
std::u32string decode(std::string_view bytes);

std::string encode(std::u32string_view cps);
std::string encode(char32_t cp);

bool is_valid(std::string_view bytes);

// Character classes used by the tokenizer.
bool is_space(char32_t c);
bool is_alnum(char32_t c);
bool is_digit(char32_t c);
bool is_upper(char32_t c);

}  // namespace mex::utf8
