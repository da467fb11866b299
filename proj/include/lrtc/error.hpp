#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lrtc {

/// Broad failure classes. The CLI maps these onto process exit codes.
enum class ErrorClass {
    kConfig,      // exit 2
    kDependency,  // exit 3
    kData,        // exit 4
};

class Error : public std::runtime_error {
   public:
    Error(ErrorClass cls, const std::string &what) : std::runtime_error(what), cls_(cls) {}
    ErrorClass error_class() const noexcept { return cls_; }

   private:
    ErrorClass cls_;
};

#define LRTC_DEFINE_ERROR(Name, Class)                                      \
    class Name : public Error {                                              \
       public:                                                               \
        explicit Name(const std::string &what) : Error(Class, #Name ": " + what) {} \
    }

// corpus
LRTC_DEFINE_ERROR(EncodingError, ErrorClass::kData);
LRTC_DEFINE_ERROR(LanguageError, ErrorClass::kData);
LRTC_DEFINE_ERROR(InvalidDataset, ErrorClass::kData);
// segment
LRTC_DEFINE_ERROR(GranularityError, ErrorClass::kConfig);
LRTC_DEFINE_ERROR(LexiconRequired, ErrorClass::kConfig);
// bpe / word2vec / mlm
LRTC_DEFINE_ERROR(EmptyCorpus, ErrorClass::kData);
LRTC_DEFINE_ERROR(UnknownWord, ErrorClass::kData);
LRTC_DEFINE_ERROR(LengthError, ErrorClass::kData);
LRTC_DEFINE_ERROR(VocabError, ErrorClass::kData);
// numerics
LRTC_DEFINE_ERROR(ShapeError, ErrorClass::kData);
LRTC_DEFINE_ERROR(UndefinedLoss, ErrorClass::kData);
// classify
LRTC_DEFINE_ERROR(InvalidLabelSet, ErrorClass::kConfig);
LRTC_DEFINE_ERROR(EmptyDataset, ErrorClass::kData);
LRTC_DEFINE_ERROR(InputError, ErrorClass::kData);
// configuration / pipeline
LRTC_DEFINE_ERROR(ConfigError, ErrorClass::kConfig);
LRTC_DEFINE_ERROR(StageDependencyError, ErrorClass::kDependency);

#undef LRTC_DEFINE_ERROR

/// A malformed record in a line-oriented file. `line()` is 1-based.
class ParseError : public Error {
   public:
    ParseError(std::size_t line, const std::string &what)
        : Error(ErrorClass::kData, "ParseError(line " + std::to_string(line) + "): " + what),
          line_(line) {}
    std::size_t line() const noexcept { return line_; }

   private:
    std::size_t line_;
};

inline int exit_code_for(const Error &e) {
    switch (e.error_class()) {
        case ErrorClass::kConfig:
            return 2;
        case ErrorClass::kDependency:
            return 3;
        case ErrorClass::kData:
            return 4;
    }
    return 1;
}

}  // namespace lrtc
