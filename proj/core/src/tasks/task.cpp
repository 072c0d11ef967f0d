#include "qrnn/tasks/task.hpp"

namespace qrnn {

std::vector<Word> split_label_words(unsigned value, unsigned total_bits,
                                    unsigned io_bits) {
    std::vector<Word> words;
    for (unsigned low = 0; low < total_bits; low += io_bits) {
        Word w = 0;
        for (unsigned b = 0; b < io_bits && low + b < total_bits; ++b)
            w |= ((Word{value} >> (low + b)) & 1) << b;
        words.push_back(w);
    }
    return words;
}

} // namespace qrnn
