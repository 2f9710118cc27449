#include "sts22_templates.hpp"

namespace qrng::sts22::detail {

// Aperiodic 9-bit templates, MSB-first, ascending.
const std::array<std::uint32_t, 148> kTemplates9 = {
    0b000000001, 0b000000011, 0b000000101, 0b000000111, 0b000001001, 0b000001011, 0b000001101, 0b000001111,
    0b000010001, 0b000010011, 0b000010101, 0b000010111, 0b000011001, 0b000011011, 0b000011101, 0b000011111,
    0b000100011, 0b000100101, 0b000100111, 0b000101001, 0b000101011, 0b000101101, 0b000101111, 0b000110011,
    0b000110101, 0b000110111, 0b000111001, 0b000111011, 0b000111101, 0b000111111, 0b001000011, 0b001000101,
    0b001000111, 0b001001011, 0b001001101, 0b001001111, 0b001010011, 0b001010101, 0b001010111, 0b001011011,
    0b001011101, 0b001011111, 0b001100101, 0b001100111, 0b001101011, 0b001101101, 0b001101111, 0b001110101,
    0b001110111, 0b001111011, 0b001111101, 0b001111111, 0b010000011, 0b010000111, 0b010001011, 0b010001111,
    0b010010011, 0b010010111, 0b010011011, 0b010011111, 0b010100011, 0b010100111, 0b010101011, 0b010101111,
    0b010110011, 0b010110111, 0b010111011, 0b010111111, 0b011000111, 0b011001111, 0b011010111, 0b011011111,
    0b011101111, 0b011111111, 0b100000000, 0b100010000, 0b100100000, 0b100101000, 0b100110000, 0b100111000,
    0b101000000, 0b101000100, 0b101001000, 0b101001100, 0b101010000, 0b101010100, 0b101011000, 0b101011100,
    0b101100000, 0b101100100, 0b101101000, 0b101101100, 0b101110000, 0b101110100, 0b101111000, 0b101111100,
    0b110000000, 0b110000010, 0b110000100, 0b110001000, 0b110001010, 0b110010000, 0b110010010, 0b110010100,
    0b110011000, 0b110011010, 0b110100000, 0b110100010, 0b110100100, 0b110101000, 0b110101010, 0b110101100,
    0b110110000, 0b110110010, 0b110110100, 0b110111000, 0b110111010, 0b110111100, 0b111000000, 0b111000010,
    0b111000100, 0b111000110, 0b111001000, 0b111001010, 0b111001100, 0b111010000, 0b111010010, 0b111010100,
    0b111010110, 0b111011000, 0b111011010, 0b111011100, 0b111100000, 0b111100010, 0b111100100, 0b111100110,
    0b111101000, 0b111101010, 0b111101100, 0b111101110, 0b111110000, 0b111110010, 0b111110100, 0b111110110,
    0b111111000, 0b111111010, 0b111111100, 0b111111110,
};

}  // namespace qrng::sts22::detail
