"""Constants of the seven-qubit CSS code.

Bit conventions: code position ``i`` (0-based) is character ``i`` of a
codeword string and bit ``i`` of its integer form.  Every parity-0 codeword
has even weight, every parity-1 codeword odd weight, and positions {4, 5, 6}
alone already carry the logical parity in every codeword.
"""

import numpy as np

CODEWORDS_0 = (
    "0000000",
    "1111000",
    "1100110",
    "1010101",
    "0011110",
    "0101101",
    "0110011",
    "1001011",
)
CODEWORDS_1 = tuple(
    "".join("1" if c == "0" else "0" for c in w) for w in CODEWORDS_0
)

# X- and Z-type stabilizer generators share these supports (self-dual CSS)
GENERATOR_SUPPORTS = ((0, 1, 2, 3), (0, 1, 4, 5), (0, 2, 4, 6))

PARITY_POSITIONS = (4, 5, 6)  # the P2/P3 positions used for parity readout


def word_to_int(word: str) -> int:
    return sum(int(c) << i for i, c in enumerate(word))


# CODEWORD_INTS[parity] is the uint64 array of that parity's eight codewords
CODEWORD_INTS = np.array(
    [
        [word_to_int(w) for w in CODEWORDS_0],
        [word_to_int(w) for w in CODEWORDS_1],
    ],
    dtype=np.uint64,
)
