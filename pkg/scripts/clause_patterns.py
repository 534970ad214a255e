"""Top ten asyndetic clause patterns per genre, with percentages.

Only ten patterns are listed, so each genre's grand total is supplied
rather than summed.  The totals below are the only integers that reproduce
every percentage in their column; together they cover 11111 patterns.
"""
from laffab.analysis import ARROW, freq_table

GENRES = ["prose", "poetry", "prophecy"]
GRAND_TOTALS = {"prose": 2931, "poetry": 4085, "prophecy": 4095}
ROWS = [
    ("nominal", "nominal", 429, 493, 328),
    ("imperfect", "imperfect", 371, 544, 332),
    ("perfect", "perfect", 120, 392, 555),
    ("nominal", "imperfect", 232, 250, 244),
    ("perfect", "nominal", 161, 213, 340),
    ("imperfect", "nominal", 116, 328, 249),
    ("perfect", "imperfect", 145, 187, 273),
    ("nominal", "perfect", 145, 204, 242),
    ("imperative", "nominal", 54, 270, 212),
    ("nominal", "imperative", 128, 123, 74),
]


def table():
    counts = {f"{m}{ARROW}{d}": dict(zip(GENRES, per)) for m, d, *per in ROWS}
    return freq_table(counts, GENRES, top=10, grand_totals=GRAND_TOTALS)


if __name__ == "__main__":
    print(table().to_tsv(), end="")
