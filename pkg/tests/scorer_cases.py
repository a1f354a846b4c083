"""Hand-scored cases for the entity scorer: (name, gold, pred, tp, fp, fn, correct words)."""

from fractions import Fraction

O = "O"

CASES = [
    ("identical", [["B-PER", "I-PER", O, "B-LOC"]], [["B-PER", "I-PER", O, "B-LOC"]], 2, 0, 0, 4),
    ("type swap on one span", [["B-PER", "I-PER", O, "B-LOC"]],
     [["B-PER", "I-PER", O, "B-ORG"]], 1, 1, 1, 3),
    # 10 words, one gold entity word, prediction all O: F1 0, accuracy 0.9
    ("all O prediction", [[O] * 4 + ["B-LOC"] + [O] * 5], [[O] * 10], 0, 0, 1, 9),
    ("no entities anywhere", [[O, O, O]], [[O, O, O]], 0, 0, 0, 3),
    ("truncated span", [["B-PER", "I-PER", O]], [["B-PER", O, O]], 0, 1, 1, 2),
    ("type error only", [["B-ORG", "I-ORG"]], [["B-LOC", "I-LOC"]], 0, 1, 1, 0),
    ("spurious extra span", [["B-PER", O, O]], [["B-PER", O, "B-LOC"]], 1, 1, 0, 2),
    ("missed second span", [["B-PER", O, "B-LOC"]], [["B-PER", O, O]], 1, 0, 1, 2),
    ("split by adjacent B", [["B-LOC", "I-LOC"]], [["B-LOC", "B-LOC"]], 0, 2, 1, 1),
    ("micro over sentences", [["B-PER"], ["B-LOC", O]], [["B-PER"], [O, "B-LOC"]], 1, 1, 1, 1),
    ("over-extended span", [["B-ORG", O]], [["B-ORG", "I-ORG"]], 0, 1, 1, 1),
    ("mixed three sentences",
     [["B-PER", "I-PER", O], [O, "B-LOC"], ["B-ORG", O, "B-PER"]],
     [["B-PER", "I-PER", O], ["B-LOC", O], ["B-ORG", O, O]], 2, 1, 2, 5),
]


def expected(tp, fp, fn, correct, words):
    """(P, R, F1, accuracy) as exact fractions; undefined ratios are 0."""
    p = Fraction(tp, tp + fp) if tp + fp else Fraction(0)
    r = Fraction(tp, tp + fn) if tp + fn else Fraction(0)
    f = 2 * p * r / (p + r) if p + r else Fraction(0)
    return p, r, f, Fraction(correct, words)
