"""Built-in algebras (the worked examples) and their expected values."""
from __future__ import annotations

from fractions import Fraction
from math import factorial

from .lie_core import AlgebraSpec, SpecError, spec_from_brackets


def heisenberg() -> AlgebraSpec:
    # Z1, Z2, A1 with [A1, Z2] = Z1
    return spec_from_brackets("heisenberg", 3, 2, {(3, 2): {1: 1}})


def heisenberg_plus_r() -> AlgebraSpec:
    return spec_from_brackets("heisenberg_plus_r", 4, 3, {(4, 2): {1: 1}})


def dim4_step3(name: str = "dim4_step3") -> AlgebraSpec:
    return spec_from_brackets(name, 4, 3, {(4, 2): {1: 2}, (4, 3): {2: 2}})


def example_ex() -> AlgebraSpec:
    # same brackets as the step-three algebra, written [X4, X2] = 2X1, [X4, X3] = 2X2
    return dim4_step3("example_ex")


def remark_5dim_example() -> AlgebraSpec:
    # ad(t1 A1 + t2 A2)|p = [[0, t2, t1], [0, 0, t2], [0, 0, 0]]
    return spec_from_brackets(
        "remark_5dim_example", 5, 3, {(4, 3): {1: 1}, (5, 2): {1: 1}, (5, 3): {2: 1}}
    )


def stepk(m: int) -> AlgebraSpec:
    """p = m + 1 and ad(sum t_k A_k)|p = m! * (upper Toeplitz with t_1..t_m)."""
    if m < 1:
        raise SpecError("stepk needs m >= 1")
    p = m + 1
    f = factorial(m)
    rules = {}
    for k in range(1, m + 1):
        for j in range(k + 1, p + 1):
            rules[(p + k, j)] = {j - k: f}
    return spec_from_brackets(f"stepk_m{m}", 2 * m + 1, p, rules)


def oneparam_p4() -> AlgebraSpec:
    # ad A1|p has superdiagonal (1, 2, 3); exp of it is integral (binomial entries)
    return spec_from_brackets(
        "oneparam_p4", 5, 4, {(5, 2): {1: 1}, (5, 3): {2: 2}, (5, 4): {3: 3}}
    )


def counterexample_5dim() -> AlgebraSpec:
    return spec_from_brackets("counterexample_5dim", 5, 3, {(4, 3): {2: 1}, (5, 3): {1: 1}})


_BUILDERS = {
    "heisenberg": heisenberg,
    "heisenberg_plus_r": heisenberg_plus_r,
    "dim4_step3": dim4_step3,
    "example_ex": example_ex,
    "remark_5dim_example": remark_5dim_example,
    "stepk_m2": lambda: stepk(2),
    "stepk_m3": lambda: stepk(3),
    "stepk_m4": lambda: stepk(4),
    "oneparam_p4": oneparam_p4,
    "counterexample_5dim": counterexample_5dim,
}

# expected values; None marks "not applicable / rejected"
EXPECTED = {
    "heisenberg": {"passed": True, "jump_set": (2, 3), "free": 1, "delta": Fraction(1, 4)},
    "heisenberg_plus_r": {"passed": True, "jump_set": (2, 4), "free": 2, "delta": Fraction(1, 4)},
    "dim4_step3": {"passed": True, "jump_set": (2, 4), "free": 2, "delta": Fraction(1, 10)},
    "example_ex": {"passed": True, "jump_set": (2, 4), "free": 2, "delta": Fraction(1, 10)},
    # exp(ad A2)|p carries the entry 1/2, so the sufficient lattice test fails
    "remark_5dim_example": {"passed": False, "jump_set": (2, 3, 4, 5), "free": 1, "delta": None},
    "stepk_m2": {"passed": True, "jump_set": (2, 3, 4, 5), "free": 1, "delta": Fraction(1, 10)},
    "stepk_m3": {"passed": True, "jump_set": (2, 3, 4, 5, 6, 7), "free": 1, "delta": "positive"},
    "stepk_m4": {"passed": True, "jump_set": (2, 3, 4, 5, 6, 7, 8, 9), "free": 1, "delta": "positive"},
    "oneparam_p4": {"passed": True, "jump_set": (2, 5), "free": 3, "delta": "positive"},
    "counterexample_5dim": {"passed": False, "jump_set": (3, 4), "free": None, "delta": None},
}


def corpus_keys() -> list:
    return list(_BUILDERS)


def get(key: str) -> AlgebraSpec:
    if key in _BUILDERS:
        return _BUILDERS[key]()
    if key.startswith("stepk_m"):
        try:
            m = int(key[len("stepk_m"):])
        except ValueError:
            raise SpecError(f"unknown corpus key {key!r}") from None
        return stepk(m)
    raise SpecError(f"unknown corpus key {key!r}")


def is_corpus_key(key: str) -> bool:
    return key in _BUILDERS or (key.startswith("stepk_m") and key[len("stepk_m"):].isdigit())
